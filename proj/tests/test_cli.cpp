#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "liprl/run.hpp"
#include "test_util.hpp"

using namespace liprl;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path(testutil::temp_path(name)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("run config validation maps to the config exit code") {
  RunConfig cfg;
  cfg.scenario = "currency";
  cfg.input = "in.csv";
  CHECK_NOTHROW(cfg.validate());

  std::ostringstream out, err;
  RunConfig bad = cfg;
  bad.epsilon = -1.0;
  CHECK(cmd_run(bad, out, err) == exit_config);

  bad = cfg;
  bad.scenario = "unknown";
  CHECK(cmd_run(bad, out, err) == exit_config);

  bad = cfg;
  bad.extension = "nope";
  CHECK(cmd_run(bad, out, err) == exit_config);
}

TEST_CASE("missing input maps to the io exit code") {
  RunConfig cfg;
  cfg.scenario = "currency";
  cfg.input = "definitely_missing.csv";
  cfg.output = testutil::temp_path("never_written.csv");
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, out, err) == exit_io);
  CHECK(err.str().find("definitely_missing") != std::string::npos);
}

TEST_CASE("currency run end to end is byte-reproducible") {
  TempFile input("cli_bars.csv");
  testutil::write_ohlcv_csv(input.path, testutil::synth_ohlcv(20, 555));

  RunConfig cfg;
  cfg.scenario = "currency";
  cfg.input = input.path;
  cfg.seed = 7;
  cfg.actions = 6;

  TempFile out1("cli_rep1.csv"), out2("cli_rep2.csv");
  std::ostringstream o1, o2, err;
  cfg.output = out1.path;
  REQUIRE(cmd_run(cfg, o1, err) == exit_ok);
  cfg.output = out2.path;
  REQUIRE(cmd_run(cfg, o2, err) == exit_ok);

  auto b1 = read_bytes(out1.path);
  CHECK(!b1.empty());
  CHECK(b1 == read_bytes(out2.path));
  CHECK(o1.str().find("cum_realized=") != std::string::npos);

  // the written report replays through the reader
  auto rep = read_report(out1.path, ReportFormat::csv);
  CHECK(rep.config.scenario == "currency");
  CHECK(rep.config.seed == 7);
  CHECK(!rep.steps.empty());
}

TEST_CASE("allocation run writes both reports when dreams are on") {
  TempFile input("cli_prices.csv");
  SynthParams sp;
  sp.n_steps = 90;
  sp.n_products = 4;
  sp.seed = 13;
  write_price_series(synth_market(sp), input.path);

  RunConfig cfg;
  cfg.scenario = "allocation";
  cfg.input = input.path;
  cfg.seed = 13;
  cfg.actions = 12;
  cfg.beta = 0.5;
  cfg.format = "json";
  TempFile out1("cli_alloc.json");
  cfg.output = out1.path;
  std::string real_path = realonly_path(out1.path);

  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg, out, err) == exit_ok);
  auto aug = read_report(out1.path, ReportFormat::json);
  auto real = read_report(real_path, ReportFormat::json);
  std::remove(real_path.c_str());
  CHECK(aug.survival_time.has_value());
  CHECK(real.survival_time.has_value());
  CHECK(aug.config.beta == 0.5);
  CHECK(out.str().find("survival") != std::string::npos);
}

TEST_CASE("realonly companion path keeps the extension") {
  CHECK(realonly_path("dir/report.csv") == "dir/report_realonly.csv");
  CHECK(realonly_path("report") == "report_realonly");
  CHECK(realonly_path("a.b/cd") == "a.b/cd_realonly");
}

TEST_CASE("synth command writes a loadable series") {
  TempFile out1("cli_synth.csv");
  SynthParams p;
  p.n_steps = 40;
  p.n_products = 4;
  p.seed = 1;
  std::ostringstream out, err;
  REQUIRE(cmd_synth(p, out1.path, out, err) == exit_ok);
  auto s = load_price_series(out1.path);
  CHECK(s.n_steps() == 40);
  CHECK(s.n_products() == 4);

  // volatility 0 gives linear paths in the file
  TempFile out2("cli_synth_flat.csv");
  p.volatility = 0.0;
  p.drift = 1.0;
  REQUIRE(cmd_synth(p, out2.path, out, err) == exit_ok);
  auto flat = load_price_series(out2.path);
  CHECK(flat.values[10][0] == 10.0);

  // repeated invocation, same bytes
  TempFile out3("cli_synth_flat2.csv");
  REQUIRE(cmd_synth(p, out3.path, out, err) == exit_ok);
  CHECK(read_bytes(out2.path) == read_bytes(out3.path));

  CHECK(cmd_synth(p, "", out, err) == exit_config);
  SynthParams bad = p;
  bad.n_steps = 1;
  CHECK(cmd_synth(bad, out1.path, out, err) == exit_config);
}

TEST_CASE("defaults match the documented fixed parameters") {
  RunConfig cfg;
  CHECK(cfg.epsilon == 0.1);
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.actions == 30);
  CHECK(cfg.sim_epsilon == 0.5);
  CHECK(cfg.extension == "mcshane");
  SimilarityRewardConfig sim;
  CHECK(sim.frac_experience == 0.9);
  CHECK(sim.draw_total == 30);
  DreamConfig dreams;
  CHECK(dreams.beta == 0.5);
}

TEST_CASE("a report's embedded config and seed replay it bit-identically") {
  TempFile input("cli_replay_prices.csv");
  SynthParams sp;
  sp.n_steps = 80;
  sp.n_products = 4;
  sp.seed = 31;
  write_price_series(synth_market(sp), input.path);

  RunConfig cfg;
  cfg.scenario = "allocation";
  cfg.input = input.path;
  cfg.seed = 5150;
  cfg.actions = 9;
  cfg.beta = 0.25;
  cfg.sim_epsilon = 0.75;
  cfg.epsilon = 0.2;
  TempFile first("cli_replay1.json");
  cfg.format = "json";
  cfg.output = first.path;
  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg, out, err) == exit_ok);
  std::string real1 = realonly_path(first.path);

  // rebuild the run purely from what the report recorded
  auto rep = read_report(first.path, ReportFormat::json);
  RunConfig replay;
  replay.scenario = rep.config.scenario;
  replay.epsilon = rep.config.epsilon;
  replay.extension = rep.config.extension;
  replay.beta = rep.config.beta;
  replay.actions = rep.config.actions;
  replay.sim_epsilon = rep.config.sim_epsilon;
  replay.seed = rep.config.seed;
  replay.input = input.path;
  replay.format = "json";
  TempFile second("cli_replay2.json");
  replay.output = second.path;
  REQUIRE(cmd_run(replay, out, err) == exit_ok);
  std::string real2 = realonly_path(second.path);

  CHECK(read_bytes(second.path) == read_bytes(first.path));
  CHECK(read_bytes(real2) == read_bytes(real1));
  std::remove(real1.c_str());
  std::remove(real2.c_str());
}

TEST_CASE("verify passes clean and fails under an injected constant") {
  std::ostringstream out, err;
  CHECK(cmd_verify(0, false, out, err) == exit_ok);
  CHECK(out.str().find("checks passed") != std::string::npos);

  std::ostringstream vout, verr;
  CHECK(cmd_verify(0, true, vout, verr) == exit_ok);
  CHECK(vout.str().find("mcshane((-1,0)) = -150") != std::string::npos);

  std::ostringstream bout, berr;
  CHECK(cmd_verify(0, false, bout, berr, 1.25) == exit_verify_failed);
  CHECK(bout.str().find("FAIL") != std::string::npos);
}
