#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "liprl/dreams.hpp"
#include "liprl/errors.hpp"
#include "liprl/report.hpp"
#include "liprl/rng.hpp"
#include "liprl/state.hpp"

namespace liprl {

// One daily bar. index is the 1-based position among the accepted rows.
struct OhlcvBar {
  std::size_t index = 0;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

// Reason a bar is unusable, or nullopt when it is fine.
inline std::optional<std::string> check_ohlcv(const OhlcvBar& b) {
  if (!(b.open > 0.0 && b.high > 0.0 && b.low > 0.0 && b.close > 0.0))
    return "prices must be positive";
  if (b.high < std::max(b.open, b.close)) return "high < max(open, close)";
  if (b.low > std::min(b.open, b.close)) return "low > min(open, close)";
  if (b.volume < 0.0) return "volume must be >= 0";
  return std::nullopt;
}

// Per-minute value matrix for a basket of products.
struct PriceSeries {
  std::vector<long long> timestamps;          // strictly increasing
  std::vector<std::vector<double>> values;    // one row per timestamp
  std::string source;

  std::size_t n_steps() const { return values.size(); }
  std::size_t n_products() const {
    return values.empty() ? 0 : values.front().size();
  }
};

struct SynthParams {
  std::size_t n_steps = 800;
  std::size_t n_products = 4;
  double drift = 0.0;
  double volatility = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_steps < 2) throw config_error("SynthParams: n_steps must be >= 2");
    if (n_products < 1)
      throw config_error("SynthParams: n_products must be >= 1");
    if (!(volatility >= 0.0))
      throw config_error("SynthParams: volatility must be >= 0");
  }
};

// Seeded random walk with drift, starting at 0 for every product.
inline PriceSeries synth_market(const SynthParams& p) {
  p.validate();
  Rng rng(derive_seed(p.seed, 0x5d17));
  PriceSeries s;
  s.source = "synthetic:seed=" + std::to_string(p.seed);
  s.timestamps.resize(p.n_steps);
  s.values.assign(p.n_steps, std::vector<double>(p.n_products, 0.0));
  for (std::size_t t = 0; t < p.n_steps; ++t) {
    s.timestamps[t] = static_cast<long long>(t);
    if (t == 0) continue;
    for (std::size_t j = 0; j < p.n_products; ++j)
      s.values[t][j] =
          s.values[t - 1][j] + p.drift + p.volatility * rng.normal();
  }
  return s;
}

// Drops all-zero rows (they are not valid states); reports which indices
// were removed.
struct ZeroFilterResult {
  std::vector<std::vector<double>> kept;
  std::vector<std::size_t> removed;
};

inline ZeroFilterResult filter_zero_states(
    const std::vector<std::vector<double>>& rows) {
  ZeroFilterResult r;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (all_zero(rows[i]))
      r.removed.push_back(i);
    else
      r.kept.push_back(rows[i]);
  }
  return r;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no,
                           const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw io_error("line " + std::to_string(line_no) + ": malformed " +
                   what + " '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, std::size_t line_no,
                           const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw io_error("line " + std::to_string(line_no) + ": malformed " +
                   what + " '" + s + "'");
  return v;
}

// ISO date -> comparable key; structural validation only.
inline long long parse_date_key(const std::string& s, std::size_t line_no) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw io_error("line " + std::to_string(line_no) +
                   ": malformed date '" + s + "' (expected YYYY-MM-DD)");
  auto num = [&](std::size_t pos, std::size_t len) {
    long long v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9')
        throw io_error("line " + std::to_string(line_no) +
                       ": malformed date '" + s + "'");
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  return num(0, 4) * 10000 + num(5, 2) * 100 + num(8, 2);
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

struct OhlcvLoadResult {
  std::vector<OhlcvBar> bars;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // line, reason
};

// CSV loader for daily bars. Header must be
//   date,open,high,low,close,volume
// Structurally broken rows (wrong field count, unparseable numbers or dates)
// and out-of-order dates are errors; parseable rows that violate the bar
// invariants are skipped and reported with their line numbers.
inline OhlcvLoadResult load_ohlcv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_ohlcv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw insufficient_data_error("load_ohlcv: '" + path + "' is empty");
  {
    auto fields = detail::split_csv_line(line);
    const std::vector<std::string> expect{"date", "open",  "high",
                                          "low",  "close", "volume"};
    if (fields != std::vector<std::string>(expect))
      throw io_error("load_ohlcv: '" + path +
                     "': header must be date,open,high,low,close,volume");
  }

  OhlcvLoadResult out;
  long long prev_date = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 6)
      throw io_error("line " + std::to_string(line_no) +
                     ": expected 6 fields, got " + std::to_string(f.size()));
    long long date = detail::parse_date_key(f[0], line_no);
    if (date <= prev_date)
      throw io_error("line " + std::to_string(line_no) +
                     ": dates must be strictly increasing");
    prev_date = date;
    OhlcvBar b;
    b.open = detail::parse_double(f[1], line_no, "open");
    b.high = detail::parse_double(f[2], line_no, "high");
    b.low = detail::parse_double(f[3], line_no, "low");
    b.close = detail::parse_double(f[4], line_no, "close");
    b.volume = detail::parse_double(f[5], line_no, "volume");
    if (auto reason = check_ohlcv(b)) {
      out.rejected.emplace_back(line_no, *reason);
      continue;
    }
    b.index = out.bars.size() + 1;
    out.bars.push_back(b);
  }
  if (out.bars.empty())
    throw insufficient_data_error("load_ohlcv: '" + path +
                                  "' has no usable rows");
  return out;
}

// Value-matrix CSV: header t,p1,...,pN; used by the synth command and the
// allocation scenario.
inline void write_price_series(const PriceSeries& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("write_price_series: cannot open '" + path + "'");
  out << "t";
  for (std::size_t j = 0; j < s.n_products(); ++j) out << ",p" << (j + 1);
  out << "\n";
  for (std::size_t t = 0; t < s.n_steps(); ++t) {
    out << s.timestamps[t];
    for (double v : s.values[t]) out << ',' << detail::fmt_double(v);
    out << "\n";
  }
  if (!out) throw io_error("write_price_series: write failed on '" + path + "'");
}

inline PriceSeries load_price_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_price_series: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw insufficient_data_error("load_price_series: '" + path +
                                  "' is empty");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "t")
    throw io_error("load_price_series: '" + path +
                   "': header must be t,p1,...,pN");
  const std::size_t n_products = header.size() - 1;

  PriceSeries s;
  s.source = "file:" + path;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != n_products + 1)
      throw io_error("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(n_products + 1) + " fields");
    long long t = detail::parse_int(f[0], line_no, "timestamp");
    if (!s.timestamps.empty() && t <= s.timestamps.back())
      throw io_error("line " + std::to_string(line_no) +
                     ": timestamps must be strictly increasing");
    s.timestamps.push_back(t);
    std::vector<double> row(n_products);
    for (std::size_t j = 0; j < n_products; ++j)
      row[j] = detail::parse_double(f[j + 1], line_no, "value");
    s.values.push_back(std::move(row));
  }
  if (s.values.size() < 2)
    throw insufficient_data_error("load_price_series: '" + path +
                                  "' needs at least 2 rows");
  return s;
}

// Training-set export with a provenance column: real entries pass through,
// dream rows carry the indices of their two parents. Vector fields are
// joined with '|'.
inline void write_augmented_set(const AugmentedSet& set,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error("write_augmented_set: cannot open '" + path + "'");
  auto put_vec = [&](std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << '|';
      out << detail::fmt_double(v[i]);
    }
  };
  out << "provenance,state,reward,action,parent_i,parent_j\n";
  for (const auto& e : set.real_states) {
    out << "real,";
    put_vec(e.state.span());
    out << ',' << detail::fmt_double(e.value) << ',';
    put_vec(e.action.span());
    out << ",,\n";
  }
  for (const auto& d : set.dream_states) {
    out << "dream,";
    put_vec(d.state.span());
    out << ',' << detail::fmt_double(d.reward) << ',';
    put_vec(d.action.span());
    out << ',' << d.parent_i << ',' << d.parent_j << "\n";
  }
  if (!out)
    throw io_error("write_augmented_set: write failed on '" + path + "'");
}

// ---- report serialization ----------------------------------------------

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw config_error("unknown report format '" + s + "' (csv|json)");
}

inline nlohmann::json config_to_json(const ConfigSnapshot& c) {
  return nlohmann::json{{"scenario", c.scenario},
                        {"epsilon", c.epsilon},
                        {"extension", c.extension},
                        {"beta", c.beta},
                        {"actions", c.actions},
                        {"sim_epsilon", c.sim_epsilon},
                        {"frac_experience", c.frac_experience},
                        {"top_quantile", c.top_quantile},
                        {"draw_total", c.draw_total},
                        {"noise_scale", c.noise_scale},
                        {"initial_capital", c.initial_capital}};
}

inline ConfigSnapshot config_from_json(const nlohmann::json& j) {
  ConfigSnapshot c;
  c.scenario = j.at("scenario").get<std::string>();
  c.epsilon = j.at("epsilon").get<double>();
  c.extension = j.at("extension").get<std::string>();
  c.beta = j.at("beta").get<double>();
  c.actions = j.at("actions").get<int>();
  c.sim_epsilon = j.at("sim_epsilon").get<double>();
  c.frac_experience = j.at("frac_experience").get<double>();
  c.top_quantile = j.at("top_quantile").get<double>();
  c.draw_total = j.at("draw_total").get<int>();
  c.noise_scale = j.at("noise_scale").get<double>();
  c.initial_capital = j.at("initial_capital").get<double>();
  return c;
}

inline nlohmann::json report_to_json(const BacktestReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"step", s.step},
                     {"action", s.action},
                     {"predicted", s.predicted},
                     {"realized", s.realized},
                     {"optimal", s.optimal},
                     {"cum_realized", s.cum_realized},
                     {"cum_optimal", s.cum_optimal}});
  }
  nlohmann::json j{{"meta",
                    {{"seed", r.config.seed},
                     {"config", config_to_json(r.config)}}},
                   {"steps", steps}};
  if (r.survival_time)
    j["survival_time"] = *r.survival_time;
  else
    j["survival_time"] = nullptr;
  return j;
}

inline BacktestReport report_from_json(const nlohmann::json& j) {
  BacktestReport r;
  r.config = config_from_json(j.at("meta").at("config"));
  r.config.seed = j.at("meta").at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("steps")) {
    StepRecord rec;
    rec.step = s.at("step").get<long long>();
    rec.action = s.at("action").get<std::vector<double>>();
    rec.predicted = s.at("predicted").get<double>();
    rec.realized = s.at("realized").get<double>();
    rec.optimal = s.at("optimal").get<double>();
    rec.cum_realized = s.at("cum_realized").get<double>();
    rec.cum_optimal = s.at("cum_optimal").get<double>();
    r.steps.push_back(std::move(rec));
  }
  if (!j.at("survival_time").is_null())
    r.survival_time = j.at("survival_time").get<long long>();
  return r;
}

// CSV layout: '#' meta lines (seed, config, survival_time), then the header
//   step,action,predicted,realized,optimal,cum_realized,cum_optimal
// Action coordinates are joined with '|'. Reals are written with 17
// significant digits so reading the file back reproduces the report exactly.
inline void write_report(const BacktestReport& r, const std::string& path,
                         ReportFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("write_report: cannot open '" + path + "'");
  if (fmt == ReportFormat::json) {
    out << report_to_json(r).dump(2) << "\n";
  } else {
    out << "# liprl report\n";
    out << "# seed=" << r.config.seed << "\n";
    out << "# config=" << config_to_json(r.config).dump() << "\n";
    out << "# survival_time="
        << (r.survival_time ? std::to_string(*r.survival_time) : "none")
        << "\n";
    out << "step,action,predicted,realized,optimal,cum_realized,cum_optimal\n";
    for (const auto& s : r.steps) {
      out << s.step << ',';
      for (std::size_t i = 0; i < s.action.size(); ++i) {
        if (i) out << '|';
        out << detail::fmt_double(s.action[i]);
      }
      out << ',' << detail::fmt_double(s.predicted) << ','
          << detail::fmt_double(s.realized) << ','
          << detail::fmt_double(s.optimal) << ','
          << detail::fmt_double(s.cum_realized) << ','
          << detail::fmt_double(s.cum_optimal) << "\n";
    }
  }
  if (!out) throw io_error("write_report: write failed on '" + path + "'");
}

inline BacktestReport read_report(const std::string& path, ReportFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("read_report: cannot open '" + path + "'");
  if (fmt == ReportFormat::json) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw io_error("read_report: '" + path + "': " + e.what());
    }
    return report_from_json(j);
  }

  BacktestReport r;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(2, eq - 2);
      auto val = line.substr(eq + 1);
      try {
        if (key == "seed")
          r.config.seed = std::stoull(val);
        else if (key == "config") {
          auto seed = r.config.seed;
          r.config = config_from_json(nlohmann::json::parse(val));
          r.config.seed = seed;
        } else if (key == "survival_time" && val != "none")
          r.survival_time = std::stoll(val);
      } catch (const std::exception& e) {
        throw io_error("read_report: line " + std::to_string(line_no) +
                       ": bad meta '" + key + "': " + e.what());
      }
      continue;
    }
    if (!header_seen) {
      if (line !=
          "step,action,predicted,realized,optimal,cum_realized,cum_optimal")
        throw io_error("read_report: '" + path + "': unexpected header");
      header_seen = true;
      continue;
    }
    auto f = detail::split_csv_line(line);
    if (f.size() != 7)
      throw io_error("read_report: line " + std::to_string(line_no) +
                     ": expected 7 fields");
    StepRecord rec;
    rec.step = detail::parse_int(f[0], line_no, "step");
    if (!f[1].empty()) {
      std::string piece;
      std::istringstream as(f[1]);
      while (std::getline(as, piece, '|'))
        rec.action.push_back(detail::parse_double(piece, line_no, "action"));
    }
    rec.predicted = detail::parse_double(f[2], line_no, "predicted");
    rec.realized = detail::parse_double(f[3], line_no, "realized");
    rec.optimal = detail::parse_double(f[4], line_no, "optimal");
    rec.cum_realized = detail::parse_double(f[5], line_no, "cum_realized");
    rec.cum_optimal = detail::parse_double(f[6], line_no, "cum_optimal");
    r.steps.push_back(std::move(rec));
  }
  if (!header_seen)
    throw io_error("read_report: '" + path + "': missing header");
  return r;
}

}  // namespace liprl
