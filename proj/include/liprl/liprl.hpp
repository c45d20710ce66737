#pragma once

// Umbrella header: reward backtesting with Lipschitz-preserving
// (McShane/Whitney) extensions over a hybrid angular + Euclidean metric.

#include "liprl/action.hpp"
#include "liprl/data_io.hpp"
#include "liprl/dreams.hpp"
#include "liprl/errors.hpp"
#include "liprl/lipschitz.hpp"
#include "liprl/metric.hpp"
#include "liprl/report.hpp"
#include "liprl/reward.hpp"
#include "liprl/rng.hpp"
#include "liprl/run.hpp"
#include "liprl/scenarios.hpp"
#include "liprl/state.hpp"
