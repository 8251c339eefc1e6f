#pragma once

#include "scanpower/bench.hpp"
#include "scanpower/error.hpp"
#include "scanpower/leakage.hpp"
#include "scanpower/netlist.hpp"
#include "scanpower/observability.hpp"
#include "scanpower/pattern.hpp"
#include "scanpower/rng.hpp"
#include "scanpower/scan.hpp"
#include "scanpower/simulate.hpp"
#include "scanpower/techmap.hpp"
#include "scanpower/timing.hpp"
#include "scanpower/report.hpp"
