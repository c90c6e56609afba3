#pragma once

#include "mlo/backoff.hpp"
#include "mlo/config.hpp"
#include "mlo/errors.hpp"
#include "mlo/experiments.hpp"
#include "mlo/obss.hpp"
#include "mlo/phy_timing.hpp"
#include "mlo/queueing.hpp"
#include "mlo/simulator.hpp"
#include "mlo/solver.hpp"
#include "mlo/stats.hpp"
#include "mlo/traffic.hpp"
