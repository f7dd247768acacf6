#pragma once

#include "mixlt/birkhoff.hpp"
#include "mixlt/cocycle.hpp"
#include "mixlt/config.hpp"
#include "mixlt/diagnostics.hpp"
#include "mixlt/dynamics.hpp"
#include "mixlt/error.hpp"
#include "mixlt/laws.hpp"
#include "mixlt/parallel.hpp"
#include "mixlt/rng.hpp"
#include "mixlt/runner.hpp"
#include "mixlt/stats.hpp"
#include "mixlt/summation.hpp"
#include "mixlt/zorich.hpp"
