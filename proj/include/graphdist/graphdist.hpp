#pragma once

// Umbrella header for the library (everything except the CLI front end).

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/io.hpp"
#include "graphdist/models.hpp"
#include "graphdist/parallel.hpp"
#include "graphdist/rng.hpp"
#include "graphdist/statistic.hpp"
#include "graphdist/testing.hpp"
#include "graphdist/timeseries.hpp"
#include "graphdist/version.hpp"
