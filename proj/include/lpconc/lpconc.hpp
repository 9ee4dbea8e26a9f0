#pragma once

// Umbrella header for the whole library.

#include "lpconc/concentration.hpp"
#include "lpconc/dataset.hpp"
#include "lpconc/dimension.hpp"
#include "lpconc/error.hpp"
#include "lpconc/knn.hpp"
#include "lpconc/metrics.hpp"
#include "lpconc/spectral.hpp"
#include "lpconc/stats.hpp"
