#pragma once

#include "spikes/criteria.hpp"
#include "spikes/diagnostics.hpp"
#include "spikes/error.hpp"
#include "spikes/io.hpp"
#include "spikes/linalg.hpp"
#include "spikes/quadrature.hpp"
#include "spikes/rng.hpp"
#include "spikes/simulate.hpp"
#include "spikes/specmath.hpp"
#include "spikes/spectra.hpp"
#include "spikes/summation.hpp"
#include "spikes/table.hpp"
