#ifndef CCSICA_CCSICA_HPP
#define CCSICA_CCSICA_HPP

#include "ccsica/bench.hpp"
#include "ccsica/density.hpp"
#include "ccsica/divergence.hpp"
#include "ccsica/ica_core.hpp"
#include "ccsica/io.hpp"
#include "ccsica/metrics.hpp"
#include "ccsica/pairwise.hpp"
#include "ccsica/preprocess.hpp"
#include "ccsica/signals.hpp"
#include "ccsica/types.hpp"

#endif  // CCSICA_CCSICA_HPP
