#ifndef LANEAF_LANEAF_HPP
#define LANEAF_LANEAF_HPP

#include "laneaf/grid.hpp"
#include "laneaf/encoder.hpp"
#include "laneaf/decoder.hpp"
#include "laneaf/losses.hpp"
#include "laneaf/metrics.hpp"
#include "laneaf/synth.hpp"
#include "laneaf/io.hpp"

#endif  // LANEAF_LANEAF_HPP
