#ifndef MMRADAR_MMRADAR_HPP
#define MMRADAR_MMRADAR_HPP

#include "mmradar/array_model.hpp"
#include "mmradar/beamformer.hpp"
#include "mmradar/config_io.hpp"
#include "mmradar/detector.hpp"
#include "mmradar/environment.hpp"
#include "mmradar/errors.hpp"
#include "mmradar/rl_engine.hpp"
#include "mmradar/rng.hpp"
#include "mmradar/sim_harness.hpp"

#endif  // MMRADAR_MMRADAR_HPP
