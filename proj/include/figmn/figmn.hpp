#pragma once

// Umbrella header: incremental Gaussian mixture learning with both the
// covariance-form reference learner and the rank-one precision-form fast
// learner, conditional inference, data handling, persistence, and the
// benchmark/RL harnesses.

#include "figmn/bench.hpp"
#include "figmn/data.hpp"
#include "figmn/errors.hpp"
#include "figmn/inference.hpp"
#include "figmn/learner_fast.hpp"
#include "figmn/learner_reference.hpp"
#include "figmn/model.hpp"
#include "figmn/model_io.hpp"
#include "figmn/numerics.hpp"
#include "figmn/rl.hpp"
