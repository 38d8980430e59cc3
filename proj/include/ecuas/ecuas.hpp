#pragma once

#include "ecuas/baselines.hpp"
#include "ecuas/calibration.hpp"
#include "ecuas/cost_matrix.hpp"
#include "ecuas/costs.hpp"
#include "ecuas/data_io.hpp"
#include "ecuas/diagnostics.hpp"
#include "ecuas/distribution.hpp"
#include "ecuas/error.hpp"
#include "ecuas/evaluation.hpp"
#include "ecuas/experiments.hpp"
#include "ecuas/normalization.hpp"
#include "ecuas/quadrature.hpp"
#include "ecuas/random.hpp"
#include "ecuas/summation.hpp"
#include "ecuas/weight.hpp"
