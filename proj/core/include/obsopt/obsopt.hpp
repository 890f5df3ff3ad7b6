#pragma once

#include "obsopt/bounds.hpp"
#include "obsopt/core.hpp"
#include "obsopt/discrete.hpp"
#include "obsopt/error.hpp"
#include "obsopt/example3.hpp"
#include "obsopt/kernels.hpp"
#include "obsopt/optimality_test.hpp"
#include "obsopt/predictive.hpp"
#include "obsopt/prescriptive_nonparam.hpp"
#include "obsopt/prescriptive_param.hpp"
#include "obsopt/quadrature.hpp"
#include "obsopt/rational.hpp"
#include "obsopt/regression.hpp"
#include "obsopt/replication.hpp"
#include "obsopt/rng.hpp"
#include "obsopt/special_functions.hpp"
#include "obsopt/version.hpp"
