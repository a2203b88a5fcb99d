#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "priors.hpp"
#include "predictive.hpp"
#include "bayes_factor.hpp"
#include "oc.hpp"
#include "design.hpp"

namespace bfbin {
inline constexpr const char* version = "0.1.0";
}

