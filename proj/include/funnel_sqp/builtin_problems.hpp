#pragma once

#include <string>
#include <vector>

#include "funnel_sqp/problem.hpp"

namespace funnel_sqp {

/// Names accepted by builtin(), in registry order.
const std::vector<std::string>& builtin_names();

/// Returns the named analytic test problem with closed-form derivatives.
/// Throws UnknownProblem for names not in the registry.
NcoProblem builtin(const std::string& name);

}  // namespace funnel_sqp
