#pragma once

#include <functional>
#include <span>
#include <vector>

namespace procaudit {

// Central-difference gradient of a scalar function, one coordinate at a time:
// (f(p + h e_i) - f(p - h e_i)) / (2h). Oracle for verifying hand-derived
// layer gradients. step must be > 0; a non-finite f evaluation throws
// NumericError.
std::vector<double> numerical_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> params, double step);

} // namespace procaudit
