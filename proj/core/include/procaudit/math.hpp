#pragma once

#include <cstddef>
#include <span>

#include "procaudit/matrix.hpp"

namespace procaudit {

// Floor applied to predicted probabilities before taking logs.
inline constexpr double kProbFloor = 1e-12;

// Elementwise max(0, x).
Vector relu(const Vector& v);

// Probability vector over the inputs, computed with max subtraction so that
// entries anywhere in the finite double range do not overflow. Throws
// ArgumentError on empty input.
Vector softmax(const Vector& v);

// -ln(pred[target_class]) with pred floored at kProbFloor. pred must be a
// probability vector; target_class must be in range (ArgumentError otherwise).
double cross_entropy(const Vector& pred, std::size_t target_class);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v);

} // namespace procaudit
