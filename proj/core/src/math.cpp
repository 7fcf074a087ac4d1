#include "procaudit/math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "procaudit/errors.hpp"

namespace procaudit {

Vector relu(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i]);
    return out;
}

Vector softmax(const Vector& v) {
    if (v.empty()) throw ArgumentError("softmax: empty input");
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) throw NumericError("softmax: non-finite input");
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double cross_entropy(const Vector& pred, std::size_t target_class) {
    if (target_class >= pred.size()) {
        throw ArgumentError("cross_entropy: target class " +
                            std::to_string(target_class) +
                            " out of range for " + std::to_string(pred.size()) +
                            " classes");
    }
    return -std::log(std::max(pred[target_class], kProbFloor));
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

} // namespace procaudit
