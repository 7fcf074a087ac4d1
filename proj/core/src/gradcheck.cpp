#include "procaudit/gradcheck.hpp"

#include <cmath>

#include "procaudit/errors.hpp"

namespace procaudit {

std::vector<double> numerical_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> params, double step) {
    if (!(step > 0.0)) throw ArgumentError("numerical_gradient: step must be > 0");

    std::vector<double> p(params.begin(), params.end());
    std::vector<double> grad(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + step;
        const double hi = f(p);
        p[i] = orig - step;
        const double lo = f(p);
        p[i] = orig;
        if (!std::isfinite(hi) || !std::isfinite(lo)) {
            throw NumericError("numerical_gradient: non-finite function value");
        }
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

} // namespace procaudit
