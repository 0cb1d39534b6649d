#pragma once
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "finsler/error.hpp"

namespace finsler {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

// Composite 20-point Gauss-Legendre on [lo, hi], doubling the panel count
// until successive estimates differ by at most tol. The last difference is
// reported as the error estimate.
template <class F>
QuadratureResult composite_gauss(const F& f, double lo, double hi, double tol = 1e-13,
                                 int max_panels = 4096) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    if (lo == hi) return {0.0, 0.0, 0};
    auto integrate = [&](int n) {
        const double h = (hi - lo) / n;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double a = lo + k * h;
            sum += Rule::integrate(f, a, a + h);
        }
        return sum;
    };
    int n = 1;
    double prev = integrate(n);
    while (n < max_panels) {
        n *= 2;
        const double cur = integrate(n);
        const double diff = std::fabs(cur - prev);
        if (!std::isfinite(cur)) throw Error(ErrorCode::NumericalBlowup, "quadrature diverged");
        if (diff <= tol * std::fmax(1.0, std::fabs(cur))) return {cur, diff, n};
        prev = cur;
    }
    throw Error(ErrorCode::NumericalBlowup, "quadrature did not converge");
}

}  // namespace finsler
