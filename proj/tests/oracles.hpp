#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <functional>

namespace oracles {

inline double phi(double x) {
    return std::exp(-0.5 * x * x) / 2.5066282746310005024;
}

inline double Phi(double x) {
    return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

// Adaptive Simpson on [a, b] to the requested absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol, int depth = 30) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    std::function<double(double, double, double, double, double, double,
                         double, int)>
        rec = [&](double x0, double x2, double f0, double f1, double f2,
                  double s, double eps, int d) -> double {
        const double x1l = 0.5 * (x0 + 0.5 * (x0 + x2));
        const double x1r = 0.5 * (0.5 * (x0 + x2) + x2);
        const double xm = 0.5 * (x0 + x2);
        const double fl = f(x1l), fr = f(x1r);
        const double left = (xm - x0) / 6 * (f0 + 4 * fl + f1);
        const double right = (x2 - xm) / 6 * (f1 + 4 * fr + f2);
        if (d <= 0 || std::abs(left + right - s) < 15 * eps)
            return left + right + (left + right - s) / 15;
        return rec(x0, xm, f0, fl, f1, left, eps / 2, d - 1) +
               rec(xm, x2, f1, fr, f2, right, eps / 2, d - 1);
    };
    return rec(a, b, fa, fm, fb, whole, tol, depth);
}

// Bivariate normal CDF by quadrature: the inner coordinate is integrated in
// closed form, the outer one adaptively.
inline double bvn_cdf_quadrature(double a, double b, double rho,
                                 double tol = 1e-10) {
    const double s = std::sqrt(1 - rho * rho);
    auto f = [&](double x) { return phi(x) * Phi((b - rho * x) / s); };
    const double lo = -8.5;
    if (a <= lo) return 0.0;
    return adaptive_simpson(f, lo, a, tol);
}

} // namespace oracles
