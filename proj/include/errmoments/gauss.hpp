#pragma once

#include <stdexcept>

namespace errmoments {

/// Correlation coefficient of a standard bivariate normal.
/// Inputs barely past +/-1 (within 1e-9) are clamped; anything further is rejected.
class Correlation {
public:
    explicit Correlation(double rho);

    double value() const { return rho_; }

private:
    double rho_;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Standard normal CDF. Absolute error below 1e-12.
double std_normal_cdf(double x);

/// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho.
/// Gauss-Legendre integration of the Drezner-Wesolowsky correlation-derivative
/// form, with the complementary branch for high |rho|. Absolute error below 1e-7.
double bivariate_normal_cdf(double a, double b, Correlation rho);

} // namespace errmoments
