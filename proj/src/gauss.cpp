#include "errmoments/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace errmoments {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Gauss-Legendre abscissae/weights on (0,1), three rules keyed on |rho|.
constexpr double w6[3] = {0.1713244923791704, 0.3607615730481386,
                          0.4679139345726910};
constexpr double x6[3] = {0.9324695142031521, 0.6612093864662645,
                          0.2386191860831969};
constexpr double w12[6] = {0.04717533638651183, 0.1069393259953184,
                           0.1600783285433462,  0.2031674267230659,
                           0.2334925365383548,  0.2491470458134028};
constexpr double x12[6] = {0.9815606342467192, 0.9041172563704749,
                           0.7699026741943047, 0.5873179542866175,
                           0.3678314989981802, 0.1252334085114689};
constexpr double w20[10] = {0.01761400713915212, 0.04060142980038694,
                            0.06267204833410907, 0.08327674157670475,
                            0.1019301198172404,  0.1181945319615184,
                            0.1316886384491766,  0.1420961093183820,
                            0.1491729864726037,  0.1527533871307258};
constexpr double x20[10] = {0.9931285991850949,  0.9639719272779138,
                            0.9122344282513259,  0.8391169718222188,
                            0.7463319064601508,  0.6360536807265150,
                            0.5108670019508271,  0.3737060887154195,
                            0.2277858511416451,  0.07652652113349733};

// Upper-tail rectangle P(X > dh, Y > dk). Drezner-Wesolowsky with Genz's
// refinement of the |rho| > 0.925 branch.
double bvnd(double dh, double dk, double r) {
    const double* x;
    const double* w;
    int lg;
    if (std::abs(r) < 0.3) {
        lg = 3; x = x6; w = w6;
    } else if (std::abs(r) < 0.75) {
        lg = 6; x = x12; w = w12;
    } else {
        lg = 10; x = x20; w = w20;
    }

    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;

    if (std::abs(r) < 0.925) {
        if (std::abs(r) > 0) {
            const double hs = (h * h + k * k) / 2;
            const double asr = std::asin(r);
            for (int i = 0; i < lg; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double sn = std::sin(asr * (is * x[i] + 1) / 2);
                    bvn += w[i] * std::exp((sn * hk - hs) / (1 - sn * sn));
                }
            }
            bvn = bvn * asr / (2 * kTwoPi);
        }
        bvn += std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        if (r < 0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(r) < 1) {
            const double as = (1 - r) * (1 + r);
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4 - hk) / 8;
            const double d = (12 - hk) / 16;
            double asr = -(bs / as + hk) / 2;
            if (asr > -100) {
                bvn = a * std::exp(asr) *
                      (1 - c * (bs - as) * (1 - d * bs / 5) / 3 +
                       c * d * as * as / 5);
            }
            if (-hk < 100) {
                const double b = std::sqrt(bs);
                bvn -= std::exp(-hk / 2) * std::sqrt(kTwoPi) *
                       std_normal_cdf(-b / a) * b *
                       (1 - c * bs * (1 - d * bs / 5) / 3);
            }
            a = a / 2;
            for (int i = 0; i < lg; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double xi = a * (is * x[i] + 1);
                    const double xs = xi * xi;
                    const double rs = std::sqrt(1 - xs);
                    asr = -(bs / xs + hk) / 2;
                    if (asr > -100) {
                        bvn += a * w[i] * std::exp(asr) *
                               (std::exp(-hk * (1 - rs) / (2 * (1 + rs))) / rs -
                                (1 + c * xs * (1 + d * xs)));
                    }
                }
            }
            bvn = -bvn / kTwoPi;
        }
        if (r > 0) {
            bvn += std_normal_cdf(-std::max(h, k));
        } else {
            bvn = -bvn;
            if (k > h) bvn += std_normal_cdf(k) - std_normal_cdf(h);
        }
    }
    return bvn;
}

} // namespace

Correlation::Correlation(double rho) : rho_(rho) {
    if (std::isnan(rho_)) throw numeric_error("correlation is NaN");
    if (rho_ > 1.0) {
        if (rho_ > 1.0 + 1e-9) throw numeric_error("correlation above 1");
        rho_ = 1.0;
    } else if (rho_ < -1.0) {
        if (rho_ < -1.0 - 1e-9) throw numeric_error("correlation below -1");
        rho_ = -1.0;
    }
}

double std_normal_cdf(double x) {
    if (std::isnan(x)) throw numeric_error("std_normal_cdf: NaN input");
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

double bivariate_normal_cdf(double a, double b, Correlation rho) {
    if (std::isnan(a) || std::isnan(b))
        throw numeric_error("bivariate_normal_cdf: NaN input");

    const double r = rho.value();
    if (a == -std::numeric_limits<double>::infinity() ||
        b == -std::numeric_limits<double>::infinity())
        return 0.0;
    if (a == std::numeric_limits<double>::infinity()) return std_normal_cdf(b);
    if (b == std::numeric_limits<double>::infinity()) return std_normal_cdf(a);

    // Degenerate limits; the integrand blows up as 1/sqrt(1-r^2).
    if (r > 1.0 - 1e-12)
        return std::min(std_normal_cdf(a), std_normal_cdf(b));
    if (r < -1.0 + 1e-12)
        return std::max(0.0, std_normal_cdf(a) + std_normal_cdf(b) - 1.0);

    const double p = bvnd(-a, -b, r);
    return std::clamp(p, 0.0, 1.0);
}

} // namespace errmoments
