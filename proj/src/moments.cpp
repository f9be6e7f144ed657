#include "errmoments/moments.hpp"

#include "errmoments/gauss.hpp"

#include <cmath>
#include <string>

namespace errmoments {

namespace {

// Class-0 formulas; class-1 values come from evaluating these on the
// swapped reduction.

double g0_bf(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    return (b0 * (rc.eta_m0_mu1 - rc.eta_m0_mu0) + rc.delta2 +
            (1 - b0) * p / n0 + (1 + b0) * p / n1) /
           (2 * (1 + b0));
}

// Shared bracket of the estimator-statistic variance and covariance.
double eta_bracket0(const ReducedConditional& rc) {
    const double n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    return b0 / ((1 + b0) * (1 + b0)) *
           ((rc.eta_m0_mu1 - (1 - b0) * rc.eta_m0_mu0 - rc.delta2) / n0 +
            ((1 + b0) * rc.eta_m0_mu1 - rc.eta_m0_mu0) / n1);
}

double c0_br(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    const double u = 1 + b0;
    return eta_bracket0(rc) + (1 - b0) * (1 - b0) * p / (2 * n0 * n0 * u * u) +
           p / (n0 * n1 * u * u) + p / (2 * n1 * n1) +
           rc.delta2 / (n1 * u) + rc.delta2 / (n0 * u * u);
}

double d0_br(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    const double u = 1 + b0;
    return rc.delta2 + rc.delta2 / (n0 * u) + c0_br(rc) + p / n0 + p / n1 +
           p / (n0 * n0 * u) + p / (n0 * n1 * u);
}

double c01_br(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1;
    const double b0 = rc.beta0, b1 = rc.beta1;
    const double uu = (1 + b0) * (1 + b1);
    const double t0 = (b0 * rc.eta_m0mu0_mu0mu1 - b0 * b1 * rc.eta_m0mu0_m1mu0 +
                       b1 * rc.eta_m1mu1_mu1mu0 + b1 * rc.delta2 + rc.delta2) /
                      (n0 * uu);
    const double t1 = (b1 * rc.eta_m1mu1_mu1mu0 - b0 * b1 * rc.eta_m1mu1_m0mu1 +
                       b0 * rc.eta_m0mu0_mu0mu1 + b0 * rc.delta2 + rc.delta2) /
                      (n1 * uu);
    return t0 + t1 + p / (n0 * n1 * uu) +
           (1 - b0) * p / (2 * n0 * n0 * (1 + b0)) +
           (1 - b1) * p / (2 * n1 * n1 * (1 + b1));
}

double c0_bt(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    return (rc.delta2 + b0 * rc.delta2 + b0 * rc.eta_m0mu0_mu0mu1) /
               (n1 * (1 + b0)) -
           (1 - b0) * p / (2 * n0 * n0 * (1 + b0)) + p / (2 * n1 * n1);
}

double c01_bt(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1, b0 = rc.beta0;
    return (rc.delta2 + b0 * rc.eta_m0mu0_mu0mu1) / (n0 * (1 + b0)) +
           (1 - b0) * p / (2 * n0 * n0 * (1 + b0)) - p / (2 * n1 * n1);
}

double g0_r(const ReducedConditional& rc) {
    const double p = rc.p;
    return 0.5 * (rc.delta2 + p / rc.n1 - p / rc.n0);
}

double d0_r(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1;
    return rc.delta2 + rc.delta2 / n1 +
           p * (1 / n0 + 1 / n1 + 1 / (2 * n0 * n0) + 1 / (2 * n1 * n1));
}

double c0_t(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1;
    return rc.delta2 / n1 + p / (2 * n0 * n0) + p / (2 * n1 * n1);
}

double c01_t(const ReducedConditional& rc) {
    const double p = rc.p, n0 = rc.n0, n1 = rc.n1;
    return -p / (2 * n0 * n0) - p / (2 * n1 * n1);
}

ReducedUnconditional swap_classes(const ReducedUnconditional& ru) {
    ReducedUnconditional s = ru;
    std::swap(s.n0, s.n1);
    std::swap(s.nu0, s.nu1);
    s.c = -ru.c;
    return s;
}

double h0_r(const ReducedUnconditional& ru) {
    const double p = ru.p;
    return 0.5 * (ru.Delta2 + p / ru.n1 - p / ru.n0 + p / ru.nu0 + p / ru.nu1);
}

double f0_r(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    return (1 + 1 / v0 + 1 / v1 + 1 / n1) * ru.Delta2 +
           p * (1 / n0 + 1 / n1 + 1 / v0 + 1 / v1) +
           p * (1 / (2 * n0 * n0) + 1 / (2 * n1 * n1) + 1 / (2 * v0 * v0) +
                1 / (2 * v1 * v1)) +
           p * (1 / (n1 * v0) + 1 / (n1 * v1) + 1 / (v0 * v1));
}

double k0_br(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    const double u = 1 + v0 / n0;
    const double u2 = u * u;
    return (1 / (n0 * u2) + 1 / n1 + 1 / (v0 * u2) + 1 / v1) * ru.Delta2 +
           p / (2 * n0 * n0) + p / (2 * v0 * v0) - p / (n0 * v0) +
           p / (n1 * v1) + p / (2 * n1 * n1) + p / (2 * v1 * v1) +
           p / (n0 * n1 * u2) + p / (n0 * v1 * u2) + p / (n1 * v0 * u2);
}

double k01_br(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    const double s0 = n0 + v0, s1 = n1 + v1;
    return p / (s0 * s1) + (n0 - v0) * p / (2 * n0 * n0 * s0) +
           (n1 - v1) * p / (2 * n1 * n1 * s1) +
           n0 * n1 * p / (v0 * v1 * s0 * s1) +
           (n0 - v0) * p / (2 * v0 * v0 * s0) +
           (n1 - v1) * p / (2 * v1 * v1 * s1) +
           (1 + n0 / s1 - v0 / n0) * p / (v0 * s0) +
           (1 + n1 / s0 - v1 / n1) * p / (v1 * s1) +
           (1 / v0 + 1 / v1) * ru.Delta2;
}

double k0_bt(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    const double s0 = n0 + v0;
    return (n0 / (v0 * s0) + 1 / n1 + 1 / v1) * ru.Delta2 +
           p / (2 * n1 * n1) + p / (2 * v1 * v1) + p / (n1 * v1) +
           n0 * p / (n1 * v0 * s0) - (n0 - v0) * p / (2 * n0 * n0 * s0) +
           (n0 - v0) * p / (2 * v0 * v0 * s0) + n0 * p / (v0 * v1 * s0);
}

double k01_bt(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    return (1 / v0 + 1 / v1) * ru.Delta2 + p / (2 * v0 * v0) +
           p / (2 * v1 * v1) + p / (v0 * v1) - p / (2 * n0 * n0) -
           p / (2 * n1 * n1);
}

double k0_t(const ReducedUnconditional& ru) {
    const double p = ru.p, n0 = ru.n0, n1 = ru.n1, v0 = ru.nu0, v1 = ru.nu1;
    return (1 / v0 + 1 / v1 + 1 / n1) * ru.Delta2 + p / (2 * v0 * v0) +
           p / (2 * v1 * v1) + p / (v0 * v1) + p / (2 * n0 * n0) +
           p / (2 * n1 * n1) + p / (n1 * v0) + p / (n1 * v1);
}

// Correlation ratio with the out-of-range clamp policy.
Correlation corr_ratio(double cov, double var_a, double var_b, int& clamps) {
    double r = cov / std::sqrt(var_a * var_b);
    if (r > 0.999999) {
        r = 0.999999;
        ++clamps;
    } else if (r < -0.999999) {
        r = -0.999999;
        ++clamps;
    }
    return Correlation(r);
}

} // namespace

double alpha0_from_threshold(double c) { return 1.0 / (1.0 + std::exp(c)); }

ConditionalCoefficients conditional_coefficients(const ReducedConditional& rc) {
    const ReducedConditional sw = swap_classes(rc);
    ConditionalCoefficients k;
    k.g_bf[0] = g0_bf(rc);
    k.g_bf[1] = g0_bf(sw);
    k.d_plain = rc.delta2 + double(rc.p) / rc.n0 + double(rc.p) / rc.n1;
    k.g_r[0] = g0_r(rc);
    k.g_r[1] = g0_r(sw);
    k.d_br[0] = d0_br(rc);
    k.d_br[1] = d0_br(sw);
    k.d_r[0] = d0_r(rc);
    k.d_r[1] = d0_r(sw);
    k.c_br[0] = c0_br(rc);
    k.c_br[1] = c0_br(sw);
    k.c01_br = c01_br(rc);
    k.c_bt[0] = c0_bt(rc);
    k.c_bt[1] = c0_bt(sw);
    k.c01_bt = c01_bt(rc);
    k.c10_bt = c01_bt(sw);
    k.c_t[0] = c0_t(rc);
    k.c_t[1] = c0_t(sw);
    k.c01_t = c01_t(rc);
    return k;
}

UnconditionalCoefficients
unconditional_coefficients(const ReducedUnconditional& ru) {
    const ReducedUnconditional sw = swap_classes(ru);
    UnconditionalCoefficients k;
    k.h_r[0] = h0_r(ru);
    k.h_r[1] = h0_r(sw);
    k.f_r[0] = f0_r(ru);
    k.f_r[1] = f0_r(sw);
    k.k_br[0] = k0_br(ru);
    k.k_br[1] = k0_br(sw);
    k.k01_br = k01_br(ru);
    k.k_bt[0] = k0_bt(ru);
    k.k_bt[1] = k0_bt(sw);
    k.k01_bt = k01_bt(ru);
    k.k10_bt = k01_bt(sw);
    k.k_t[0] = k0_t(ru);
    k.k_t[1] = k0_t(sw);
    k.k01_t = k01_bt(ru); // identical displays
    return k;
}

void conditional_first_moments_simple(const ReducedConditional& rc,
                                      double out[2]) {
    const ReducedConditional sw = swap_classes(rc);
    const double d = rc.delta2 + double(rc.p) / rc.n0 + double(rc.p) / rc.n1;
    out[0] = std_normal_cdf((-g0_bf(rc) + rc.c) / std::sqrt(d));
    out[1] = std_normal_cdf((-g0_bf(sw) + sw.c) / std::sqrt(d));
}

MomentMatrix conditional_moment_matrix(const ReducedConditional& rc) {
    const ConditionalCoefficients k = conditional_coefficients(rc);
    const double c = rc.c;
    // Standardized thresholds; the class-1 arguments already carry the
    // swapped sign convention ((G_1 - c)/sqrt(D_1) = (-G_0' + c')/sqrt(D_0')).
    const double a_b[2] = {(-k.g_bf[0] + c) / std::sqrt(k.d_br[0]),
                           (-k.g_bf[1] - c) / std::sqrt(k.d_br[1])};
    const double a_t[2] = {(-k.g_r[0] + c) / std::sqrt(k.d_r[0]),
                           (-k.g_r[1] - c) / std::sqrt(k.d_r[1])};

    MomentMatrix mm;
    for (int i = 0; i < 2; ++i) {
        mm.e_bayes[i] = std_normal_cdf(a_b[i]);
        mm.e_true[i] = std_normal_cdf(a_t[i]);
        mm.e_bayes2[i] = bivariate_normal_cdf(
            a_b[i], a_b[i],
            corr_ratio(k.c_br[i], k.d_br[i], k.d_br[i], mm.clamp_events));
        mm.e_true2[i] = bivariate_normal_cdf(
            a_t[i], a_t[i],
            corr_ratio(k.c_t[i], k.d_r[i], k.d_r[i], mm.clamp_events));
        mm.e_cross[i][i] = bivariate_normal_cdf(
            a_b[i], a_t[i],
            corr_ratio(k.c_bt[i], k.d_br[i], k.d_r[i], mm.clamp_events));
    }
    mm.e_bayes01 = bivariate_normal_cdf(
        a_b[0], a_b[1],
        corr_ratio(k.c01_br, k.d_br[0], k.d_br[1], mm.clamp_events));
    mm.e_true01 = bivariate_normal_cdf(
        a_t[0], a_t[1],
        corr_ratio(k.c01_t, k.d_r[0], k.d_r[1], mm.clamp_events));
    mm.e_cross[0][1] = bivariate_normal_cdf(
        a_b[0], a_t[1],
        corr_ratio(k.c01_bt, k.d_br[0], k.d_r[1], mm.clamp_events));
    mm.e_cross[1][0] = bivariate_normal_cdf(
        a_b[1], a_t[0],
        corr_ratio(k.c10_bt, k.d_br[1], k.d_r[0], mm.clamp_events));

    metrics_from_matrix(mm, alpha0_from_threshold(c));
    return mm;
}

MomentMatrix unconditional_moment_matrix(const ReducedUnconditional& ru) {
    const UnconditionalCoefficients k = unconditional_coefficients(ru);
    const double c = ru.c;
    const double a[2] = {(-k.h_r[0] + c) / std::sqrt(k.f_r[0]),
                         (-k.h_r[1] - c) / std::sqrt(k.f_r[1])};

    MomentMatrix mm;
    for (int i = 0; i < 2; ++i) {
        // Identical H/F formulas for estimator and true error make the
        // estimator unconditionally unbiased by construction.
        mm.e_bayes[i] = std_normal_cdf(a[i]);
        mm.e_true[i] = mm.e_bayes[i];
        mm.e_bayes2[i] = bivariate_normal_cdf(
            a[i], a[i],
            corr_ratio(k.k_br[i], k.f_r[i], k.f_r[i], mm.clamp_events));
        mm.e_true2[i] = bivariate_normal_cdf(
            a[i], a[i],
            corr_ratio(k.k_t[i], k.f_r[i], k.f_r[i], mm.clamp_events));
        mm.e_cross[i][i] = bivariate_normal_cdf(
            a[i], a[i],
            corr_ratio(k.k_bt[i], k.f_r[i], k.f_r[i], mm.clamp_events));
    }
    mm.e_bayes01 = bivariate_normal_cdf(
        a[0], a[1],
        corr_ratio(k.k01_br, k.f_r[0], k.f_r[1], mm.clamp_events));
    mm.e_true01 = bivariate_normal_cdf(
        a[0], a[1], corr_ratio(k.k01_t, k.f_r[0], k.f_r[1], mm.clamp_events));
    mm.e_cross[0][1] = bivariate_normal_cdf(
        a[0], a[1],
        corr_ratio(k.k01_bt, k.f_r[0], k.f_r[1], mm.clamp_events));
    mm.e_cross[1][0] = bivariate_normal_cdf(
        a[1], a[0],
        corr_ratio(k.k10_bt, k.f_r[1], k.f_r[0], mm.clamp_events));

    metrics_from_matrix(mm, alpha0_from_threshold(c));
    return mm;
}

void metrics_from_matrix(MomentMatrix& mm, double alpha0) {
    const double a[2] = {alpha0, 1.0 - alpha0};

    mm.e_bayes_mix = a[0] * mm.e_bayes[0] + a[1] * mm.e_bayes[1];
    mm.e_true_mix = a[0] * mm.e_true[0] + a[1] * mm.e_true[1];
    mm.e_bayes2_mix = a[0] * a[0] * mm.e_bayes2[0] +
                      2 * a[0] * a[1] * mm.e_bayes01 +
                      a[1] * a[1] * mm.e_bayes2[1];
    mm.e_true2_mix = a[0] * a[0] * mm.e_true2[0] +
                     2 * a[0] * a[1] * mm.e_true01 +
                     a[1] * a[1] * mm.e_true2[1];
    mm.e_cross_mix = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            mm.e_cross_mix += a[i] * a[j] * mm.e_cross[i][j];

    mm.bias = mm.e_bayes_mix - mm.e_true_mix;
    const double var_b = mm.e_bayes2_mix - mm.e_bayes_mix * mm.e_bayes_mix;
    const double var_t = mm.e_true2_mix - mm.e_true_mix * mm.e_true_mix;
    const double cov = mm.e_cross_mix - mm.e_bayes_mix * mm.e_true_mix;
    double dv = var_b + var_t - 2 * cov;
    if (dv < -1e-10)
        throw model_error("negative deviation variance: " + std::to_string(dv));
    if (dv < 0) dv = 0;
    mm.dev_var = dv;
    double ms = mm.bias * mm.bias + dv;
    mm.rms = std::sqrt(ms);
}

MomentMatrix asymptotic_limits(const AsymptoticProfile& ap, Mode mode) {
    MomentMatrix mm;
    const double c = ap.c;
    double loc[2]; // estimator location
    double loc_t[2];
    double var;
    if (mode == Mode::conditional) {
        const double g0 = ap.gamma0, g1 = ap.gamma1;
        loc[0] = (g0 * (ap.eta_m0_mu1 - ap.eta_m0_mu0) + ap.delta2_bar +
                  (1 - g0) * ap.J0 + (1 + g0) * ap.J1) /
                 (2 * (1 + g0));
        loc[1] = -(g1 * (ap.eta_m1_mu0 - ap.eta_m1_mu1) + ap.delta2_bar +
                   (1 - g1) * ap.J1 + (1 + g1) * ap.J0) /
                 (2 * (1 + g1));
        loc_t[0] = 0.5 * (ap.delta2_bar + ap.J1 - ap.J0);
        loc_t[1] = -0.5 * (ap.delta2_bar + ap.J0 - ap.J1);
        var = ap.delta2_bar + ap.J0 + ap.J1;
    } else {
        if (ap.gamma0 <= 0 || ap.gamma1 <= 0)
            throw model_error("unconditional limits need gamma_i > 0");
        const double jg = ap.J0 / ap.gamma0 + ap.J1 / ap.gamma1;
        loc[0] = 0.5 * (ap.Delta2_bar + ap.J1 - ap.J0 + jg);
        loc[1] = -0.5 * (ap.Delta2_bar + ap.J0 - ap.J1 + jg);
        loc_t[0] = loc[0];
        loc_t[1] = loc[1];
        var = ap.Delta2_bar + ap.J0 + ap.J1 + jg;
    }
    const double sd = std::sqrt(var);
    for (int i = 0; i < 2; ++i) {
        const double sign = (i == 0) ? 1.0 : -1.0;
        mm.e_bayes[i] = std_normal_cdf(sign * (-loc[i] + c) / sd);
        mm.e_true[i] = std_normal_cdf(sign * (-loc_t[i] + c) / sd);
    }
    // Second and cross moments factor into products in the limit.
    for (int i = 0; i < 2; ++i) {
        mm.e_bayes2[i] = mm.e_bayes[i] * mm.e_bayes[i];
        mm.e_true2[i] = mm.e_true[i] * mm.e_true[i];
        for (int j = 0; j < 2; ++j)
            mm.e_cross[i][j] = mm.e_bayes[i] * mm.e_true[j];
    }
    mm.e_bayes01 = mm.e_bayes[0] * mm.e_bayes[1];
    mm.e_true01 = mm.e_true[0] * mm.e_true[1];

    metrics_from_matrix(mm, alpha0_from_threshold(c));
    return mm;
}

} // namespace errmoments
