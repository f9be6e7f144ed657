#pragma once

#include "errmoments/model.hpp"

namespace errmoments {

enum class Mode { conditional, unconditional };

/// Location/variance/covariance coefficients of the conditional (given mu)
/// discriminant-statistic approximations. Index [i] is class i; class-1 values
/// come from applying the class-0 formula to swap_classes(rc).
struct ConditionalCoefficients {
    double g_bf[2];   // finite-sample location term (equals the Raudys one)
    double d_plain;   // delta2 + p/n0 + p/n1
    double g_r[2];    // true-error location term
    double d_br[2];   // Raudys variance of the estimator statistic
    double d_r[2];    // Raudys variance of the true-error statistic
    double c_br[2];   // Cov(U_i, U_i')
    double c01_br;    // Cov(U_0, U_1')
    double c_bt[2];   // Cov(U_i, W_i)
    double c01_bt;    // Cov(U_0, W_1)
    double c10_bt;    // Cov(U_1, W_0)
    double c_t[2];    // Cov(W_i, W_i')
    double c01_t;     // Cov(W_0, W_1)
};

/// Unconditional counterparts (mu integrated out against the prior).
struct UnconditionalCoefficients {
    double h_r[2];
    double f_r[2];
    double k_br[2];
    double k01_br;
    double k_bt[2];
    double k01_bt;
    double k10_bt;
    double k_t[2];
    double k01_t;
};

/// First, second and cross moments of (estimator, true error) per class plus
/// the alpha-mixed metrics.
struct MomentMatrix {
    double e_bayes[2] = {0, 0}; // E[eps_hat_i^B]
    double e_true[2] = {0, 0};  // E[eps_i]

    double e_bayes2[2] = {0, 0}; // E[(eps_hat_i^B)^2]
    double e_bayes01 = 0;        // E[eps_hat_0^B eps_hat_1^B]
    double e_true2[2] = {0, 0};  // E[eps_i^2]
    double e_true01 = 0;         // E[eps_0 eps_1]
    double e_cross[2][2] = {{0, 0}, {0, 0}}; // E[eps_hat_i^B eps_j]

    double e_bayes_mix = 0;
    double e_true_mix = 0;
    double e_bayes2_mix = 0;
    double e_true2_mix = 0;
    double e_cross_mix = 0;
    double bias = 0;
    double dev_var = 0;
    double rms = 0;

    int clamp_events = 0; // correlation ratios pushed back into range
};

ConditionalCoefficients conditional_coefficients(const ReducedConditional& rc);
UnconditionalCoefficients unconditional_coefficients(const ReducedUnconditional& ru);

MomentMatrix conditional_moment_matrix(const ReducedConditional& rc);
MomentMatrix unconditional_moment_matrix(const ReducedUnconditional& ru);

/// Fills the mixture and metric fields from the per-class entries.
/// Throws model_error if the deviation variance is below -1e-10.
void metrics_from_matrix(MomentMatrix& mm, double alpha0);

/// First moments from the simple (theorem-suggested) approximation, i.e.
/// the plain denominator delta2 + p/n0 + p/n1 without the Raudys variance.
void conditional_first_moments_simple(const ReducedConditional& rc,
                                      double out[2]);

/// Limiting moment matrix; second and cross moments are products of firsts.
/// Unconditional mode requires gamma_i > 0.
MomentMatrix asymptotic_limits(const AsymptoticProfile& ap, Mode mode);

/// alpha0 recovered from the threshold c = log((1-alpha0)/alpha0).
double alpha0_from_threshold(double c);

} // namespace errmoments
