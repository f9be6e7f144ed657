#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace errmoments {

struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ground-truth configuration: class means, common covariance, Gaussian prior
/// hyperparameters and the stratified sample design.
struct FullModelSpec {
    int p = 0;
    Eigen::VectorXd mu0, mu1;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd m0, m1;
    double nu0 = 0, nu1 = 0;
    int n0 = 0, n1 = 0;
    double alpha0 = 0.5;

    /// Throws model_error on dimension mismatch, non-SPD sigma, or
    /// out-of-range scalars.
    void validate() const;
};

/// The 14 scalars driving every conditional formula.
struct ReducedConditional {
    int p = 0;
    int n0 = 0, n1 = 0;
    double beta0 = 0, beta1 = 0;
    double c = 0;
    double delta2 = 0;
    // two-point Mahalanobis inner products (m_i - mu_j)' Sigma^-1 (m_i - mu_j)
    double eta_m0_mu0 = 0, eta_m0_mu1 = 0;
    double eta_m1_mu0 = 0, eta_m1_mu1 = 0;
    // four-point products (a1 - a2)' Sigma^-1 (a3 - a4)
    double eta_m0mu0_mu0mu1 = 0; // (m0-mu0, mu0-mu1)
    double eta_m0mu0_m1mu0 = 0;  // (m0-mu0, m1-mu0)
    double eta_m1mu1_m0mu1 = 0;  // (m1-mu1, m0-mu1)
    double eta_m1mu1_mu1mu0 = 0; // (m1-mu1, mu1-mu0)
};

/// The 6+1 scalars driving every unconditional formula.
struct ReducedUnconditional {
    int p = 0;
    int n0 = 0, n1 = 0;
    double nu0 = 0, nu1 = 0;
    double c = 0;
    double Delta2 = 0; // (m0-m1)' Sigma^-1 (m0-m1)
};

/// Limiting ratios and inner products for the asymptotic evaluators.
struct AsymptoticProfile {
    double J0 = 0, J1 = 0;         // p/n_i
    double gamma0 = 0, gamma1 = 0; // nu_i/n_i
    double delta2_bar = 0;
    double Delta2_bar = 0;
    double eta_m0_mu0 = 0, eta_m0_mu1 = 0;
    double eta_m1_mu0 = 0, eta_m1_mu1 = 0;
    double c = 0;
};

ReducedConditional reduce_conditional(const FullModelSpec& spec);
ReducedUnconditional reduce_unconditional(const FullModelSpec& spec);

/// The class-index involution: n0<->n1, beta0<->beta1, c -> -c, eta fields
/// permuted under m0<->m1, mu0<->mu1.
ReducedConditional swap_classes(const ReducedConditional& rc);

/// Decision threshold log((1-alpha0)/alpha0).
double log_odds_threshold(double alpha0);

} // namespace errmoments
