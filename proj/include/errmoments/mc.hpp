#pragma once

#include "errmoments/model.hpp"
#include "errmoments/moments.hpp"

#include <Eigen/Cholesky>
#include <cstdint>

namespace errmoments {

struct McConfig {
    Mode mode = Mode::unconditional;
    long t1 = 300; // inner replications (sample redraws)
    long t2 = 300; // outer replications (mean redraws); 1 in conditional mode
    std::uint64_t seed = 0;
    int threads = 1;
    FullModelSpec spec;

    void validate() const;
};

struct McMoment {
    double mean = 0;
    double stderr_ = 0;
};

/// Sample moments of (estimator, true error) with standard errors.
struct McEstimates {
    McMoment e_bayes[2], e_true[2];
    McMoment e_bayes2[2], e_bayes01;
    McMoment e_true2[2], e_true01;
    McMoment e_cross[2][2];

    McMoment e_bayes_mix, e_true_mix;
    McMoment e_bayes2_mix, e_true2_mix, e_cross_mix;
    McMoment bias;   // mean of (eps_hat - eps)
    double dev_var = 0; // sample variance of (eps_hat - eps)
    double rms = 0;     // sqrt(mean (eps_hat - eps)^2)

    McMoment delta2_hat;   // sample Mahalanobis distance between class means
    double delta2_hat_var = 0;

    long replications = 0;
    long rejected = 0;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0;
};

/// Anderson discriminant statistic W(xbar0, xbar1, x).
double anderson_w(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                  const Eigen::VectorXd& x,
                  const Eigen::LLT<Eigen::MatrixXd>& sigma_chol);

/// Designed-classifier misclassification probability
/// alpha0*eps0 + alpha1*eps1. Throws model_error when xbar0 == xbar1.
double true_error(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                  const Eigen::VectorXd& mu0, const Eigen::VectorXd& mu1,
                  const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                  double alpha0);

/// Per-class version; out[i] is eps_i.
void true_error_pair(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                     const Eigen::VectorXd& mu0, const Eigen::VectorXd& mu1,
                     const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                     double out[2]);

/// Posterior-expected error alpha0*ehat0 + alpha1*ehat1.
double bayes_estimate(const Eigen::VectorXd& xbar0,
                      const Eigen::VectorXd& xbar1, const Eigen::VectorXd& m0,
                      const Eigen::VectorXd& m1, double nu0, double nu1,
                      int n0, int n1,
                      const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                      double alpha0);

void bayes_estimate_pair(const Eigen::VectorXd& xbar0,
                         const Eigen::VectorXd& xbar1,
                         const Eigen::VectorXd& m0, const Eigen::VectorXd& m1,
                         double nu0, double nu1, int n0, int n1,
                         const Eigen::LLT<Eigen::MatrixXd>& sigma_chol,
                         double c, double out[2]);

/// Runs the full simulation. Deterministic for a fixed seed regardless of
/// thread count (per-replication RNG streams, fixed reduction order).
McEstimates run(const McConfig& config);

/// Builds the simulation-study model: Sigma with unit diagonal and 0.1
/// off-diagonal, equal-element mu0 = -mu1 scaled to the requested delta2,
/// and m_i = (1 + prior_shift) * mu_i.
FullModelSpec make_study_spec(int p, int n0, int n1, double nu, double delta2,
                              double prior_shift, double alpha0 = 0.5);

} // namespace errmoments
