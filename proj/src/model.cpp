#include "errmoments/model.hpp"

#include <cmath>
#include <string>

namespace errmoments {

namespace {

double clamp_quadratic(double v, const char* name) {
    if (v < -1e-10)
        throw model_error(std::string(name) + " came out negative: " +
                          std::to_string(v));
    return v < 0 ? 0.0 : v;
}

} // namespace

void FullModelSpec::validate() const {
    if (p < 1) throw model_error("dimension p must be positive");
    auto check_len = [&](const Eigen::VectorXd& v, const char* name) {
        if (v.size() != p)
            throw model_error(std::string(name) + " has length " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(p));
    };
    check_len(mu0, "mu0");
    check_len(mu1, "mu1");
    check_len(m0, "m0");
    check_len(m1, "m1");
    if (sigma.rows() != p || sigma.cols() != p)
        throw model_error("sigma must be p x p");
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
        throw model_error("sigma is not symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success)
        throw model_error("sigma is not positive definite");
    if (nu0 <= 0 || nu1 <= 0) throw model_error("nu_i must be positive");
    if (n0 < 1 || n1 < 1) throw model_error("n_i must be at least 1");
    if (!(alpha0 > 0 && alpha0 < 1))
        throw model_error("alpha0 must lie in (0,1)");
}

double log_odds_threshold(double alpha0) {
    return std::log((1.0 - alpha0) / alpha0);
}

ReducedConditional reduce_conditional(const FullModelSpec& spec) {
    spec.validate();
    Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);

    // One factorization, one solve per distinct difference vector.
    const Eigen::VectorXd d_mu = spec.mu0 - spec.mu1;
    const Eigen::VectorXd d_m0mu0 = spec.m0 - spec.mu0;
    const Eigen::VectorXd d_m0mu1 = spec.m0 - spec.mu1;
    const Eigen::VectorXd d_m1mu0 = spec.m1 - spec.mu0;
    const Eigen::VectorXd d_m1mu1 = spec.m1 - spec.mu1;

    const Eigen::VectorXd s_mu = llt.solve(d_mu);
    const Eigen::VectorXd s_m0mu0 = llt.solve(d_m0mu0);
    const Eigen::VectorXd s_m0mu1 = llt.solve(d_m0mu1);
    const Eigen::VectorXd s_m1mu0 = llt.solve(d_m1mu0);
    const Eigen::VectorXd s_m1mu1 = llt.solve(d_m1mu1);

    ReducedConditional rc;
    rc.p = spec.p;
    rc.n0 = spec.n0;
    rc.n1 = spec.n1;
    rc.beta0 = spec.nu0 / spec.n0;
    rc.beta1 = spec.nu1 / spec.n1;
    rc.c = log_odds_threshold(spec.alpha0);
    rc.delta2 = clamp_quadratic(d_mu.dot(s_mu), "delta2");
    rc.eta_m0_mu0 = clamp_quadratic(d_m0mu0.dot(s_m0mu0), "eta_m0_mu0");
    rc.eta_m0_mu1 = clamp_quadratic(d_m0mu1.dot(s_m0mu1), "eta_m0_mu1");
    rc.eta_m1_mu0 = clamp_quadratic(d_m1mu0.dot(s_m1mu0), "eta_m1_mu0");
    rc.eta_m1_mu1 = clamp_quadratic(d_m1mu1.dot(s_m1mu1), "eta_m1_mu1");
    rc.eta_m0mu0_mu0mu1 = d_m0mu0.dot(s_mu);
    rc.eta_m0mu0_m1mu0 = d_m0mu0.dot(s_m1mu0);
    rc.eta_m1mu1_m0mu1 = d_m1mu1.dot(s_m0mu1);
    rc.eta_m1mu1_mu1mu0 = -d_m1mu1.dot(s_mu);
    return rc;
}

ReducedUnconditional reduce_unconditional(const FullModelSpec& spec) {
    spec.validate();
    Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
    const Eigen::VectorXd d_m = spec.m0 - spec.m1;

    ReducedUnconditional ru;
    ru.p = spec.p;
    ru.n0 = spec.n0;
    ru.n1 = spec.n1;
    ru.nu0 = spec.nu0;
    ru.nu1 = spec.nu1;
    ru.c = log_odds_threshold(spec.alpha0);
    ru.Delta2 = clamp_quadratic(d_m.dot(llt.solve(d_m)), "Delta2");
    return ru;
}

ReducedConditional swap_classes(const ReducedConditional& rc) {
    ReducedConditional s = rc;
    std::swap(s.n0, s.n1);
    std::swap(s.beta0, s.beta1);
    s.c = -rc.c;
    std::swap(s.eta_m0_mu0, s.eta_m1_mu1);
    std::swap(s.eta_m0_mu1, s.eta_m1_mu0);
    // Under m0<->m1, mu0<->mu1 the four-point products map onto each other
    // with both difference directions reversed, so no sign change.
    std::swap(s.eta_m0mu0_mu0mu1, s.eta_m1mu1_mu1mu0);
    std::swap(s.eta_m0mu0_m1mu0, s.eta_m1mu1_m0mu1);
    return s;
}

} // namespace errmoments
