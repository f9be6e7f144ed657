#include "errmoments/mc.hpp"

#include "errmoments/gauss.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace errmoments {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (purpose, index): seed the engine from a mixed key
// so replication r is reproducible no matter which thread runs it.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose,
                            std::uint64_t index) {
    return std::mt19937_64(
        splitmix64(splitmix64(seed ^ purpose) + index));
}

constexpr std::uint64_t kStreamSample = 0x53414d504cULL;
constexpr std::uint64_t kStreamPrior = 0x5052494f52ULL;

Eigen::VectorXd draw_normal(std::mt19937_64& rng, int p) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z[j] = n01(rng);
    return z;
}

// Per-replication statistics, accumulated in a fixed order below.
constexpr int kEb0 = 0, kEb1 = 1, kEt0 = 2, kEt1 = 3;
constexpr int kEb0Sq = 4, kEb1Sq = 5, kEb01 = 6;
constexpr int kEt0Sq = 7, kEt1Sq = 8, kEt01 = 9;
constexpr int kX00 = 10, kX01 = 11, kX10 = 12, kX11 = 13;
constexpr int kEbMix = 14, kEtMix = 15;
constexpr int kEbMixSq = 16, kEtMixSq = 17, kXMix = 18;
constexpr int kDev = 19, kDevSq = 20, kD2 = 21;
constexpr int kNumStats = 22;

struct Rep {
    double eb[2];
    double et[2];
    double d2hat;
    int rejected;
};

} // namespace

void McConfig::validate() const {
    spec.validate();
    if (t1 < 2) throw model_error("t1 must be at least 2");
    if (t2 < 1) throw model_error("t2 must be at least 1");
    if (mode == Mode::unconditional && t2 < 2)
        throw model_error("unconditional mode needs t2 >= 2");
    if (threads < 1) throw model_error("threads must be at least 1");
}

double anderson_w(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                  const Eigen::VectorXd& x,
                  const Eigen::LLT<Eigen::MatrixXd>& sigma_chol) {
    const Eigen::VectorXd s = sigma_chol.solve(xbar0 - xbar1);
    return (x - 0.5 * (xbar0 + xbar1)).dot(s);
}

void true_error_pair(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                     const Eigen::VectorXd& mu0, const Eigen::VectorXd& mu1,
                     const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                     double out[2]) {
    const Eigen::VectorXd d = xbar0 - xbar1;
    const Eigen::VectorXd s = sigma_chol.solve(d);
    const double d2 = d.dot(s);
    if (!(d2 > 0)) throw model_error("degenerate sample: xbar0 == xbar1");
    const double dh = std::sqrt(d2);
    const Eigen::VectorXd xa = 0.5 * (xbar0 + xbar1);
    out[0] = std_normal_cdf((-(mu0 - xa).dot(s) + c) / dh);
    out[1] = std_normal_cdf(((mu1 - xa).dot(s) - c) / dh);
}

double true_error(const Eigen::VectorXd& xbar0, const Eigen::VectorXd& xbar1,
                  const Eigen::VectorXd& mu0, const Eigen::VectorXd& mu1,
                  const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                  double alpha0) {
    double e[2];
    true_error_pair(xbar0, xbar1, mu0, mu1, sigma_chol, c, e);
    return alpha0 * e[0] + (1.0 - alpha0) * e[1];
}

void bayes_estimate_pair(const Eigen::VectorXd& xbar0,
                         const Eigen::VectorXd& xbar1,
                         const Eigen::VectorXd& m0, const Eigen::VectorXd& m1,
                         double nu0, double nu1, int n0, int n1,
                         const Eigen::LLT<Eigen::MatrixXd>& sigma_chol,
                         double c, double out[2]) {
    const Eigen::VectorXd d = xbar0 - xbar1;
    const Eigen::VectorXd s = sigma_chol.solve(d);
    const double d2 = d.dot(s);
    if (!(d2 > 0)) throw model_error("degenerate sample: xbar0 == xbar1");
    const double dh = std::sqrt(d2);
    const Eigen::VectorXd xa = 0.5 * (xbar0 + xbar1);

    const double nustar[2] = {n0 + nu0, n1 + nu1};
    const Eigen::VectorXd mstar0 = (n0 * xbar0 + nu0 * m0) / nustar[0];
    const Eigen::VectorXd mstar1 = (n1 * xbar1 + nu1 * m1) / nustar[1];

    const double shrink0 = std::sqrt(nustar[0] / (nustar[0] + 1.0));
    const double shrink1 = std::sqrt(nustar[1] / (nustar[1] + 1.0));
    out[0] = std_normal_cdf((-(mstar0 - xa).dot(s) + c) / dh * shrink0);
    out[1] = std_normal_cdf(-(-(mstar1 - xa).dot(s) + c) / dh * shrink1);
}

double bayes_estimate(const Eigen::VectorXd& xbar0,
                      const Eigen::VectorXd& xbar1, const Eigen::VectorXd& m0,
                      const Eigen::VectorXd& m1, double nu0, double nu1,
                      int n0, int n1,
                      const Eigen::LLT<Eigen::MatrixXd>& sigma_chol, double c,
                      double alpha0) {
    double e[2];
    bayes_estimate_pair(xbar0, xbar1, m0, m1, nu0, nu1, n0, n1, sigma_chol, c,
                        e);
    return alpha0 * e[0] + (1.0 - alpha0) * e[1];
}

McEstimates run(const McConfig& config) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const FullModelSpec& spec = config.spec;
    const int p = spec.p;
    const double c = log_odds_threshold(spec.alpha0);
    const long t2 = config.mode == Mode::conditional ? 1 : config.t2;
    const long total = config.t1 * t2;

    Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
    const Eigen::MatrixXd chol_l = llt.matrixL();

    // Outer loop: class means. Conditional mode keeps them at mu_i; the
    // unconditional study redraws them from the prior once per outer pass.
    std::vector<Eigen::VectorXd> mu0s(t2), mu1s(t2);
    for (long o = 0; o < t2; ++o) {
        if (config.mode == Mode::conditional) {
            mu0s[o] = spec.mu0;
            mu1s[o] = spec.mu1;
        } else {
            auto rng = make_stream(config.seed, kStreamPrior, (std::uint64_t)o);
            mu0s[o] = spec.m0 + chol_l * draw_normal(rng, p) / std::sqrt(spec.nu0);
            mu1s[o] = spec.m1 + chol_l * draw_normal(rng, p) / std::sqrt(spec.nu1);
        }
    }

    std::vector<Rep> reps(total);
    auto worker = [&](long lo, long hi) {
        for (long r = lo; r < hi; ++r) {
            const long o = r / config.t1;
            const Eigen::VectorXd& mu0 = mu0s[o];
            const Eigen::VectorXd& mu1 = mu1s[o];
            auto rng = make_stream(config.seed, kStreamSample, (std::uint64_t)r);
            Rep rep{};
            for (;;) {
                Eigen::VectorXd z0 = Eigen::VectorXd::Zero(p);
                Eigen::VectorXd z1 = Eigen::VectorXd::Zero(p);
                for (int k = 0; k < spec.n0; ++k) z0 += draw_normal(rng, p);
                for (int k = 0; k < spec.n1; ++k) z1 += draw_normal(rng, p);
                const Eigen::VectorXd xbar0 = mu0 + chol_l * z0 / spec.n0;
                const Eigen::VectorXd xbar1 = mu1 + chol_l * z1 / spec.n1;
                const Eigen::VectorXd d = xbar0 - xbar1;
                const Eigen::VectorXd s = llt.solve(d);
                const double d2 = d.dot(s);
                if (!(d2 > 0)) {
                    ++rep.rejected;
                    continue;
                }
                rep.d2hat = d2;
                true_error_pair(xbar0, xbar1, mu0, mu1, llt, c, rep.et);
                bayes_estimate_pair(xbar0, xbar1, spec.m0, spec.m1, spec.nu0,
                                    spec.nu1, spec.n0, spec.n1, llt, c, rep.eb);
                break;
            }
            reps[r] = rep;
        }
    };

    const int nthreads =
        (int)std::max<long>(1, std::min<long>(config.threads, total));
    if (nthreads == 1) {
        worker(0, total);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (total + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const long lo = t * chunk;
            const long hi = std::min(total, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Serial reduction in replication order keeps the result independent of
    // the thread count. Kahan compensation on both sums.
    std::array<double, kNumStats> sum{}, sumsq{}, csum{}, csumsq{};
    long rejected = 0;
    const double a0 = spec.alpha0, a1 = 1.0 - spec.alpha0;
    for (long r = 0; r < total; ++r) {
        const Rep& rep = reps[r];
        rejected += rep.rejected;
        std::array<double, kNumStats> v;
        v[kEb0] = rep.eb[0];
        v[kEb1] = rep.eb[1];
        v[kEt0] = rep.et[0];
        v[kEt1] = rep.et[1];
        v[kEb0Sq] = rep.eb[0] * rep.eb[0];
        v[kEb1Sq] = rep.eb[1] * rep.eb[1];
        v[kEb01] = rep.eb[0] * rep.eb[1];
        v[kEt0Sq] = rep.et[0] * rep.et[0];
        v[kEt1Sq] = rep.et[1] * rep.et[1];
        v[kEt01] = rep.et[0] * rep.et[1];
        v[kX00] = rep.eb[0] * rep.et[0];
        v[kX01] = rep.eb[0] * rep.et[1];
        v[kX10] = rep.eb[1] * rep.et[0];
        v[kX11] = rep.eb[1] * rep.et[1];
        const double ebm = a0 * rep.eb[0] + a1 * rep.eb[1];
        const double etm = a0 * rep.et[0] + a1 * rep.et[1];
        v[kEbMix] = ebm;
        v[kEtMix] = etm;
        v[kEbMixSq] = ebm * ebm;
        v[kEtMixSq] = etm * etm;
        v[kXMix] = ebm * etm;
        v[kDev] = ebm - etm;
        v[kDevSq] = (ebm - etm) * (ebm - etm);
        v[kD2] = rep.d2hat;
        for (int k = 0; k < kNumStats; ++k) {
            double y = v[k] - csum[k];
            double t = sum[k] + y;
            csum[k] = (t - sum[k]) - y;
            sum[k] = t;
            y = v[k] * v[k] - csumsq[k];
            t = sumsq[k] + y;
            csumsq[k] = (t - sumsq[k]) - y;
            sumsq[k] = t;
        }
    }

    const double n = (double)total;
    auto moment = [&](int k) {
        McMoment m;
        m.mean = sum[k] / n;
        const double var = std::max(0.0, (sumsq[k] / n - m.mean * m.mean) *
                                             n / (n - 1.0));
        m.stderr_ = std::sqrt(var / n);
        return m;
    };
    auto sample_var = [&](int k) {
        const double mean = sum[k] / n;
        return std::max(0.0, (sumsq[k] / n - mean * mean) * n / (n - 1.0));
    };

    McEstimates est;
    est.e_bayes[0] = moment(kEb0);
    est.e_bayes[1] = moment(kEb1);
    est.e_true[0] = moment(kEt0);
    est.e_true[1] = moment(kEt1);
    est.e_bayes2[0] = moment(kEb0Sq);
    est.e_bayes2[1] = moment(kEb1Sq);
    est.e_bayes01 = moment(kEb01);
    est.e_true2[0] = moment(kEt0Sq);
    est.e_true2[1] = moment(kEt1Sq);
    est.e_true01 = moment(kEt01);
    est.e_cross[0][0] = moment(kX00);
    est.e_cross[0][1] = moment(kX01);
    est.e_cross[1][0] = moment(kX10);
    est.e_cross[1][1] = moment(kX11);
    est.e_bayes_mix = moment(kEbMix);
    est.e_true_mix = moment(kEtMix);
    est.e_bayes2_mix = moment(kEbMixSq);
    est.e_true2_mix = moment(kEtMixSq);
    est.e_cross_mix = moment(kXMix);
    est.bias = moment(kDev);
    est.dev_var = sample_var(kDev);
    est.rms = std::sqrt(sum[kDevSq] / n);
    est.delta2_hat = moment(kD2);
    est.delta2_hat_var = sample_var(kD2);
    est.replications = total;
    est.rejected = rejected;
    est.seed = config.seed;
    est.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return est;
}

FullModelSpec make_study_spec(int p, int n0, int n1, double nu, double delta2,
                              double prior_shift, double alpha0) {
    FullModelSpec spec;
    spec.p = p;
    spec.sigma = Eigen::MatrixXd::Constant(p, p, 0.1);
    spec.sigma.diagonal().setOnes();
    // ones is an eigenvector of sigma, so the Mahalanobis norm of mu0 - mu1
    // is (2a)^2 p / (0.9 + 0.1 p); pick a to hit the requested delta2.
    const double a =
        0.5 * std::sqrt(delta2 * (0.9 + 0.1 * p) / p);
    spec.mu0 = Eigen::VectorXd::Constant(p, a);
    spec.mu1 = Eigen::VectorXd::Constant(p, -a);
    spec.m0 = (1.0 + prior_shift) * spec.mu0;
    spec.m1 = (1.0 + prior_shift) * spec.mu1;
    spec.nu0 = spec.nu1 = nu;
    spec.n0 = n0;
    spec.n1 = n1;
    spec.alpha0 = alpha0;
    return spec;
}

} // namespace errmoments
