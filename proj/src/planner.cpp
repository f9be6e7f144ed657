#include "errmoments/planner.hpp"

#include <ostream>

namespace errmoments {

double kappa(int n, int p, double beta, Mode mode) {
    if (n < 4 || n % 2 != 0)
        throw model_error("kappa needs an even n >= 4");
    if (p < 1) throw model_error("kappa needs p >= 1");
    if (beta * n / 2.0 < 1e-9)
        throw model_error("nu = beta*n/2 is too small");

    const int half = n / 2;
    MomentMatrix mm;
    if (mode == Mode::conditional) {
        // Worst case over separation: delta2 -> 0 with the prior centered on
        // the true means, which zeroes every eta invariant as well.
        ReducedConditional rc;
        rc.p = p;
        rc.n0 = rc.n1 = half;
        rc.beta0 = rc.beta1 = beta;
        rc.c = 0;
        mm = conditional_moment_matrix(rc);
    } else {
        ReducedUnconditional ru;
        ru.p = p;
        ru.n0 = ru.n1 = half;
        ru.nu0 = ru.nu1 = beta * half;
        ru.c = 0;
        ru.Delta2 = 0;
        mm = unconditional_moment_matrix(ru);
    }
    metrics_from_matrix(mm, 0.5);
    return mm.rms;
}

namespace {

void validate_query(const PlanQuery& q) {
    if (!(q.tau > 0 && q.tau < 1)) throw model_error("tau must be in (0,1)");
    if (q.p < 1) throw model_error("p must be at least 1");
    if (!(q.beta > 0)) throw model_error("beta must be positive");
    if (q.n_max < 4 || q.n_max % 2 != 0)
        throw model_error("n_max must be even and >= 4");
    if (q.safe && q.horizon < 2) throw model_error("horizon must be >= 2");
}

} // namespace

PlanResult min_n(const PlanQuery& query) {
    validate_query(query);
    PlanResult result;
    for (int n = 4; n <= query.n_max; n += 2) {
        const double k = kappa(n, query.p, query.beta, query.mode);
        result.trace.emplace_back(n, k);
        if (k >= query.tau) continue;

        if (query.safe) {
            bool clean = true;
            for (int m = n + 2; m <= n + query.horizon; m += 2) {
                const double km = kappa(m, query.p, query.beta, query.mode);
                result.trace.emplace_back(m, km);
                if (km >= query.tau) {
                    clean = false;
                    break;
                }
            }
            if (!clean) {
                // Re-crossing inside the horizon: record it and keep walking.
                result.horizon_clean = false;
                continue;
            }
        }
        result.n_min = n;
        result.kappa_at_n_min = k;
        result.found = true;
        if (query.safe) result.horizon_clean = true;
        return result;
    }
    return result;
}

void write_plan_grid(std::ostream& out, const std::vector<double>& taus,
                     const std::vector<int>& ps, double beta, Mode mode,
                     int n_max) {
    out << "tau,p,n_min,kappa_at_n_min,mode,beta\n";
    const char* mode_name = mode == Mode::conditional ? "conditional"
                                                      : "unconditional";
    for (double tau : taus) {
        for (int p : ps) {
            PlanQuery q;
            q.tau = tau;
            q.p = p;
            q.beta = beta;
            q.mode = mode;
            q.n_max = n_max;
            const PlanResult r = min_n(q);
            out << tau << ',' << p << ',' << (r.found ? r.n_min : -1) << ','
                << (r.found ? r.kappa_at_n_min : 0.0) << ',' << mode_name
                << ',' << beta << '\n';
        }
    }
}

} // namespace errmoments
