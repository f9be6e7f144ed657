#pragma once

#include "errmoments/moments.hpp"

#include <iosfwd>
#include <vector>

namespace errmoments {

/// kappa(n, p, beta): RMS of the estimator in the vanishing-separation limit
/// with a balanced design n0 = n1 = n/2 and nu_i = beta * n_i. Conditional
/// mode sends delta2 -> 0 with m_i = mu_i; unconditional mode sends
/// Delta2 -> 0. n must be even and >= 4.
double kappa(int n, int p, double beta, Mode mode);

struct PlanQuery {
    double tau = 0;      // RMS budget, must be positive
    int p = 0;           // dimension
    double beta = 1;     // prior-mass to sample-size ratio
    Mode mode = Mode::conditional;
    int n_max = 10000;   // scan cutoff
    bool safe = false;   // verify kappa stays under tau beyond the crossing
    int horizon = 200;   // extra n range checked in safe mode
};

struct PlanResult {
    int n_min = -1;      // smallest even n with kappa < tau; -1 if none found
    double kappa_at_n_min = 0;
    bool found = false;
    bool horizon_clean = true; // safe mode: no re-crossing inside the horizon
    std::vector<std::pair<int, double>> trace; // every (n, kappa) evaluated
};

/// Linear scan over even n starting at 4. A bisection would be wrong here:
/// kappa is not monotone in n (the unconditional surface peaks at moderate n
/// for large beta), so the first crossing must be found by walking.
PlanResult min_n(const PlanQuery& query);

/// Writes rows "tau,p,n_min,kappa_at_n_min,mode,beta" (with header) for the
/// cartesian product of the inputs.
void write_plan_grid(std::ostream& out, const std::vector<double>& taus,
                     const std::vector<int>& ps, double beta, Mode mode,
                     int n_max = 10000);

} // namespace errmoments
