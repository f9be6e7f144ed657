#include "errmoments/planner.hpp"

#include <doctest.h>

#include <sstream>

using namespace errmoments;

TEST_CASE("kappa input validation") {
    CHECK_THROWS_AS(kappa(13, 4, 1.0, Mode::conditional), model_error);
    CHECK_THROWS_AS(kappa(2, 4, 1.0, Mode::conditional), model_error);
    CHECK_THROWS_AS(kappa(20, 0, 1.0, Mode::conditional), model_error);
    CHECK_THROWS_AS(kappa(20, 4, 1e-12, Mode::unconditional), model_error);
}

TEST_CASE("kappa crossing points for small dimensions") {
    CHECK(kappa(14, 2, 1.0, Mode::conditional) < 0.1);
    CHECK(kappa(12, 2, 1.0, Mode::conditional) >= 0.1);
    CHECK(kappa(22, 4, 1.0, Mode::conditional) < 0.1);
    CHECK(kappa(20, 4, 1.0, Mode::conditional) >= 0.1);
}

TEST_CASE("conditional kappa decreases in n") {
    for (int p : {4, 16}) {
        double prev = 1.0;
        for (int n = 40; n <= 200; n += 20) {
            const double k = kappa(n, p, 1.0, Mode::conditional);
            CHECK(k < prev);
            prev = k;
        }
    }
}

TEST_CASE("conditional kappa is nonincreasing in beta") {
    for (int n : {40, 100}) {
        for (int p : {4, 32}) {
            const double k_half = kappa(n, p, 0.5, Mode::conditional);
            const double k_one = kappa(n, p, 1.0, Mode::conditional);
            const double k_two = kappa(n, p, 2.0, Mode::conditional);
            CHECK(k_one <= k_half + 1e-12);
            CHECK(k_two <= k_one + 1e-12);
        }
    }
}

TEST_CASE("min_n literal scan invariants") {
    PlanQuery q;
    q.tau = 0.1;
    q.p = 2;
    q.beta = 1.0;
    q.mode = Mode::conditional;
    const PlanResult r = min_n(q);
    REQUIRE(r.found);
    CHECK(r.n_min == 14);
    CHECK(r.kappa_at_n_min < q.tau);
    // the scan trace covers every even n up to the crossing
    REQUIRE(r.trace.size() == (size_t)(r.n_min - 4) / 2 + 1);
    CHECK(r.trace[r.trace.size() - 2].second >= q.tau);
}

TEST_CASE("loose targets are met at the smallest admissible n") {
    for (Mode mode : {Mode::conditional, Mode::unconditional}) {
        PlanQuery q;
        q.tau = 0.5;
        q.p = 8;
        q.beta = 1.0;
        q.mode = mode;
        const PlanResult r = min_n(q);
        REQUIRE(r.found);
        CHECK(r.n_min == 4);
    }
}

TEST_CASE("unreachable targets report not-found with the trace") {
    PlanQuery q;
    q.tau = 0.02;
    q.p = 64;
    q.beta = 1.0;
    q.mode = Mode::conditional;
    q.n_max = 100;
    const PlanResult r = min_n(q);
    CHECK_FALSE(r.found);
    CHECK(r.n_min == -1);
    CHECK(r.trace.size() == 49); // 4, 6, ..., 100
}

TEST_CASE("safe mode agrees with literal mode away from the peak") {
    PlanQuery q;
    q.tau = 0.1;
    q.p = 4;
    q.beta = 1.0;
    q.mode = Mode::conditional;
    const PlanResult literal = min_n(q);
    q.safe = true;
    const PlanResult safe = min_n(q);
    REQUIRE(literal.found);
    REQUIRE(safe.found);
    CHECK(safe.n_min == literal.n_min);
    CHECK(safe.horizon_clean);
}

TEST_CASE("plan grid CSV shape") {
    std::ostringstream out;
    write_plan_grid(out, {0.1, 0.09}, {2, 4}, 1.0, Mode::conditional);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau,p,n_min,kappa_at_n_min,mode,beta");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}
