#include <doctest.h>

#include <array>
#include <cmath>

#include "furnace/bargain.hpp"
#include "furnace/pipeline.hpp"

using namespace furnace;

namespace {

// Case-study fixture: two best-response points with pinned payoffs, so the
// matrix entries are reproduced bit-exactly by construction.
const Genome kX1Best = {86.18, 101.71, 176.88};
const Genome kX2Best = {77.27, 95.22, 213.69};

double sqdist(const Genome& a, const Genome& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

Objective pinned(double at_x1best, double at_x2best) {
    return [=](const Genome& x) {
        return sqdist(x, kX1Best) <= sqdist(x, kX2Best) ? at_x1best : at_x2best;
    };
}

ProblemSpec line_toy() {  // Y1 = x, Y2 = 1 - x over [0, 1]
    ProblemSpec p;
    p.bounds = BoundsBox({0.0}, {1.0});
    p.objectives = {{"y1", [](const Genome& g) { return g[0]; }},
                    {"y2", [](const Genome& g) { return 1.0 - g[0]; }}};
    return p;
}

GaParams solver_params(std::uint64_t seed) {
    GaParams p;
    p.population_size = 40;
    p.offspring_size = 10;
    p.generations = 200;
    p.seed = seed;
    return p;
}

// Random axis-aligned concave quadratic over the furnace box.
Objective random_quadratic(RngStream& rng, const BoundsBox& box, double base) {
    std::vector<double> peak(box.size()), curv(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) {
        peak[d] = rng.uniform(box.lower(d), box.upper(d));
        curv[d] = rng.uniform(0.002, 0.05);
    }
    return [=](const Genome& x) {
        double v = base;
        for (std::size_t d = 0; d < x.size(); ++d)
            v -= curv[d] * (x[d] - peak[d]) * (x[d] - peak[d]);
        return v;
    };
}

}  // namespace

TEST_SUITE("bargain") {

TEST_CASE("payoff matrix, disagreement, and product on the case-study values") {
    const PayoffMatrix p =
        payoff_matrix(pinned(75.2, 47.27), pinned(337.17, 361.29), kX1Best, kX2Best);
    CHECK(p.entry(0, 0) == 75.2);
    CHECK(p.entry(0, 1) == 337.17);
    CHECK(p.entry(1, 0) == 47.27);
    CHECK(p.entry(1, 1) == 361.29);

    const DisagreementPoint d = disagreement(p);
    CHECK(d.y[0] == 47.27);
    CHECK(d.y[1] == 337.17);

    CHECK(std::abs(nash_product({75.20, 361.29}, d) - 673.6716) <= 1e-9);
}

TEST_CASE("payoff matrix is four plain evaluations") {
    // objectives (x1, -x1) at explicitly given points
    const Objective f1 = [](const Genome& x) { return x[0]; };
    const Objective f2 = [](const Genome& x) { return -x[0]; };
    const PayoffMatrix p = payoff_matrix(f1, f2, {103.0, 60.0, 200.0}, {44.4, 60.0, 200.0});
    CHECK(p.entry(0, 0) == 103.0);
    CHECK(p.entry(0, 1) == -103.0);
    CHECK(p.entry(1, 0) == 44.4);
    CHECK(p.entry(1, 1) == -44.4);

    const DisagreementPoint d = disagreement(p);
    CHECK(d.y[0] == 44.4);
    CHECK(d.y[1] == -103.0);
}

TEST_CASE("identical objectives and coincident points give a constant matrix") {
    const Objective f = [](const Genome& x) { return 2.0 * x[0]; };
    const Genome x = {3.0};
    const PayoffMatrix p = payoff_matrix(f, f, x, x);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(p.entry(i, j) == 6.0);
    const DisagreementPoint d = disagreement(p);
    CHECK(d.y[0] == 6.0);
    CHECK(d.y[1] == 6.0);
}

TEST_CASE("nash product sign behaviour") {
    const DisagreementPoint d{{2.0, 3.0}};
    CHECK(nash_product({2.0, 3.0}, d) == 0.0);
    CHECK(nash_product({4.0, 5.0}, d) == 4.0);
    CHECK(nash_product({1.0, 5.0}, d) < 0.0);
}

TEST_CASE("best response maximizes one player's objective") {
    ProblemSpec p;
    p.bounds = BoundsBox({44.4, 58.6, 176.3}, {103.0, 107.0, 223.0});
    p.objectives = {{"y1", [](const Genome& g) { return g[0]; }},
                    {"y2", [](const Genome& g) { return -g[0]; }}};
    const GaResult r = best_response(p, 0, solver_params(3));
    CHECK(std::abs(r.best_genome[0] - 103.0) < 1e-1);
    CHECK(std::abs(r.best_value - 103.0) < 1e-1);

    const GaResult constant =
        best_response({{{"c", [](const Genome&) { return 5.0; }},
                        {"c2", [](const Genome&) { return 5.0; }}},
                       p.bounds},
                      0, solver_params(3));
    CHECK(constant.best_value == 5.0);
    CHECK(p.bounds.contains(constant.best_genome));
}

TEST_CASE("full bargaining chain on the line toy") {
    const ProblemSpec toy = line_toy();
    const BargainResult r = bargain_solve(toy, solver_params(11));

    CHECK(std::abs(r.payoff_matrix.entry(0, 0) - 1.0) < 1e-3);
    CHECK(std::abs(r.payoff_matrix.entry(0, 1) - 0.0) < 1e-3);
    CHECK(std::abs(r.payoff_matrix.entry(1, 0) - 0.0) < 1e-3);
    CHECK(std::abs(r.payoff_matrix.entry(1, 1) - 1.0) < 1e-3);
    CHECK(std::abs(r.disagreement.y[0]) < 1e-3);
    CHECK(std::abs(r.disagreement.y[1]) < 1e-3);

    CHECK(std::abs(r.x_best[0] - 0.5) < 1e-2);
    CHECK(std::abs(r.nash_product - 0.25) < 1e-3);
    CHECK(r.payoffs[0] >= r.disagreement.y[0]);
    CHECK(r.payoffs[1] >= r.disagreement.y[1]);
}

TEST_CASE("coincident optima make the bargain solution the shared peak") {
    ProblemSpec p;
    p.bounds = BoundsBox({0.0}, {1.0});
    p.objectives = {{"y1",
                     [](const Genome& g) { return 10.0 - (g[0] - 0.5) * (g[0] - 0.5); }},
                    {"y2",
                     [](const Genome& g) { return 5.0 - 2.0 * (g[0] - 0.5) * (g[0] - 0.5); }}};
    const BargainResult r = bargain_solve(p, solver_params(13));
    CHECK(std::abs(r.x_best[0] - 0.5) < 1e-2);
    CHECK(std::abs(r.payoffs[0] - 10.0) < 1e-3);
    CHECK(std::abs(r.payoffs[1] - 5.0) < 1e-3);
    CHECK(std::abs(r.payoffs[0] - r.payoff_matrix.entry(0, 0)) < 1e-3);
    CHECK(std::abs(r.payoffs[1] - r.payoff_matrix.entry(1, 1)) < 1e-3);
}

TEST_CASE("diagonal of the payoff matrix tops its column on solved instances") {
    RngStream rng(17);
    const BoundsBox box({44.4, 58.6, 176.3}, {103.0, 107.0, 223.0});
    for (int trial = 0; trial < 3; ++trial) {
        ProblemSpec p;
        p.bounds = box;
        p.objectives = {{"y1", random_quadratic(rng, box, 75.0)},
                        {"y2", random_quadratic(rng, box, 361.0)}};
        const BargainResult r = bargain_solve(p, solver_params(100 + trial));
        CHECK(r.payoff_matrix.entry(0, 0) >= r.payoff_matrix.entry(1, 0) - 1e-6);
        CHECK(r.payoff_matrix.entry(1, 1) >= r.payoff_matrix.entry(0, 1) - 1e-6);
    }
}

TEST_CASE("unreachable disagreement values raise infeasibility with a witness") {
    const ProblemSpec toy = line_toy();
    PayoffMatrix p;
    p.p = {{{2.0, 2.0}, {2.0, 2.0}}};
    const DisagreementPoint d{{2.0, 2.0}};  // y1 >= 2 is impossible on [0, 1]
    try {
        nash_solve(toy, p, d, solver_params(19));
        FAIL("expected InfeasibilityError");
    } catch (const InfeasibilityError& e) {
        REQUIRE(e.genome.size() == 1);
        CHECK(e.genome[0] >= 0.0);
        CHECK(e.genome[0] <= 1.0);
    }
}

TEST_CASE("solver matches the grid oracle on quadratic instances") {
    RngStream rng(23);
    const BoundsBox box({44.4, 58.6, 176.3}, {103.0, 107.0, 223.0});
    for (int trial = 0; trial < 3; ++trial) {
        ProblemSpec p;
        p.bounds = box;
        p.objectives = {{"y1", random_quadratic(rng, box, 75.0)},
                        {"y2", random_quadratic(rng, box, 361.0)}};
        const BargainResult r = bargain_solve(p, solver_params(200 + trial));
        const OracleResult oracle = brute_force_oracle(p, r.disagreement, 50);
        REQUIRE(oracle.nash_feasible);
        CHECK(r.nash_product >= oracle.nash_product - 1e-3 * std::abs(oracle.nash_product));

        // Pareto efficiency against the grid: nothing feasible dominates the
        // solution by more than the solver tolerance in normalized units.
        std::array<double, 2> range = {0, 0};
        for (std::size_t k = 0; k < 2; ++k) {
            double lo = 1e300, hi = -1e300;
            for (const auto& pt : oracle.front) {
                lo = std::min(lo, pt.objectives[k]);
                hi = std::max(hi, pt.objectives[k]);
            }
            range[k] = std::max(hi - lo, 1e-12);
        }
        for (const auto& pt : oracle.front) {
            if (pt.objectives[0] < r.disagreement.y[0] ||
                pt.objectives[1] < r.disagreement.y[1])
                continue;
            const bool beats_both =
                (pt.objectives[0] - r.payoffs[0]) / range[0] > 1e-3 &&
                (pt.objectives[1] - r.payoffs[1]) / range[1] > 1e-3;
            CHECK_FALSE(beats_both);
        }
    }
}

TEST_CASE("symmetric instances give equal payoffs at the grid optimum") {
    // f2 is f1 mirrored through the origin of a symmetric box; the bargaining
    // solution of the symmetric game pays both players the same.
    RngStream rng(29);
    ProblemSpec p;
    p.bounds = BoundsBox({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
    std::array<double, 3> peak{}, curv{};
    for (std::size_t d = 0; d < 3; ++d) {
        peak[d] = rng.uniform(-0.6, 0.6);
        curv[d] = rng.uniform(0.5, 2.0);
    }
    const auto g = [=](const Genome& x) {
        double v = 1.0;
        for (std::size_t d = 0; d < 3; ++d) v -= curv[d] * (x[d] - peak[d]) * (x[d] - peak[d]);
        return v;
    };
    p.objectives = {{"f1", g}, {"f2", [=](const Genome& x) {
                         return g({-x[0], -x[1], -x[2]});
                     }}};

    // grid-level best responses, matrix, disagreement
    const int res = 31;
    const OracleResult sweep1 = brute_force_oracle(p, {{-1e30, -1e30}}, res);
    Genome x1b, x2b;
    double b1 = -1e300, b2 = -1e300;
    for (const auto& pt : sweep1.front) {
        if (pt.objectives[0] > b1) {
            b1 = pt.objectives[0];
            x1b = pt.genome;
        }
        if (pt.objectives[1] > b2) {
            b2 = pt.objectives[1];
            x2b = pt.genome;
        }
    }
    const PayoffMatrix pm =
        payoff_matrix(p.objectives[0].fn, p.objectives[1].fn, x1b, x2b);
    const DisagreementPoint d = disagreement(pm);
    CHECK(std::abs(d.y[0] - d.y[1]) < 1e-9);

    const OracleResult oracle = brute_force_oracle(p, d, res);
    REQUIRE(oracle.nash_feasible);
    CHECK(std::abs(oracle.nash_payoffs[0] - oracle.nash_payoffs[1]) < 1e-6);
}

TEST_CASE("positive affine payoff scaling preserves the grid argmax") {
    RngStream rng(31);
    const BoundsBox box({44.4, 58.6, 176.3}, {103.0, 107.0, 223.0});
    ProblemSpec p;
    p.bounds = box;
    const Objective f1 = random_quadratic(rng, box, 75.0);
    const Objective f2 = random_quadratic(rng, box, 361.0);
    p.objectives = {{"y1", f1}, {"y2", f2}};

    // grid best responses fix the disagreement point for the base instance
    const int res = 25;
    const OracleResult sweep = brute_force_oracle(p, {{-1e30, -1e30}}, res);
    Genome x1b, x2b;
    double b1 = -1e300, b2 = -1e300;
    for (const auto& pt : sweep.front) {
        if (pt.objectives[0] > b1) {
            b1 = pt.objectives[0];
            x1b = pt.genome;
        }
        if (pt.objectives[1] > b2) {
            b2 = pt.objectives[1];
            x2b = pt.genome;
        }
    }

    auto argmax_for_scale = [&](double a, double b) {
        ProblemSpec q;
        q.bounds = box;
        q.objectives = {{"y1", [&, a, b](const Genome& x) { return a * f1(x) + b; }},
                        {"y2", f2}};
        const PayoffMatrix pm =
            payoff_matrix(q.objectives[0].fn, q.objectives[1].fn, x1b, x2b);
        return brute_force_oracle(q, disagreement(pm), res).nash_genome;
    };

    const Genome base = argmax_for_scale(1.0, 0.0);
    for (double a : {0.5, 3.0, 10.0}) {
        CHECK(argmax_for_scale(a, 0.0) == base);
        CHECK(argmax_for_scale(a, 7.5) == base);
    }
}

TEST_CASE("stage seeds are derived independently and recorded") {
    const BargainResult r = bargain_solve(line_toy(), solver_params(47));
    CHECK(r.base_seed == 47);
    CHECK(r.derived_seeds[0] == derive_seed(47, kSeedTagBestResponse1));
    CHECK(r.derived_seeds[1] == derive_seed(47, kSeedTagBestResponse2));
    CHECK(r.derived_seeds[2] == derive_seed(47, kSeedTagNash));
    CHECK(r.derived_seeds[0] != r.derived_seeds[1]);
    CHECK(r.derived_seeds[1] != r.derived_seeds[2]);
    CHECK(r.generations == 200);
}

TEST_CASE("bargain result JSON round-trips and the run is deterministic") {
    const BargainResult a = bargain_solve(line_toy(), solver_params(53));
    const BargainResult b = bargain_solve(line_toy(), solver_params(53));
    CHECK(a.to_json() == b.to_json());

    const BargainResult back = BargainResult::from_json(a.to_json());
    CHECK(back.to_json() == a.to_json());
    CHECK(back.x_best == a.x_best);
    CHECK(back.payoffs == a.payoffs);
    CHECK(back.nash_product == a.nash_product);
}

}  // TEST_SUITE
