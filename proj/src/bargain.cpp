#include "furnace/bargain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace furnace {

nlohmann::json BargainResult::to_json() const {
    nlohmann::json pm = nlohmann::json::array();
    pm.push_back(payoff_matrix.p[0]);
    pm.push_back(payoff_matrix.p[1]);
    nlohmann::json brp = nlohmann::json::array();
    brp.push_back(best_response_points[0]);
    brp.push_back(best_response_points[1]);
    return {{"x_best", x_best},
            {"payoffs", payoffs},
            {"nash_product", nash_product},
            {"disagreement", disagreement.y},
            {"payoff_matrix", pm},
            {"best_response_points", brp},
            {"best_response_values", best_response_values},
            {"base_seed", base_seed},
            {"derived_seeds", derived_seeds},
            {"generations", generations},
            {"restarts", restarts}};
}

BargainResult BargainResult::from_json(const nlohmann::json& j) {
    BargainResult r;
    r.x_best = j.at("x_best").get<Genome>();
    r.payoffs = j.at("payoffs").get<std::array<double, 2>>();
    r.nash_product = j.at("nash_product").get<double>();
    r.disagreement.y = j.at("disagreement").get<std::array<double, 2>>();
    const auto& pm = j.at("payoff_matrix");
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k) r.payoff_matrix.p[i][k] = pm.at(i).at(k).get<double>();
    r.best_response_points[0] = j.at("best_response_points").at(0).get<Genome>();
    r.best_response_points[1] = j.at("best_response_points").at(1).get<Genome>();
    r.best_response_values = j.at("best_response_values").get<std::array<double, 2>>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.derived_seeds = j.at("derived_seeds").get<std::array<std::uint64_t, 3>>();
    r.generations = j.at("generations").get<int>();
    r.restarts = j.value("restarts", kSolverRestarts);
    return r;
}

namespace {

// Best of kSolverRestarts independent runs; ties keep the earliest restart.
GaResult multistart_maximize(const Objective& objective, const BoundsBox& bounds,
                             const GaParams& params, std::uint64_t role_seed) {
    GaResult best;
    for (int r = 0; r < kSolverRestarts; ++r) {
        GaParams p = params;
        p.seed = derive_seed(role_seed, static_cast<std::uint64_t>(r));
        GaResult run = ga_maximize(objective, bounds, p);
        if (r == 0 || run.best_value > best.best_value) best = std::move(run);
    }
    return best;
}

}  // namespace

GaResult best_response(const ProblemSpec& problem, std::size_t player, const GaParams& params) {
    if (player >= problem.objectives.size())
        throw DimensionError("best_response: player index out of range");
    const std::uint64_t role = derive_seed(
        params.seed, player == 0 ? kSeedTagBestResponse1 : kSeedTagBestResponse2);
    return multistart_maximize(problem.objectives[player].fn, problem.bounds, params, role);
}

PayoffMatrix payoff_matrix(const Objective& objective1, const Objective& objective2,
                           const Genome& x1_best, const Genome& x2_best) {
    PayoffMatrix m;
    const Objective* objs[2] = {&objective1, &objective2};
    const Genome* pts[2] = {&x1_best, &x2_best};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double v = (*objs[j])(*pts[i]);
            if (!std::isfinite(v))
                throw EvaluationError("payoff matrix: non-finite objective value", *pts[i]);
            m.p[i][j] = v;
        }
    }
    return m;
}

DisagreementPoint disagreement(const PayoffMatrix& p) {
    DisagreementPoint d;
    for (std::size_t j = 0; j < 2; ++j) d.y[j] = std::min(p.p[0][j], p.p[1][j]);
    return d;
}

double nash_product(const std::array<double, 2>& payoffs, const DisagreementPoint& d) {
    return (payoffs[0] - d.y[0]) * (payoffs[1] - d.y[1]);
}

namespace {
// Keeps every infeasible fitness strictly below every feasible one (feasible
// Nash products are >= 0 by construction).
constexpr double kInfeasibleOffset = 1.0e6;
}  // namespace

BargainResult nash_solve(const ProblemSpec& problem, const PayoffMatrix& p,
                         const DisagreementPoint& d, const GaParams& params,
                         std::vector<double>* best_history,
                         const std::vector<Genome>& candidates) {
    if (problem.objectives.size() != 2)
        throw DimensionError("nash_solve: exactly two objectives required");
    const auto& f1 = problem.objectives[0].fn;
    const auto& f2 = problem.objectives[1].fn;

    auto fitness = [&](const Genome& x) {
        const double y1 = f1(x);
        const double y2 = f2(x);
        const double v1 = std::max(0.0, d.y[0] - y1);
        const double v2 = std::max(0.0, d.y[1] - y2);
        if (v1 == 0.0 && v2 == 0.0) return nash_product({y1, y2}, d);
        return -(v1 + v2) - kInfeasibleOffset;
    };

    const GaResult ga =
        multistart_maximize(fitness, problem.bounds, params, derive_seed(params.seed, kSeedTagNash));
    if (best_history) *best_history = ga.best_history;  // winning restart's trace

    Genome best_genome = ga.best_genome;
    double best_fitness = ga.best_value;
    for (const auto& c : candidates) {
        const double v = fitness(c);
        if (v > best_fitness) {
            best_fitness = v;
            best_genome = c;
        }
    }

    if (best_fitness < 0.0)
        throw InfeasibilityError("nash_solve: no genome satisfied the disagreement constraints",
                                 best_genome);

    BargainResult result;
    result.x_best = best_genome;
    result.payoffs = {f1(best_genome), f2(best_genome)};
    result.nash_product = nash_product(result.payoffs, d);
    result.disagreement = d;
    result.payoff_matrix = p;
    result.base_seed = params.seed;
    result.derived_seeds = {derive_seed(params.seed, kSeedTagBestResponse1),
                            derive_seed(params.seed, kSeedTagBestResponse2),
                            derive_seed(params.seed, kSeedTagNash)};
    result.generations = params.generations;
    return result;
}

BargainResult bargain_solve(const ProblemSpec& problem, const GaParams& params) {
    if (problem.objectives.size() != 2)
        throw DimensionError("bargain_solve: exactly two objectives required");
    const GaResult r1 = best_response(problem, 0, params);
    const GaResult r2 = best_response(problem, 1, params);
    const PayoffMatrix p = payoff_matrix(problem.objectives[0].fn, problem.objectives[1].fn,
                                         r1.best_genome, r2.best_genome);
    const DisagreementPoint d = disagreement(p);
    BargainResult result =
        nash_solve(problem, p, d, params, nullptr, {r1.best_genome, r2.best_genome});
    result.best_response_points = {r1.best_genome, r2.best_genome};
    result.best_response_values = {r1.best_value, r2.best_value};
    return result;
}

}  // namespace furnace
