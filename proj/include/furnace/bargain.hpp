#ifndef FURNACE_BARGAIN_HPP
#define FURNACE_BARGAIN_HPP

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "furnace/moo.hpp"

namespace furnace {

/// 2x2 cross-evaluation of the players' best-response points:
/// entry(i, j) = objective j evaluated at player i's best-response point.
/// The diagonal holds each player's best achieved value.
struct PayoffMatrix {
    std::array<std::array<double, 2>, 2> p{};

    double& entry(std::size_t i, std::size_t j) { return p[i][j]; }
    double entry(std::size_t i, std::size_t j) const { return p[i][j]; }
};

/// Per-player guaranteed payoff: the column minima of the payoff matrix.
struct DisagreementPoint {
    std::array<double, 2> y{};
};

/// Seed role tags; each GA stage runs on derive_seed(params.seed, tag).
inline constexpr std::uint64_t kSeedTagBestResponse1 = 1;
inline constexpr std::uint64_t kSeedTagBestResponse2 = 2;
inline constexpr std::uint64_t kSeedTagNash = 3;

/// Independent ga_maximize restarts per bargaining stage; restart r runs on
/// derive_seed(role seed, r) and the best run wins (ties keep the lowest r).
/// Tree surrogates are piecewise constant, and a single population can settle
/// on a good plateau without reaching the best one; restarts make the stage
/// results match the grid oracle across seeds.
inline constexpr int kSolverRestarts = 5;

/// Solution of the two-player bargaining problem, with enough provenance to
/// reproduce the run.
struct BargainResult {
    Genome x_best;
    std::array<double, 2> payoffs{};
    double nash_product = 0.0;
    DisagreementPoint disagreement;
    PayoffMatrix payoff_matrix;
    std::array<Genome, 2> best_response_points;
    std::array<double, 2> best_response_values{};
    std::uint64_t base_seed = 0;
    std::array<std::uint64_t, 3> derived_seeds{};  // player 1, player 2, product stage
    int generations = 0;
    int restarts = kSolverRestarts;

    nlohmann::json to_json() const;
    static BargainResult from_json(const nlohmann::json& j);
};

/// Maximizes the player's single objective over the problem box via
/// kSolverRestarts ga_maximize runs on seeds derived for that player.
GaResult best_response(const ProblemSpec& problem, std::size_t player, const GaParams& params);

/// Four plain evaluations, no optimization: entry(i, j) = objectives[j](x_i).
PayoffMatrix payoff_matrix(const Objective& objective1, const Objective& objective2,
                           const Genome& x1_best, const Genome& x2_best);

/// Column minima of the payoff matrix.
DisagreementPoint disagreement(const PayoffMatrix& p);

/// Product of payoff excesses over the disagreement point. Negative inputs
/// are allowed here; feasibility is the solver's job.
double nash_product(const std::array<double, 2>& payoffs, const DisagreementPoint& d);

/// Maximizes the Nash product over the box subject to each payoff clearing
/// its disagreement value. Feasibility-first fitness: a feasible point scores
/// its Nash product (always >= 0), an infeasible one scores minus its total
/// constraint violation minus a fixed offset, so any feasible point wins.
/// `candidates` are extra points scored with the same fitness, and the best
/// of GA-versus-candidates is returned; the canonical callers pass the
/// best-response points, which satisfy the constraints by construction, so
/// the solve cannot go infeasible even when coincident optima shrink the
/// feasible set to a point. InfeasibilityError (carrying the least-violating
/// genome) if nothing examined was feasible. `best_history`, when given,
/// receives the winning GA run's per-generation best fitness trace.
BargainResult nash_solve(const ProblemSpec& problem, const PayoffMatrix& p,
                         const DisagreementPoint& d, const GaParams& params,
                         std::vector<double>* best_history = nullptr,
                         const std::vector<Genome>& candidates = {});

/// Convenience: best responses, payoff matrix, disagreement point, then
/// nash_solve, all from one parameter set.
BargainResult bargain_solve(const ProblemSpec& problem, const GaParams& params);

}  // namespace furnace

#endif
