#ifndef FURNACE_MOO_HPP
#define FURNACE_MOO_HPP

#include <functional>
#include <string>
#include <vector>

#include "furnace/evolve.hpp"

namespace furnace {

struct NamedObjective {
    std::string name;
    Objective fn;
};

/// Bi-objective (or more) maximization problem over a box. Minimization
/// objectives enter negated at this boundary; everything downstream assumes
/// maximize-all.
struct ProblemSpec {
    std::vector<NamedObjective> objectives;
    BoundsBox bounds;

    std::size_t n_objectives() const { return objectives.size(); }

    /// Evaluates every objective; EvaluationError on a non-finite result.
    std::vector<double> evaluate(const Genome& g) const;
};

struct ParetoPoint {
    Genome genome;
    std::vector<double> objectives;
};
using ParetoFront = std::vector<ParetoPoint>;

struct RnsgaParams {
    GaParams base;
    std::vector<std::vector<double>> reference_points;
    double epsilon = 0.01;          // clearing radius, normalized objective units
    std::vector<double> weights;    // per objective, nonnegative, one positive

    void validate(std::size_t n_objectives) const;
};

/// True iff `a` is at least as large as `b` everywhere and strictly larger
/// somewhere (maximize-all).
bool dominates(const std::vector<double>& a, const std::vector<double>& b);

/// Deb's fast non-dominated sort. Returns rank-ordered index lists that
/// partition the population; order within a front follows input index.
/// StateError if any individual is unevaluated.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(const Population& pop);

/// Per-member crowding distance of one front. Boundary members per objective
/// get +infinity; interior members accumulate (next - prev)/(max - min);
/// a zero-range objective contributes 0; fronts of size <= 2 are all infinite.
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& front);

/// Weighted normalized Euclidean distance used by the reference-point
/// survivor stage: sqrt( sum_i w_i ((obj_i - ref_i)/(nadir_i - ideal_i))^2 ).
/// Zero-weight dimensions are skipped; a zero range in a weighted dimension
/// raises DegenerateVarianceError.
double normalized_ref_distance(const std::vector<double>& obj, const std::vector<double>& ref,
                               const std::vector<double>& weights,
                               const std::vector<double>& ideal, const std::vector<double>& nadir);

/// Exact hypervolume of a 2-objective point set against a reference point
/// (maximize convention). Dominated and out-of-range points contribute 0.
double hypervolume_2d(const std::vector<std::vector<double>>& points,
                      const std::vector<double>& ref);

struct Nsga2Result {
    Population population;
    ParetoFront front;  // rank-0 of the final population
};

/// Called after each generation with the current rank-0 front.
using GenerationObserver = std::function<void(int generation, const ParetoFront& front)>;

/// Standard NSGA-II: binary tournament on (rank, crowding), SBX, polynomial
/// mutation, (mu+lambda) survival by rank then crowding. Deterministic per
/// seed; ties on (rank, crowding) resolve by input index.
Nsga2Result nsga2_run(const ProblemSpec& problem, const GaParams& params,
                      const GenerationObserver& observer = nullptr);

/// One RNSGA-II survivor-selection pass over an evaluated pool: fronts in
/// rank order; within a front, members in preference order (best rank over
/// reference points of the normalized weighted distance) with
/// epsilon-clearing — once a member is selected, unselected members of the
/// same front within epsilon of it are demoted behind all non-cleared ones,
/// and demoted members fill any remaining quota afterwards. Ideal/nadir come
/// from the whole pool; a zero-range dimension is normalized by 1.
/// Returns the selected pool indices in selection order.
std::vector<std::size_t> rnsga2_survivor_selection(const Population& pool,
                                                   const RnsgaParams& params, std::size_t mu);

/// NSGA-II with the survivor stage and tournament preference replaced by the
/// reference-point scheme above. Deterministic per seed.
Population rnsga2_run(const ProblemSpec& problem, const RnsgaParams& params);

/// Writes one (x..., objectives...) row per point: x1,..,xN,Y1,..,YM.
void write_front_csv(const ParetoFront& front, const std::string& path);

/// Inverse of write_front_csv (used by the report re-emit path).
ParetoFront read_front_csv(const std::string& path, std::size_t n_vars, std::size_t n_objectives);

}  // namespace furnace

#endif
