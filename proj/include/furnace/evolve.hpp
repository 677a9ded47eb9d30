#ifndef FURNACE_EVOLVE_HPP
#define FURNACE_EVOLVE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "furnace/bounds.hpp"
#include "furnace/errors.hpp"
#include "furnace/rng.hpp"

namespace furnace {

using Genome = std::vector<double>;
using Objective = std::function<double(const Genome&)>;

/// Real-coded decision vector plus its evaluated objective values
/// (empty until evaluated).
struct Individual {
    Genome genome;
    std::vector<double> objectives;

    bool evaluated() const { return !objectives.empty(); }
};

using Population = std::vector<Individual>;

struct GaParams {
    int population_size = 40;
    int offspring_size = 10;
    double crossover_probability = 0.9;
    double eta_crossover = 15.0;
    double mutation_probability = 0.1;  // per variable
    double eta_mutation = 20.0;
    int generations = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Simulated binary crossover (bounded, clip-to-bounds variant).
///
/// Draw order: one gate draw u; if u > crossover_probability the parents are
/// returned unchanged. Otherwise one draw per variable produces the spread
/// factor beta (u <= 1/2: beta = (2u)^(1/(eta+1)); else (1/(2(1-u)))^(1/(eta+1))),
/// and the children 0.5[(1 +- beta) p1 + (1 -+ beta) p2] are clipped to bounds.
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta,
                                        double crossover_probability, const BoundsBox& bounds,
                                        RngStream& rng);

/// Bounded polynomial mutation.
///
/// Draw order per variable: one gate draw (mutates iff draw < probability),
/// then one perturbation draw. The perturbation law contracts near the
/// bounds, and the result is clipped, so output always stays inside the box.
Genome polynomial_mutation(const Genome& x, double eta, double mutation_probability,
                           const BoundsBox& bounds, RngStream& rng);

/// True iff `a` is strictly better than `b`. A tie is both directions false.
using Comparator = std::function<bool(const Individual&, const Individual&)>;

/// Binary tournament: two uniform index draws with replacement, the
/// comparator winner is returned; an exact tie costs one extra coin draw.
const Individual& tournament_select(const Population& pop, const Comparator& better,
                                    RngStream& rng);

/// Index-based twin of tournament_select for callers whose ranking data
/// lives outside the Individual (same draw order).
std::size_t tournament_select_index(std::size_t n,
                                    const std::function<bool(std::size_t, std::size_t)>& better,
                                    RngStream& rng);

struct GaResult {
    Genome best_genome;
    double best_value = 0.0;
    std::vector<double> best_history;  // best-ever value after each generation
    Population final_population;
};

/// Single-objective elitist (mu+lambda) GA over a box.
///
/// Initialization draws population_size genomes (individual-major,
/// variable-minor). Each generation: offspring_size children from binary
/// tournaments + SBX + polynomial mutation, then truncation of
/// parents+offspring to population_size by fitness (stable; parents first on
/// ties). Evaluations run in genome index order, so results are identical
/// for a given seed regardless of host parallelism. EvaluationError if the
/// objective returns a non-finite value.
GaResult ga_maximize(const Objective& objective, const BoundsBox& bounds, const GaParams& params);

/// Appends (generation, best_value) rows; writes a header when creating.
void write_convergence_csv(const std::vector<double>& best_history, const std::string& path);

}  // namespace furnace

#endif
