#include "furnace/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "furnace/format.hpp"

namespace furnace {

void GaParams::validate() const {
    if (population_size < 2) throw DomainError("ga params: population_size must be >= 2");
    if (offspring_size < 1) throw DomainError("ga params: offspring_size must be >= 1");
    if (crossover_probability < 0 || crossover_probability > 1 || mutation_probability < 0 ||
        mutation_probability > 1)
        throw DomainError("ga params: probabilities must lie in [0, 1]");
    if (!(eta_crossover > 0) || !(eta_mutation > 0))
        throw DomainError("ga params: eta values must be > 0");
    if (generations < 0) throw DomainError("ga params: generations must be >= 0");
}

std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta,
                                        double crossover_probability, const BoundsBox& bounds,
                                        RngStream& rng) {
    if (p1.size() != bounds.size() || p2.size() != bounds.size())
        throw DimensionError("sbx: parent arity does not match bounds");
    if (!bounds.contains(p1) || !bounds.contains(p2))
        throw BoundsError("sbx: parent outside bounds");

    if (!(rng.uniform() < crossover_probability)) return {p1, p2};

    Genome c1 = p1, c2 = p2;
    const double exp = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const double u = rng.uniform();
        const double beta =
            u <= 0.5 ? std::pow(2.0 * u, exp) : std::pow(1.0 / (2.0 * (1.0 - u)), exp);
        c1[i] = bounds.clip(i, 0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]));
        c2[i] = bounds.clip(i, 0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]));
    }
    return {std::move(c1), std::move(c2)};
}

Genome polynomial_mutation(const Genome& x, double eta, double mutation_probability,
                           const BoundsBox& bounds, RngStream& rng) {
    if (x.size() != bounds.size()) throw DimensionError("mutation: arity does not match bounds");
    if (!bounds.contains(x)) throw BoundsError("mutation: input outside bounds");

    Genome out = x;
    const double mut_pow = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(rng.uniform() < mutation_probability)) continue;
        const double lo = bounds.lower(i), hi = bounds.upper(i);
        const double range = hi - lo;
        const double d1 = (x[i] - lo) / range;
        const double d2 = (hi - x[i]) / range;
        const double r = rng.uniform();
        double deltaq;
        if (r <= 0.5) {
            const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, eta + 1.0);
            deltaq = std::pow(v, mut_pow) - 1.0;
        } else {
            const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            deltaq = 1.0 - std::pow(v, mut_pow);
        }
        out[i] = bounds.clip(i, x[i] + deltaq * range);
    }
    return out;
}

std::size_t tournament_select_index(std::size_t n,
                                    const std::function<bool(std::size_t, std::size_t)>& better,
                                    RngStream& rng) {
    if (n == 0) throw InsufficientDataError("tournament over an empty population");
    const std::size_t a = rng.index(n);
    const std::size_t b = rng.index(n);
    if (better(a, b)) return a;
    if (better(b, a)) return b;
    return rng.uniform() < 0.5 ? a : b;
}

const Individual& tournament_select(const Population& pop, const Comparator& better,
                                    RngStream& rng) {
    const std::size_t k = tournament_select_index(
        pop.size(), [&](std::size_t i, std::size_t j) { return better(pop[i], pop[j]); }, rng);
    return pop[k];
}

namespace {

double checked_eval(const Objective& objective, const Genome& g) {
    const double v = objective(g);
    if (!std::isfinite(v)) throw EvaluationError("objective returned a non-finite value", g);
    return v;
}

}  // namespace

GaResult ga_maximize(const Objective& objective, const BoundsBox& bounds, const GaParams& params) {
    params.validate();
    RngStream rng(params.seed);
    const std::size_t dims = bounds.size();

    struct Scored {
        Genome genome;
        double fitness;
    };
    std::vector<Scored> pop;
    pop.reserve(static_cast<std::size_t>(params.population_size));
    for (int i = 0; i < params.population_size; ++i) {
        Genome g(dims);
        for (std::size_t d = 0; d < dims; ++d) g[d] = rng.uniform(bounds.lower(d), bounds.upper(d));
        pop.push_back({std::move(g), 0.0});
    }
    for (auto& s : pop) s.fitness = checked_eval(objective, s.genome);

    auto best_of = [](const std::vector<Scored>& v) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i].fitness > v[k].fitness) k = i;
        return k;
    };

    GaResult result;
    {
        const std::size_t k = best_of(pop);
        result.best_genome = pop[k].genome;
        result.best_value = pop[k].fitness;
    }
    result.best_history.reserve(static_cast<std::size_t>(params.generations));

    for (int gen = 0; gen < params.generations; ++gen) {
        std::vector<Scored> offspring;
        offspring.reserve(static_cast<std::size_t>(params.offspring_size));
        while (static_cast<int>(offspring.size()) < params.offspring_size) {
            auto pick = [&]() -> const Genome& {
                const std::size_t k = tournament_select_index(
                    pop.size(),
                    [&](std::size_t i, std::size_t j) { return pop[i].fitness > pop[j].fitness; },
                    rng);
                return pop[k].genome;
            };
            const Genome& p1 = pick();
            const Genome& p2 = pick();
            auto [c1, c2] = sbx_crossover(p1, p2, params.eta_crossover,
                                          params.crossover_probability, bounds, rng);
            c1 = polynomial_mutation(c1, params.eta_mutation, params.mutation_probability, bounds,
                                     rng);
            c2 = polynomial_mutation(c2, params.eta_mutation, params.mutation_probability, bounds,
                                     rng);
            offspring.push_back({std::move(c1), 0.0});
            if (static_cast<int>(offspring.size()) < params.offspring_size)
                offspring.push_back({std::move(c2), 0.0});
        }
        for (auto& s : offspring) s.fitness = checked_eval(objective, s.genome);

        // (mu+lambda) elitist truncation; stable, parents ahead of offspring
        // on equal fitness.
        std::vector<Scored> combined = std::move(pop);
        for (auto& s : offspring) combined.push_back(std::move(s));
        std::stable_sort(combined.begin(), combined.end(),
                         [](const Scored& a, const Scored& b) { return a.fitness > b.fitness; });
        combined.resize(static_cast<std::size_t>(params.population_size));
        pop = std::move(combined);

        if (pop[0].fitness > result.best_value) {
            result.best_value = pop[0].fitness;
            result.best_genome = pop[0].genome;
        }
        result.best_history.push_back(result.best_value);
    }

    result.final_population.reserve(pop.size());
    for (auto& s : pop)
        result.final_population.push_back({std::move(s.genome), {s.fitness}});
    return result;
}

void write_convergence_csv(const std::vector<double>& best_history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "generation,best_value\n";
    for (std::size_t g = 0; g < best_history.size(); ++g)
        out << (g + 1) << ',' << fmt_double(best_history[g]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace furnace
