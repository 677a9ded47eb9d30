#include "furnace/moo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "furnace/format.hpp"

namespace furnace {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> ProblemSpec::evaluate(const Genome& g) const {
    std::vector<double> out;
    out.reserve(objectives.size());
    for (const auto& o : objectives) {
        const double v = o.fn(g);
        if (!std::isfinite(v))
            throw EvaluationError("objective '" + o.name + "' returned a non-finite value", g);
        out.push_back(v);
    }
    return out;
}

void RnsgaParams::validate(std::size_t n_objectives) const {
    base.validate();
    if (reference_points.empty()) throw DomainError("rnsga params: at least one reference point");
    for (const auto& r : reference_points)
        if (r.size() != n_objectives)
            throw DimensionError("rnsga params: reference point arity mismatch");
    if (!(epsilon > 0)) throw DomainError("rnsga params: epsilon must be > 0");
    if (weights.size() != n_objectives)
        throw DimensionError("rnsga params: weights arity mismatch");
    bool any = false;
    for (double w : weights) {
        if (w < 0) throw DomainError("rnsga params: weights must be nonnegative");
        if (w > 0) any = true;
    }
    if (!any) throw DomainError("rnsga params: at least one weight must be positive");
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("dominates: objective arity mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(const Population& pop) {
    const std::size_t n = pop.size();
    for (const auto& ind : pop)
        if (!ind.evaluated()) throw StateError("non-dominated sort: unevaluated individual");

    std::vector<std::vector<std::size_t>> dominated_by(n);  // i -> those i dominates
    std::vector<std::size_t> count(n, 0);                   // how many dominate i
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pop[i].objectives, pop[j].objectives)) {
                dominated_by[i].push_back(j);
                ++count[j];
            } else if (dominates(pop[j].objectives, pop[i].objectives)) {
                dominated_by[j].push_back(i);
                ++count[i];
            }
        }
    }

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            for (std::size_t j : dominated_by[i]) {
                if (--count[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());  // stable order by input index
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& front) {
    const std::size_t n = front.size();
    if (n == 0) throw InsufficientDataError("crowding distance of an empty front");
    if (n <= 2) return std::vector<double>(n, kInf);

    const std::size_t m = front[0].size();
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return front[a][obj] < front[b][obj];
        });
        const double range = front[order[n - 1]][obj] - front[order[0]][obj];
        dist[order[0]] = dist[order[n - 1]] = kInf;
        if (range <= 0) continue;  // zero-range objective contributes nothing
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (dist[order[k]] == kInf) continue;
            dist[order[k]] += (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / range;
        }
    }
    return dist;
}

double normalized_ref_distance(const std::vector<double>& obj, const std::vector<double>& ref,
                               const std::vector<double>& weights,
                               const std::vector<double>& ideal, const std::vector<double>& nadir) {
    const std::size_t m = obj.size();
    if (ref.size() != m || weights.size() != m || ideal.size() != m || nadir.size() != m)
        throw DimensionError("normalized_ref_distance: arity mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (weights[i] == 0.0) continue;
        const double range = nadir[i] - ideal[i];
        if (!(range > 0))
            throw DegenerateVarianceError(
                "normalized_ref_distance: zero range in weighted objective " + std::to_string(i));
        const double d = (obj[i] - ref[i]) / range;
        acc += weights[i] * d * d;
    }
    return std::sqrt(acc);
}

double hypervolume_2d(const std::vector<std::vector<double>>& points,
                      const std::vector<double>& ref) {
    if (ref.size() != 2) throw DimensionError("hypervolume_2d: reference must be 2-dimensional");
    std::vector<std::vector<double>> pts;
    for (const auto& p : points) {
        if (p.size() != 2) throw DimensionError("hypervolume_2d: points must be 2-dimensional");
        if (p[0] > ref[0] && p[1] > ref[1]) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a[0] > b[0] || (a[0] == b[0] && a[1] > b[1]);
    });
    double hv = 0.0;
    double prev_y = ref[1];
    for (const auto& p : pts) {
        if (p[1] > prev_y) {
            hv += (p[0] - ref[0]) * (p[1] - prev_y);
            prev_y = p[1];
        }
    }
    return hv;
}

namespace {

Population init_population(const ProblemSpec& problem, int size, RngStream& rng) {
    const std::size_t dims = problem.bounds.size();
    Population pop;
    pop.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        Genome g(dims);
        for (std::size_t d = 0; d < dims; ++d)
            g[d] = rng.uniform(problem.bounds.lower(d), problem.bounds.upper(d));
        pop.push_back({std::move(g), {}});
    }
    for (auto& ind : pop) ind.objectives = problem.evaluate(ind.genome);
    return pop;
}

Population make_offspring(const Population& pop, const ProblemSpec& problem,
                          const GaParams& params, RngStream& rng,
                          const std::function<bool(std::size_t, std::size_t)>& better) {
    Population offspring;
    offspring.reserve(static_cast<std::size_t>(params.offspring_size));
    while (static_cast<int>(offspring.size()) < params.offspring_size) {
        const std::size_t i1 = tournament_select_index(pop.size(), better, rng);
        const std::size_t i2 = tournament_select_index(pop.size(), better, rng);
        auto [c1, c2] = sbx_crossover(pop[i1].genome, pop[i2].genome, params.eta_crossover,
                                      params.crossover_probability, problem.bounds, rng);
        c1 = polynomial_mutation(c1, params.eta_mutation, params.mutation_probability,
                                 problem.bounds, rng);
        c2 = polynomial_mutation(c2, params.eta_mutation, params.mutation_probability,
                                 problem.bounds, rng);
        offspring.push_back({std::move(c1), {}});
        if (static_cast<int>(offspring.size()) < params.offspring_size)
            offspring.push_back({std::move(c2), {}});
    }
    for (auto& ind : offspring) ind.objectives = problem.evaluate(ind.genome);
    return offspring;
}

ParetoFront extract_front(const Population& pop, const std::vector<std::size_t>& indices) {
    ParetoFront front;
    front.reserve(indices.size());
    for (auto i : indices) front.push_back({pop[i].genome, pop[i].objectives});
    return front;
}

struct RankCrowd {
    std::vector<std::size_t> rank;
    std::vector<double> crowd;
};

RankCrowd rank_and_crowding(const Population& pop) {
    RankCrowd rc;
    rc.rank.assign(pop.size(), 0);
    rc.crowd.assign(pop.size(), 0.0);
    const auto fronts = fast_nondominated_sort(pop);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        std::vector<std::vector<double>> objs;
        objs.reserve(fronts[f].size());
        for (auto i : fronts[f]) objs.push_back(pop[i].objectives);
        const auto cd = crowding_distance(objs);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            rc.rank[fronts[f][k]] = f;
            rc.crowd[fronts[f][k]] = cd[k];
        }
    }
    return rc;
}

}  // namespace

Nsga2Result nsga2_run(const ProblemSpec& problem, const GaParams& params,
                      const GenerationObserver& observer) {
    params.validate();
    if (problem.n_objectives() < 2)
        throw DomainError("nsga2 requires at least two objectives");
    RngStream rng(params.seed);

    Population pop = init_population(problem, params.population_size, rng);
    RankCrowd rc = rank_and_crowding(pop);

    for (int gen = 0; gen < params.generations; ++gen) {
        auto better = [&](std::size_t i, std::size_t j) {
            if (rc.rank[i] != rc.rank[j]) return rc.rank[i] < rc.rank[j];
            return rc.crowd[i] > rc.crowd[j];
        };
        Population offspring = make_offspring(pop, problem, params, rng, better);

        Population combined = std::move(pop);
        for (auto& ind : offspring) combined.push_back(std::move(ind));

        const auto fronts = fast_nondominated_sort(combined);
        const auto mu = static_cast<std::size_t>(params.population_size);
        Population next;
        next.reserve(mu);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= mu) {
                for (auto i : front) next.push_back(combined[i]);
            } else {
                std::vector<std::vector<double>> objs;
                objs.reserve(front.size());
                for (auto i : front) objs.push_back(combined[i].objectives);
                const auto cd = crowding_distance(objs);
                std::vector<std::size_t> pos(front.size());
                std::iota(pos.begin(), pos.end(), 0);
                std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
                    if (cd[a] != cd[b]) return cd[a] > cd[b];
                    return front[a] < front[b];
                });
                for (auto p : pos) {
                    if (next.size() == mu) break;
                    next.push_back(combined[front[p]]);
                }
            }
            if (next.size() == mu) break;
        }
        pop = std::move(next);
        rc = rank_and_crowding(pop);

        if (observer) observer(gen + 1, extract_front(pop, fast_nondominated_sort(pop)[0]));
    }

    Nsga2Result result;
    result.front = extract_front(pop, fast_nondominated_sort(pop)[0]);
    result.population = std::move(pop);
    return result;
}

namespace {

struct ObjectiveScale {
    std::vector<double> ideal;
    std::vector<double> nadir;
};

// Pool-wide ideal/nadir; any degenerate dimension gets unit range so the
// normalized distance stays defined while the pool is collapsed.
ObjectiveScale pool_scale(const Population& pop, std::size_t m) {
    ObjectiveScale s;
    s.ideal.assign(m, kInf);
    s.nadir.assign(m, -kInf);
    for (const auto& ind : pop) {
        for (std::size_t i = 0; i < m; ++i) {
            s.ideal[i] = std::min(s.ideal[i], ind.objectives[i]);
            s.nadir[i] = std::max(s.nadir[i], ind.objectives[i]);
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        if (!(s.nadir[i] - s.ideal[i] > 0)) s.nadir[i] = s.ideal[i] + 1.0;
    return s;
}

// Preference rank per front member: best rank over reference points of the
// normalized weighted distance, ties by global index.
std::vector<std::size_t> preference_ranks(const Population& pop,
                                          const std::vector<std::size_t>& front,
                                          const RnsgaParams& params, const ObjectiveScale& scale) {
    const std::size_t k = front.size();
    std::vector<std::size_t> pref(k, std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> order(k);
    for (const auto& ref : params.reference_points) {
        std::vector<double> d(k);
        for (std::size_t p = 0; p < k; ++p)
            d[p] = normalized_ref_distance(pop[front[p]].objectives, ref, params.weights,
                                           scale.ideal, scale.nadir);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (d[a] != d[b]) return d[a] < d[b];
            return front[a] < front[b];
        });
        for (std::size_t r = 0; r < k; ++r) pref[order[r]] = std::min(pref[order[r]], r);
    }
    return pref;
}

double pairwise_normalized_distance(const std::vector<double>& a, const std::vector<double>& b,
                                    const RnsgaParams& params, const ObjectiveScale& scale) {
    return normalized_ref_distance(a, b, params.weights, scale.ideal, scale.nadir);
}

// Preference-ordered selection with epsilon-clearing. Cleared members are
// demoted behind every non-cleared one, then used as fill-up if the quota
// is still open.
std::vector<std::size_t> select_with_clearing(const Population& pop,
                                              const std::vector<std::size_t>& front,
                                              const std::vector<std::size_t>& pref,
                                              std::size_t quota, const RnsgaParams& params,
                                              const ObjectiveScale& scale) {
    const std::size_t k = front.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pref[a] != pref[b]) return pref[a] < pref[b];
        return front[a] < front[b];
    });

    std::vector<char> taken(k, 0), demoted(k, 0);
    std::vector<std::size_t> selected;
    selected.reserve(std::min(quota, k));
    while (selected.size() < quota) {
        std::size_t pick = k;
        for (auto p : order) {
            if (!taken[p] && !demoted[p]) {
                pick = p;
                break;
            }
        }
        if (pick == k) break;  // everyone left is demoted
        taken[pick] = 1;
        selected.push_back(front[pick]);
        for (auto q : order) {
            if (taken[q] || demoted[q]) continue;
            if (pairwise_normalized_distance(pop[front[pick]].objectives,
                                             pop[front[q]].objectives, params,
                                             scale) <= params.epsilon)
                demoted[q] = 1;
        }
    }
    for (auto p : order) {
        if (selected.size() == quota) break;
        if (!taken[p]) {
            taken[p] = 1;
            selected.push_back(front[p]);
        }
    }
    return selected;
}

}  // namespace

std::vector<std::size_t> rnsga2_survivor_selection(const Population& pool,
                                                   const RnsgaParams& params, std::size_t mu) {
    if (pool.empty()) throw InsufficientDataError("survivor selection over an empty pool");
    const std::size_t m = pool[0].objectives.size();
    params.validate(m);
    const auto fronts = fast_nondominated_sort(pool);
    const auto scale = pool_scale(pool, m);
    std::vector<std::size_t> selected;
    selected.reserve(std::min(mu, pool.size()));
    for (const auto& front : fronts) {
        if (selected.size() == mu) break;
        const auto fp = preference_ranks(pool, front, params, scale);
        const auto chosen =
            select_with_clearing(pool, front, fp, mu - selected.size(), params, scale);
        selected.insert(selected.end(), chosen.begin(), chosen.end());
    }
    return selected;
}

Population rnsga2_run(const ProblemSpec& problem, const RnsgaParams& params) {
    const std::size_t m = problem.n_objectives();
    params.validate(m);
    if (m < 2) throw DomainError("rnsga2 requires at least two objectives");
    RngStream rng(params.base.seed);

    Population pop = init_population(problem, params.base.population_size, rng);

    // (rank, preference) of the current parents, for tournament selection.
    std::vector<std::size_t> rank(pop.size(), 0), pref(pop.size(), 0);
    auto refresh_parent_ranks = [&]() {
        const auto fronts = fast_nondominated_sort(pop);
        const auto scale = pool_scale(pop, m);
        rank.assign(pop.size(), 0);
        pref.assign(pop.size(), 0);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            const auto fp = preference_ranks(pop, fronts[f], params, scale);
            for (std::size_t p = 0; p < fronts[f].size(); ++p) {
                rank[fronts[f][p]] = f;
                pref[fronts[f][p]] = fp[p];
            }
        }
    };
    refresh_parent_ranks();

    for (int gen = 0; gen < params.base.generations; ++gen) {
        auto better = [&](std::size_t i, std::size_t j) {
            if (rank[i] != rank[j]) return rank[i] < rank[j];
            return pref[i] < pref[j];
        };
        Population offspring = make_offspring(pop, problem, params.base, rng, better);

        Population combined = std::move(pop);
        for (auto& ind : offspring) combined.push_back(std::move(ind));

        const auto mu = static_cast<std::size_t>(params.base.population_size);
        const auto chosen = rnsga2_survivor_selection(combined, params, mu);
        Population next;
        next.reserve(mu);
        for (auto i : chosen) next.push_back(combined[i]);
        pop = std::move(next);
        refresh_parent_ranks();
    }
    return pop;
}

void write_front_csv(const ParetoFront& front, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (front.empty()) throw InsufficientDataError("cannot write an empty front: " + path);
    const std::size_t nx = front[0].genome.size();
    const std::size_t ny = front[0].objectives.size();
    for (std::size_t i = 0; i < nx; ++i) out << 'x' << (i + 1) << ',';
    for (std::size_t i = 0; i < ny; ++i) out << 'Y' << (i + 1) << (i + 1 < ny ? "," : "\n");
    for (const auto& p : front) {
        for (std::size_t i = 0; i < nx; ++i) out << fmt_double(p.genome[i]) << ',';
        for (std::size_t i = 0; i < ny; ++i)
            out << fmt_double(p.objectives[i]) << (i + 1 < ny ? "," : "\n");
    }
    if (!out) throw IoError("write failed: " + path);
}

ParetoFront read_front_csv(const std::string& path, std::size_t n_vars,
                           std::size_t n_objectives) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError("empty front file: " + path);

    ParetoFront front;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        ParetoPoint p;
        for (std::size_t i = 0; i < n_vars; ++i) {
            if (!std::getline(ss, cell, ',')) throw SchemaError("short front row in " + path);
            p.genome.push_back(std::stod(cell));
        }
        for (std::size_t i = 0; i < n_objectives; ++i) {
            if (!std::getline(ss, cell, ',')) throw SchemaError("short front row in " + path);
            p.objectives.push_back(std::stod(cell));
        }
        front.push_back(std::move(p));
    }
    return front;
}

}  // namespace furnace
