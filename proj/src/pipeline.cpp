#include "furnace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "furnace/format.hpp"

namespace fs = std::filesystem;

namespace furnace {

namespace {

const std::vector<std::string> kFeatureNames = {"fired_duty", "throughput", "cit"};
const std::vector<std::string> kTargetNames = {"absorbed_duty", "stack_o2", "cot"};
const std::vector<std::string> kObjectiveNames = {"absorbed_duty", "cot"};

[[noreturn]] void rethrow_tagged(const std::string& tag, const Error& e) {
    const std::string msg = "[" + tag + "] " + e.what();
    if (const auto* inf = dynamic_cast<const InfeasibilityError*>(&e))
        throw InfeasibilityError(msg, inf->genome);
    switch (e.kind()) {
        case ErrorKind::schema: throw SchemaError(msg);
        case ErrorKind::model_quality: throw ModelQualityError(msg);
        case ErrorKind::infeasible: throw InfeasibilityError(msg, {});
        case ErrorKind::io: throw IoError(msg);
        default: throw Error(msg);
    }
}

template <typename F>
auto stage(const std::string& tag, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_tagged(tag, e);
    }
}

void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                const std::string& context) {
    if (!j.is_object()) throw SchemaError("config: " + context + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaError("config: unknown key '" + key + "' in " + context);
    }
}

nlohmann::json bounds_to_json(const BoundsBox& b) {
    return {{"fired_duty", {b.lower(0), b.upper(0)}},
            {"throughput", {b.lower(1), b.upper(1)}},
            {"cit", {b.lower(2), b.upper(2)}}};
}

BoundsBox bounds_from_json(const nlohmann::json& j) {
    check_keys(j, kFeatureNames, "bounds");
    std::vector<double> lo, hi;
    for (const auto& name : kFeatureNames) {
        if (!j.contains(name)) throw SchemaError("config: bounds missing '" + name + "'");
        const auto& pair = j.at(name);
        if (!pair.is_array() || pair.size() != 2)
            throw SchemaError("config: bounds '" + name + "' must be [lower, upper]");
        lo.push_back(pair.at(0).get<double>());
        hi.push_back(pair.at(1).get<double>());
    }
    return BoundsBox(std::move(lo), std::move(hi));
}

nlohmann::json surface_to_json(const QuadraticSurface& s) {
    return {{"constant", s.constant},
            {"linear", s.linear},
            {"quadratic", s.quadratic},
            {"cross", s.cross}};
}

QuadraticSurface surface_from_json(const nlohmann::json& j) {
    check_keys(j, {"constant", "linear", "quadratic", "cross"}, "surface");
    QuadraticSurface s;
    s.constant = j.value("constant", 0.0);
    if (j.contains("linear")) s.linear = j.at("linear").get<std::array<double, 3>>();
    if (j.contains("quadratic")) s.quadratic = j.at("quadratic").get<std::array<double, 3>>();
    if (j.contains("cross")) s.cross = j.at("cross").get<std::array<double, 3>>();
    return s;
}

nlohmann::json synthetic_to_json(const SyntheticSpec& s) {
    return {{"samples", s.samples},
            {"seed", s.seed},
            {"bounds", bounds_to_json(s.bounds)},
            {"surfaces",
             {{"absorbed_duty", surface_to_json(s.absorbed_duty)},
              {"cot", surface_to_json(s.cot)},
              {"stack_o2", surface_to_json(s.stack_o2)}}},
            {"noise_sd",
             {{"absorbed_duty", s.noise_sd_absorbed_duty},
              {"cot", s.noise_sd_cot},
              {"stack_o2", s.noise_sd_stack_o2}}}};
}

SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
    check_keys(j, {"samples", "seed", "bounds", "surfaces", "noise_sd"}, "data.synthetic");
    SyntheticSpec s;
    s.samples = j.at("samples").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.bounds = bounds_from_json(j.at("bounds"));
    const auto& surf = j.at("surfaces");
    check_keys(surf, {"absorbed_duty", "cot", "stack_o2"}, "data.synthetic.surfaces");
    s.absorbed_duty = surface_from_json(surf.at("absorbed_duty"));
    s.cot = surface_from_json(surf.at("cot"));
    s.stack_o2 = surface_from_json(surf.at("stack_o2"));
    if (j.contains("noise_sd")) {
        const auto& nz = j.at("noise_sd");
        check_keys(nz, {"absorbed_duty", "cot", "stack_o2"}, "data.synthetic.noise_sd");
        s.noise_sd_absorbed_duty = nz.value("absorbed_duty", 0.0);
        s.noise_sd_cot = nz.value("cot", 0.0);
        s.noise_sd_stack_o2 = nz.value("stack_o2", 0.0);
    }
    return s;
}

nlohmann::json cart_to_json(const CartParams& c) {
    return {{"max_depth", c.max_depth},
            {"min_samples_leaf", c.min_samples_leaf},
            {"min_samples_split", c.min_samples_split}};
}

CartParams cart_from_json(const nlohmann::json& j, const CartParams& base) {
    check_keys(j, {"max_depth", "min_samples_leaf", "min_samples_split", "per_target"}, "cart");
    CartParams c = base;
    c.max_depth = j.value("max_depth", c.max_depth);
    c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
    c.min_samples_split = j.value("min_samples_split", c.min_samples_split);
    return c;
}

}  // namespace

CartParams PipelineConfig::cart_for(const std::string& target) const {
    auto it = cart_per_target.find(target);
    return it == cart_per_target.end() ? cart : it->second;
}

void PipelineConfig::validate() const {
    if (csv_path.empty() == !synthetic.has_value())
        throw SchemaError("config: data must name exactly one of csv or synthetic");
    if (!(test_fraction > 0 && test_fraction < 1))
        throw SchemaError("config: split.test_fraction must lie in (0, 1)");
    if (bounds.size() != 3) throw SchemaError("config: bounds must cover the three variables");
    cart.validate();
    for (const auto& [k, v] : cart_per_target) v.validate();
    ga.validate();
    RnsgaParams rp{ga, reference_points, rnsga_epsilon, rnsga_weights};
    rp.validate(2);
    if (oracle_resolution < 2) throw SchemaError("config: oracle_resolution must be >= 2");
    if (synthetic) synthetic->validate();
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json data;
    if (synthetic)
        data = {{"synthetic", synthetic_to_json(*synthetic)}};
    else
        data = {{"csv", csv_path}};

    nlohmann::json cart_j = cart_to_json(cart);
    if (!cart_per_target.empty()) {
        nlohmann::json pt;
        for (const auto& [k, v] : cart_per_target) pt[k] = cart_to_json(v);
        cart_j["per_target"] = pt;
    }

    return {{"data", data},
            {"split", {{"test_fraction", test_fraction}, {"seed", split_seed}}},
            {"cart", cart_j},
            {"test_r2_threshold", test_r2_threshold},
            {"bounds", bounds_to_json(bounds)},
            {"ga",
             {{"population_size", ga.population_size},
              {"offspring_size", ga.offspring_size},
              {"crossover_probability", ga.crossover_probability},
              {"eta_crossover", ga.eta_crossover},
              {"mutation_probability", ga.mutation_probability},
              {"eta_mutation", ga.eta_mutation},
              {"generations", ga.generations},
              {"seed", ga.seed}}},
            {"rnsga",
             {{"reference_points", reference_points},
              {"epsilon", rnsga_epsilon},
              {"weights", rnsga_weights}}},
            {"oracle_resolution", oracle_resolution},
            {"output_dir", output_dir}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    check_keys(j,
               {"data", "split", "cart", "test_r2_threshold", "bounds", "ga", "rnsga",
                "oracle_resolution", "output_dir"},
               "top level");
    PipelineConfig c = default_config();

    if (j.contains("data")) {
        const auto& data = j.at("data");
        check_keys(data, {"csv", "synthetic"}, "data");
        if (data.contains("csv") == data.contains("synthetic"))
            throw SchemaError("config: data must name exactly one of csv or synthetic");
        if (data.contains("csv")) {
            c.csv_path = data.at("csv").get<std::string>();
            c.synthetic.reset();
        } else {
            c.synthetic = synthetic_from_json(data.at("synthetic"));
            c.csv_path.clear();
        }
    }
    if (j.contains("split")) {
        const auto& split = j.at("split");
        check_keys(split, {"test_fraction", "seed"}, "split");
        c.test_fraction = split.value("test_fraction", c.test_fraction);
        c.split_seed = split.value("seed", c.split_seed);
    }
    if (j.contains("cart")) {
        const auto& cart = j.at("cart");
        c.cart = cart_from_json(cart, c.cart);
        c.cart_per_target.clear();
        if (cart.contains("per_target")) {
            for (const auto& [target, params] : cart.at("per_target").items()) {
                if (std::find(kTargetNames.begin(), kTargetNames.end(), target) ==
                    kTargetNames.end())
                    throw SchemaError("config: cart.per_target names unknown target '" + target +
                                      "'");
                c.cart_per_target[target] = cart_from_json(params, c.cart);
            }
        }
    }
    c.test_r2_threshold = j.value("test_r2_threshold", c.test_r2_threshold);
    if (j.contains("bounds")) c.bounds = bounds_from_json(j.at("bounds"));
    if (j.contains("ga")) {
        const auto& ga = j.at("ga");
        check_keys(ga,
                   {"population_size", "offspring_size", "crossover_probability", "eta_crossover",
                    "mutation_probability", "eta_mutation", "generations", "seed"},
                   "ga");
        c.ga.population_size = ga.value("population_size", c.ga.population_size);
        c.ga.offspring_size = ga.value("offspring_size", c.ga.offspring_size);
        c.ga.crossover_probability = ga.value("crossover_probability", c.ga.crossover_probability);
        c.ga.eta_crossover = ga.value("eta_crossover", c.ga.eta_crossover);
        c.ga.mutation_probability = ga.value("mutation_probability", c.ga.mutation_probability);
        c.ga.eta_mutation = ga.value("eta_mutation", c.ga.eta_mutation);
        c.ga.generations = ga.value("generations", c.ga.generations);
        c.ga.seed = ga.value("seed", c.ga.seed);
    }
    if (j.contains("rnsga")) {
        const auto& rn = j.at("rnsga");
        check_keys(rn, {"reference_points", "epsilon", "weights"}, "rnsga");
        if (rn.contains("reference_points"))
            c.reference_points = rn.at("reference_points").get<std::vector<std::vector<double>>>();
        c.rnsga_epsilon = rn.value("epsilon", c.rnsga_epsilon);
        if (rn.contains("weights")) c.rnsga_weights = rn.at("weights").get<std::vector<double>>();
    }
    c.oracle_resolution = j.value("oracle_resolution", c.oracle_resolution);
    c.output_dir = j.value("output_dir", c.output_dir);

    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("config: invalid JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

void PipelineConfig::override_seeds(std::uint64_t master) {
    if (synthetic) synthetic->seed = derive_seed(master, 1);
    split_seed = derive_seed(master, 2);
    ga.seed = derive_seed(master, 3);
}

PipelineConfig default_config() {
    PipelineConfig c;
    c.bounds = BoundsBox({44.4, 58.6, 176.3}, {103.0, 107.0, 223.0});

    SyntheticSpec s;
    s.bounds = c.bounds;
    s.absorbed_duty = QuadraticSurface::concave_peak(75.0, {85.0, 95.0, 205.0},
                                                     {0.010, 0.006, 0.004});
    s.cot = QuadraticSurface::concave_peak(361.0, {85.0, 95.0, 205.0}, {0.012, 0.008, 0.005});
    s.stack_o2 = QuadraticSurface::concave_peak(2.4, {70.0, 80.0, 190.0},
                                                {0.0004, 0.0003, 0.0002});
    s.noise_sd_absorbed_duty = 0.5;
    s.noise_sd_cot = 1.0;
    s.noise_sd_stack_o2 = 0.25;
    s.samples = 2000;
    s.seed = 42;
    c.synthetic = s;

    c.test_fraction = 0.2;
    c.split_seed = 101;
    c.cart = CartParams{};
    c.test_r2_threshold = 0.5;
    c.ga = GaParams{};
    c.ga.seed = 7;
    c.reference_points = {{40.0, 90.0}, {10.0, 278.0}};
    c.rnsga_epsilon = 0.01;
    c.rnsga_weights = {0.5, 0.5};
    c.oracle_resolution = 50;
    c.output_dir = "out";
    return c;
}

namespace {

ParetoFront population_points(const Population& pop) {
    ParetoFront pts;
    pts.reserve(pop.size());
    for (const auto& ind : pop) pts.push_back({ind.genome, ind.objectives});
    return pts;
}

}  // namespace

FitArtifacts fit_surrogates(const PipelineConfig& config) {
    config.validate();
    FitArtifacts art;

    const Dataset data = stage("data", [&] {
        if (config.synthetic) {
            art.data_source = "synthetic (n=" + std::to_string(config.synthetic->samples) +
                              ", seed=" + std::to_string(config.synthetic->seed) + ")";
            return synthesize(*config.synthetic);
        }
        art.data_source = "csv: " + config.csv_path;
        return load_csv(config.csv_path);
    });
    art.n_records = data.size();

    stage("split", [&] {
        auto parts = train_test_split(data, config.test_fraction, config.split_seed);
        art.train = std::move(parts.first);
        art.test = std::move(parts.second);
        return 0;
    });
    art.n_train = art.train.size();
    art.n_test = art.test.size();

    art.surrogates.features = kFeatureNames;
    stage("fit", [&] {
        for (const auto& target : kTargetNames) {
            RegressionTree tree =
                fit_cart(art.train, kFeatureNames, target, config.cart_for(target));
            const ModelMetrics m = evaluate(tree, art.train, art.test, target);
            art.metrics.emplace_back(target, m);
            art.surrogates.models.emplace_back(target, std::move(tree));
        }
        return 0;
    });

    stage("select", [&] {
        art.retained = select_models(art.metrics, config.test_r2_threshold);
        return 0;
    });
    return art;
}

ProblemSpec build_problem(const FitArtifacts& artifacts, const PipelineConfig& config) {
    return stage("select", [&] {
        for (const auto& obj : kObjectiveNames) {
            if (std::find(artifacts.retained.begin(), artifacts.retained.end(), obj) ==
                artifacts.retained.end()) {
                std::string detail;
                for (const auto& [name, m] : artifacts.metrics)
                    detail += " " + name + "=" + fmt_double(m.test_r2);
                throw ModelQualityError("surrogate '" + obj +
                                        "' fell below the test R^2 threshold " +
                                        fmt_double(config.test_r2_threshold) +
                                        "; test R^2:" + detail);
            }
        }
        // The two retained response models become the players' objectives.
        const SurrogateSet retained = artifacts.surrogates.retain(artifacts.retained);
        auto y1_tree = std::make_shared<RegressionTree>(retained.model(kObjectiveNames[0]));
        auto y2_tree = std::make_shared<RegressionTree>(retained.model(kObjectiveNames[1]));
        ProblemSpec problem;
        problem.bounds = config.bounds;
        problem.objectives = {
            {kObjectiveNames[0], [y1_tree](const Genome& x) { return y1_tree->predict(x); }},
            {kObjectiveNames[1], [y2_tree](const Genome& x) { return y2_tree->predict(x); }}};
        return problem;
    });
}

ComparisonReport run_pipeline_in_memory(const PipelineConfig& config) {
    ComparisonReport report;
    report.bounds = config.bounds;
    report.objective_names = kObjectiveNames;

    FitArtifacts art = fit_surrogates(config);
    report.data_source = art.data_source;
    report.n_records = art.n_records;
    report.n_train = art.n_train;
    report.n_test = art.n_test;
    report.metrics = art.metrics;
    report.retained = art.retained;

    const ProblemSpec problem = build_problem(art, config);

    stage("nsga2", [&] {
        GaParams p = config.ga;
        p.seed = derive_seed(config.ga.seed, kSeedTagNsga2);
        std::vector<ParetoFront> fronts;
        const Nsga2Result res = nsga2_run(
            problem, p, [&](int, const ParetoFront& f) { fronts.push_back(f); });
        report.nsga_front = res.front;

        // Fixed reference point: just below everything ever seen on a front.
        std::vector<double> ref = {std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity()};
        for (const auto& f : fronts)
            for (const auto& pt : f)
                for (std::size_t i = 0; i < 2; ++i) ref[i] = std::min(ref[i], pt.objectives[i]);
        for (auto& v : ref) v -= 1.0;
        for (const auto& f : fronts) {
            std::vector<std::vector<double>> objs;
            for (const auto& pt : f) objs.push_back(pt.objectives);
            report.nsga_hv_history.push_back(hypervolume_2d(objs, ref));
        }
        return 0;
    });

    stage("rnsga2", [&] {
        RnsgaParams rp{config.ga, config.reference_points, config.rnsga_epsilon,
                       config.rnsga_weights};
        rp.base.seed = derive_seed(config.ga.seed, kSeedTagRnsga2);
        report.rnsga_population = population_points(rnsga2_run(problem, rp));
        return 0;
    });

    stage("bargain", [&] {
        GaParams bp = config.ga;
        bp.seed = derive_seed(config.ga.seed, kSeedTagBargain);
        const GaResult r1 = best_response(problem, 0, bp);
        const GaResult r2 = best_response(problem, 1, bp);
        const PayoffMatrix p = payoff_matrix(problem.objectives[0].fn, problem.objectives[1].fn,
                                             r1.best_genome, r2.best_genome);
        const DisagreementPoint d = disagreement(p);
        report.bargain = nash_solve(problem, p, d, bp, &report.ga_nash_history,
                                    {r1.best_genome, r2.best_genome});
        report.bargain.best_response_points = {r1.best_genome, r2.best_genome};
        report.bargain.best_response_values = {r1.best_value, r2.best_value};
        report.ga_y1_history = r1.best_history;
        report.ga_y2_history = r2.best_history;
        return 0;
    });

    stage("report", [&] {
        RngStream rng(derive_seed(config.ga.seed, kSeedTagScatter));
        for (std::size_t i = 0; i < kScatterSamples; ++i) {
            Genome g(config.bounds.size());
            for (std::size_t dimension = 0; dimension < g.size(); ++dimension)
                g[dimension] =
                    rng.uniform(config.bounds.lower(dimension), config.bounds.upper(dimension));
            auto objs = problem.evaluate(g);
            report.feasible_scatter.push_back({std::move(g), std::move(objs)});
        }

        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& pt : report.nsga_front) {
            double dd = 0;
            for (std::size_t i = 0; i < 2; ++i) {
                const double diff = pt.objectives[i] - report.bargain.payoffs[i];
                dd += diff * diff;
            }
            if (dd < best_dist) {
                best_dist = dd;
                report.closest_front_objectives = pt.objectives;
            }
        }
        report.agreement_gap = 0;
        for (std::size_t i = 0; i < 2; ++i)
            report.agreement_gap =
                std::max(report.agreement_gap,
                         std::abs(report.closest_front_objectives[i] - report.bargain.payoffs[i]));
        return 0;
    });

    return report;
}

ComparisonReport run_pipeline(const PipelineConfig& config) {
    ComparisonReport report = run_pipeline_in_memory(config);
    stage("write", [&] {
        emit_report(report, config.output_dir);
        const fs::path dir(config.output_dir);
        write_convergence_csv(report.ga_y1_history, (dir / "ga_absorbed_duty.csv").string());
        write_convergence_csv(report.ga_y2_history, (dir / "ga_cot.csv").string());
        write_convergence_csv(report.ga_nash_history, (dir / "ga_nash.csv").string());
        std::ofstream hv(dir / "hv_nsga2.csv");
        if (!hv) throw IoError("cannot open for writing: " + (dir / "hv_nsga2.csv").string());
        hv << "generation,hypervolume\n";
        for (std::size_t g = 0; g < report.nsga_hv_history.size(); ++g)
            hv << (g + 1) << ',' << fmt_double(report.nsga_hv_history[g]) << '\n';
        return 0;
    });
    return report;
}

OracleResult brute_force_oracle(const ProblemSpec& problem, const DisagreementPoint& d,
                                int resolution) {
    if (problem.n_objectives() != 2)
        throw DimensionError("brute_force_oracle: exactly two objectives required");
    if (resolution < 2) throw DomainError("brute_force_oracle: resolution must be >= 2");
    const std::size_t dims = problem.bounds.size();
    const double total_d = std::pow(static_cast<double>(resolution), static_cast<double>(dims));
    if (total_d > 1.0e7)
        throw SizeError("brute_force_oracle: grid of " + std::to_string(total_d) +
                        " points exceeds the 1e7 guard");
    const auto total = static_cast<std::size_t>(total_d);

    // Axis tables; the last grid point is exactly the upper bound.
    std::vector<std::vector<double>> axis(dims);
    for (std::size_t v = 0; v < dims; ++v) {
        axis[v].resize(static_cast<std::size_t>(resolution));
        for (int k = 0; k < resolution; ++k)
            axis[v][static_cast<std::size_t>(k)] =
                k == resolution - 1
                    ? problem.bounds.upper(v)
                    : problem.bounds.lower(v) + problem.bounds.range(v) * k / (resolution - 1);
    }

    std::vector<std::array<double, 2>> objs(total);
    std::vector<std::size_t> grid_index(dims, 0);
    Genome x(dims);
    OracleResult result;
    double best_product = -std::numeric_limits<double>::infinity();

    for (std::size_t n = 0; n < total; ++n) {
        for (std::size_t v = 0; v < dims; ++v) x[v] = axis[v][grid_index[v]];
        const auto y = problem.evaluate(x);
        objs[n] = {y[0], y[1]};

        if (y[0] >= d.y[0] && y[1] >= d.y[1]) {
            const double prod = nash_product({y[0], y[1]}, d);
            if (prod > best_product) {
                best_product = prod;
                result.nash_genome = x;
                result.nash_payoffs = {y[0], y[1]};
                result.nash_product = prod;
                result.nash_feasible = true;
            }
        }

        // odometer, variable 1 slowest
        for (std::size_t v = dims; v-- > 0;) {
            if (++grid_index[v] < static_cast<std::size_t>(resolution)) break;
            grid_index[v] = 0;
        }
    }

    // Exact non-dominated subset: scan y1-descending groups, keep the points
    // matching the group's best y2 when it strictly beats everything from
    // higher y1 groups. Duplicates of a surviving vector all survive.
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (objs[a][0] != objs[b][0]) return objs[a][0] > objs[b][0];
        if (objs[a][1] != objs[b][1]) return objs[a][1] > objs[b][1];
        return a < b;
    });

    std::vector<std::size_t> front_ids;
    double best_y2 = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < total) {
        std::size_t j = i;
        const double y1 = objs[order[i]][0];
        const double gmax_y2 = objs[order[i]][1];  // groups sorted y2-descending
        while (j < total && objs[order[j]][0] == y1) ++j;
        if (gmax_y2 > best_y2) {
            for (std::size_t k = i; k < j && objs[order[k]][1] == gmax_y2; ++k)
                front_ids.push_back(order[k]);
            best_y2 = gmax_y2;
        }
        i = j;
    }
    std::sort(front_ids.begin(), front_ids.end());  // scan order

    result.front.reserve(front_ids.size());
    for (auto id : front_ids) {
        Genome g(dims);
        std::size_t rem = id;
        for (std::size_t v = dims; v-- > 0;) {
            g[v] = axis[v][rem % static_cast<std::size_t>(resolution)];
            rem /= static_cast<std::size_t>(resolution);
        }
        result.front.push_back({std::move(g), {objs[id][0], objs[id][1]}});
    }
    return result;
}

namespace {

std::string fmt_fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_comparison_csv(const ComparisonReport& report, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "method,Y1,Y2,x1,x2,x3\n";
    auto row = [&](const char* method, const std::vector<double>& y, const Genome& x) {
        out << method << ',' << fmt_double(y[0]) << ',' << fmt_double(y[1]);
        for (double v : x) out << ',' << fmt_double(v);
        out << '\n';
    };
    for (const auto& p : report.nsga_front) row("nsga2", p.objectives, p.genome);
    for (const auto& p : report.rnsga_population) row("rnsga2", p.objectives, p.genome);
    row("nash", {report.bargain.payoffs[0], report.bargain.payoffs[1]}, report.bargain.x_best);
    if (!out) throw IoError("write failed: " + path.string());
}

void write_report_md(const ComparisonReport& report, const fs::path& path, bool reemitted) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());

    char stamp[64] = "unknown";
    const std::time_t now = std::time(nullptr);
    if (std::tm tm{}; gmtime_r(&now, &tm) != nullptr)
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

    out << "# Furnace setpoint optimization report\n\n";
    out << "Generated: " << stamp << (reemitted ? " (re-emitted from artifacts)" : "") << "\n\n";

    if (!report.data_source.empty()) {
        out << "Data source: " << report.data_source << "; " << report.n_records << " records ("
            << report.n_train << " train / " << report.n_test << " test)\n\n";
    }

    out << "## Surrogate models\n\n";
    out << "| Controlled variable | Train MSE | Test MSE | Train RMSE | Test RMSE | Train R2 | "
           "Test R2 | Retained |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& [name, m] : report.metrics) {
        const bool kept = std::find(report.retained.begin(), report.retained.end(), name) !=
                          report.retained.end();
        out << "| " << display_name(name) << " | " << fmt_fixed(m.train_mse) << " | "
            << fmt_fixed(m.test_mse) << " | " << fmt_fixed(m.train_rmse) << " | "
            << fmt_fixed(m.test_rmse) << " | " << fmt_fixed(m.train_r2) << " | "
            << fmt_fixed(m.test_r2) << " | " << (kept ? "yes" : "no") << " |\n";
    }
    out << "\nModels below the test R2 threshold are dropped before optimization; the two\n"
           "retained response models (Absorbed Duty, COT) are maximized over the operating\n"
           "box. Stack O2 is typically held between 1.5% and 2% in operation; that band is\n"
           "context only and is not enforced here.\n\n";

    if (report.bounds.size() == 3) {
        out << "## Operating bounds\n\n";
        const char* names[] = {"Fired Duty [MW]", "Throughput", "CIT [degC]"};
        for (std::size_t i = 0; i < 3; ++i)
            out << "- " << names[i] << ": [" << fmt_double(report.bounds.lower(i)) << ", "
                << fmt_double(report.bounds.upper(i)) << "]\n";
        out << '\n';
    }

    out << "## Results\n\n";
    out << "- NSGA-II front: " << report.nsga_front.size() << " points\n";
    out << "- RNSGA-II population: " << report.rnsga_population.size() << " points\n";
    const auto& b = report.bargain;
    out << "- Nash bargaining solution: x = (";
    for (std::size_t i = 0; i < b.x_best.size(); ++i)
        out << fmt_fixed(b.x_best[i], 3) << (i + 1 < b.x_best.size() ? ", " : ")");
    out << " with payoffs (" << fmt_fixed(b.payoffs[0], 3) << ", " << fmt_fixed(b.payoffs[1], 3)
        << ")\n";
    out << "- Payoff matrix [[" << fmt_fixed(b.payoff_matrix.entry(0, 0), 3) << ", "
        << fmt_fixed(b.payoff_matrix.entry(0, 1), 3) << "], ["
        << fmt_fixed(b.payoff_matrix.entry(1, 0), 3) << ", "
        << fmt_fixed(b.payoff_matrix.entry(1, 1), 3) << "]]"
        << ", disagreement (" << fmt_fixed(b.disagreement.y[0], 3) << ", "
        << fmt_fixed(b.disagreement.y[1], 3) << "), Nash product "
        << fmt_fixed(b.nash_product, 4) << "\n";
    const bool degenerate_range =
        b.disagreement.y[0] >= b.payoff_matrix.entry(0, 0) ||
        b.disagreement.y[1] >= b.payoff_matrix.entry(1, 1);
    if (degenerate_range) {
        out << "- Note: a player's guaranteed value equals its best achievable value, so the\n"
               "  bargaining range is degenerate; every feasible point is product-optimal and\n"
               "  the compromise coincides with the individual optima.\n";
    }
    if (!report.closest_front_objectives.empty()) {
        out << "- Agreement: max componentwise gap between the Nash payoffs and the closest\n"
               "  NSGA-II front point is "
            << fmt_fixed(report.agreement_gap, 6) << "\n";
    }
    out << "\n## Files\n\n"
           "- metrics.csv: surrogate performance table\n"
           "- front_nsga2.csv, front_rnsga2.csv: decision vectors and objectives per point\n"
           "- nash.json: bargaining solution with payoff matrix, disagreement point, seeds\n"
           "- comparison.csv: one row per optimal point per method\n"
           "- feasible_scatter.csv: uniform feasible samples with objective values\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void emit_report(const ComparisonReport& report, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    const fs::path base(dir);

    write_metrics_csv(report.metrics, {"fired_duty", "throughput", "cit"},
                      (base / "metrics.csv").string());
    write_front_csv(report.nsga_front, (base / "front_nsga2.csv").string());
    write_front_csv(report.rnsga_population, (base / "front_rnsga2.csv").string());
    {
        std::ofstream out(base / "nash.json");
        if (!out) throw IoError("cannot open for writing: " + (base / "nash.json").string());
        out << report.bargain.to_json().dump(2) << '\n';
        if (!out) throw IoError("write failed: " + (base / "nash.json").string());
    }
    write_comparison_csv(report, base / "comparison.csv");
    write_front_csv(report.feasible_scatter, (base / "feasible_scatter.csv").string());
    write_report_md(report, base / "report.md", false);
}

void reemit_from_artifacts(const std::string& dir, double test_r2_threshold) {
    const fs::path base(dir);
    ComparisonReport report;
    report.metrics = read_metrics_csv((base / "metrics.csv").string());
    report.retained = select_models(report.metrics, test_r2_threshold);
    report.objective_names = kObjectiveNames;
    report.nsga_front = read_front_csv((base / "front_nsga2.csv").string(), 3, 2);
    report.rnsga_population = read_front_csv((base / "front_rnsga2.csv").string(), 3, 2);
    {
        std::ifstream in(base / "nash.json");
        if (!in) throw IoError("cannot open: " + (base / "nash.json").string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("invalid nash.json: " + std::string(e.what()));
        }
        report.bargain = BargainResult::from_json(j);
    }

    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& pt : report.nsga_front) {
        double dd = 0;
        for (std::size_t i = 0; i < 2; ++i) {
            const double diff = pt.objectives[i] - report.bargain.payoffs[i];
            dd += diff * diff;
        }
        if (dd < best_dist) {
            best_dist = dd;
            report.closest_front_objectives = pt.objectives;
        }
    }
    report.agreement_gap = 0;
    for (std::size_t i = 0; i < 2 && !report.closest_front_objectives.empty(); ++i)
        report.agreement_gap =
            std::max(report.agreement_gap,
                     std::abs(report.closest_front_objectives[i] - report.bargain.payoffs[i]));

    write_comparison_csv(report, base / "comparison.csv");
    write_report_md(report, base / "report.md", true);
}

}  // namespace furnace
