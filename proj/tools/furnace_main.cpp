#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "furnace/format.hpp"
#include "furnace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace furnace;

namespace {

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::schema: return 2;
        case ErrorKind::model_quality: return 3;
        case ErrorKind::infeasible: return 4;
        case ErrorKind::io: return 5;
        default: return 1;
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

struct Cli {
    PipelineConfig config;
    bool quiet = false;

    std::ostream& log() const {
        static std::ofstream null_stream;
        if (quiet) {
            null_stream.setstate(std::ios::badbit);
            return null_stream;
        }
        return std::cout;
    }

    int cmd_synth() const {
        if (!config.synthetic)
            throw SchemaError("synth requires a synthetic data spec in the config");
        ensure_dir(config.output_dir);
        const Dataset data = synthesize(*config.synthetic);
        const auto path = fs::path(config.output_dir) / "synthetic.csv";
        write_csv(data, path.string());
        log() << "wrote " << data.size() << " records to " << path.string() << "\n";
        return 0;
    }

    int cmd_fit() const {
        ensure_dir(config.output_dir);
        const FitArtifacts art = fit_surrogates(config);
        const fs::path base(config.output_dir);
        write_metrics_csv(art.metrics, art.surrogates.features, (base / "metrics.csv").string());
        for (const auto& [name, tree] : art.surrogates.models)
            write_json(tree.to_json(), base / ("tree_" + name + ".json"));
        log() << art.data_source << ": " << art.n_train << " train / " << art.n_test
              << " test rows\n";
        for (const auto& [name, m] : art.metrics) {
            const bool kept = std::find(art.retained.begin(), art.retained.end(), name) !=
                              art.retained.end();
            log() << "  " << display_name(name) << ": test R^2 " << fmt_double(m.test_r2)
                  << (kept ? " (retained)" : " (dropped)") << "\n";
        }
        log() << "wrote metrics.csv and tree JSON files to " << config.output_dir << "\n";
        return 0;
    }

    int cmd_optimize() const {
        ensure_dir(config.output_dir);
        const FitArtifacts art = fit_surrogates(config);
        const ProblemSpec problem = build_problem(art, config);
        const fs::path base(config.output_dir);

        GaParams np = config.ga;
        np.seed = derive_seed(config.ga.seed, kSeedTagNsga2);
        std::vector<ParetoFront> fronts;
        const Nsga2Result nsga =
            nsga2_run(problem, np, [&](int, const ParetoFront& f) { fronts.push_back(f); });
        write_front_csv(nsga.front, (base / "front_nsga2.csv").string());

        std::vector<double> ref = {1e300, 1e300};
        for (const auto& f : fronts)
            for (const auto& pt : f)
                for (std::size_t i = 0; i < 2; ++i) ref[i] = std::min(ref[i], pt.objectives[i]);
        for (auto& v : ref) v -= 1.0;
        std::ofstream hv(base / "hv_nsga2.csv");
        if (!hv) throw IoError("cannot open for writing: " + (base / "hv_nsga2.csv").string());
        hv << "generation,hypervolume\n";
        for (std::size_t g = 0; g < fronts.size(); ++g) {
            std::vector<std::vector<double>> objs;
            for (const auto& pt : fronts[g]) objs.push_back(pt.objectives);
            hv << (g + 1) << ',' << fmt_double(hypervolume_2d(objs, ref)) << '\n';
        }

        RnsgaParams rp{config.ga, config.reference_points, config.rnsga_epsilon,
                       config.rnsga_weights};
        rp.base.seed = derive_seed(config.ga.seed, kSeedTagRnsga2);
        const Population rnsga = rnsga2_run(problem, rp);
        ParetoFront rnsga_points;
        for (const auto& ind : rnsga) rnsga_points.push_back({ind.genome, ind.objectives});
        write_front_csv(rnsga_points, (base / "front_rnsga2.csv").string());

        log() << "NSGA-II front: " << nsga.front.size() << " points; RNSGA-II population: "
              << rnsga_points.size() << " points\n";
        log() << "wrote front_nsga2.csv and front_rnsga2.csv to " << config.output_dir << "\n";
        return 0;
    }

    int cmd_bargain() const {
        ensure_dir(config.output_dir);
        const FitArtifacts art = fit_surrogates(config);
        const ProblemSpec problem = build_problem(art, config);
        const fs::path base(config.output_dir);

        GaParams bp = config.ga;
        bp.seed = derive_seed(config.ga.seed, kSeedTagBargain);
        const GaResult r1 = best_response(problem, 0, bp);
        const GaResult r2 = best_response(problem, 1, bp);
        const PayoffMatrix p = payoff_matrix(problem.objectives[0].fn, problem.objectives[1].fn,
                                             r1.best_genome, r2.best_genome);
        const DisagreementPoint d = disagreement(p);
        std::vector<double> nash_history;
        BargainResult result =
            nash_solve(problem, p, d, bp, &nash_history, {r1.best_genome, r2.best_genome});
        result.best_response_points = {r1.best_genome, r2.best_genome};
        result.best_response_values = {r1.best_value, r2.best_value};

        write_json(result.to_json(), base / "nash.json");
        write_convergence_csv(r1.best_history, (base / "ga_absorbed_duty.csv").string());
        write_convergence_csv(r2.best_history, (base / "ga_cot.csv").string());
        write_convergence_csv(nash_history, (base / "ga_nash.csv").string());

        log() << "payoff matrix [[" << fmt_double(p.entry(0, 0)) << ", " << fmt_double(p.entry(0, 1))
              << "], [" << fmt_double(p.entry(1, 0)) << ", " << fmt_double(p.entry(1, 1)) << "]]\n";
        log() << "disagreement (" << fmt_double(d.y[0]) << ", " << fmt_double(d.y[1]) << ")\n";
        log() << "Nash solution payoffs (" << fmt_double(result.payoffs[0]) << ", "
              << fmt_double(result.payoffs[1]) << "), product "
              << fmt_double(result.nash_product) << "\n";
        log() << "wrote nash.json and convergence logs to " << config.output_dir << "\n";
        return 0;
    }

    int cmd_oracle() const {
        ensure_dir(config.output_dir);
        const FitArtifacts art = fit_surrogates(config);
        const ProblemSpec problem = build_problem(art, config);
        const fs::path base(config.output_dir);

        GaParams bp = config.ga;
        bp.seed = derive_seed(config.ga.seed, kSeedTagBargain);
        const GaResult r1 = best_response(problem, 0, bp);
        const GaResult r2 = best_response(problem, 1, bp);
        const PayoffMatrix p = payoff_matrix(problem.objectives[0].fn, problem.objectives[1].fn,
                                             r1.best_genome, r2.best_genome);
        const DisagreementPoint d = disagreement(p);

        const OracleResult oracle = brute_force_oracle(problem, d, config.oracle_resolution);
        write_front_csv(oracle.front, (base / "oracle_front.csv").string());
        write_json(nlohmann::json{{"x", oracle.nash_genome},
                                  {"payoffs", oracle.nash_payoffs},
                                  {"nash_product", oracle.nash_product},
                                  {"feasible", oracle.nash_feasible},
                                  {"resolution", config.oracle_resolution},
                                  {"disagreement", d.y}},
                   base / "oracle_nash.json");

        log() << "oracle front: " << oracle.front.size() << " grid points at resolution "
              << config.oracle_resolution << "\n";
        if (oracle.nash_feasible)
            log() << "oracle Nash payoffs (" << fmt_double(oracle.nash_payoffs[0]) << ", "
                  << fmt_double(oracle.nash_payoffs[1]) << "), product "
                  << fmt_double(oracle.nash_product) << "\n";
        log() << "wrote oracle_front.csv and oracle_nash.json to " << config.output_dir << "\n";
        return 0;
    }

    int cmd_run() const {
        const ComparisonReport report = run_pipeline(config);
        log() << report.data_source << ": " << report.n_records << " records\n";
        for (const auto& [name, m] : report.metrics)
            log() << "  " << display_name(name) << ": test R^2 " << fmt_double(m.test_r2) << "\n";
        log() << "NSGA-II front " << report.nsga_front.size() << " points, RNSGA-II population "
              << report.rnsga_population.size() << " points\n";
        log() << "Nash payoffs (" << fmt_double(report.bargain.payoffs[0]) << ", "
              << fmt_double(report.bargain.payoffs[1]) << "); max gap to closest front point "
              << fmt_double(report.agreement_gap) << "\n";
        log() << "report written to " << config.output_dir << "\n";
        return 0;
    }

    int cmd_compare() const {
        reemit_from_artifacts(config.output_dir, config.test_r2_threshold);
        log() << "re-emitted comparison.csv and report.md in " << config.output_dir << "\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Furnace efficiency setpoint optimizer: CART surrogates, NSGA-II/RNSGA-II, "
                 "and a Nash bargaining solver over the fitted models"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config file (built-in defaults when omitted)");
    auto* seed_opt =
        app.add_option("--seed", seed, "master seed overriding every stage seed in the config");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* sc_synth = app.add_subcommand("synth", "write the synthetic dataset as CSV");
    auto* sc_fit = app.add_subcommand("fit", "train the three surrogates and write metrics");
    auto* sc_optimize = app.add_subcommand("optimize", "run NSGA-II and RNSGA-II, write fronts");
    auto* sc_bargain = app.add_subcommand("bargain", "run the Nash bargaining pipeline");
    auto* sc_oracle = app.add_subcommand("oracle", "brute-force grid reference for the solvers");
    auto* sc_run = app.add_subcommand("run", "full pipeline with comparison report");
    auto* sc_compare = app.add_subcommand("compare", "re-emit the report from artifacts");

    // global flags are accepted on either side of the subcommand
    for (auto* sc : {sc_synth, sc_fit, sc_optimize, sc_bargain, sc_oracle, sc_run, sc_compare})
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or requested help
        return code == 0 ? 0 : 2;
    }

    try {
        Cli cli;
        cli.config = config_path.empty() ? default_config() : PipelineConfig::load(config_path);
        if (seed_opt->count() > 0) cli.config.override_seeds(seed);
        if (!out_dir.empty()) cli.config.output_dir = out_dir;
        cli.quiet = quiet;

        if (sc_synth->parsed()) return cli.cmd_synth();
        if (sc_fit->parsed()) return cli.cmd_fit();
        if (sc_optimize->parsed()) return cli.cmd_optimize();
        if (sc_bargain->parsed()) return cli.cmd_bargain();
        if (sc_oracle->parsed()) return cli.cmd_oracle();
        if (sc_run->parsed()) return cli.cmd_run();
        if (sc_compare->parsed()) return cli.cmd_compare();
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (...) {
        std::cerr << "error: unknown failure\n";
        return 1;
    }
}
