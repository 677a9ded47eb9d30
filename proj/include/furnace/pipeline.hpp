#ifndef FURNACE_PIPELINE_HPP
#define FURNACE_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "furnace/bargain.hpp"
#include "furnace/dataset.hpp"
#include "furnace/moo.hpp"
#include "furnace/surrogate.hpp"

namespace furnace {

/// Stage seed tags, all derived from the configured optimizer seed so the
/// stages consume independent reproducible streams.
inline constexpr std::uint64_t kSeedTagNsga2 = 10;
inline constexpr std::uint64_t kSeedTagRnsga2 = 11;
inline constexpr std::uint64_t kSeedTagBargain = 12;
inline constexpr std::uint64_t kSeedTagScatter = 13;

/// Number of uniform feasible samples written to feasible_scatter.csv.
inline constexpr std::size_t kScatterSamples = 500;

struct PipelineConfig {
    // data source: exactly one of csv_path / synthetic
    std::string csv_path;
    std::optional<SyntheticSpec> synthetic;

    double test_fraction = 0.2;
    std::uint64_t split_seed = 101;

    CartParams cart;                                  // default for every target
    std::map<std::string, CartParams> cart_per_target;  // overrides
    double test_r2_threshold = 0.5;

    BoundsBox bounds;
    GaParams ga;
    std::vector<std::vector<double>> reference_points;
    double rnsga_epsilon = 0.01;
    std::vector<double> rnsga_weights;

    int oracle_resolution = 50;
    std::string output_dir = "out";

    CartParams cart_for(const std::string& target) const;
    void validate() const;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);

    /// Replaces every stage seed with one derived from `master`.
    void override_seeds(std::uint64_t master);
};

/// Shipped defaults: the furnace operating bounds, the standard optimizer
/// parameter set, and a synthetic data spec whose two retained responses
/// share one interior optimum (so all three solvers should agree).
PipelineConfig default_config();

struct ComparisonReport {
    std::vector<std::pair<std::string, ModelMetrics>> metrics;  // fixed target order
    std::vector<std::string> retained;
    std::vector<std::string> objective_names;  // the two optimized targets
    ParetoFront nsga_front;
    ParetoFront rnsga_population;
    BargainResult bargain;

    /// Max componentwise |Nash payoff - closest NSGA-II front point|, the
    /// closest point taken by Euclidean distance in objective space.
    double agreement_gap = 0.0;
    std::vector<double> closest_front_objectives;

    ParetoFront feasible_scatter;
    BoundsBox bounds;
    std::size_t n_records = 0, n_train = 0, n_test = 0;
    std::string data_source;

    // per-generation traces, for the convergence/hypervolume logs
    std::vector<double> nsga_hv_history;
    std::vector<double> ga_y1_history, ga_y2_history, ga_nash_history;
};

/// Output of the data -> split -> fit -> evaluate -> select stages.
struct FitArtifacts {
    std::size_t n_records = 0, n_train = 0, n_test = 0;
    std::string data_source;
    Dataset train, test;
    std::vector<std::pair<std::string, ModelMetrics>> metrics;  // fixed target order
    SurrogateSet surrogates;  // all three fitted trees
    std::vector<std::string> retained;
};

/// Runs the surrogate stages. Does not gate on model quality; `retained`
/// simply records which models cleared the threshold.
FitArtifacts fit_surrogates(const PipelineConfig& config);

/// Bi-objective problem over the two retained response models.
/// ModelQualityError (listing every test R^2) if absorbed_duty or cot was
/// not retained.
ProblemSpec build_problem(const FitArtifacts& artifacts, const PipelineConfig& config);

/// Full chain: data -> split -> fit three surrogates -> evaluate -> select ->
/// NSGA-II -> RNSGA-II -> best responses -> payoff matrix -> disagreement ->
/// Nash solve -> report, then writes every artifact under config.output_dir.
/// Stage failures rethrow with a "[stage]" tag, preserving the error kind.
ComparisonReport run_pipeline(const PipelineConfig& config);

/// Like run_pipeline but without touching the filesystem.
ComparisonReport run_pipeline_in_memory(const PipelineConfig& config);

struct OracleResult {
    ParetoFront front;  // exact non-dominated subset of the evaluation grid
    Genome nash_genome;
    std::array<double, 2> nash_payoffs{};
    double nash_product = 0.0;
    bool nash_feasible = false;  // no grid point met payoffs >= d otherwise
};

/// Evaluates both objectives on the full regular grid over the bounds
/// (`resolution` points per axis, endpoints included) and returns the exact
/// non-dominated subset plus the grid argmax of the Nash product subject to
/// payoffs >= d. Grid scan is row-major with variable 1 slowest; product
/// ties keep the first point in scan order. SizeError once
/// resolution^dims exceeds 1e7.
OracleResult brute_force_oracle(const ProblemSpec& problem, const DisagreementPoint& d,
                                int resolution);

/// Writes metrics.csv, front_nsga2.csv, front_rnsga2.csv, nash.json,
/// comparison.csv, feasible_scatter.csv and report.md into `dir`
/// (created if missing). Only report.md carries a timestamp.
void emit_report(const ComparisonReport& report, const std::string& dir);

/// Reads fronts + nash.json + metrics.csv back and re-emits comparison.csv
/// and report.md. Used by the `compare` subcommand.
void reemit_from_artifacts(const std::string& dir, double test_r2_threshold);

}  // namespace furnace

#endif
