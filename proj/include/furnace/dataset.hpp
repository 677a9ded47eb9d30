#ifndef FURNACE_DATASET_HPP
#define FURNACE_DATASET_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "furnace/bounds.hpp"
#include "furnace/errors.hpp"

namespace furnace {

/// One timestamped furnace operating sample.
struct FurnaceRecord {
    std::string timestamp;  // ISO-8601
    double stack_o2 = 0.0;  // %
    double efficiency = 0.0;  // %
    double fuel_gas = 0.0;  // kg/hr
    double fired_duty = 0.0;  // MW
    double absorbed_duty = 0.0;  // MW
    double throughput = 0.0;  // dimensionless rate
    double cit = 0.0;  // degC
    double cot = 0.0;  // degC
};

/// Numeric column names accepted by Dataset::column().
inline constexpr std::array<std::string_view, 8> kNumericColumns = {
    "stack_o2", "efficiency", "fuel_gas", "fired_duty",
    "absorbed_duty", "throughput", "cit", "cot"};

/// Canonical CSV header names, in the canonical order used when writing.
inline constexpr std::array<std::string_view, 9> kCsvHeader = {
    "Timestamp", "Stack-O2", "Efficiency", "Fuel-Gas", "Fired-duty-MW",
    "Absorbed-duty-MW", "Throughput", "CIT-degC", "COT-degC"};

/// Immutable table of operating samples. Records keep their input order.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<FurnaceRecord> records) : records_(std::move(records)) {}

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<FurnaceRecord>& records() const { return records_; }
    const FurnaceRecord& operator[](std::size_t i) const { return records_[i]; }

    /// Materializes a numeric column by internal name; SchemaError on unknown name.
    std::vector<double> column(std::string_view name) const;

    /// Throws if any record violates the field invariants (finite values,
    /// stack_o2 >= 0, fired_duty > 0, absorbed_duty >= 0).
    void validate() const;

private:
    std::vector<FurnaceRecord> records_;
};

/// Quadratic response surface in the three manipulated variables:
///   y = constant + sum_i linear[i]*x_i + sum_i quadratic[i]*x_i^2
///       + cross[0]*x1*x2 + cross[1]*x1*x3 + cross[2]*x2*x3
struct QuadraticSurface {
    double constant = 0.0;
    std::array<double, 3> linear{};
    std::array<double, 3> quadratic{};
    std::array<double, 3> cross{};

    double operator()(double x1, double x2, double x3) const {
        return constant + linear[0] * x1 + linear[1] * x2 + linear[2] * x3
             + quadratic[0] * x1 * x1 + quadratic[1] * x2 * x2 + quadratic[2] * x3 * x3
             + cross[0] * x1 * x2 + cross[1] * x1 * x3 + cross[2] * x2 * x3;
    }

    /// Concave paraboloid peaking at `center` with the given value:
    ///   y = peak - sum_i curvature[i] * (x_i - center[i])^2
    static QuadraticSurface concave_peak(double peak, std::array<double, 3> center,
                                         std::array<double, 3> curvature);
};

/// Generator settings for the synthetic stand-in dataset.
struct SyntheticSpec {
    BoundsBox bounds;  // over (fired_duty, throughput, cit)
    QuadraticSurface absorbed_duty;
    QuadraticSurface cot;
    QuadraticSurface stack_o2;
    double noise_sd_absorbed_duty = 0.0;
    double noise_sd_cot = 0.0;
    double noise_sd_stack_o2 = 0.0;
    std::size_t samples = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Loads the canonical CSV schema (kCsvHeader, any column order).
/// SchemaError on missing/extra/duplicate columns, ParseError on bad cells,
/// EmptyInputError on files without data rows. Records are validated.
Dataset load_csv(const std::string& path);

/// Writes a dataset in the canonical schema and column order.
void write_csv(const Dataset& data, const std::string& path);

/// Draws manipulated variables uniformly within spec.bounds and responses as
/// ground-truth surface plus Gaussian noise. Deterministic for a fixed seed:
/// per record the stream yields x1, x2, x3, then one normal deviate each for
/// absorbed_duty, cot, stack_o2 (drawn even when the matching SD is zero).
/// stack_o2 and absorbed_duty are floored at 0 so record invariants hold.
/// efficiency = absorbed/fired * 100; fuel_gas = fired_duty * kFuelGasPerMw.
Dataset synthesize(const SyntheticSpec& spec);

inline constexpr double kFuelGasPerMw = 75.0;  // kg/hr of fuel gas per MW fired

/// Pearson correlations between the named columns (two-pass, mean-centered).
/// Requires >= 2 rows; DegenerateVarianceError names any constant column.
std::vector<std::vector<double>> correlation_matrix(const Dataset& data,
                                                    const std::vector<std::string>& columns);

/// Uniform random split without replacement; |test| = round(f*n) clamped to
/// [1, n-1]. Both parts keep the original row order. Deterministic per seed:
/// a Fisher-Yates shuffle of row indices consumes one index(i+1) draw per
/// position from n-1 down to 1, and the first |test| shuffled indices form
/// the test set.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

}  // namespace furnace

#endif
