#include "furnace/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "furnace/format.hpp"
#include "furnace/rng.hpp"

namespace furnace {

namespace {

double& field_ref(FurnaceRecord& r, std::size_t canonical_index) {
    // canonical_index follows kCsvHeader; 0 (Timestamp) is handled separately.
    switch (canonical_index) {
        case 1: return r.stack_o2;
        case 2: return r.efficiency;
        case 3: return r.fuel_gas;
        case 4: return r.fired_duty;
        case 5: return r.absorbed_duty;
        case 6: return r.throughput;
        case 7: return r.cit;
        case 8: return r.cot;
        default: throw SchemaError("internal: bad canonical column index");
    }
}

double field_value(const FurnaceRecord& r, std::string_view name) {
    if (name == "stack_o2") return r.stack_o2;
    if (name == "efficiency") return r.efficiency;
    if (name == "fuel_gas") return r.fuel_gas;
    if (name == "fired_duty") return r.fired_duty;
    if (name == "absorbed_duty") return r.absorbed_duty;
    if (name == "throughput") return r.throughput;
    if (name == "cit") return r.cit;
    if (name == "cot") return r.cot;
    throw SchemaError("unknown column: " + std::string(name));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const std::string t = trim(cell);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError("cannot parse '" + t + "' as a number in column " + column +
                             ", row " + std::to_string(row),
                         row, column);
    return v;
}

void check_record(const FurnaceRecord& r, std::size_t row) {
    const std::pair<const char*, double> numeric[] = {
        {"Stack-O2", r.stack_o2},       {"Efficiency", r.efficiency},
        {"Fuel-Gas", r.fuel_gas},       {"Fired-duty-MW", r.fired_duty},
        {"Absorbed-duty-MW", r.absorbed_duty}, {"Throughput", r.throughput},
        {"CIT-degC", r.cit},            {"COT-degC", r.cot}};
    for (auto& [name, v] : numeric) {
        if (!std::isfinite(v))
            throw DomainError("non-finite value in column " + std::string(name) + ", row " +
                              std::to_string(row));
    }
    if (r.stack_o2 < 0)
        throw DomainError("Stack-O2 must be >= 0, row " + std::to_string(row));
    if (!(r.fired_duty > 0))
        throw DomainError("Fired-duty-MW must be > 0, row " + std::to_string(row));
    if (r.absorbed_duty < 0)
        throw DomainError("Absorbed-duty-MW must be >= 0, row " + std::to_string(row));
}

}  // namespace

std::vector<double> Dataset::column(std::string_view name) const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(field_value(r, name));
    return out;
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < records_.size(); ++i) check_record(records_[i], i + 1);
}

QuadraticSurface QuadraticSurface::concave_peak(double peak, std::array<double, 3> center,
                                                std::array<double, 3> curvature) {
    // peak - sum a_i (x_i - c_i)^2 expanded into raw coefficients
    QuadraticSurface s;
    s.constant = peak;
    for (int i = 0; i < 3; ++i) {
        s.constant -= curvature[i] * center[i] * center[i];
        s.linear[i] = 2.0 * curvature[i] * center[i];
        s.quadratic[i] = -curvature[i];
    }
    return s;
}

void SyntheticSpec::validate() const {
    if (bounds.size() != 3) throw BoundsError("synthetic spec: exactly three manipulated variables required");
    if (noise_sd_absorbed_duty < 0 || noise_sd_cot < 0 || noise_sd_stack_o2 < 0)
        throw DomainError("synthetic spec: noise SDs must be >= 0");
    if (samples < 1) throw DomainError("synthetic spec: sample count must be >= 1");
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError("empty CSV file: " + path);

    const auto header = split_line(line);
    // header_map[canonical index] = position of that column in this file
    std::vector<int> header_map(kCsvHeader.size(), -1);
    for (std::size_t pos = 0; pos < header.size(); ++pos) {
        const std::string name = trim(header[pos]);
        auto it = std::find(kCsvHeader.begin(), kCsvHeader.end(), name);
        if (it == kCsvHeader.end())
            throw SchemaError("unexpected column '" + name + "' in " + path);
        const auto ci = static_cast<std::size_t>(it - kCsvHeader.begin());
        if (header_map[ci] != -1)
            throw SchemaError("duplicate column '" + name + "' in " + path);
        header_map[ci] = static_cast<int>(pos);
    }
    for (std::size_t ci = 0; ci < kCsvHeader.size(); ++ci) {
        if (header_map[ci] == -1)
            throw SchemaError("missing column '" + std::string(kCsvHeader[ci]) + "' in " + path);
    }

    std::vector<FurnaceRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells = split_line(line);
        if (cells.size() != kCsvHeader.size())
            throw SchemaError("row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(kCsvHeader.size()));
        FurnaceRecord r;
        r.timestamp = trim(cells[static_cast<std::size_t>(header_map[0])]);
        for (std::size_t ci = 1; ci < kCsvHeader.size(); ++ci) {
            field_ref(r, ci) = parse_cell(cells[static_cast<std::size_t>(header_map[ci])], row,
                                          std::string(kCsvHeader[ci]));
        }
        check_record(r, row);
        records.push_back(std::move(r));
    }
    if (records.empty()) throw EmptyInputError("CSV file has no data rows: " + path);
    return Dataset(std::move(records));
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < kCsvHeader.size(); ++i)
        out << kCsvHeader[i] << (i + 1 < kCsvHeader.size() ? "," : "\n");
    for (const auto& r : data.records()) {
        out << r.timestamp << ',' << fmt_double(r.stack_o2) << ',' << fmt_double(r.efficiency)
            << ',' << fmt_double(r.fuel_gas) << ',' << fmt_double(r.fired_duty) << ','
            << fmt_double(r.absorbed_duty) << ',' << fmt_double(r.throughput) << ','
            << fmt_double(r.cit) << ',' << fmt_double(r.cot) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Dataset synthesize(const SyntheticSpec& spec) {
    spec.validate();
    RngStream rng(spec.seed);
    std::vector<FurnaceRecord> records;
    records.reserve(spec.samples);
    for (std::size_t i = 0; i < spec.samples; ++i) {
        FurnaceRecord r;
        const double x1 = rng.uniform(spec.bounds.lower(0), spec.bounds.upper(0));
        const double x2 = rng.uniform(spec.bounds.lower(1), spec.bounds.upper(1));
        const double x3 = rng.uniform(spec.bounds.lower(2), spec.bounds.upper(2));
        const double n_abs = rng.normal();
        const double n_cot = rng.normal();
        const double n_o2 = rng.normal();

        r.fired_duty = x1;
        r.throughput = x2;
        r.cit = x3;
        r.absorbed_duty =
            std::max(0.0, spec.absorbed_duty(x1, x2, x3) + spec.noise_sd_absorbed_duty * n_abs);
        r.cot = spec.cot(x1, x2, x3) + spec.noise_sd_cot * n_cot;
        r.stack_o2 = std::max(0.0, spec.stack_o2(x1, x2, x3) + spec.noise_sd_stack_o2 * n_o2);
        r.efficiency = r.absorbed_duty / r.fired_duty * 100.0;
        r.fuel_gas = r.fired_duty * kFuelGasPerMw;

        // Minute-spaced synthetic timestamps from a fixed UTC epoch
        const std::time_t t = 1609459200 + 60 * static_cast<std::time_t>(i);  // 2021-01-01T00:00Z
        std::tm tm{};
        gmtime_r(&t, &tm);
        char ts[32];
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
        r.timestamp = ts;
        records.push_back(std::move(r));
    }
    Dataset out(std::move(records));
    out.validate();
    return out;
}

std::vector<std::vector<double>> correlation_matrix(const Dataset& data,
                                                    const std::vector<std::string>& columns) {
    if (data.size() < 2) throw InsufficientDataError("correlation requires >= 2 rows");
    const std::size_t k = columns.size();
    const std::size_t n = data.size();

    std::vector<std::vector<double>> centered(k);
    std::vector<double> norms(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto col = data.column(columns[c]);
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (auto& v : col) {
            v -= mean;
            ss += v * v;
        }
        if (ss == 0.0)
            throw DegenerateVarianceError("column has zero variance: " + columns[c], columns[c]);
        centered[c] = std::move(col);
        norms[c] = std::sqrt(ss);
    }

    std::vector<std::vector<double>> m(k, std::vector<double>(k, 1.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += centered[a][i] * centered[b][i];
            const double r = std::clamp(dot / (norms[a] * norms[b]), -1.0, 1.0);
            m[a][b] = m[b][a] = r;
        }
    }
    return m;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
    const std::size_t n = data.size();
    if (n < 2) throw InsufficientDataError("train/test split requires >= 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DomainError("test_fraction must lie in (0, 1)");

    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    RngStream rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.index(i + 1)]);

    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    std::vector<FurnaceRecord> train, test;
    train.reserve(train_idx.size());
    test.reserve(test_idx.size());
    for (auto i : train_idx) train.push_back(data[i]);
    for (auto i : test_idx) test.push_back(data[i]);
    return {Dataset(std::move(train)), Dataset(std::move(test))};
}

}  // namespace furnace
