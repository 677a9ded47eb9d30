#include "furnace/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "furnace/format.hpp"

namespace furnace {

namespace {

struct NodeWork {
    std::vector<int> rows;
    int depth;
    int node_index;
};

double sorted_mean(std::vector<double> values) {
    // Canonical accumulation order: values sorted ascending. Keeps leaf means
    // bit-identical under any permutation of the training rows.
    std::sort(values.begin(), values.end());
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    return sum / static_cast<double>(values.size());
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();  // SSE_left + SSE_right
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes_.empty()) throw StateError("predict on an unfitted tree");
    if (x.size() != features_.size())
        throw DimensionError("predict: expected " + std::to_string(features_.size()) +
                             " features, got " + std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("predict: non-finite feature value");

    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
}

std::size_t RegressionTree::leaf_count() const {
    std::size_t k = 0;
    for (const auto& n : nodes_)
        if (n.is_leaf()) ++k;
    return k;
}

std::size_t RegressionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            best = std::max(best, d[i]);
        } else {
            d[static_cast<std::size_t>(n.left)] = d[i] + 1;
            d[static_cast<std::size_t>(n.right)] = d[i] + 1;
        }
    }
    return best;
}

nlohmann::json RegressionTree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        if (n.is_leaf()) {
            nodes.push_back({{"value", n.value}, {"count", n.count}});
        } else {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
        }
    }
    return {{"features", features_}, {"target", target_}, {"nodes", nodes}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        if (jn.contains("feature")) {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
        } else {
            n.value = jn.at("value").get<double>();
            n.count = jn.at("count").get<int>();
        }
        nodes.push_back(n);
    }
    return RegressionTree(j.at("features").get<std::vector<std::string>>(),
                          j.at("target").get<std::string>(), std::move(nodes));
}

const RegressionTree& SurrogateSet::model(const std::string& name) const {
    for (const auto& [n, t] : models)
        if (n == name) return t;
    throw SchemaError("surrogate set has no model for: " + name);
}

bool SurrogateSet::contains(const std::string& name) const {
    for (const auto& [n, t] : models)
        if (n == name) return true;
    return false;
}

SurrogateSet SurrogateSet::retain(const std::vector<std::string>& names) const {
    SurrogateSet out;
    out.features = features;
    for (const auto& [n, t] : models)
        if (std::find(names.begin(), names.end(), n) != names.end()) out.models.emplace_back(n, t);
    for (const auto& name : names)
        if (!out.contains(name)) throw SchemaError("surrogate set has no model for: " + name);
    return out;
}

RegressionTree fit_cart(const Dataset& train, const std::vector<std::string>& features,
                        const std::string& target, const CartParams& params) {
    params.validate();
    if (train.empty()) throw InsufficientDataError("fit_cart: empty training set");

    std::vector<std::vector<double>> cols;
    cols.reserve(features.size());
    for (const auto& f : features) cols.push_back(train.column(f));
    const std::vector<double> y = train.column(target);
    const int n_total = static_cast<int>(train.size());

    std::vector<TreeNode> nodes;
    std::vector<NodeWork> stack;
    nodes.emplace_back();
    {
        std::vector<int> all(static_cast<std::size_t>(n_total));
        std::iota(all.begin(), all.end(), 0);
        stack.push_back({std::move(all), 0, 0});
    }

    while (!stack.empty()) {
        NodeWork work = std::move(stack.back());
        stack.pop_back();
        const auto& rows = work.rows;
        const int n = static_cast<int>(rows.size());

        auto make_leaf = [&]() {
            std::vector<double> targets;
            targets.reserve(rows.size());
            for (int r : rows) targets.push_back(y[static_cast<std::size_t>(r)]);
            auto& leaf = nodes[static_cast<std::size_t>(work.node_index)];
            leaf.feature = -1;
            leaf.value = sorted_mean(std::move(targets));
            leaf.count = n;
        };

        bool pure = true;
        for (int r : rows)
            if (y[static_cast<std::size_t>(r)] != y[static_cast<std::size_t>(rows[0])]) {
                pure = false;
                break;
            }

        if (pure || work.depth >= params.max_depth || n < params.min_samples_split) {
            make_leaf();
            continue;
        }

        SplitChoice best;
        for (std::size_t f = 0; f < cols.size(); ++f) {
            const auto& col = cols[f];
            // Canonical order: (feature value, target value) ascending.
            std::vector<std::pair<double, double>> pts;
            pts.reserve(rows.size());
            for (int r : rows)
                pts.emplace_back(col[static_cast<std::size_t>(r)], y[static_cast<std::size_t>(r)]);
            std::sort(pts.begin(), pts.end());

            std::vector<double> psum(pts.size() + 1, 0.0), psq(pts.size() + 1, 0.0);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                psum[i + 1] = psum[i] + pts[i].second;
                psq[i + 1] = psq[i] + pts[i].second * pts[i].second;
            }

            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                if (pts[i].first == pts[i + 1].first) continue;
                const double mid = pts[i].first + 0.5 * (pts[i + 1].first - pts[i].first);
                // Membership follows the predict-time rule (v <= mid goes
                // left), so re-derive the left count in case the midpoint
                // rounded onto one of the neighbouring values.
                auto split_it = std::upper_bound(
                    pts.begin(), pts.end(), mid,
                    [](double v, const std::pair<double, double>& p) { return v < p.first; });
                const auto nl = static_cast<std::size_t>(split_it - pts.begin());
                const auto nr = pts.size() - nl;
                if (nl == 0 || nr == 0) continue;
                if (static_cast<int>(nl) < params.min_samples_leaf ||
                    static_cast<int>(nr) < params.min_samples_leaf)
                    continue;

                const double sl = psum[nl], sr = psum.back() - sl;
                const double ql = psq[nl], qr = psq.back() - ql;
                const double sse = (ql - sl * sl / static_cast<double>(nl)) +
                                   (qr - sr * sr / static_cast<double>(nr));
                if (sse < best.score) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.threshold = mid;
                    best.score = sse;
                }
            }
        }

        if (!best.found) {
            make_leaf();
            continue;
        }

        std::vector<int> left_rows, right_rows;
        for (int r : rows) {
            if (cols[static_cast<std::size_t>(best.feature)][static_cast<std::size_t>(r)] <=
                best.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        const int li = static_cast<int>(nodes.size());
        nodes.emplace_back();
        const int ri = static_cast<int>(nodes.size());
        nodes.emplace_back();
        auto& split = nodes[static_cast<std::size_t>(work.node_index)];
        split.feature = best.feature;
        split.threshold = best.threshold;
        split.left = li;
        split.right = ri;

        // Right pushed first so the left child is processed first; expansion
        // order does not affect the result, this just keeps node ids stable.
        stack.push_back({std::move(right_rows), work.depth + 1, ri});
        stack.push_back({std::move(left_rows), work.depth + 1, li});
    }

    return RegressionTree(features, target, std::move(nodes));
}

namespace {

struct SplitStats {
    double mse = 0.0;
    double r2 = 0.0;
    bool degenerate = false;
};

SplitStats split_stats(const RegressionTree& tree, const Dataset& data,
                       const std::string& target) {
    const auto y = data.column(target);
    std::vector<std::vector<double>> cols;
    for (const auto& f : tree.features()) cols.push_back(data.column(f));
    std::vector<double> x(cols.size());
    double ss_res = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t f = 0; f < cols.size(); ++f) x[f] = cols[f][i];
        const double r = y[i] - tree.predict(x);
        ss_res += r * r;
    }
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);

    SplitStats s;
    s.mse = ss_res / static_cast<double>(y.size());
    if (ss_tot == 0.0) {
        s.degenerate = true;
        s.r2 = std::numeric_limits<double>::quiet_NaN();
    } else {
        s.r2 = 1.0 - ss_res / ss_tot;
    }
    return s;
}

}  // namespace

ModelMetrics evaluate(const RegressionTree& tree, const Dataset& train, const Dataset& test,
                      const std::string& target) {
    if (train.empty() || test.empty())
        throw InsufficientDataError("evaluate: train and test must be non-empty");

    const auto tr = split_stats(tree, train, target);
    const auto te = split_stats(tree, test, target);

    ModelMetrics m;
    m.train_mse = tr.mse;
    m.test_mse = te.mse;
    m.train_rmse = std::sqrt(tr.mse);
    m.test_rmse = std::sqrt(te.mse);
    m.train_r2 = tr.r2;
    m.test_r2 = te.r2;

    if (tr.degenerate || te.degenerate) {
        const std::string which = tr.degenerate ? "train" : "test";
        throw DegenerateR2Error("R^2 undefined: " + which + " target '" + target +
                                    "' has zero variance",
                                m);
    }
    return m;
}

std::vector<std::string> select_models(
    const std::vector<std::pair<std::string, ModelMetrics>>& metrics, double test_r2_threshold) {
    if (metrics.empty()) throw InsufficientDataError("select_models: empty metrics map");
    std::vector<std::string> retained;
    for (const auto& [name, m] : metrics)
        if (m.test_r2 >= test_r2_threshold) retained.push_back(name);
    return retained;
}

std::string display_name(const std::string& column) {
    if (column == "fired_duty") return "Fired Duty";
    if (column == "throughput") return "Throughput";
    if (column == "cit") return "CIT";
    if (column == "absorbed_duty") return "Absorbed Duty";
    if (column == "stack_o2") return "Stack O2";
    if (column == "cot") return "COT";
    if (column == "efficiency") return "Efficiency";
    if (column == "fuel_gas") return "Fuel Gas";
    return column;
}

namespace {

std::string internal_name(const std::string& display) {
    const char* pairs[][2] = {{"Fired Duty", "fired_duty"},   {"Throughput", "throughput"},
                              {"CIT", "cit"},                 {"Absorbed Duty", "absorbed_duty"},
                              {"Stack O2", "stack_o2"},       {"COT", "cot"},
                              {"Efficiency", "efficiency"},   {"Fuel Gas", "fuel_gas"}};
    for (auto& p : pairs)
        if (display == p[0]) return p[1];
    return display;
}

// Minimal quoted-field CSV split, enough for the metrics table.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_metrics_csv(const std::vector<std::pair<std::string, ModelMetrics>>& metrics,
                       const std::vector<std::string>& features, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "Manipulated Variables,Controlled Variables,Train MSE,Test MSE,Train RMSE,"
           "Test RMSE,Train Rsquare,Test Rsquare\n";

    std::string mv;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (i) mv += ", ";
        mv += display_name(features[i]);
    }
    for (const auto& [name, m] : metrics) {
        out << '"' << mv << "\"," << display_name(name) << ',' << fmt_double(m.train_mse) << ','
            << fmt_double(m.test_mse) << ',' << fmt_double(m.train_rmse) << ','
            << fmt_double(m.test_rmse) << ',' << fmt_double(m.train_r2) << ','
            << fmt_double(m.test_r2) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::string, ModelMetrics>> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError("empty metrics file: " + path);

    std::vector<std::pair<std::string, ModelMetrics>> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_row(line);
        if (cells.size() != 8) throw SchemaError("metrics row must have 8 cells: " + path);
        ModelMetrics m;
        m.train_mse = std::stod(cells[2]);
        m.test_mse = std::stod(cells[3]);
        m.train_rmse = std::stod(cells[4]);
        m.test_rmse = std::stod(cells[5]);
        m.train_r2 = std::stod(cells[6]);
        m.test_r2 = std::stod(cells[7]);
        out.emplace_back(internal_name(cells[1]), m);
    }
    return out;
}

}  // namespace furnace
