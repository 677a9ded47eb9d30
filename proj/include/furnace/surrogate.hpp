#ifndef FURNACE_SURROGATE_HPP
#define FURNACE_SURROGATE_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "furnace/dataset.hpp"
#include "furnace/errors.hpp"

namespace furnace {

struct CartParams {
    int max_depth = 8;
    int min_samples_leaf = 5;
    int min_samples_split = 10;

    void validate() const {
        if (max_depth < 1 || min_samples_leaf < 1 || min_samples_split < 2)
            throw DomainError("cart params: max_depth/min_samples_leaf >= 1, min_samples_split >= 2");
    }
};

struct TreeNode {
    int feature = -1;  // split feature index; -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction (mean of routed training targets)
    int count = 0;       // training samples routed here

    bool is_leaf() const { return feature < 0; }
};

/// Binary regression tree grown by greedy variance-reduction splitting.
///
/// Determinism: candidate thresholds are midpoints between consecutive
/// distinct sorted feature values; score ties are broken by lowest feature
/// index then lowest threshold; samples are processed in a canonical
/// (feature value, target value) order, so permuting training rows cannot
/// change the fitted tree. At prediction time, value <= threshold goes left.
class RegressionTree {
public:
    RegressionTree() = default;
    RegressionTree(std::vector<std::string> features, std::string target,
                   std::vector<TreeNode> nodes)
        : features_(std::move(features)), target_(std::move(target)), nodes_(std::move(nodes)) {}

    const std::vector<std::string>& features() const { return features_; }
    const std::string& target() const { return target_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    double predict(std::span<const double> x) const;
    std::size_t leaf_count() const;
    std::size_t depth() const;  // edges on the longest root-to-leaf path

    nlohmann::json to_json() const;
    static RegressionTree from_json(const nlohmann::json& j);

private:
    std::vector<std::string> features_;
    std::string target_;
    std::vector<TreeNode> nodes_;  // nodes_[0] is the root
};

struct ModelMetrics {
    double train_mse = 0.0;
    double test_mse = 0.0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
    double train_r2 = 0.0;
    double test_r2 = 0.0;
};

/// Evaluation aborted because a split's target variance is zero; MSE/RMSE
/// were still computable and ride along on the exception.
class DegenerateR2Error : public DegenerateVarianceError {
public:
    DegenerateR2Error(const std::string& msg, ModelMetrics partial)
        : DegenerateVarianceError(msg), partial(partial) {}
    ModelMetrics partial;  // r2 fields are NaN
};

/// Named map of surrogates sharing one feature list.
struct SurrogateSet {
    std::vector<std::string> features;
    std::vector<std::pair<std::string, RegressionTree>> models;

    const RegressionTree& model(const std::string& name) const;
    bool contains(const std::string& name) const;

    /// The set restricted to exactly the given models, in their input
    /// order; SchemaError if a name is absent.
    SurrogateSet retain(const std::vector<std::string>& names) const;
};

/// Greedy CART fit of `target` on `features`. Splitting stops when the depth
/// limit, min_samples_split, min_samples_leaf, or node purity binds.
RegressionTree fit_cart(const Dataset& train, const std::vector<std::string>& features,
                        const std::string& target, const CartParams& params);

/// MSE/RMSE/R^2 on each split, with R^2 = 1 - SS_res/SS_tot about the split's
/// own target mean. DegenerateR2Error if either split's target is constant.
ModelMetrics evaluate(const RegressionTree& tree, const Dataset& train, const Dataset& test,
                      const std::string& target);

/// Retains exactly the models with test R^2 >= threshold, in input order.
std::vector<std::string> select_models(
    const std::vector<std::pair<std::string, ModelMetrics>>& metrics, double test_r2_threshold);

/// One metrics row per model in the conventional performance-table order:
/// manipulated variables, controlled variable, train/test MSE, RMSE, R^2.
void write_metrics_csv(const std::vector<std::pair<std::string, ModelMetrics>>& metrics,
                       const std::vector<std::string>& features, const std::string& path);

/// Inverse of write_metrics_csv (used by the report re-emit path).
std::vector<std::pair<std::string, ModelMetrics>> read_metrics_csv(const std::string& path);

/// Display name used in reports ("absorbed_duty" -> "Absorbed Duty", ...).
std::string display_name(const std::string& column);

}  // namespace furnace

#endif
