#pragma once

#include "qcaan/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace qcaan {

/// Axis-aligned binary regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0;
        int left = -1, right = -1;
        double value = 0;
        int depth = 0;
    };
    std::vector<Node> nodes;

    double predict(const double* row) const;
    int depth() const;
    /// Split thresholds on `feature`, ascending, de-duplicated.
    std::vector<double> thresholds(int feature) const;
};

/// Greedy squared-error tree: exhaustive search over midpoints of sorted unique values,
/// at least one sample per leaf; ties go to the lower feature index, then the lower threshold.
RegressionTree fit_regression_tree(const Matrix& x, const Vector& y, int max_depth);

struct GbtOptions {
    int rounds = 200;
    int max_depth = 3;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
};

struct GbtModel {
    std::vector<std::string> feature_names;
    double base_prediction = 0;
    double learning_rate = 0.1;
    int max_depth = 3;
    std::vector<RegressionTree> trees;
    /// Training MSE after the base prediction and after each round.
    std::vector<double> train_mse;
    bool overfit_warning = false;

    double predict_row(const double* row) const;
    Vector predict(const Matrix& x) const;
    std::vector<double> thresholds(int feature) const;
    int feature_index(const std::string& name) const;
};

GbtModel fit_gbt(const Matrix& x, const Vector& y, const GbtOptions& opts = {},
                 std::vector<std::string> feature_names = {});

/// Mean increase in MSE when one column is shuffled, per feature. Rows are put in a canonical
/// order first, so the result does not depend on the input row order.
std::vector<double> permutation_importance(const GbtModel& model, const Matrix& x, const Vector& y, int repeats = 20,
                                           std::uint64_t seed = 0);

struct CeterisParibusProfile {
    std::string feature;
    std::vector<double> grid;
    std::vector<double> predictions;
    std::vector<double> anchor_row;
    double anchor_value = 0;
    double anchor_prediction = 0;
};

/// Predictions along an even grid over the observed [min, max] of `feature` in `x`, with the
/// other features fixed at `anchor_row`.
CeterisParibusProfile ceteris_paribus(const GbtModel& model, const Matrix& x, const std::vector<double>& anchor_row,
                                      const std::string& feature, int grid_size = 50);

/// One row per dataset: QC-AAN minus SMOTE metric differences plus metadata features.
struct MetricDiffTable {
    std::vector<std::string> datasets;
    std::vector<std::string> metrics;       // e.g. accuracy, precision, recall
    std::vector<std::string> feature_names;
    Matrix diffs;     // datasets x metrics
    Matrix features;  // datasets x features
};

struct MetricCell {
    std::string dataset;
    std::string strategy;
    std::map<std::string, double> metrics;
};

/// Averages repeated cells (seeds) per (dataset, strategy) and subtracts the baseline strategy's
/// value from the candidate's. Every dataset in `features` must have both strategies.
MetricDiffTable build_diff_table(const std::vector<MetricCell>& cells,
                                 const std::map<std::string, std::vector<double>>& features,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& metrics = {"accuracy", "precision", "recall"},
                                 const std::string& candidate = "qcaan", const std::string& baseline = "smote");

}  // namespace qcaan
