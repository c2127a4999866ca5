#pragma once

#include "qcaan/aan.hpp"
#include "qcaan/data.hpp"

#include <memory>
#include <string>
#include <vector>

namespace qcaan {

Matrix random_oversample(const Matrix& minority, std::size_t n_new, std::uint64_t seed);

struct SmoteSample {
    std::size_t base;
    std::size_t neighbor;
    double gap;
};

/// k nearest neighbours of every row (self excluded), ties broken by lower row index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& x, std::size_t k);

/// Each synthetic row is x + u (x_nn - x) for a uniformly chosen base row x, one of its k
/// nearest minority neighbours x_nn, and u ~ U[0, 1]. `trace` records the choices.
Matrix smote(const Matrix& minority, std::size_t k, std::size_t n_new, std::uint64_t seed,
             std::vector<SmoteSample>* trace = nullptr);

enum class StrategyKind { none, random, smote, qcaan, gan };

std::string to_string(StrategyKind k);
StrategyKind strategy_from_string(const std::string& s);
bool is_generative(StrategyKind k);

struct AugmentationStrategy {
    StrategyKind kind = StrategyKind::none;
    std::size_t smote_k = 5;
    /// Desired positive:negative ratio after augmentation.
    double target_ratio = 1.0;
    std::shared_ptr<const TrainedGenerator> model;
};

/// Number of synthetic positives needed to reach the target ratio (0 if already there).
std::size_t synthetic_count(std::size_t n_neg, std::size_t n_pos, double target_ratio);

/// Training set with synthetic positives appended; the test set is not read.
TabularDataset apply_strategy(const TrainTestSplit& split, const AugmentationStrategy& strategy,
                              std::uint64_t seed);

/// Content hash of a dataset (features and labels).
std::uint64_t dataset_hash(const TabularDataset& ds);
/// Content hash of one row (features and label).
std::uint64_t row_hash(const TabularDataset& ds, std::size_t row);

struct LeakageAudit {
    bool passed = true;
    std::size_t original_rows_from_test = 0;
    std::size_t content_matches = 0;
};

/// Checks that no augmented row originates from a test row, and that no test row's content
/// appears among the augmented rows unless the same content is already in the original training set.
LeakageAudit audit_test_isolation(const TrainTestSplit& split, const TabularDataset& augmented);

}  // namespace qcaan
