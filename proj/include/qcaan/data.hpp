#pragma once

#include "qcaan/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcaan {

/// Where a row came from: an original sample, or a synthetic one and the strategy that made it.
struct RowOrigin {
    std::string tag = "original";
    /// Row index in the source file; -1 for synthetic rows.
    std::int64_t source_index = -1;

    bool synthetic() const { return tag != "original"; }
};

/// Feature matrix with binary labels (1 = positive/minority).
struct TabularDataset {
    std::string name;
    std::vector<std::string> feature_names;
    Matrix features;
    std::vector<int> labels;
    std::vector<RowOrigin> origin;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t f() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t n_pos() const;
    std::size_t n_neg() const { return rows() - n_pos(); }

    /// Rows with the given label, in order.
    Matrix class_rows(int label) const;
    /// Throws Error if any structural invariant is broken.
    void validate() const;
};

/// Builds a dataset with original-row provenance (source_index = row position).
TabularDataset make_dataset(std::string name, Matrix features, std::vector<int> labels,
                            std::vector<std::string> feature_names = {});

struct LoadOptions {
    std::string label_column = "label";
    std::string positive_label = "1";
    char delimiter = ',';
};

TabularDataset load_dataset(const std::string& path, const LoadOptions& opts);
void write_dataset_csv(const TabularDataset& ds, const std::string& path, bool with_origin = false);

TabularDataset minmax_scale(const TabularDataset& ds);

struct TrainTestSplit {
    TabularDataset train;
    TabularDataset test;
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
};

TrainTestSplit train_test_split(const TabularDataset& ds, double fraction, std::uint64_t seed);

struct DistanceSummary {
    double min = 0, median = 0, max = 0;
    std::size_t pairs = 0;
};

struct DatasetMetadata {
    std::string name;
    std::size_t f = 0, n_samples = 0, n_neg = 0, n_pos = 0;
    double ratio = 0;
    /// Absent when the class has a single member.
    std::optional<DistanceSummary> d_n, d_p;
    DistanceSummary d_np;
    /// True when some class exceeded the exact-computation cap and was subsampled.
    bool subsampled = false;
    std::size_t row_cap = 0;
};

struct MetadataOptions {
    std::size_t row_cap = 20000;
    std::uint64_t seed = 0;
};

DatasetMetadata compute_metadata(const TabularDataset& ds, const MetadataOptions& opts = {});

/// Exact min/median/max over the Euclidean distances of all unordered pairs of rows.
DistanceSummary within_distances(const Matrix& rows);
/// Exact min/median/max over all distances between a row of `a` and a row of `b`.
DistanceSummary between_distances(const Matrix& a, const Matrix& b);

std::string metadata_json(const DatasetMetadata& m);
std::string metadata_csv_header();
std::string metadata_csv_row(const DatasetMetadata& m);

struct PcaModel {
    Vector mean;
    /// Columns are unit eigenvectors, descending eigenvalue order.
    Matrix components;
    Vector eigenvalues;
    int sweeps = 0;

    Matrix transform(const Matrix& x) const;
    Matrix inverse_transform(const Matrix& z) const;
};

struct JacobiResult {
    Vector eigenvalues;
    Matrix eigenvectors;
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; stops when the off-diagonal
/// Frobenius norm drops below `tol`. Results are unsorted.
JacobiResult jacobi_eigen(Matrix a, double tol = 1e-10, int max_sweeps = 100);

PcaModel pca_fit(const Matrix& x, std::size_t k);
TabularDataset pca_project(const TabularDataset& ds, std::size_t k);

/// One row of the imbalanced-data catalog this harness benchmarks against.
struct CatalogEntry {
    std::string name;
    std::size_t f, n_samples, n_neg, n_pos;
    double ratio;
    /// Published distance metadata: min/med/max of d_n, d_p, d_np.
    double d_n[3], d_p[3], d_np[3];
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry* find_catalog_entry(const std::string& name);

/// Differences between a loaded dataset and its catalog row: counts exactly, the imbalance
/// ratio after rounding to two decimals. Empty when everything matches.
std::vector<std::string> catalog_mismatches(const TabularDataset& ds, const CatalogEntry& entry);

}  // namespace qcaan
