#pragma once

#include "qcaan/aan.hpp"
#include "qcaan/classify.hpp"
#include "qcaan/data.hpp"
#include "qcaan/explain.hpp"
#include "qcaan/resample.hpp"
#include "qcaan/stats.hpp"

#include <map>
#include <string>
#include <vector>

namespace qcaan {

struct DatasetEntry {
    std::string name;
    std::string path;
    std::string label_column = "label";
    std::string positive_label = "1";
    char delimiter = ',';
};

struct AnalysisConfig {
    std::size_t replications = 1000;
    double hdi_mass = 0.95;
    stats::PAdjust p_adjust = stats::PAdjust::none;
    GbtOptions gbt;
    int importance_repeats = 20;
    int cp_grid = 50;
    std::string candidate = "qcaan";
    std::string baseline = "smote";
    std::uint64_t seed = 0;
};

struct Exp2Config {
    DatasetEntry dataset;
    std::size_t distinguish_samples = 5104;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::string output_dir = "qcaan-out";
    std::vector<DatasetEntry> datasets;
    std::vector<StrategyKind> strategies{StrategyKind::none, StrategyKind::random, StrategyKind::smote,
                                         StrategyKind::qcaan};
    std::vector<std::uint64_t> seeds{0};
    int q = 16;
    int qcbm_layers = 2;
    std::size_t min_features = 16;
    double train_fraction = 0.75;
    std::size_t metadata_row_cap = 20000;
    /// The train/test split depends only on this and the dataset name, so every seed and
    /// strategy sees the same test rows.
    std::uint64_t split_seed = 0;
    std::size_t smote_k = 5;
    double target_ratio = 1.0;
    LogisticOptions logistic;
    double threshold = 0.5;
    QcAanConfig gan;
    MlpOptions mlp;
    Exp2Config exp2;
    AnalysisConfig analysis;
    unsigned workers = 1;

    /// Datasets dropped by the feature-count filter, with the reason.
    std::vector<std::pair<std::string, std::string>> filtered_out;

    void validate() const;
};

/// Parses a JSON config; every field is optional and falls back to the defaults above.
/// Relative output paths are placed under $QCAAN_OUTPUT_ROOT when that is set. Datasets with
/// fewer than `min_features` features are moved to `filtered_out`.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
/// Canonical JSON of every setting that influences results (not output_dir or workers).
std::string config_json(const ExperimentConfig& config);
/// Hash of the canonical settings with each dataset path replaced by a digest of the file,
/// so moving the data keeps cached cells valid and editing it invalidates them.
std::string config_hash(const ExperimentConfig& config);

struct ExperimentRecord {
    std::string dataset;
    std::string strategy;
    std::uint64_t seed = 0;
    std::string status = "ok";
    ClassificationReport report;
    std::size_t n_train = 0;
    std::size_t n_synthetic = 0;
    std::string test_hash;
    bool audit_passed = true;
    std::string config_hash;
    std::string message;
    /// Wall-clock seconds; kept out of the result CSVs so reruns stay byte-identical.
    double seconds = 0;

    std::string key() const;
};

std::string record_csv_header();
std::string record_csv_row(const ExperimentRecord& r, const ExperimentConfig& config);
std::vector<ExperimentRecord> read_records_csv(const std::string& path);

struct ExperimentResult {
    std::vector<ExperimentRecord> records;
    std::size_t computed = 0;
    std::size_t reused = 0;

    bool complete() const;
};

ExperimentResult run_experiment1(const ExperimentConfig& config);

struct RegimeOutcome {
    std::string regime;
    ClassificationReport report;
    std::vector<MlpEpochRecord> history;
    std::vector<RocPoint> roc;
    std::size_t n_train = 0;
};

struct Exp2Result {
    std::size_t pca_width = 0;
    std::vector<RegimeOutcome> regimes;
    ClassificationReport distinguish;
    std::size_t distinguish_fed = 0;
    std::vector<EpochLosses> gan_history, qcaan_history;
};

Exp2Result run_experiment2(const ExperimentConfig& config);

struct MetadataRun {
    std::vector<DatasetMetadata> rows;
    /// (dataset, message) for datasets that failed to load.
    std::vector<std::pair<std::string, std::string>> errors;
};

/// Loads, scales and summarizes every configured dataset; writes metadata.csv, per-dataset JSON,
/// and a comparison against the published catalog values where the name matches.
MetadataRun run_metadata(const ExperimentConfig& config);
std::map<std::string, DatasetMetadata> read_metadata_csv(const std::string& path);

struct MetricAnalysis {
    std::string metric;
    /// Seed-averaged value per dataset, one group per strategy; the box-plot data.
    stats::MetricSampleGroups groups;
    std::vector<std::vector<std::string>> group_datasets;
    stats::KruskalWallis omnibus;
    stats::DunnResult dunn;
    std::vector<std::pair<std::string, stats::HdiInterval>> hdi;
};

struct SurrogateAnalysis {
    std::string metric;
    GbtModel model;
    std::vector<double> importance;
    std::vector<CeterisParibusProfile> profiles;
};

struct AnalysisReport {
    std::vector<std::string> strategies;
    std::vector<std::string> datasets;
    std::vector<MetricAnalysis> metrics;
    MetricDiffTable diff_table;
    std::vector<SurrogateAnalysis> surrogates;
    std::vector<std::string> notes;
};

const std::vector<std::string>& metadata_feature_names();
std::vector<double> metadata_features(const DatasetMetadata& m);

AnalysisReport run_analysis(const ExperimentConfig& config, const std::vector<ExperimentRecord>& records,
                            const std::map<std::string, DatasetMetadata>& metadata);
/// Writes the report tables and JSON summary under <output_dir>/analysis.
void write_analysis(const ExperimentConfig& config, const AnalysisReport& report);

enum class PlotFormat { svg, csv_only };

/// Regenerates every figure from the files under output_dir; returns the files written.
std::vector<std::string> emit_plots(const ExperimentConfig& config, PlotFormat format);

/// Writes three catalog-shaped synthetic datasets and a config that runs them; returns the config path.
std::string write_demo_datasets(const std::string& dir, std::uint64_t seed = 7);

}  // namespace qcaan
