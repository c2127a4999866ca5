#pragma once

#include "qcaan/classify.hpp"
#include "qcaan/neuralnet.hpp"
#include "qcaan/quantum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcaan {

enum class NoiseKind { gaussian, qcbm };

std::string to_string(NoiseKind k);

/// Generator input: standard normal noise, or bitstrings sampled from a circuit Born machine.
class NoiseSource {
public:
    static NoiseSource gaussian(int latent_dim);
    static NoiseSource qcbm(CircuitAnsatz ansatz, CircuitParams params);

    NoiseKind kind() const { return kind_; }
    int latent_dim() const { return latent_dim_; }
    const CircuitAnsatz& ansatz() const { return ansatz_; }
    const CircuitParams& params() const { return params_; }
    /// Replaces the circuit parameters and refreshes the cached Born distribution.
    void set_params(CircuitParams params);

    /// n x latent_dim matrix of noise rows.
    Matrix sample(std::size_t n, std::uint64_t seed) const;

private:
    NoiseKind kind_ = NoiseKind::gaussian;
    int latent_dim_ = 0;
    CircuitAnsatz ansatz_;
    CircuitParams params_;
    BornDistribution dist_;
};

struct QcAanConfig {
    int epochs = 300;
    std::size_t batch_size = 64;
    /// Epochs between QCBM refreshes (E) and SPSA steps per refresh (T).
    int refresh_period = 5;
    int qcbm_iters = 20;
    int d_steps = 1;
    int g_steps = 1;
    bool simple = false;
    ArchitectureRule rule = ArchitectureRule::doubling;
    AdamConfig adam;
    QcbmTrainConfig qcbm;
    std::uint64_t seed = 0;
};

struct EpochLosses {
    int epoch;
    double d_loss;
    double g_loss;
};

struct QcbmRefreshRecord {
    int epoch;
    QcbmTrace trace;
};

struct TrainedGenerator {
    DenseNetworkSpec generator_spec;
    NetParams generator;
    DenseNetworkSpec discriminator_spec;
    NetParams discriminator;
    NoiseSource noise;
    std::vector<EpochLosses> history;
    std::vector<QcbmRefreshRecord> qcbm_history;

    int f() const { return generator_spec.output_dim(); }
};

/// Bernoulli(sigmoid(activation)) bit per entry.
BitstringBatch latent_targets(const Matrix& penultimate_activations, std::uint64_t seed);

/// Adversarial training on minority rows; with a QCBM noise source the circuit is retrained
/// every `refresh_period` epochs towards latent targets from the discriminator.
TrainedGenerator train_aan(const Matrix& minority, NoiseSource noise, const QcAanConfig& config);

Matrix generate_synthetic(const TrainedGenerator& model, std::size_t count, std::uint64_t seed);

/// Logistic regression separating `a` (label 0) from `b` (label 1) on a 75/25 stratified split.
ClassificationReport distinguishability_report(const Matrix& a, const Matrix& b, std::uint64_t seed,
                                               const LogisticOptions& opts = {});

std::string history_csv(const TrainedGenerator& model);
std::string qcbm_history_csv(const TrainedGenerator& model);

}  // namespace qcaan
