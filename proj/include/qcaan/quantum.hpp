#pragma once

#include "qcaan/core.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qcaan {

enum class GateKind { ry, rz, cz };

struct Gate {
    GateKind kind;
    int target;
    /// Control qubit for cz; -1 otherwise.
    int control = -1;
    /// Index into CircuitParams::theta; -1 for unparameterized gates.
    int param = -1;
};

/// Layered hardware-efficient ansatz: `layers` blocks of (RY, RZ on every qubit, then a CZ
/// ring over neighbours), followed by a closing RY/RZ layer. 2q(L+1) parameters.
struct CircuitAnsatz {
    int q = 0;
    int layers = 0;
    std::vector<Gate> gate_plan;

    std::size_t parameter_count() const { return static_cast<std::size_t>(2 * q * (layers + 1)); }
};

CircuitAnsatz make_ansatz(int q, int layers = 2);

struct CircuitParams {
    std::vector<double> theta;
};

/// Uniform draw in [0, 2pi) for every parameter.
CircuitParams random_params(const CircuitAnsatz& ansatz, std::uint64_t seed);

struct BornDistribution {
    int q = 0;
    std::vector<std::complex<double>> amplitudes;

    std::vector<double> probabilities() const;
    double norm_squared() const;
};

constexpr int kMaxSimulatedQubits = 20;

BornDistribution simulate(const CircuitAnsatz& ansatz, const CircuitParams& params);

/// Rows of 0/1 values; bit j of a row is the measurement of qubit j.
struct BitstringBatch {
    int q = 0;
    std::vector<std::uint8_t> bits;

    std::size_t rows() const { return q == 0 ? 0 : bits.size() / static_cast<std::size_t>(q); }
    std::uint8_t at(std::size_t row, int col) const { return bits[row * static_cast<std::size_t>(q) + col]; }
    /// Little-endian packing of one row (qubit j -> bit j).
    std::uint64_t packed(std::size_t row) const;
    Matrix to_matrix() const;
    static BitstringBatch from_packed(int q, const std::vector<std::uint64_t>& values);
};

BitstringBatch sample_bitstrings(const BornDistribution& dist, std::size_t m, std::uint64_t seed);

/// A probability measure on bitstrings: distinct support points with weights summing to 1.
struct BitstringMeasure {
    int q = 0;
    std::vector<std::uint64_t> support;
    std::vector<double> weights;
};

/// Collapses a batch to its empirical measure (uniform row weights, duplicates merged).
BitstringMeasure empirical_measure(const BitstringBatch& batch);
/// Exact Born measure (zero-probability outcomes dropped).
BitstringMeasure born_measure(const BornDistribution& dist, double floor = 0.0);

struct SinkhornResult {
    double value = 0;
    bool converged = true;
    int iterations = 0;
    double marginal_error = 0;
};

struct SinkhornOptions {
    double epsilon = 1.0;
    int max_iters = 200;
    double tolerance = 1e-9;
};

/// Entropic OT cost with Hamming ground cost, KL(P | a x b) regularization.
SinkhornResult entropic_ot(const BitstringMeasure& a, const BitstringMeasure& b, const SinkhornOptions& opts);

/// Debiased divergence OT(a,b) - (OT(a,a) + OT(b,b)) / 2.
SinkhornResult sinkhorn_divergence(const BitstringMeasure& a, const BitstringMeasure& b,
                                   const SinkhornOptions& opts);
SinkhornResult sinkhorn_divergence(const BitstringBatch& a, const BitstringBatch& b, double epsilon,
                                   int max_iters = 200);

struct SpsaGains {
    double a = 0.1;
    double c = 0.1;
    double big_a = 10.0;
    double alpha = 0.602;
    double gamma = 0.101;

    /// k counts from 1.
    double step(int k) const;
    double perturbation(int k) const;
};

struct QcbmTrainConfig {
    int iters = 20;
    std::size_t batch = 512;
    double epsilon = 1.0;
    int sinkhorn_max_iters = 200;
    SpsaGains gains;
    std::uint64_t seed = 0;
};

struct QcbmTrace {
    double initial_loss = 0;
    double final_loss = 0;
    /// Mean of the two perturbed loss evaluations at each step.
    std::vector<double> step_loss;
    int sinkhorn_nonconverged = 0;
};

struct QcbmTrainResult {
    CircuitParams params;
    QcbmTrace trace;
};

/// Sampled Sinkhorn loss of the circuit against `target`; the model batch is drawn with `seed`.
double qcbm_loss(const CircuitAnsatz& ansatz, const CircuitParams& params, const BitstringMeasure& target,
                 std::size_t batch, std::uint64_t seed, const SinkhornOptions& opts, bool* converged = nullptr);

/// One simultaneous-perturbation gradient estimate; `delta` receives the +-1 direction used.
std::vector<double> spsa_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                  const std::vector<double>& theta, double c, Rng& rng,
                                  std::vector<double>* delta = nullptr);

QcbmTrainResult train_qcbm(const CircuitAnsatz& ansatz, const CircuitParams& params, const BitstringBatch& target,
                           const QcbmTrainConfig& config);

std::string params_json(const CircuitAnsatz& ansatz, const CircuitParams& params, const QcbmTrace* trace = nullptr);
CircuitParams params_from_json(const std::string& text, CircuitAnsatz* ansatz = nullptr);
std::string bitstrings_text(const BitstringBatch& batch);
BitstringBatch bitstrings_from_text(const std::string& text);

}  // namespace qcaan
