#pragma once

#include "qcaan/core.hpp"

#include <string>
#include <vector>

namespace qcaan {

enum class Activation { relu, sigmoid, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerSpec {
    int input_dim;
    int output_dim;
    Activation activation;
};

/// Dense feed-forward network shape. `penultimate` indexes the layer whose activations are
/// exported as the latent representation (-1 when the network has none).
struct DenseNetworkSpec {
    std::vector<LayerSpec> layers;
    int penultimate = -1;

    int input_dim() const { return layers.front().input_dim; }
    int output_dim() const { return layers.back().output_dim; }
    std::vector<int> hidden_dims() const;
    void validate() const;
};

/// How intermediate layer widths grow with depth.
///  doubling: 2^k q for k = 1..n (widths double until reaching f)
///  literal:  2 k q for k = 1..n (same depth n, linear growth)
enum class ArchitectureRule { doubling, literal };

std::string to_string(ArchitectureRule r);
ArchitectureRule architecture_rule_from_string(const std::string& s);

/// Depth n = min{n : 2^n q >= f}.
int doubling_depth(int f, int q);

DenseNetworkSpec build_generator_spec(int f, int q, bool simple, ArchitectureRule rule = ArchitectureRule::doubling);
DenseNetworkSpec build_discriminator_spec(int f, int q, bool simple,
                                          ArchitectureRule rule = ArchitectureRule::doubling);
DenseNetworkSpec build_mlp_classifier_spec(int f);

struct LayerParams {
    Matrix weights;  // output_dim x input_dim
    Vector bias;
};

struct NetParams {
    std::vector<LayerParams> layers;

    std::size_t size() const;
    std::vector<double> flatten() const;
    void assign(const std::vector<double>& flat);
    bool all_finite() const;
    static NetParams zeros_like(const NetParams& p);
};

/// Glorot-uniform weights, zero biases.
NetParams init_params(const DenseNetworkSpec& spec, std::uint64_t seed);

struct ForwardResult {
    Matrix output;
    Matrix penultimate;
    /// activations[0] is the input; activations[k + 1] is layer k's output.
    std::vector<Matrix> activations;
    /// Pre-activation values per layer.
    std::vector<Matrix> preactivations;
};

ForwardResult forward(const DenseNetworkSpec& spec, const NetParams& params, const Matrix& x);

enum class LossKind { bce_on_labels, gan_generator, gan_discriminator };

constexpr double kBceClamp = 1e-12;

/// Mean binary cross-entropy with log arguments clamped at kBceClamp.
double bce_loss(const Vector& p, const Vector& y);

struct Gradients {
    NetParams params;
    Matrix input;
    double loss = 0;
};

/// Chain rule from d(loss)/d(output) back through the cached forward pass.
Gradients backprop_from_output(const DenseNetworkSpec& spec, const NetParams& params, const ForwardResult& fwd,
                               const Matrix& output_grad);

/// Gradient of the given loss for a single network with a 1-unit sigmoid output.
///  bce_on_labels:     mean BCE against `targets`.
///  gan_discriminator: BCE where `targets` marks real rows (1) and generated rows (0).
///  gan_generator:     non-saturating generator loss -mean log D(x); `targets` ignored. The
///                     returned input gradient is what the generator back-propagates.
Gradients backprop(const DenseNetworkSpec& spec, const NetParams& params, const Matrix& x, LossKind kind,
                   const Vector& targets = {});

/// Generator-side gradient of -mean log D(G(z)) with respect to the generator parameters.
Gradients generator_gradients(const DenseNetworkSpec& gen_spec, const NetParams& gen_params,
                              const DenseNetworkSpec& disc_spec, const NetParams& disc_params, const Matrix& z);

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    NetParams m, v;
    long t = 0;

    static AdamState for_params(const NetParams& p, AdamConfig config = {});
};

void adam_step(NetParams& params, const NetParams& grads, AdamState& state);

/// JSON header (layers, activations, penultimate) plus the flat weight array.
std::string network_checkpoint_json(const DenseNetworkSpec& spec, const NetParams& params);
void network_from_checkpoint_json(const std::string& text, DenseNetworkSpec& spec, NetParams& params);

}  // namespace qcaan
