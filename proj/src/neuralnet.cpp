#include "qcaan/neuralnet.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace qcaan {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::linear: return "linear";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "linear") return Activation::linear;
    throw Error("unknown activation '" + s + "'");
}

std::string to_string(ArchitectureRule r) { return r == ArchitectureRule::doubling ? "doubling" : "literal"; }

ArchitectureRule architecture_rule_from_string(const std::string& s) {
    if (s == "doubling") return ArchitectureRule::doubling;
    if (s == "literal") return ArchitectureRule::literal;
    throw Error("unknown architecture rule '" + s + "'");
}

std::vector<int> DenseNetworkSpec::hidden_dims() const {
    std::vector<int> dims;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) dims.push_back(layers[i].output_dim);
    return dims;
}

void DenseNetworkSpec::validate() const {
    if (layers.empty()) throw Error("network spec has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].input_dim < 1 || layers[i].output_dim < 1) throw Error("network spec: non-positive layer width");
        if (i > 0 && layers[i].input_dim != layers[i - 1].output_dim)
            throw Error("network spec: layer " + std::to_string(i) + " input does not chain");
    }
    if (penultimate >= static_cast<int>(layers.size())) throw Error("network spec: penultimate index out of range");
}

int doubling_depth(int f, int q) {
    int n = 0;
    long long width = q;
    while (width < f) {
        width *= 2;
        ++n;
    }
    return n;
}

namespace {

void check_dims(int f, int q, bool simple) {
    if (f < 1 || q < 1) throw Error("architecture: f and q must be positive");
    if (!simple && f <= q)
        throw Error("architecture: the layered networks need f > q (got f=" + std::to_string(f) +
                    ", q=" + std::to_string(q) + ")");
}

int hidden_width(int k, int q, ArchitectureRule rule) {
    return rule == ArchitectureRule::doubling ? (1 << k) * q : 2 * k * q;
}

}  // namespace

DenseNetworkSpec build_generator_spec(int f, int q, bool simple, ArchitectureRule rule) {
    check_dims(f, q, simple);
    DenseNetworkSpec s;
    if (simple) {
        s.layers.push_back({q, f, Activation::relu});
        return s;
    }
    const int n = doubling_depth(f, q);
    int prev = q;
    for (int k = 1; k <= n; ++k) {
        const int w = hidden_width(k, q, rule);
        s.layers.push_back({prev, w, Activation::relu});
        prev = w;
    }
    s.layers.push_back({prev, f, Activation::relu});
    return s;
}

DenseNetworkSpec build_discriminator_spec(int f, int q, bool simple, ArchitectureRule rule) {
    check_dims(f, q, simple);
    DenseNetworkSpec s;
    if (simple) {
        s.layers.push_back({f, q, Activation::relu});
        s.layers.push_back({q, 1, Activation::sigmoid});
        s.penultimate = 0;
        return s;
    }
    const int n = doubling_depth(f, q);
    int prev = f;
    for (int k = 1; k <= n; ++k) {
        const int w = hidden_width(n - k + 1, q, rule);
        s.layers.push_back({prev, w, Activation::relu});
        prev = w;
    }
    s.layers.push_back({prev, q, Activation::relu});
    s.penultimate = static_cast<int>(s.layers.size()) - 1;
    s.layers.push_back({q, 1, Activation::sigmoid});
    return s;
}

DenseNetworkSpec build_mlp_classifier_spec(int f) {
    DenseNetworkSpec s;
    int prev = f;
    for (int w : {64, 32, 16, 4}) {
        s.layers.push_back({prev, w, Activation::relu});
        prev = w;
    }
    s.penultimate = static_cast<int>(s.layers.size()) - 1;
    s.layers.push_back({prev, 1, Activation::sigmoid});
    return s;
}

std::size_t NetParams::size() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

std::vector<double> NetParams::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& l : layers) {
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weights.cols(); ++j) out.push_back(l.weights(i, j));
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias[i]);
    }
    return out;
}

void NetParams::assign(const std::vector<double>& flat) {
    if (flat.size() != size()) throw Error("NetParams::assign: size mismatch");
    std::size_t k = 0;
    for (auto& l : layers) {
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = flat[k++];
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[k++];
    }
}

bool NetParams::all_finite() const {
    for (const auto& l : layers)
        if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

NetParams NetParams::zeros_like(const NetParams& p) {
    NetParams z;
    for (const auto& l : p.layers)
        z.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
    return z;
}

NetParams init_params(const DenseNetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, "glorot-init"));
    NetParams p;
    for (const auto& l : spec.layers) {
        const double limit = std::sqrt(6.0 / (l.input_dim + l.output_dim));
        LayerParams lp{Matrix(l.output_dim, l.input_dim), Vector::Zero(l.output_dim)};
        for (Eigen::Index i = 0; i < lp.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < lp.weights.cols(); ++j)
                lp.weights(i, j) = limit * (2.0 * uniform01(rng) - 1.0);
        p.layers.push_back(std::move(lp));
    }
    return p;
}

ForwardResult forward(const DenseNetworkSpec& spec, const NetParams& params, const Matrix& x) {
    if (x.cols() != spec.input_dim())
        throw Error("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                    std::to_string(spec.input_dim()));
    if (params.layers.size() != spec.layers.size()) throw Error("forward: parameter/spec layer count mismatch");
    ForwardResult r;
    r.activations.push_back(x);
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const auto& lp = params.layers[k];
        if (lp.weights.cols() != r.activations.back().cols() || lp.weights.rows() != spec.layers[k].output_dim)
            throw Error("forward: layer " + std::to_string(k) + " weight shape mismatch");
        Matrix z = (r.activations.back() * lp.weights.transpose()).rowwise() + lp.bias.transpose();
        Matrix a;
        switch (spec.layers[k].activation) {
            case Activation::relu: a = z.cwiseMax(0.0); break;
            case Activation::sigmoid: a = z.unaryExpr([](double v) { return sigmoid(v); }); break;
            case Activation::linear: a = z; break;
        }
        r.preactivations.push_back(std::move(z));
        r.activations.push_back(std::move(a));
    }
    r.output = r.activations.back();
    if (spec.penultimate >= 0) r.penultimate = r.activations[static_cast<std::size_t>(spec.penultimate) + 1];
    return r;
}

double bce_loss(const Vector& p, const Vector& y) {
    double s = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        s -= y[i] * std::log(std::max(p[i], kBceClamp)) + (1 - y[i]) * std::log(std::max(1 - p[i], kBceClamp));
    return s / static_cast<double>(p.size());
}

Gradients backprop_from_output(const DenseNetworkSpec& spec, const NetParams& params, const ForwardResult& fwd,
                               const Matrix& output_grad) {
    Gradients g;
    g.params = NetParams::zeros_like(params);
    Matrix delta = output_grad;  // d loss / d activation of current layer
    for (std::size_t kk = spec.layers.size(); kk-- > 0;) {
        const Matrix& z = fwd.preactivations[kk];
        const Matrix& a = fwd.activations[kk + 1];
        switch (spec.layers[kk].activation) {
            case Activation::relu: delta = delta.cwiseProduct((z.array() > 0).cast<double>().matrix()); break;
            case Activation::sigmoid: delta = delta.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix())); break;
            case Activation::linear: break;
        }
        g.params.layers[kk].weights = delta.transpose() * fwd.activations[kk];
        g.params.layers[kk].bias = delta.colwise().sum().transpose();
        delta = delta * params.layers[kk].weights;
    }
    g.input = std::move(delta);
    return g;
}

namespace {

// d(mean BCE)/dz for a sigmoid output unit, or d/dp when the output is not a sigmoid.
Matrix bce_output_grad(const DenseNetworkSpec& spec, const ForwardResult& fwd, const Vector& y, bool* through_z) {
    const Eigen::Index n = fwd.output.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix grad(n, 1);
    const bool sig = spec.layers.back().activation == Activation::sigmoid;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = fwd.output(i, 0);
        if (sig) {
            grad(i, 0) = (p - y[i]) * inv_n;
        } else {
            const double dp = (p > kBceClamp ? -y[i] / p : 0.0) + (1 - p > kBceClamp ? (1 - y[i]) / (1 - p) : 0.0);
            grad(i, 0) = dp * inv_n;
        }
    }
    *through_z = sig;
    return grad;
}

Gradients backprop_bce(const DenseNetworkSpec& spec, const NetParams& params, const ForwardResult& fwd,
                       const Vector& y) {
    bool through_z = false;
    Matrix g = bce_output_grad(spec, fwd, y, &through_z);
    if (!through_z) return backprop_from_output(spec, params, fwd, g);
    // The sigmoid derivative is already folded into g; back-propagate from the last pre-activation.
    DenseNetworkSpec linear_tail = spec;
    linear_tail.layers.back().activation = Activation::linear;
    return backprop_from_output(linear_tail, params, fwd, g);
}

}  // namespace

Gradients backprop(const DenseNetworkSpec& spec, const NetParams& params, const Matrix& x, LossKind kind,
                   const Vector& targets) {
    if (spec.output_dim() != 1) throw Error("backprop: loss requires a single output unit");
    const auto fwd = forward(spec, params, x);
    Vector y;
    if (kind == LossKind::gan_generator) {
        y = Vector::Ones(x.rows());
    } else {
        if (targets.size() != x.rows()) throw Error("backprop: target length does not match batch size");
        y = targets;
    }
    Gradients g = backprop_bce(spec, params, fwd, y);
    g.loss = bce_loss(fwd.output.col(0), y);
    return g;
}

Gradients generator_gradients(const DenseNetworkSpec& gen_spec, const NetParams& gen_params,
                              const DenseNetworkSpec& disc_spec, const NetParams& disc_params, const Matrix& z) {
    const auto gen_fwd = forward(gen_spec, gen_params, z);
    const auto d = backprop(disc_spec, disc_params, gen_fwd.output, LossKind::gan_generator);
    Gradients g = backprop_from_output(gen_spec, gen_params, gen_fwd, d.input);
    g.loss = d.loss;
    return g;
}

AdamState AdamState::for_params(const NetParams& p, AdamConfig config) {
    AdamState s;
    s.config = config;
    s.m = NetParams::zeros_like(p);
    s.v = NetParams::zeros_like(p);
    return s;
}

void adam_step(NetParams& params, const NetParams& grads, AdamState& state) {
    if (params.layers.size() != grads.layers.size() || state.m.layers.size() != params.layers.size())
        throw Error("adam_step: shape mismatch");
    ++state.t;
    const auto& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        if (p.size() != g.size()) throw Error("adam_step: shape mismatch");
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        const auto mhat = m.array() / bc1;
        const auto vhat = v.array() / bc2;
        p.array() -= c.lr * mhat / (vhat.sqrt() + c.eps);
    };
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        update(params.layers[k].weights, grads.layers[k].weights, state.m.layers[k].weights,
               state.v.layers[k].weights);
        update(params.layers[k].bias, grads.layers[k].bias, state.m.layers[k].bias, state.v.layers[k].bias);
    }
}

std::string network_checkpoint_json(const DenseNetworkSpec& spec, const NetParams& params) {
    nlohmann::ordered_json j;
    j["format"] = "qcaan-dense-v1";
    auto& layers = j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : spec.layers)
        layers.push_back({{"input_dim", l.input_dim}, {"output_dim", l.output_dim},
                          {"activation", to_string(l.activation)}});
    j["penultimate"] = spec.penultimate;
    j["weights"] = params.flatten();
    return j.dump();
}

void network_from_checkpoint_json(const std::string& text, DenseNetworkSpec& spec, NetParams& params) {
    const auto j = nlohmann::json::parse(text);
    spec = {};
    for (const auto& l : j.at("layers"))
        spec.layers.push_back({l.at("input_dim").get<int>(), l.at("output_dim").get<int>(),
                               activation_from_string(l.at("activation").get<std::string>())});
    spec.penultimate = j.at("penultimate").get<int>();
    spec.validate();
    params = init_params(spec, 0);
    params.assign(j.at("weights").get<std::vector<double>>());
}

}  // namespace qcaan
