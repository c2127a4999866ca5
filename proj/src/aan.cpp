#include "qcaan/aan.hpp"

#include "qcaan/data.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace qcaan {

std::string to_string(NoiseKind k) { return k == NoiseKind::gaussian ? "gaussian" : "qcbm"; }

NoiseSource NoiseSource::gaussian(int latent_dim) {
    if (latent_dim < 1) throw Error("noise source: latent dimension must be positive");
    NoiseSource s;
    s.kind_ = NoiseKind::gaussian;
    s.latent_dim_ = latent_dim;
    return s;
}

NoiseSource NoiseSource::qcbm(CircuitAnsatz ansatz, CircuitParams params) {
    NoiseSource s;
    s.kind_ = NoiseKind::qcbm;
    s.latent_dim_ = ansatz.q;
    s.ansatz_ = std::move(ansatz);
    s.set_params(std::move(params));
    return s;
}

void NoiseSource::set_params(CircuitParams params) {
    if (kind_ != NoiseKind::qcbm) throw Error("noise source: only a QCBM source has circuit parameters");
    params_ = std::move(params);
    dist_ = simulate(ansatz_, params_);
}

Matrix NoiseSource::sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) return Matrix(0, latent_dim_);
    if (kind_ == NoiseKind::qcbm) return sample_bitstrings(dist_, n, seed).to_matrix();
    Rng rng(derive_seed(seed, "gaussian-noise"));
    Matrix z(static_cast<Eigen::Index>(n), latent_dim_);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = standard_normal(rng);
    return z;
}

BitstringBatch latent_targets(const Matrix& penultimate_activations, std::uint64_t seed) {
    if (!penultimate_activations.allFinite()) throw Error("latent_targets: non-finite activations");
    Rng rng(derive_seed(seed, "latent-targets"));
    BitstringBatch b;
    b.q = static_cast<int>(penultimate_activations.cols());
    b.bits.reserve(static_cast<std::size_t>(penultimate_activations.size()));
    for (Eigen::Index i = 0; i < penultimate_activations.rows(); ++i)
        for (Eigen::Index j = 0; j < penultimate_activations.cols(); ++j)
            b.bits.push_back(uniform01(rng) < sigmoid(penultimate_activations(i, j)) ? 1 : 0);
    return b;
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& order, std::size_t start, std::size_t end) {
    Matrix out(static_cast<Eigen::Index>(end - start), x.cols());
    for (std::size_t i = start; i < end; ++i)
        out.row(static_cast<Eigen::Index>(i - start)) = x.row(static_cast<Eigen::Index>(order[i]));
    return out;
}

void guard_finite(double v, const char* what, int epoch) {
    if (!std::isfinite(v))
        throw Error(std::string("training diverged: non-finite ") + what + " at epoch " + std::to_string(epoch));
}

}  // namespace

TrainedGenerator train_aan(const Matrix& minority, NoiseSource noise, const QcAanConfig& config) {
    if (minority.rows() == 0) throw Error("train_aan: no minority rows");
    if (!minority.allFinite()) throw Error("train_aan: non-finite training rows");
    if (config.refresh_period < 1) throw Error("train_aan: refresh period must be at least 1");
    if (config.qcbm_iters < 0) throw Error("train_aan: QCBM iteration count must be non-negative");
    const int f = static_cast<int>(minority.cols());
    const int q = noise.latent_dim();

    TrainedGenerator m{build_generator_spec(f, q, config.simple, config.rule), {},
                       build_discriminator_spec(f, q, config.simple, config.rule), {}, std::move(noise), {}, {}};
    m.generator = init_params(m.generator_spec, derive_seed(config.seed, "generator"));
    m.discriminator = init_params(m.discriminator_spec, derive_seed(config.seed, "discriminator"));
    auto adam_g = AdamState::for_params(m.generator, config.adam);
    auto adam_d = AdamState::for_params(m.discriminator, config.adam);

    Rng rng(derive_seed(config.seed, "aan-loop"));
    const auto n = static_cast<std::size_t>(minority.rows());
    const std::size_t bs = std::max<std::size_t>(1, config.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        double d_sum = 0, g_sum = 0;
        int d_count = 0, g_count = 0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t end = std::min(n, start + bs);
            const Matrix real = gather_rows(minority, order, start, end);
            const auto rows = real.rows();
            for (int s = 0; s < config.d_steps; ++s) {
                const Matrix fake = forward(m.generator_spec, m.generator, m.noise.sample(rows, rng())).output;
                Matrix both(2 * rows, f);
                both << real, fake;
                Vector target(2 * rows);
                target << Vector::Ones(rows), Vector::Zero(rows);
                auto g = backprop(m.discriminator_spec, m.discriminator, both, LossKind::gan_discriminator, target);
                guard_finite(g.loss, "discriminator loss", epoch);
                adam_step(m.discriminator, g.params, adam_d);
                d_sum += g.loss;
                ++d_count;
            }
            for (int s = 0; s < config.g_steps; ++s) {
                const Matrix z = m.noise.sample(rows, rng());
                auto g = generator_gradients(m.generator_spec, m.generator, m.discriminator_spec, m.discriminator, z);
                guard_finite(g.loss, "generator loss", epoch);
                adam_step(m.generator, g.params, adam_g);
                g_sum += g.loss;
                ++g_count;
            }
        }
        if (!m.generator.all_finite() || !m.discriminator.all_finite())
            throw Error("training diverged: non-finite parameters at epoch " + std::to_string(epoch));
        m.history.push_back({epoch + 1, d_count ? d_sum / d_count : 0.0, g_count ? g_sum / g_count : 0.0});

        const bool refresh = m.noise.kind() == NoiseKind::qcbm && config.qcbm_iters > 0 &&
                             (epoch + 1) % config.refresh_period == 0;
        if (!refresh) continue;
        std::vector<std::size_t> pick(n);
        std::iota(pick.begin(), pick.end(), 0);
        shuffle(pick.begin(), pick.end(), rng);
        const Matrix real = gather_rows(minority, pick, 0, std::min(n, bs));
        const Matrix latent = forward(m.discriminator_spec, m.discriminator, real).penultimate;
        const auto targets = latent_targets(latent, rng());
        QcbmTrainConfig qc = config.qcbm;
        qc.iters = config.qcbm_iters;
        qc.seed = rng();
        auto res = train_qcbm(m.noise.ansatz(), m.noise.params(), targets, qc);
        m.noise.set_params(std::move(res.params));
        m.qcbm_history.push_back({epoch + 1, std::move(res.trace)});
    }
    return m;
}

Matrix generate_synthetic(const TrainedGenerator& model, std::size_t count, std::uint64_t seed) {
    if (count == 0) return Matrix(0, model.f());
    const Matrix z = model.noise.sample(count, derive_seed(seed, "synthetic"));
    return forward(model.generator_spec, model.generator, z).output;
}

ClassificationReport distinguishability_report(const Matrix& a, const Matrix& b, std::uint64_t seed,
                                               const LogisticOptions& opts) {
    if (a.cols() != b.cols()) throw Error("distinguishability: sample widths differ");
    if (a.rows() < 2 || b.rows() < 2) throw Error("distinguishability: each sample set needs at least 2 rows");
    Matrix x(a.rows() + b.rows(), a.cols());
    x << a, b;
    std::vector<int> y(static_cast<std::size_t>(x.rows()), 0);
    std::fill(y.begin() + a.rows(), y.end(), 1);
    auto split = train_test_split(make_dataset("distinguish", std::move(x), std::move(y)), 0.75, seed);
    const auto model = fit_logistic(split.train.features, split.train.labels, opts);
    return evaluate(split.test.labels, to_std(predict_proba(model, split.test.features)));
}

std::string history_csv(const TrainedGenerator& model) {
    std::ostringstream os;
    os << "epoch,d_loss,g_loss\n";
    for (const auto& h : model.history)
        os << h.epoch << ',' << format_double(h.d_loss) << ',' << format_double(h.g_loss) << '\n';
    return os.str();
}

std::string qcbm_history_csv(const TrainedGenerator& model) {
    std::ostringstream os;
    os << "epoch,step,loss\n";
    for (const auto& r : model.qcbm_history) {
        os << r.epoch << ",0," << format_double(r.trace.initial_loss) << '\n';
        for (std::size_t k = 0; k < r.trace.step_loss.size(); ++k)
            os << r.epoch << ',' << k + 1 << ',' << format_double(r.trace.step_loss[k]) << '\n';
        os << r.epoch << ",final," << format_double(r.trace.final_loss) << '\n';
    }
    return os.str();
}

}  // namespace qcaan
