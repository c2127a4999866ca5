#include "qcaan/quantum.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qcaan {

CircuitAnsatz make_ansatz(int q, int layers) {
    if (q < 1) throw Error("ansatz: need at least one qubit");
    if (layers < 0) throw Error("ansatz: layer count must be non-negative");
    CircuitAnsatz a;
    a.q = q;
    a.layers = layers;
    int p = 0;
    auto rotations = [&] {
        for (int i = 0; i < q; ++i) {
            a.gate_plan.push_back({GateKind::ry, i, -1, p++});
            a.gate_plan.push_back({GateKind::rz, i, -1, p++});
        }
    };
    for (int l = 0; l < layers; ++l) {
        rotations();
        // A two-qubit ring would apply CZ(0,1) twice, which cancels.
        const int ring = q == 2 ? 1 : (q > 2 ? q : 0);
        for (int i = 0; i < ring; ++i) a.gate_plan.push_back({GateKind::cz, (i + 1) % q, i, -1});
    }
    rotations();
    return a;
}

CircuitParams random_params(const CircuitAnsatz& ansatz, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "qcbm-init"));
    CircuitParams p;
    p.theta.resize(ansatz.parameter_count());
    for (auto& t : p.theta) t = 2.0 * std::numbers::pi * uniform01(rng);
    return p;
}

std::vector<double> BornDistribution::probabilities() const {
    std::vector<double> p(amplitudes.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes[i]);
    return p;
}

double BornDistribution::norm_squared() const {
    double s = 0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
}

BornDistribution simulate(const CircuitAnsatz& ansatz, const CircuitParams& params) {
    if (ansatz.q > kMaxSimulatedQubits)
        throw Error("simulate: " + std::to_string(ansatz.q) + " qubits exceeds the limit of " +
                    std::to_string(kMaxSimulatedQubits));
    if (params.theta.size() != ansatz.parameter_count())
        throw Error("simulate: expected " + std::to_string(ansatz.parameter_count()) + " parameters, got " +
                    std::to_string(params.theta.size()));
    using cd = std::complex<double>;
    BornDistribution d;
    d.q = ansatz.q;
    const std::size_t dim = std::size_t{1} << ansatz.q;
    d.amplitudes.assign(dim, cd(0, 0));
    d.amplitudes[0] = 1.0;
    auto& psi = d.amplitudes;
    for (const auto& g : ansatz.gate_plan) {
        const std::size_t mask = std::size_t{1} << g.target;
        switch (g.kind) {
            case GateKind::ry: {
                const double c = std::cos(params.theta[g.param] / 2), s = std::sin(params.theta[g.param] / 2);
                for (std::size_t i = 0; i < dim; ++i) {
                    if (i & mask) continue;
                    const cd a0 = psi[i], a1 = psi[i | mask];
                    psi[i] = c * a0 - s * a1;
                    psi[i | mask] = s * a0 + c * a1;
                }
                break;
            }
            case GateKind::rz: {
                const double h = params.theta[g.param] / 2;
                const cd p0 = std::polar(1.0, -h), p1 = std::polar(1.0, h);
                for (std::size_t i = 0; i < dim; ++i) psi[i] *= (i & mask) ? p1 : p0;
                break;
            }
            case GateKind::cz: {
                const std::size_t both = mask | (std::size_t{1} << g.control);
                for (std::size_t i = 0; i < dim; ++i)
                    if ((i & both) == both) psi[i] = -psi[i];
                break;
            }
        }
    }
    return d;
}

std::uint64_t BitstringBatch::packed(std::size_t row) const {
    std::uint64_t v = 0;
    for (int j = 0; j < q; ++j)
        if (at(row, j)) v |= std::uint64_t{1} << j;
    return v;
}

Matrix BitstringBatch::to_matrix() const {
    Matrix m(static_cast<Eigen::Index>(rows()), q);
    for (std::size_t i = 0; i < rows(); ++i)
        for (int j = 0; j < q; ++j) m(static_cast<Eigen::Index>(i), j) = at(i, j);
    return m;
}

BitstringBatch BitstringBatch::from_packed(int q, const std::vector<std::uint64_t>& values) {
    BitstringBatch b;
    b.q = q;
    b.bits.resize(values.size() * static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < values.size(); ++i)
        for (int j = 0; j < q; ++j) b.bits[i * static_cast<std::size_t>(q) + j] = (values[i] >> j) & 1u;
    return b;
}

BitstringBatch sample_bitstrings(const BornDistribution& dist, std::size_t m, std::uint64_t seed) {
    if (m < 1) throw Error("sample_bitstrings: need at least one sample");
    std::vector<double> cum(dist.amplitudes.size());
    double acc = 0;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        acc += std::norm(dist.amplitudes[i]);
        cum[i] = acc;
    }
    Rng rng(derive_seed(seed, "born-sampling"));
    std::vector<std::uint64_t> draws(m);
    for (auto& d : draws) {
        const double u = uniform01(rng) * acc;
        // upper_bound never selects a zero-probability outcome.
        auto it = std::upper_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) it = std::prev(cum.end());
        d = static_cast<std::uint64_t>(it - cum.begin());
    }
    return BitstringBatch::from_packed(dist.q, draws);
}

BitstringMeasure empirical_measure(const BitstringBatch& batch) {
    std::vector<std::uint64_t> v(batch.rows());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = batch.packed(i);
    std::sort(v.begin(), v.end());
    BitstringMeasure m;
    m.q = batch.q;
    const double w = 1.0 / static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        m.support.push_back(v[i]);
        m.weights.push_back(w * static_cast<double>(j - i));
        i = j;
    }
    return m;
}

BitstringMeasure born_measure(const BornDistribution& dist, double floor) {
    BitstringMeasure m;
    m.q = dist.q;
    double total = 0;
    for (std::size_t i = 0; i < dist.amplitudes.size(); ++i) {
        const double p = std::norm(dist.amplitudes[i]);
        if (p > floor) {
            m.support.push_back(i);
            m.weights.push_back(p);
            total += p;
        }
    }
    for (auto& w : m.weights) w /= total;
    return m;
}

namespace {

// Largest cost/epsilon ratio for which the plain kernel iteration stays in range.
constexpr double kKernelDomainLimit = 200.0;

double log_sum_exp(const std::vector<double>& x) {
    const double c = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(c)) return c;
    double s = 0;
    for (double v : x) s += std::exp(v - c);
    return c + std::log(s);
}

SinkhornResult ot_kernel(const BitstringMeasure& a, const BitstringMeasure& b, const SinkhornOptions& o) {
    const std::size_t n = a.support.size(), m = b.support.size();
    std::vector<double> table(static_cast<std::size_t>(std::max(a.q, b.q)) + 1);
    for (std::size_t c = 0; c < table.size(); ++c) table[c] = std::exp(-static_cast<double>(c) / o.epsilon);
    // Weighted kernels: row-side K_ij b_j and column-side K_ij a_i.
    std::vector<double> kb(n * m), ka(m * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double k = table[std::popcount(a.support[i] ^ b.support[j])];
            kb[i * m + j] = k * b.weights[j];
            ka[j * n + i] = k * a.weights[i];
        }
    std::vector<double> u(n, 1.0), v(m, 1.0), s(n);
    SinkhornResult r;
    r.converged = false;
    for (int it = 0; it <= o.max_iters; ++it) {
        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0;
            const double* row = &kb[i * m];
            for (std::size_t j = 0; j < m; ++j) acc += row[j] * v[j];
            s[i] = acc;
            err += a.weights[i] * std::abs(u[i] * acc - 1.0);
        }
        r.marginal_error = err;
        r.iterations = it;
        if (it > 0 && err < o.tolerance) {
            r.converged = true;
            break;
        }
        if (it == o.max_iters) break;
        for (std::size_t i = 0; i < n; ++i) u[i] = 1.0 / s[i];
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0;
            const double* row = &ka[j * n];
            for (std::size_t i = 0; i < n; ++i) acc += row[i] * u[i];
            v[j] = 1.0 / acc;
        }
    }
    double val = 0;
    for (std::size_t i = 0; i < n; ++i) val += a.weights[i] * std::log(u[i]);
    for (std::size_t j = 0; j < m; ++j) val += b.weights[j] * std::log(v[j]);
    r.value = o.epsilon * val;
    return r;
}

SinkhornResult ot_log(const BitstringMeasure& a, const BitstringMeasure& b, const SinkhornOptions& o) {
    const std::size_t n = a.support.size(), m = b.support.size();
    const double eps = o.epsilon;
    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cost[i * m + j] = static_cast<double>(std::popcount(a.support[i] ^ b.support[j]));
    std::vector<double> loga(n), logb(m);
    for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(a.weights[i]);
    for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(b.weights[j]);
    std::vector<double> f(n, 0.0), g(m, 0.0), fn(n), buf;
    SinkhornResult r;
    r.converged = false;
    for (int it = 0; it <= o.max_iters; ++it) {
        double err = 0;
        buf.resize(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) buf[j] = logb[j] + (g[j] - cost[i * m + j]) / eps;
            fn[i] = -eps * log_sum_exp(buf);
            err += a.weights[i] * std::abs(std::exp((f[i] - fn[i]) / eps) - 1.0);
        }
        r.marginal_error = err;
        r.iterations = it;
        if (it > 0 && err < o.tolerance) {
            r.converged = true;
            break;
        }
        if (it == o.max_iters) break;
        f = fn;
        buf.resize(n);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) buf[i] = loga[i] + (f[i] - cost[i * m + j]) / eps;
            g[j] = -eps * log_sum_exp(buf);
        }
    }
    double val = 0;
    for (std::size_t i = 0; i < n; ++i) val += a.weights[i] * f[i];
    for (std::size_t j = 0; j < m; ++j) val += b.weights[j] * g[j];
    r.value = val;
    return r;
}

bool measure_less(const BitstringMeasure& x, const BitstringMeasure& y) {
    if (x.support != y.support) return x.support < y.support;
    return x.weights < y.weights;
}

}  // namespace

SinkhornResult entropic_ot(const BitstringMeasure& a, const BitstringMeasure& b, const SinkhornOptions& opts) {
    if (!(opts.epsilon > 0)) throw Error("sinkhorn: epsilon must be positive");
    if (a.support.empty() || b.support.empty()) throw Error("sinkhorn: empty measure");
    if (a.q != b.q) throw Error("sinkhorn: bitstring widths differ");
    if (static_cast<double>(a.q) / opts.epsilon <= kKernelDomainLimit) return ot_kernel(a, b, opts);
    return ot_log(a, b, opts);
}

SinkhornResult sinkhorn_divergence(const BitstringMeasure& a, const BitstringMeasure& b,
                                   const SinkhornOptions& opts) {
    // Fixed argument order makes S(a, b) and S(b, a) the same computation.
    const bool swap = measure_less(b, a);
    const BitstringMeasure& x = swap ? b : a;
    const BitstringMeasure& y = swap ? a : b;
    const auto xy = entropic_ot(x, y, opts);
    const auto xx = entropic_ot(x, x, opts);
    const auto yy = entropic_ot(y, y, opts);
    SinkhornResult r;
    r.value = xy.value - 0.5 * (xx.value + yy.value);
    r.converged = xy.converged && xx.converged && yy.converged;
    r.iterations = std::max({xy.iterations, xx.iterations, yy.iterations});
    r.marginal_error = std::max({xy.marginal_error, xx.marginal_error, yy.marginal_error});
    return r;
}

SinkhornResult sinkhorn_divergence(const BitstringBatch& a, const BitstringBatch& b, double epsilon, int max_iters) {
    if (a.rows() == 0 || b.rows() == 0) throw Error("sinkhorn: empty batch");
    if (a.q != b.q) throw Error("sinkhorn: bitstring widths differ");
    return sinkhorn_divergence(empirical_measure(a), empirical_measure(b), SinkhornOptions{epsilon, max_iters});
}

double SpsaGains::step(int k) const { return a / std::pow(k + big_a, alpha); }
double SpsaGains::perturbation(int k) const { return c / std::pow(static_cast<double>(k), gamma); }

double qcbm_loss(const CircuitAnsatz& ansatz, const CircuitParams& params, const BitstringMeasure& target,
                 std::size_t batch, std::uint64_t seed, const SinkhornOptions& opts, bool* converged) {
    const auto dist = simulate(ansatz, params);
    const auto samples = sample_bitstrings(dist, batch, seed);
    const auto r = sinkhorn_divergence(empirical_measure(samples), target, opts);
    if (converged) *converged = r.converged;
    return r.value;
}

std::vector<double> spsa_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                  const std::vector<double>& theta, double c, Rng& rng,
                                  std::vector<double>* delta) {
    std::vector<double> d(theta.size());
    for (auto& x : d) x = (rng() >> 63) ? 1.0 : -1.0;
    std::vector<double> plus = theta, minus = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        plus[i] += c * d[i];
        minus[i] -= c * d[i];
    }
    const double diff = (loss(plus) - loss(minus)) / (2.0 * c);
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) g[i] = diff * d[i];
    if (delta) *delta = std::move(d);
    return g;
}

QcbmTrainResult train_qcbm(const CircuitAnsatz& ansatz, const CircuitParams& params, const BitstringBatch& target,
                           const QcbmTrainConfig& config) {
    if (target.q != ansatz.q) throw Error("train_qcbm: target width does not match qubit count");
    if (params.theta.size() != ansatz.parameter_count()) throw Error("train_qcbm: parameter-length mismatch");
    const auto target_measure = empirical_measure(target);
    const SinkhornOptions opts{config.epsilon, config.sinkhorn_max_iters};
    QcbmTrainResult out;
    out.params = params;
    auto& trace = out.trace;

    const std::uint64_t eval_seed = derive_seed(config.seed, "qcbm-eval");
    auto evaluate = [&](const std::vector<double>& theta, std::uint64_t seed) {
        bool ok = true;
        const double v = qcbm_loss(ansatz, CircuitParams{theta}, target_measure, config.batch, seed, opts, &ok);
        if (!ok) ++trace.sinkhorn_nonconverged;
        return v;
    };
    trace.initial_loss = evaluate(out.params.theta, eval_seed);
    if (config.iters <= 0) {
        trace.final_loss = trace.initial_loss;
        return out;
    }
    Rng rng(derive_seed(config.seed, "spsa-directions"));
    auto& theta = out.params.theta;
    for (int k = 1; k <= config.iters; ++k) {
        // Both perturbed evaluations share one sampling seed.
        const std::uint64_t step_seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
        double pair_sum = 0;
        int calls = 0;
        auto counted = [&](const std::vector<double>& t) {
            const double v = evaluate(t, step_seed);
            pair_sum += v;
            ++calls;
            return v;
        };
        const auto g = spsa_gradient(counted, theta, config.gains.perturbation(k), rng);
        const double ak = config.gains.step(k);
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= ak * g[i];
        trace.step_loss.push_back(pair_sum / calls);
    }
    trace.final_loss = evaluate(theta, eval_seed);
    return out;
}

std::string params_json(const CircuitAnsatz& ansatz, const CircuitParams& params, const QcbmTrace* trace) {
    nlohmann::ordered_json j;
    j["q"] = ansatz.q;
    j["layers"] = ansatz.layers;
    j["theta"] = params.theta;
    if (trace) {
        j["initial_loss"] = trace->initial_loss;
        j["final_loss"] = trace->final_loss;
        j["step_loss"] = trace->step_loss;
        j["sinkhorn_nonconverged"] = trace->sinkhorn_nonconverged;
    }
    return j.dump(2);
}

CircuitParams params_from_json(const std::string& text, CircuitAnsatz* ansatz) {
    const auto j = nlohmann::json::parse(text);
    CircuitParams p;
    p.theta = j.at("theta").get<std::vector<double>>();
    if (ansatz) *ansatz = make_ansatz(j.at("q").get<int>(), j.at("layers").get<int>());
    return p;
}

std::string bitstrings_text(const BitstringBatch& batch) {
    std::string s;
    s.reserve(batch.rows() * static_cast<std::size_t>(batch.q + 1));
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        for (int j = 0; j < batch.q; ++j) s.push_back(batch.at(i, j) ? '1' : '0');
        s.push_back('\n');
    }
    return s;
}

BitstringBatch bitstrings_from_text(const std::string& text) {
    BitstringBatch b;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (b.q == 0) b.q = static_cast<int>(line.size());
        if (static_cast<int>(line.size()) != b.q) throw Error("bitstrings: ragged rows");
        for (char c : line) {
            if (c != '0' && c != '1') throw Error("bitstrings: expected only 0/1 characters");
            b.bits.push_back(c == '1');
        }
    }
    return b;
}

}  // namespace qcaan
