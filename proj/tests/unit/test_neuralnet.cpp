#include "qcaan/neuralnet.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace qcaan;

namespace {

DenseNetworkSpec chain(std::vector<int> dims, std::vector<Activation> acts) {
    DenseNetworkSpec s;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) s.layers.push_back({dims[k], dims[k + 1], acts[k]});
    return s;
}

// Independent loss oracle on top of forward(): plain BCE written out term by term.
double bce_oracle(const Vector& p, const Vector& y) {
    double s = 0;
    for (long i = 0; i < p.size(); ++i)
        s -= y[i] * std::log(std::max(p[i], 1e-12)) + (1 - y[i]) * std::log(std::max(1 - p[i], 1e-12));
    return s / static_cast<double>(p.size());
}

double loss_oracle(const DenseNetworkSpec& s, const NetParams& p, const Matrix& x, LossKind kind, const Vector& y) {
    const Vector out = forward(s, p, x).output.col(0);
    if (kind == LossKind::gan_generator) return bce_oracle(out, Vector::Ones(out.size()));
    return bce_oracle(out, y);
}

void check_close(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    CHECK(std::abs(analytic - numeric) / scale < 1e-4);
}

}  // namespace

TEST_CASE("architecture rules") {
    SUBCASE("doubling examples") {
        auto g = build_generator_spec(94, 16, false);
        CHECK(g.hidden_dims() == std::vector<int>{32, 64, 128});
        CHECK(g.output_dim() == 94);
        CHECK(g.input_dim() == 16);
        for (const auto& l : g.layers) CHECK(l.activation == Activation::relu);
        auto d = build_discriminator_spec(94, 16, false);
        CHECK(d.hidden_dims() == std::vector<int>{128, 64, 32, 16});
        CHECK(d.layers[static_cast<std::size_t>(d.penultimate)].output_dim == 16);
        CHECK(d.output_dim() == 1);
        CHECK(d.layers.back().activation == Activation::sigmoid);
        CHECK(build_generator_spec(17, 16, false).hidden_dims() == std::vector<int>{32});
    }
    SUBCASE("simple variants") {
        auto g = build_generator_spec(16, 16, true);
        REQUIRE(g.layers.size() == 1);
        CHECK(g.layers[0].input_dim == 16);
        CHECK(g.layers[0].output_dim == 16);
        CHECK(g.layers[0].activation == Activation::relu);
        auto d = build_discriminator_spec(16, 16, true);
        REQUIRE(d.layers.size() == 2);
        CHECK(d.layers[0].output_dim == 16);
        CHECK(d.layers[0].activation == Activation::relu);
        CHECK(d.layers[1].activation == Activation::sigmoid);
        CHECK(d.penultimate == 0);
    }
    SUBCASE("literal reading keeps the depth and grows linearly") {
        auto g = build_generator_spec(94, 16, false, ArchitectureRule::literal);
        CHECK(g.hidden_dims() == std::vector<int>{32, 64, 96});
        auto d = build_discriminator_spec(94, 16, false, ArchitectureRule::literal);
        CHECK(d.hidden_dims() == std::vector<int>{96, 64, 32, 16});
        CHECK(architecture_rule_from_string(to_string(ArchitectureRule::literal)) == ArchitectureRule::literal);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_generator_spec(16, 16, false), Error);
        CHECK_THROWS_AS(build_discriminator_spec(8, 16, false), Error);
        CHECK_THROWS_AS(build_generator_spec(0, 16, true), Error);
    }
    SUBCASE("property over q < f <= 1024") {
        for (int q = 1; q <= 40; ++q)
            for (int f = q + 1; f <= 1024; ++f) {
                const auto g = build_generator_spec(f, q, false).hidden_dims();
                REQUIRE(!g.empty());
                for (std::size_t k = 0; k < g.size(); ++k) {
                    CHECK(g[k] == (q << (k + 1)));
                    if (k) CHECK(g[k] > g[k - 1]);
                }
                CHECK(g.back() >= f);
                CHECK(g.size() == static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(f) / q) - 1e-12)));
                auto d = build_discriminator_spec(f, q, false).hidden_dims();
                CHECK(d.back() == q);
                d.pop_back();
                CHECK(std::equal(d.begin(), d.end(), g.rbegin(), g.rend()));
            }
    }
    CHECK(build_mlp_classifier_spec(10).hidden_dims() == std::vector<int>{64, 32, 16, 4});
}

TEST_CASE("forward") {
    SUBCASE("zero parameters") {
        auto s = chain({3, 5, 2}, {Activation::relu, Activation::relu});
        auto p = NetParams::zeros_like(init_params(s, 1));
        Rng rng(1);
        CHECK(forward(s, p, testing::random_matrix(rng, 7, 3)).output.isZero());
    }
    SUBCASE("identity layer") {
        auto s = chain({4, 4}, {Activation::linear});
        NetParams p;
        p.layers.push_back({Matrix::Identity(4, 4), Vector::Zero(4)});
        Rng rng(2);
        const Matrix x = testing::random_matrix(rng, 5, 4, -3, 3);
        CHECK(forward(s, p, x).output == x);
    }
    SUBCASE("hand computation on a 2-2-1 net") {
        auto s = chain({2, 2, 1}, {Activation::relu, Activation::sigmoid});
        s.penultimate = 0;
        NetParams p;
        Matrix w1(2, 2), w2(1, 2);
        w1 << 1, -1, 0.5, 2;
        w2 << 1.5, -0.5;
        p.layers.push_back({w1, Vector{{0.1, -0.2}}});
        p.layers.push_back({w2, Vector{{0.3}}});
        Matrix x(1, 2);
        x << 1, 2;
        const auto r = forward(s, p, x);
        // hidden pre-activations -0.9 and 4.3; relu zeroes the first
        CHECK(r.penultimate(0, 0) == 0.0);
        CHECK(std::abs(r.penultimate(0, 1) - 4.3) < 1e-12);
        CHECK(std::abs(r.output(0, 0) - 1.0 / (1.0 + std::exp(1.85))) < 1e-12);
    }
    SUBCASE("shape mismatch") {
        auto s = chain({3, 1}, {Activation::sigmoid});
        CHECK_THROWS_AS(forward(s, init_params(s, 0), Matrix::Zero(2, 4)), Error);
    }
}

TEST_CASE("backprop matches finite differences") {
    Rng rng(19);
    const std::vector<Activation> pool{Activation::relu, Activation::sigmoid, Activation::linear};
    for (int rep = 0; rep < 24; ++rep) {
        const int depth = 1 + rep % 3;
        std::vector<int> dims{2 + static_cast<int>(uniform_index(rng, 4))};
        std::vector<Activation> acts;
        for (int k = 0; k < depth - 1; ++k) {
            dims.push_back(2 + static_cast<int>(uniform_index(rng, 5)));
            acts.push_back(pool[uniform_index(rng, 3)]);
        }
        dims.push_back(1);
        acts.push_back(Activation::sigmoid);
        const auto s = chain(dims, acts);
        auto p = init_params(s, static_cast<std::uint64_t>(rep));
        auto flat = p.flatten();
        for (auto& v : flat) v += 0.1 * standard_normal(rng);  // non-zero biases too
        p.assign(flat);
        const Matrix x = testing::random_matrix(rng, 9, dims.front(), -1, 1);
        Vector y(9);
        for (long i = 0; i < 9; ++i) y[i] = static_cast<double>(uniform_index(rng, 2));
        for (auto kind : {LossKind::bce_on_labels, LossKind::gan_discriminator, LossKind::gan_generator}) {
            const auto g = backprop(s, p, x, kind, y);
            CHECK(g.loss == doctest::Approx(loss_oracle(s, p, x, kind, y)).epsilon(1e-12));
            const auto ga = g.params.flatten();
            const double h = 1e-5;
            for (std::size_t i = 0; i < flat.size(); ++i) {
                auto up = flat, dn = flat;
                up[i] += h;
                dn[i] -= h;
                NetParams pu = p, pd = p;
                pu.assign(up);
                pd.assign(dn);
                check_close(ga[i], (loss_oracle(s, pu, x, kind, y) - loss_oracle(s, pd, x, kind, y)) / (2 * h));
            }
            for (long r = 0; r < x.rows(); ++r)
                for (long c = 0; c < x.cols(); ++c) {
                    Matrix up = x, dn = x;
                    up(r, c) += h;
                    dn(r, c) -= h;
                    check_close(g.input(r, c),
                                (loss_oracle(s, p, up, kind, y) - loss_oracle(s, p, dn, kind, y)) / (2 * h));
                }
        }
    }
}

TEST_CASE("generator gradients through a frozen discriminator") {
    Rng rng(29);
    const auto gs = build_generator_spec(6, 2, false);
    const auto ds = build_discriminator_spec(6, 2, false);
    auto gp = init_params(gs, 1);
    auto dp = init_params(ds, 2);
    auto flat = gp.flatten();
    for (auto& v : flat) v += 0.05 * standard_normal(rng);
    gp.assign(flat);
    const Matrix z = testing::random_matrix(rng, 8, 2, 0.2, 1.5);
    auto loss = [&](const NetParams& p) {
        const Vector d = forward(ds, dp, forward(gs, p, z).output).output.col(0);
        return bce_oracle(d, Vector::Ones(d.size()));
    };
    const auto g = generator_gradients(gs, gp, ds, dp, z);
    CHECK(g.loss == doctest::Approx(loss(gp)).epsilon(1e-12));
    const auto ga = g.params.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        auto up = flat, dn = flat;
        up[i] += 1e-5;
        dn[i] -= 1e-5;
        NetParams pu = gp, pd = gp;
        pu.assign(up);
        pd.assign(dn);
        check_close(ga[i], (loss(pu) - loss(pd)) / 2e-5);
    }
}

TEST_CASE("backprop edge cases") {
    Rng rng(31);
    SUBCASE("perfect prediction has zero gradient") {
        auto s = chain({3, 4, 1}, {Activation::sigmoid, Activation::sigmoid});
        const auto p = init_params(s, 3);
        const Matrix x = testing::random_matrix(rng, 6, 3);
        const Vector target = forward(s, p, x).output.col(0);
        const auto g = backprop(s, p, x, LossKind::bce_on_labels, target);
        double n = 0;
        for (double v : g.params.flatten()) n += v * v;
        CHECK(std::sqrt(n) < 1e-8);
    }
    SUBCASE("weights into a dead relu unit") {
        auto s = chain({2, 2, 1}, {Activation::relu, Activation::sigmoid});
        auto p = init_params(s, 4);
        p.layers[0].bias[1] = -100;  // unit 1 never activates on inputs in [0, 1]
        const Matrix x = testing::random_matrix(rng, 10, 2);
        const Vector y = Vector::Ones(10);
        const auto before = backprop(s, p, x, LossKind::bce_on_labels, y);
        CHECK(before.params.layers[0].weights.row(1).isZero());
        CHECK(before.params.layers[0].bias[1] == 0.0);
        auto doubled = p;
        doubled.layers[0].weights.row(1) *= 2;
        CHECK(backprop(s, doubled, x, LossKind::bce_on_labels, y).loss == before.loss);
    }
    SUBCASE("clamped log keeps saturated outputs finite") {
        Vector p{{0.0, 1.0}}, y{{1.0, 0.0}};
        CHECK(bce_loss(p, y) == doctest::Approx(-std::log(1e-12)));
    }
    SUBCASE("shape mismatch") {
        auto s = chain({3, 1}, {Activation::sigmoid});
        CHECK_THROWS_AS(backprop(s, init_params(s, 0), Matrix::Zero(4, 3), LossKind::bce_on_labels, Vector::Ones(3)),
                        Error);
    }
}

TEST_CASE("Adam") {
    auto scalar = [](double w) {
        NetParams p;
        p.layers.push_back({Matrix::Constant(1, 1, w), Vector::Zero(0)});
        return p;
    };
    SUBCASE("first step is the learning rate") {
        auto p = scalar(0.0);
        auto st = AdamState::for_params(p);
        adam_step(p, scalar(1.0), st);
        CHECK(st.t == 1);
        CHECK(p.layers[0].weights(0, 0) == doctest::Approx(-0.001 / (1 + 1e-8)).epsilon(1e-12));
    }
    SUBCASE("zero gradient never moves") {
        auto p = scalar(0.7);
        auto st = AdamState::for_params(p);
        for (int i = 0; i < 100; ++i) adam_step(p, scalar(0.0), st);
        CHECK(p.layers[0].weights(0, 0) == 0.7);
    }
    SUBCASE("quadratic bowl") {
        auto p = scalar(1.0);
        auto st = AdamState::for_params(p, {0.01, 0.9, 0.999, 1e-8});
        for (int i = 0; i < 500; ++i) adam_step(p, scalar(2 * p.layers[0].weights(0, 0)), st);
        CHECK(std::abs(p.layers[0].weights(0, 0)) < 0.05);
        for (double v : st.v.flatten()) CHECK(v >= 0);
    }
}

TEST_CASE("initialization and checkpoints") {
    const auto s = build_discriminator_spec(20, 4, false);
    const auto a = init_params(s, 5), b = init_params(s, 5), c = init_params(s, 6);
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());
    for (std::size_t k = 0; k < s.layers.size(); ++k) {
        const double lim = std::sqrt(6.0 / (s.layers[k].input_dim + s.layers[k].output_dim));
        CHECK(a.layers[k].weights.cwiseAbs().maxCoeff() <= lim);
        CHECK(a.layers[k].bias.isZero());
        CHECK(a.layers[k].weights.rows() == s.layers[k].output_dim);
    }
    DenseNetworkSpec s2;
    NetParams p2;
    network_from_checkpoint_json(network_checkpoint_json(s, a), s2, p2);
    CHECK(p2.flatten() == a.flatten());
    CHECK(s2.hidden_dims() == s.hidden_dims());
    CHECK(s2.penultimate == s.penultimate);
    CHECK(s2.layers.back().activation == Activation::sigmoid);
}
