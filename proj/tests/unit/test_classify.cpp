#include "qcaan/classify.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace qcaan;

namespace {

double brute_auc(const std::vector<int>& y, const std::vector<double>& s) {
    double num = 0, pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return num / pairs;
}

// Gradient of mean BCE + (l2/2)|w|^2, written independently of the library.
Vector objective_gradient(const LogisticModel& m, const Matrix& x, const std::vector<int>& y) {
    Vector g = Vector::Zero(x.cols() + 1);
    const double n = static_cast<double>(x.rows());
    for (long i = 0; i < x.rows(); ++i) {
        const double p = 1 / (1 + std::exp(-(x.row(i).dot(m.weights) + m.bias)));
        const double r = p - y[static_cast<std::size_t>(i)];
        g.head(x.cols()) += r * x.row(i).transpose() / n;
        g[x.cols()] += r / n;
    }
    g.head(x.cols()) += m.l2 * m.weights;
    return g;
}

}  // namespace

TEST_CASE("fit_logistic") {
    SUBCASE("separable 1-D data") {
        Matrix x(8, 1);
        x << -2, -1.7, -1.3, -1, 1, 1.3, 1.7, 2;
        const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
        const auto m = fit_logistic(x, y, {1.0});
        const auto r = evaluate(y, to_std(predict_proba(m, x)));
        CHECK(r.accuracy == 1.0);
        CHECK(m.converged);
    }
    SUBCASE("null signal gives small weights") {
        Rng rng(3);
        const Matrix x = testing::random_matrix(rng, 10000, 4, -1, 1);
        std::vector<int> y(10000);
        for (auto& v : y) v = static_cast<int>(uniform_index(rng, 2));
        CHECK(fit_logistic(x, y, {1.0}).weights.norm() < 0.1);
    }
    SUBCASE("duplicated rows give the same model, and the gradient vanishes") {
        Rng rng(4);
        const Matrix x = testing::random_matrix(rng, 60, 3, -2, 2);
        std::vector<int> y(60);
        for (long i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) + 0.5 * x(i, 1) + 0.3 * standard_normal(rng) > 0;
        for (double l2 : {0.01, 0.1, 1.0}) {
            const auto m = fit_logistic(x, y, {l2});
            Matrix x2(120, 3);
            x2 << x, x;
            std::vector<int> y2 = y;
            y2.insert(y2.end(), y.begin(), y.end());
            const auto m2 = fit_logistic(x2, y2, {l2});
            CHECK((m.weights - m2.weights).norm() < 1e-9);
            CHECK(std::abs(m.bias - m2.bias) < 1e-9);
            CHECK(objective_gradient(m, x, y).norm() < 1e-6);
            CHECK((logistic_objective_gradient(m, x, y) - objective_gradient(m, x, y)).norm() < 1e-12);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fit_logistic(Matrix::Zero(3, 2), {1, 1, 1}), Error);
        Matrix bad = Matrix::Zero(2, 1);
        bad(0, 0) = std::nan("");
        CHECK_THROWS_AS(fit_logistic(bad, {0, 1}), Error);
        CHECK_THROWS_AS(fit_logistic(Matrix::Zero(0, 2), {}), Error);
    }
}

TEST_CASE("predict_proba") {
    LogisticModel m;
    m.weights = Vector::Zero(2);
    Matrix x(3, 2);
    x << 1, 2, -3, 4, 0, 0;
    for (double p : to_std(predict_proba(m, x))) CHECK(p == 0.5);
    m.weights = Vector{{0.5, -0.25}};
    m.bias = 0.1;
    const auto p = to_std(predict_proba(m, x));
    CHECK(std::abs(p[0] - 1 / (1 + std::exp(-(0.5 - 0.5 + 0.1)))) < 1e-12);
    CHECK(std::abs(p[1] - 1 / (1 + std::exp(-(-1.5 - 1.0 + 0.1)))) < 1e-12);
    m.weights = Vector{{1e6, 0}};
    CHECK(predict_proba(m, x)(0) == doctest::Approx(1.0));
    CHECK(predict_proba(m, x)(0) <= 1.0);
    CHECK_THROWS_AS(predict_proba(m, Matrix::Zero(2, 3)), Error);
}

TEST_CASE("evaluate and AUC") {
    SUBCASE("fixtures") {
        const auto perfect = evaluate({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9});
        CHECK(perfect.auc == 1.0);
        CHECK(perfect.accuracy == 1.0);
        CHECK(evaluate({0, 1, 0, 1}, {0.3, 0.3, 0.3, 0.3}).auc == 0.5);
        const auto r = report_from_counts(1300, 0, 1, 1251);
        CHECK(r.accuracy == doctest::Approx(0.99961).epsilon(1e-5));
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1251.0 / 1252.0);
        const auto none = evaluate({0, 0, 1}, {0.1, 0.2, 0.3}, 0.9);
        CHECK(none.precision == 0.0);
        CHECK(none.precision_undefined);
        CHECK_FALSE(none.recall_undefined);
        CHECK(evaluate({0, 0, 1}, {0.1, 0.5, 0.3}).fp == 1);  // score equal to threshold predicts positive
        CHECK_THROWS_AS(evaluate({0, 1}, {0.5}), Error);
    }
    SUBCASE("AUC equals brute-force pair counting") {
        Rng rng(5);
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t n = 2 + uniform_index(rng, 199);
            std::vector<int> y(n);
            std::vector<double> s(n);
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = static_cast<int>(uniform_index(rng, 2));
                s[i] = rep % 2 ? static_cast<double>(uniform_index(rng, 5)) : uniform01(rng);
            }
            y[0] = 0;
            y[1] = 1;
            CHECK(roc_auc(y, s) == doctest::Approx(brute_auc(y, s)).epsilon(1e-14));
            std::vector<double> t(n);
            std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3 * v) - 7; });
            CHECK(roc_auc(y, t) == roc_auc(y, s));
        }
    }
    SUBCASE("metric identities on random confusion matrices") {
        Rng rng(6);
        for (int rep = 0; rep < 1000; ++rep) {
            const long tn = static_cast<long>(uniform_index(rng, 50)), fp = static_cast<long>(uniform_index(rng, 50));
            const long fn = static_cast<long>(uniform_index(rng, 50)), tp = static_cast<long>(uniform_index(rng, 50));
            if (tn + fp + fn + tp == 0) continue;
            const auto r = report_from_counts(tn, fp, fn, tp);
            CHECK(r.total() == tn + fp + fn + tp);
            CHECK(r.accuracy == static_cast<double>(tp + tn) / static_cast<double>(r.total()));
            if (tp + fp > 0) CHECK(r.precision == static_cast<double>(tp) / static_cast<double>(tp + fp));
            else CHECK(r.precision_undefined);
            if (tp + fn > 0) CHECK(r.recall == static_cast<double>(tp) / static_cast<double>(tp + fn));
            else CHECK(r.recall_undefined);
            for (double v : {r.accuracy, r.precision, r.recall}) {
                CHECK(v >= 0);
                CHECK(v <= 1);
            }
        }
    }
    SUBCASE("ROC curve") {
        const std::vector<int> y{0, 1, 0, 1, 1, 0};
        const std::vector<double> s{0.1, 0.9, 0.4, 0.4, 0.7, 0.2};
        const auto roc = roc_curve(y, s);
        CHECK(roc.front().fpr == 0.0);
        CHECK(roc.front().tpr == 0.0);
        CHECK(roc.back().fpr == 1.0);
        CHECK(roc.back().tpr == 1.0);
        double area = 0;
        for (std::size_t i = 1; i < roc.size(); ++i) {
            CHECK(roc[i].fpr >= roc[i - 1].fpr);
            CHECK(roc[i].tpr >= roc[i - 1].tpr);
            area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2;
        }
        CHECK(area == doctest::Approx(roc_auc(y, s)));
    }
}

TEST_CASE("MLP classifier") {
    SUBCASE("architecture") {
        for (int f : {2, 16, 300}) {
            Rng rng(1);
            const Matrix x = testing::random_matrix(rng, 10, f);
            std::vector<int> y(10, 0);
            y[0] = y[3] = 1;
            const auto m = fit_mlp_classifier(x, y, {1});
            CHECK(m.spec.hidden_dims() == std::vector<int>{64, 32, 16, 4});
            CHECK(m.spec.input_dim() == f);
            CHECK(m.spec.layers.back().activation == Activation::sigmoid);
            CHECK(m.history.size() == 1);
        }
    }
    SUBCASE("XOR") {
        Matrix x(4, 2);
        x << 0, 0, 0, 1, 1, 0, 1, 1;
        const std::vector<int> y{0, 1, 1, 0};
        int solved = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            MlpOptions o;
            o.epochs = 2000;
            o.seed = seed;
            const auto m = fit_mlp_classifier(x, y, o);
            solved += evaluate(y, to_std(m.predict_proba(x))).accuracy == 1.0;
        }
        CHECK(solved >= 4);
    }
    SUBCASE("untrained network predicts near one half") {
        Rng rng(2);
        const Matrix x = testing::random_matrix(rng, 50, 6);
        std::vector<int> y(50, 0);
        y[1] = 1;
        const auto m = fit_mlp_classifier(x, y, {0});
        CHECK(m.history.empty());
        for (double p : to_std(m.predict_proba(x))) CHECK(std::abs(p - 0.5) <= 0.2);
    }
    SUBCASE("deterministic history") {
        Rng rng(3);
        const Matrix x = testing::random_matrix(rng, 40, 3);
        std::vector<int> y(40, 0);
        for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 1;
        MlpOptions o;
        o.epochs = 5;
        o.seed = 9;
        const auto a = fit_mlp_classifier(x, y, o), b = fit_mlp_classifier(x, y, o);
        CHECK(a.params.flatten() == b.params.flatten());
        CHECK(a.history.back().loss == b.history.back().loss);
        CHECK_THROWS_AS(fit_mlp_classifier(x, std::vector<int>(40, 0), o), Error);
    }
}
