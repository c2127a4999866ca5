#include "qcaan/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qcaan {

namespace {

void check_binary(const std::vector<int>& y, const char* who) {
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw Error(std::string(who) + ": labels must be 0 or 1");
        (v ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw Error(std::string(who) + ": single-class labels");
}

double objective(const Matrix& x, const Vector& yv, const Vector& w, double b, double l2) {
    const Vector s = (x * w).array() + b;
    double loss = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        // log(1 + e^s) - y s, evaluated stably.
        const double z = s[i];
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += softplus - yv[i] * z;
    }
    return loss / static_cast<double>(s.size()) + 0.5 * l2 * w.squaredNorm();
}

}  // namespace

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y, const LogisticOptions& opts) {
    if (x.rows() == 0) throw Error("fit_logistic: empty design matrix");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error("fit_logistic: row/label count mismatch");
    if (!x.allFinite()) throw Error("fit_logistic: non-finite feature values");
    check_binary(y, "fit_logistic");

    const Eigen::Index n = x.rows(), f = x.cols();
    Vector yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[static_cast<std::size_t>(i)];
    // Augmented design [X 1]; the last coefficient is the bias.
    Matrix xa(n, f + 1);
    xa << x, Vector::Ones(n);
    Vector beta = Vector::Zero(f + 1);
    Vector penalty = Vector::Constant(f + 1, opts.l2);
    penalty[f] = 0.0;

    LogisticModel model;
    model.l2 = opts.l2;
    const double inv_n = 1.0 / static_cast<double>(n);
    double obj = objective(x, yv, beta.head(f), beta[f], opts.l2);
    for (int it = 0; it < opts.max_iters; ++it) {
        model.iterations = it + 1;
        const Vector s = xa * beta;
        Vector p(n), wts(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = sigmoid(s[i]);
            wts[i] = std::max(p[i] * (1 - p[i]), 1e-12);
        }
        const Vector grad = inv_n * (xa.transpose() * (p - yv)) + penalty.cwiseProduct(beta);
        Matrix hess = inv_n * (xa.transpose() * wts.asDiagonal() * xa);
        hess.diagonal() += penalty;
        hess(f, f) += 1e-12;
        const Vector step = hess.ldlt().solve(grad);
        double t = 1.0;
        Vector next = beta - step;
        double next_obj = objective(x, yv, next.head(f), next[f], opts.l2);
        while (next_obj > obj + 1e-15 && t > 1e-10) {
            t *= 0.5;
            next = beta - t * step;
            next_obj = objective(x, yv, next.head(f), next[f], opts.l2);
        }
        const double change = (next - beta).norm();
        beta = next;
        obj = next_obj;
        if (change < opts.tol) {
            model.converged = true;
            break;
        }
    }
    model.weights = beta.head(f);
    model.bias = beta[f];
    return model;
}

Vector predict_proba(const LogisticModel& model, const Matrix& x) {
    if (x.cols() != model.weights.size())
        throw Error("predict_proba: expected " + std::to_string(model.weights.size()) + " features, got " +
                    std::to_string(x.cols()));
    Vector s = (x * model.weights).array() + model.bias;
    return s.unaryExpr([](double v) { return sigmoid(v); });
}

Vector logistic_objective_gradient(const LogisticModel& model, const Matrix& x, const std::vector<int>& y) {
    const Eigen::Index n = x.rows(), f = x.cols();
    const Vector p = predict_proba(model, x);
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = p[i] - y[static_cast<std::size_t>(i)];
    Vector g(f + 1);
    g.head(f) = x.transpose() * r / static_cast<double>(n) + model.l2 * model.weights;
    g[f] = r.sum() / static_cast<double>(n);
    return g;
}

ClassificationReport report_from_counts(long tn, long fp, long fn, long tp, double threshold) {
    ClassificationReport r;
    r.tn = tn;
    r.fp = fp;
    r.fn = fn;
    r.tp = tp;
    r.threshold = threshold;
    const long total = r.total();
    r.accuracy = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    r.precision_undefined = tp + fp == 0;
    r.recall_undefined = tp + fn == 0;
    r.precision = r.precision_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = r.recall_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return r;
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (y_true[idx[k]] == 1) {
                rank_sum_pos += mid;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ClassificationReport evaluate(const std::vector<int>& y_true, const std::vector<double>& scores, double threshold) {
    if (y_true.size() != scores.size()) throw Error("evaluate: label and score lengths differ");
    long tn = 0, fp = 0, fn = 0, tp = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw Error("evaluate: labels must be 0 or 1");
        const bool pred = scores[i] >= threshold;
        if (y_true[i] == 1)
            (pred ? tp : fn)++;
        else
            (pred ? fp : tn)++;
    }
    auto r = report_from_counts(tn, fp, fn, tp, threshold);
    r.auc = roc_auc(y_true, scores);
    return r;
}

std::vector<RocPoint> roc_curve(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw Error("roc_curve: label and score lengths differ");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double pos = static_cast<double>(std::count(y_true.begin(), y_true.end(), 1));
    const double neg = static_cast<double>(y_true.size()) - pos;
    std::vector<RocPoint> pts{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (y_true[idx[j]] == 1 ? tp : fp) += 1;
            ++j;
        }
        pts.push_back({neg > 0 ? fp / neg : 0.0, pos > 0 ? tp / pos : 0.0, scores[idx[i]]});
        i = j;
    }
    auto& last = pts.back();
    last.fpr = 1.0;
    last.tpr = 1.0;
    return pts;
}

Vector MlpClassifier::predict_proba(const Matrix& x) const { return forward(spec, params, x).output.col(0); }

MlpClassifier fit_mlp_classifier(const Matrix& x, const std::vector<int>& y, const MlpOptions& opts) {
    if (x.rows() == 0) throw Error("fit_mlp_classifier: empty design matrix");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error("fit_mlp_classifier: row/label count mismatch");
    if (!x.allFinite()) throw Error("fit_mlp_classifier: non-finite feature values");
    check_binary(y, "fit_mlp_classifier");

    MlpClassifier clf;
    clf.spec = build_mlp_classifier_spec(static_cast<int>(x.cols()));
    clf.params = init_params(clf.spec, derive_seed(opts.seed, "mlp-init"));
    auto adam = AdamState::for_params(clf.params, opts.adam);
    Rng rng(derive_seed(opts.seed, "mlp-batches"));
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t end = std::min(n, start + bs);
            Matrix xb(static_cast<Eigen::Index>(end - start), x.cols());
            Vector yb(static_cast<Eigen::Index>(end - start));
            for (std::size_t i = start; i < end; ++i) {
                xb.row(static_cast<Eigen::Index>(i - start)) = x.row(static_cast<Eigen::Index>(order[i]));
                yb[static_cast<Eigen::Index>(i - start)] = y[order[i]];
            }
            auto g = backprop(clf.spec, clf.params, xb, LossKind::bce_on_labels, yb);
            if (!std::isfinite(g.loss)) throw Error("fit_mlp_classifier: non-finite loss at epoch " + std::to_string(epoch));
            loss_sum += g.loss * static_cast<double>(end - start);
            adam_step(clf.params, g.params, adam);
        }
        const auto scores = to_std(clf.predict_proba(x));
        const auto rep = evaluate(y, scores);
        clf.history.push_back({loss_sum / static_cast<double>(n), rep.accuracy, rep.precision, rep.recall, rep.auc});
    }
    return clf;
}

}  // namespace qcaan
