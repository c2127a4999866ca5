#include "qcaan/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qcaan {

double RegressionTree::predict(const double* row) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(k)];
        k = row[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
}

int RegressionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

std::vector<double> RegressionTree::thresholds(int feature) const {
    std::set<double> t;
    for (const auto& n : nodes)
        if (n.feature == feature) t.insert(n.threshold);
    return {t.begin(), t.end()};
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TreeBuilder {
    const Matrix& x;
    const Vector& y;
    int max_depth;
    RegressionTree tree;

    int build(std::vector<std::size_t>& idx, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        double sum = 0, sq = 0;
        for (auto i : idx) {
            sum += y[static_cast<Eigen::Index>(i)];
            sq += y[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
        }
        const auto n = static_cast<double>(idx.size());
        tree.nodes[static_cast<std::size_t>(id)].value = sum / n;
        tree.nodes[static_cast<std::size_t>(id)].depth = depth;
        if (depth >= max_depth || idx.size() < 2) return id;

        const double parent_sse = sq - sum * sum / n;
        double best_gain = 1e-12 * std::max(1.0, parent_sse);
        int best_feature = -1;
        double best_threshold = 0;
        std::vector<std::size_t> order = idx;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x(static_cast<Eigen::Index>(a), j) < x(static_cast<Eigen::Index>(b), j);
            });
            double ls = 0, lq = 0;
            for (std::size_t t = 0; t + 1 < order.size(); ++t) {
                const double v = y[static_cast<Eigen::Index>(order[t])];
                ls += v;
                lq += v * v;
                const double xa = x(static_cast<Eigen::Index>(order[t]), j);
                const double xb = x(static_cast<Eigen::Index>(order[t + 1]), j);
                if (!(xa < xb)) continue;
                const auto nl = static_cast<double>(t + 1), nr = n - nl;
                const double rs = sum - ls, rq = sq - lq;
                const double sse = (lq - ls * ls / nl) + (rq - rs * rs / nr);
                const double gain = parent_sse - sse;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(j);
                    best_threshold = 0.5 * (xa + xb);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto i : idx)
            (x(static_cast<Eigen::Index>(i), best_feature) < best_threshold ? left : right).push_back(i);
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

double mse(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

}  // namespace

RegressionTree fit_regression_tree(const Matrix& x, const Vector& y, int max_depth) {
    if (x.rows() == 0 || x.rows() != y.size()) throw Error("regression tree: bad training shapes");
    TreeBuilder b{x, y, max_depth, {}};
    std::vector<std::size_t> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    b.build(idx, 0);
    return std::move(b.tree);
}

double GbtModel::predict_row(const double* row) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(row);
    return base_prediction + learning_rate * s;
}

Vector GbtModel::predict(const Matrix& x) const {
    const RowMajor rm = x;
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(rm.data() + i * rm.cols());
    return out;
}

std::vector<double> GbtModel::thresholds(int feature) const {
    std::set<double> all;
    for (const auto& t : trees)
        for (double v : t.thresholds(feature)) all.insert(v);
    return {all.begin(), all.end()};
}

int GbtModel::feature_index(const std::string& name) const {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw Error("unknown feature '" + name + "'");
    return static_cast<int>(it - feature_names.begin());
}

GbtModel fit_gbt(const Matrix& x, const Vector& y, const GbtOptions& opts, std::vector<std::string> feature_names) {
    if (x.rows() < 2) throw Error("fit_gbt: need at least 2 rows");
    if (x.rows() != y.size()) throw Error("fit_gbt: row/target count mismatch");
    if (feature_names.empty())
        for (Eigen::Index j = 0; j < x.cols(); ++j) feature_names.push_back("x" + std::to_string(j));
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) throw Error("fit_gbt: feature name count mismatch");

    GbtModel m;
    m.feature_names = std::move(feature_names);
    m.learning_rate = opts.learning_rate;
    m.max_depth = opts.max_depth;
    m.base_prediction = y.mean();
    Vector pred = Vector::Constant(y.size(), m.base_prediction);
    m.train_mse.push_back(mse(pred, y));
    for (int r = 0; r < opts.rounds; ++r) {
        const Vector residual = y - pred;
        auto tree = fit_regression_tree(x, residual, opts.max_depth);
        if (tree.nodes.size() == 1) break;  // nothing left to split
        const RowMajor rm = x;
        for (Eigen::Index i = 0; i < x.rows(); ++i) pred[i] += opts.learning_rate * tree.predict(rm.data() + i * rm.cols());
        m.trees.push_back(std::move(tree));
        m.train_mse.push_back(mse(pred, y));
    }
    m.overfit_warning = !m.trees.empty() && m.train_mse.back() < 1e-6;
    return m;
}

std::vector<double> permutation_importance(const GbtModel& model, const Matrix& x, const Vector& y, int repeats,
                                           std::uint64_t seed) {
    const Eigen::Index n = x.rows(), f = x.cols();
    if (n != y.size()) throw Error("permutation_importance: row/target count mismatch");
    if (f != static_cast<Eigen::Index>(model.feature_names.size()))
        throw Error("permutation_importance: feature schema differs from the model");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < f; ++j)
            if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
        return y[a] < y[b];
    });
    Matrix xc(n, f);
    Vector yc(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        xc.row(i) = x.row(order[static_cast<std::size_t>(i)]);
        yc[i] = y[order[static_cast<std::size_t>(i)]];
    }
    const double baseline = mse(model.predict(xc), yc);
    Rng rng(derive_seed(seed, "permutation-importance"));
    std::vector<double> importance(static_cast<std::size_t>(f), 0.0);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < f; ++j) {
        double acc = 0;
        for (int r = 0; r < repeats; ++r) {
            std::iota(perm.begin(), perm.end(), 0);
            shuffle(perm.begin(), perm.end(), rng);
            Matrix xp = xc;
            for (Eigen::Index i = 0; i < n; ++i) xp(i, j) = xc(perm[static_cast<std::size_t>(i)], j);
            acc += mse(model.predict(xp), yc) - baseline;
        }
        importance[static_cast<std::size_t>(j)] = repeats > 0 ? acc / repeats : 0.0;
    }
    return importance;
}

CeterisParibusProfile ceteris_paribus(const GbtModel& model, const Matrix& x, const std::vector<double>& anchor_row,
                                      const std::string& feature, int grid_size) {
    const int j = model.feature_index(feature);
    if (static_cast<Eigen::Index>(anchor_row.size()) != x.cols()) throw Error("ceteris_paribus: anchor width mismatch");
    if (grid_size < 1) throw Error("ceteris_paribus: grid size must be positive");
    CeterisParibusProfile p;
    p.feature = feature;
    p.anchor_row = anchor_row;
    const double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
    std::vector<double> row = anchor_row;
    for (int g = 0; g < grid_size; ++g) {
        const double v = grid_size == 1 ? lo : lo + (hi - lo) * g / (grid_size - 1);
        row[static_cast<std::size_t>(j)] = v;
        p.grid.push_back(v);
        p.predictions.push_back(model.predict_row(row.data()));
    }
    p.anchor_value = anchor_row[static_cast<std::size_t>(j)];
    p.anchor_prediction = model.predict_row(anchor_row.data());
    return p;
}

MetricDiffTable build_diff_table(const std::vector<MetricCell>& cells,
                                 const std::map<std::string, std::vector<double>>& features,
                                 const std::vector<std::string>& feature_names, const std::vector<std::string>& metrics,
                                 const std::string& candidate, const std::string& baseline) {
    MetricDiffTable t;
    t.metrics = metrics;
    t.feature_names = feature_names;
    t.diffs.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(metrics.size()));
    t.features.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(feature_names.size()));
    Eigen::Index row = 0;
    for (const auto& [name, feats] : features) {
        if (feats.size() != feature_names.size()) throw Error("diff table: feature row for '" + name + "' has wrong width");
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            double sum[2] = {0, 0};
            int count[2] = {0, 0};
            for (const auto& c : cells) {
                if (c.dataset != name) continue;
                const int side = c.strategy == candidate ? 0 : (c.strategy == baseline ? 1 : -1);
                if (side < 0) continue;
                auto it = c.metrics.find(metrics[m]);
                if (it == c.metrics.end()) throw Error("diff table: cell lacks metric '" + metrics[m] + "'");
                sum[side] += it->second;
                ++count[side];
            }
            if (count[0] == 0 || count[1] == 0)
                throw Error("diff table: dataset '" + name + "' is missing a " + (count[0] == 0 ? candidate : baseline) +
                            " cell");
            t.diffs(row, static_cast<Eigen::Index>(m)) = sum[0] / count[0] - sum[1] / count[1];
        }
        for (std::size_t k = 0; k < feats.size(); ++k) t.features(row, static_cast<Eigen::Index>(k)) = feats[k];
        t.datasets.push_back(name);
        ++row;
    }
    return t;
}

}  // namespace qcaan
