#include "qcaan/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

namespace qcaan {

Matrix random_oversample(const Matrix& minority, std::size_t n_new, std::uint64_t seed) {
    if (minority.rows() == 0) throw Error("random_oversample: empty minority class");
    Rng rng(derive_seed(seed, "random-oversample"));
    Matrix out(static_cast<Eigen::Index>(n_new), minority.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        out.row(i) = minority.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(minority.rows()))));
    return out;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& x, std::size_t k) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::vector<std::size_t>> nn(n);
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm(), j);
        }
        const std::size_t kk = std::min(k, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), cand.end());
        for (std::size_t t = 0; t < kk; ++t) nn[i].push_back(cand[t].second);
    }
    return nn;
}

Matrix smote(const Matrix& minority, std::size_t k, std::size_t n_new, std::uint64_t seed,
             std::vector<SmoteSample>* trace) {
    const auto n = static_cast<std::size_t>(minority.rows());
    if (n < 2) throw Error("smote: need at least 2 minority rows");
    if (k < 1) throw Error("smote: k must be at least 1");
    k = std::min(k, n - 1);
    const auto nn = nearest_neighbors(minority, k);
    Rng rng(derive_seed(seed, "smote"));
    Matrix out(static_cast<Eigen::Index>(n_new), minority.cols());
    if (trace) trace->clear();
    for (std::size_t s = 0; s < n_new; ++s) {
        const std::size_t base = uniform_index(rng, n);
        const std::size_t neighbor = nn[base][uniform_index(rng, nn[base].size())];
        const double gap = uniform01(rng);
        const auto xb = minority.row(static_cast<Eigen::Index>(base));
        out.row(static_cast<Eigen::Index>(s)) = xb + gap * (minority.row(static_cast<Eigen::Index>(neighbor)) - xb);
        if (trace) trace->push_back({base, neighbor, gap});
    }
    return out;
}

std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::none: return "none";
        case StrategyKind::random: return "random";
        case StrategyKind::smote: return "smote";
        case StrategyKind::qcaan: return "qcaan";
        case StrategyKind::gan: return "gan";
    }
    return "?";
}

StrategyKind strategy_from_string(const std::string& s) {
    for (auto k : {StrategyKind::none, StrategyKind::random, StrategyKind::smote, StrategyKind::qcaan,
                   StrategyKind::gan})
        if (to_string(k) == s) return k;
    throw Error("unknown augmentation strategy '" + s + "'");
}

bool is_generative(StrategyKind k) { return k == StrategyKind::qcaan || k == StrategyKind::gan; }

std::size_t synthetic_count(std::size_t n_neg, std::size_t n_pos, double target_ratio) {
    const auto want = static_cast<long long>(std::llround(target_ratio * static_cast<double>(n_neg)));
    return want > static_cast<long long>(n_pos) ? static_cast<std::size_t>(want - static_cast<long long>(n_pos)) : 0;
}

TabularDataset apply_strategy(const TrainTestSplit& split, const AugmentationStrategy& strategy, std::uint64_t seed) {
    const TabularDataset& train = split.train;
    if (strategy.kind == StrategyKind::none) return train;
    if (!(strategy.target_ratio > 0)) throw Error("apply_strategy: target ratio must be positive");
    const std::size_t n_new = synthetic_count(train.n_neg(), train.n_pos(), strategy.target_ratio);
    const Matrix minority = train.class_rows(1);
    Matrix synth;
    switch (strategy.kind) {
        case StrategyKind::random: synth = random_oversample(minority, n_new, seed); break;
        case StrategyKind::smote: synth = smote(minority, strategy.smote_k, n_new, seed); break;
        case StrategyKind::qcaan:
        case StrategyKind::gan:
            if (!strategy.model) throw Error("apply_strategy: " + to_string(strategy.kind) + " needs a trained generator");
            if (strategy.model->f() != static_cast<int>(train.f()))
                throw Error("apply_strategy: generator width does not match the dataset");
            synth = generate_synthetic(*strategy.model, n_new, seed);
            break;
        case StrategyKind::none: break;
    }
    TabularDataset out = train;
    const Eigen::Index old_rows = train.features.rows();
    out.features.conservativeResize(old_rows + synth.rows(), Eigen::NoChange);
    out.features.bottomRows(synth.rows()) = synth;
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(synth.rows()), 1);
    out.origin.insert(out.origin.end(), static_cast<std::size_t>(synth.rows()),
                      RowOrigin{"synthetic:" + to_string(strategy.kind), -1});
    return out;
}

std::uint64_t row_hash(const TabularDataset& ds, std::size_t row) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
        double v = ds.features(static_cast<Eigen::Index>(row), j);
        if (v == 0.0) v = 0.0;  // fold -0 into +0
        char bytes[sizeof v];
        std::memcpy(bytes, &v, sizeof v);
        h = fnv1a(std::string_view(bytes, sizeof v), h);
    }
    const char label = static_cast<char>(ds.labels[row]);
    return fnv1a(std::string_view(&label, 1), h);
}

std::uint64_t dataset_hash(const TabularDataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < ds.rows(); ++i) h = mix_seed(h ^ row_hash(ds, i));
    return h;
}

LeakageAudit audit_test_isolation(const TrainTestSplit& split, const TabularDataset& augmented) {
    LeakageAudit audit;
    std::unordered_set<std::int64_t> test_sources;
    for (const auto& o : split.test.origin)
        if (o.source_index >= 0) test_sources.insert(o.source_index);
    std::unordered_set<std::uint64_t> test_content, train_content;
    for (std::size_t i = 0; i < split.test.rows(); ++i) test_content.insert(row_hash(split.test, i));
    for (std::size_t i = 0; i < split.train.rows(); ++i) train_content.insert(row_hash(split.train, i));
    for (std::size_t i = 0; i < augmented.rows(); ++i) {
        const auto& o = augmented.origin[i];
        if (!o.synthetic() && test_sources.count(o.source_index)) ++audit.original_rows_from_test;
        const auto h = row_hash(augmented, i);
        if (test_content.count(h) && !train_content.count(h)) ++audit.content_matches;
    }
    audit.passed = audit.original_rows_from_test == 0 && audit.content_matches == 0;
    return audit;
}

}  // namespace qcaan
