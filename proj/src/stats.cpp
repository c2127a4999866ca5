#include "qcaan/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qcaan::stats {

namespace {

void check_groups(const MetricSampleGroups& groups, const char* who) {
    if (groups.size() < 2) throw Error(std::string(who) + ": need at least 2 groups");
    for (const auto& g : groups)
        if (g.values.empty()) throw Error(std::string(who) + ": group '" + g.name + "' is empty");
}

std::size_t total_size(const MetricSampleGroups& groups) {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.values.size();
    return n;
}

}  // namespace

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi_squared_sf(double x, int df) {
    if (x <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

std::vector<std::vector<double>> pooled_ranks(const MetricSampleGroups& groups, double* tie_sum) {
    struct Item {
        double v;
        std::size_t g, i;
    };
    std::vector<Item> items;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t i = 0; i < groups[g].values.size(); ++i) items.push_back({groups[g].values[i], g, i});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.v < b.v; });
    std::vector<std::vector<double>> ranks(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) ranks[g].resize(groups[g].values.size());
    double ties = 0;
    for (std::size_t a = 0; a < items.size();) {
        std::size_t b = a;
        while (b < items.size() && items[b].v == items[a].v) ++b;
        const double mid = 0.5 * static_cast<double>(a + 1 + b);
        const auto t = static_cast<double>(b - a);
        ties += t * t * t - t;
        for (std::size_t k = a; k < b; ++k) ranks[items[k].g][items[k].i] = mid;
        a = b;
    }
    if (tie_sum) *tie_sum = ties;
    return ranks;
}

KruskalWallis kruskal_wallis(const MetricSampleGroups& groups) {
    check_groups(groups, "kruskal_wallis");
    const auto n = static_cast<double>(total_size(groups));
    if (n < 3) throw Error("kruskal_wallis: need at least 3 observations");
    double ties = 0;
    const auto ranks = pooled_ranks(groups, &ties);
    KruskalWallis r;
    r.df = static_cast<int>(groups.size()) - 1;
    const double correction = 1.0 - ties / (n * n * n - n);
    if (correction <= 0) return r;  // every value tied
    double s = 0;
    for (const auto& rg : ranks) {
        const double sum = std::accumulate(rg.begin(), rg.end(), 0.0);
        s += sum * sum / static_cast<double>(rg.size());
    }
    r.h = (12.0 / (n * (n + 1)) * s - 3.0 * (n + 1)) / correction;
    r.h = std::max(r.h, 0.0);
    r.p_value = chi_squared_sf(r.h, r.df);
    return r;
}

PAdjust p_adjust_from_string(const std::string& s) {
    if (s == "none") return PAdjust::none;
    if (s == "bonferroni") return PAdjust::bonferroni;
    if (s == "holm") return PAdjust::holm;
    throw Error("unknown p-value adjustment '" + s + "'");
}

std::string to_string(PAdjust p) {
    switch (p) {
        case PAdjust::none: return "none";
        case PAdjust::bonferroni: return "bonferroni";
        case PAdjust::holm: return "holm";
    }
    return "?";
}

DunnResult dunn_test(const MetricSampleGroups& groups, PAdjust adjust) {
    check_groups(groups, "dunn_test");
    const std::size_t k = groups.size();
    const auto n = static_cast<double>(total_size(groups));
    double ties = 0;
    const auto ranks = pooled_ranks(groups, &ties);
    std::vector<double> mean_rank(k);
    for (std::size_t g = 0; g < k; ++g)
        mean_rank[g] = std::accumulate(ranks[g].begin(), ranks[g].end(), 0.0) / static_cast<double>(ranks[g].size());

    DunnResult r;
    for (const auto& g : groups) r.names.push_back(g.name);
    r.z.assign(k, std::vector<double>(k, 0.0));
    r.p.assign(k, std::vector<double>(k, 1.0));
    const double base = n * (n + 1) / 12.0 - (n > 1 ? ties / (12.0 * (n - 1)) : 0.0);

    struct Pair {
        std::size_t i, j;
        double p;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double se = std::sqrt(std::max(base, 0.0) * (1.0 / static_cast<double>(ranks[i].size()) +
                                                               1.0 / static_cast<double>(ranks[j].size())));
            const double z = se > 0 ? (mean_rank[i] - mean_rank[j]) / se : 0.0;
            r.z[i][j] = z;
            r.z[j][i] = -z;
            pairs.push_back({i, j, se > 0 ? std::min(1.0, 2.0 * normal_sf(std::abs(z))) : 1.0});
        }

    const auto m = static_cast<double>(pairs.size());
    if (adjust == PAdjust::bonferroni) {
        for (auto& pr : pairs) pr.p = std::min(1.0, pr.p * m);
    } else if (adjust == PAdjust::holm) {
        std::vector<std::size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pairs[a].p < pairs[b].p; });
        double running = 0;
        for (std::size_t r_ = 0; r_ < order.size(); ++r_) {
            auto& pr = pairs[order[r_]];
            running = std::max(running, std::min(1.0, (m - static_cast<double>(r_)) * pr.p));
            pr.p = running;
        }
    }
    for (const auto& pr : pairs) r.p[pr.i][pr.j] = r.p[pr.j][pr.i] = pr.p;
    return r;
}

std::vector<double> dirichlet_weights(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) {
        x = -std::log1p(-uniform01(rng));
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

std::vector<double> bayesian_bootstrap_mean(const std::vector<double>& values, std::size_t replications,
                                            std::uint64_t seed) {
    if (values.empty()) throw Error("bayesian_bootstrap_mean: no values");
    Rng rng(derive_seed(seed, "bayesian-bootstrap"));
    std::vector<double> means(replications);
    for (auto& m : means) {
        const auto w = dirichlet_weights(values.size(), rng);
        // Anchored at the first value so constant data gives exactly that constant.
        double s = 0;
        for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * (values[i] - values[0]);
        m = values[0] + s;
    }
    return means;
}

HdiInterval hdi(std::vector<double> replicate_means, double mass) {
    if (replicate_means.size() < 2) throw Error("hdi: need at least 2 replicates");
    if (!(mass > 0 && mass < 1)) throw Error("hdi: mass must lie in (0, 1)");
    HdiInterval out;
    out.mass = mass;
    std::vector<double> sorted = replicate_means;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t r = sorted.size();
    // Guard against mass * R landing a hair above an integer.
    auto inside = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(r) - 1e-9));
    inside = std::clamp<std::size_t>(inside, 1, r);
    std::size_t best = 0;
    double width = sorted[inside - 1] - sorted[0];
    for (std::size_t i = 1; i + inside <= r; ++i) {
        const double w = sorted[i + inside - 1] - sorted[i];
        if (w < width) {
            width = w;
            best = i;
        }
    }
    out.lo = sorted[best];
    out.hi = sorted[best + inside - 1];
    out.replicate_means = std::move(replicate_means);
    return out;
}

}  // namespace qcaan::stats
