#pragma once

#include "qcaan/core.hpp"

#include <string>
#include <vector>

namespace qcaan::stats {

/// Significance level used when flagging pairwise differences.
inline constexpr double kAlpha = 0.05;

struct NamedGroup {
    std::string name;
    std::vector<double> values;
};

using MetricSampleGroups = std::vector<NamedGroup>;

/// Mid-ranks (1-based) of all values pooled across groups, in group order.
std::vector<std::vector<double>> pooled_ranks(const MetricSampleGroups& groups, double* tie_sum = nullptr);

struct KruskalWallis {
    double h = 0;
    double p_value = 1;
    int df = 0;
};

KruskalWallis kruskal_wallis(const MetricSampleGroups& groups);

enum class PAdjust { none, bonferroni, holm };

PAdjust p_adjust_from_string(const std::string& s);
std::string to_string(PAdjust p);

struct DunnResult {
    std::vector<std::string> names;
    /// z[i][j] = (mean rank i - mean rank j) / se; antisymmetric.
    std::vector<std::vector<double>> z;
    /// Two-sided p-values after adjustment; symmetric with unit diagonal.
    std::vector<std::vector<double>> p;
};

DunnResult dunn_test(const MetricSampleGroups& groups, PAdjust adjust = PAdjust::none);

/// Flat Dirichlet weights via normalized unit-exponential draws.
std::vector<double> dirichlet_weights(std::size_t n, Rng& rng);

std::vector<double> bayesian_bootstrap_mean(const std::vector<double>& values, std::size_t replications,
                                            std::uint64_t seed);

struct HdiInterval {
    double lo = 0, hi = 0;
    double mass = 0.95;
    std::vector<double> replicate_means;
};

/// Shortest window over the sorted replicates containing ceil(mass * R) points; ties go to the
/// lower start index.
HdiInterval hdi(std::vector<double> replicate_means, double mass = 0.95);

double normal_sf(double z);
double chi_squared_sf(double x, int df);

}  // namespace qcaan::stats
