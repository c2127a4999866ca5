#pragma once

#include "qcaan/core.hpp"
#include "qcaan/neuralnet.hpp"

#include <string>
#include <vector>

namespace qcaan {

struct LogisticModel {
    Vector weights;
    double bias = 0;
    double l2 = 1.0;
    int iterations = 0;
    bool converged = false;
};

struct LogisticOptions {
    double l2 = 1.0;
    int max_iters = 100;
    double tol = 1e-8;
};

/// Minimizes mean BCE + (l2/2)|w|^2 (bias unpenalized) by Newton/IRLS with step halving.
LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y, const LogisticOptions& opts = {});
Vector predict_proba(const LogisticModel& model, const Matrix& x);
/// Gradient of the fitted objective at the model; used to audit convergence.
Vector logistic_objective_gradient(const LogisticModel& model, const Matrix& x, const std::vector<int>& y);

struct ClassificationReport {
    long tn = 0, fp = 0, fn = 0, tp = 0;
    double accuracy = 0, precision = 0, recall = 0, auc = 0.5;
    double threshold = 0.5;
    bool precision_undefined = false;
    bool recall_undefined = false;

    long total() const { return tn + fp + fn + tp; }
};

/// Confusion counts at `threshold` (score >= threshold predicts positive) plus rank-based AUC.
ClassificationReport evaluate(const std::vector<int>& y_true, const std::vector<double>& scores,
                              double threshold = 0.5);
/// Metrics from bare confusion counts; auc is left at 0.5.
ClassificationReport report_from_counts(long tn, long fp, long fn, long tp, double threshold = 0.5);
/// Mann-Whitney AUC with mid-ranks; 0.5 when a class is missing.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

struct RocPoint {
    double fpr, tpr, threshold;
};
/// Full ROC curve from (0,0) to (1,1), one vertex per distinct score.
std::vector<RocPoint> roc_curve(const std::vector<int>& y_true, const std::vector<double>& scores);

struct MlpOptions {
    int epochs = 100;
    std::size_t batch_size = 64;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

struct MlpEpochRecord {
    double loss;
    double accuracy, precision, recall, auc;
};

struct MlpClassifier {
    DenseNetworkSpec spec;
    NetParams params;
    std::vector<MlpEpochRecord> history;

    Vector predict_proba(const Matrix& x) const;
};

/// Dense 64/32/16/4 relu network with a sigmoid output, trained with BCE and Adam.
MlpClassifier fit_mlp_classifier(const Matrix& x, const std::vector<int>& y, const MlpOptions& opts = {});

std::vector<double> to_std(const Vector& v);

}  // namespace qcaan
