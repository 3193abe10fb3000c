#pragma once

#include "gazedec/classifiers.hpp"
#include "gazedec/logistic.hpp"
#include "gazedec/splits.hpp"

#include <string>
#include <vector>

namespace gazedec {
namespace eval {

struct AccuracyCi {
    double mean = 0.0;
    double half_width = 0.0; // 1.96 * std / sqrt(k), population std
    std::vector<double> per_fold;
};

AccuracyCi accuracy_ci(const std::vector<double>& per_fold_accuracies);

// Mann-Whitney U / (n_pos * n_neg), ties counted half.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// (p_o - p_e) / (1 - p_e); when p_e == 1 the value is 1 for identical
// predictions and 0 otherwise.
double cohens_kappa(const std::vector<int>& preds_a, const std::vector<int>& preds_b);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

// Logistic regression over the probability columns of K base models,
// trained on validation-fold outputs and applied to test outputs.
struct Ensemble {
    size_t n_models = 0;
    LogisticModel model;
};

// matrix: rows x k, row-major.
Ensemble fit_ensemble(const std::vector<double>& val_probability_matrix,
                      const std::vector<int>& val_labels, size_t k);
std::vector<double> ensemble_predict(const Ensemble& e,
                                     const std::vector<double>& probability_matrix);

// Keeps the first ceil(percent/100 * N) fixations; percent in (0,100].
Trial prefix_truncate(const Trial& trial, double percent);

// ---------------------------------------------------------------------
// Prediction records: the CSV-level currency between train, evaluate,
// ensemble, and analysis stages.

struct PredRecord {
    std::string model;
    int fold = 0;
    std::string participant_id;
    std::string paragraph_id;
    Regime regime = Regime::Train;
    double prob_is = 0.5;
    Goal label_pred = Goal::InformationSeeking;
    Goal label_true = Goal::OrdinaryReading;

    bool correct() const { return label_pred == label_true; }
    // probability assigned to the true label
    double prob_true() const {
        return label_true == Goal::InformationSeeking ? prob_is : 1.0 - prob_is;
    }
};

void write_predictions_csv(const std::string& path, const std::vector<PredRecord>& records);
std::vector<PredRecord> read_predictions_csv(const std::string& path);

struct EvalRow {
    std::string model;
    std::string regime; // new_item / new_participant / new_item_participant / all
    AccuracyCi accuracy;
    double auroc_mean = 0.0;
    double auroc_sd = 0.0;
    size_t n_trials = 0;
};

std::vector<EvalRow> build_eval_report(const std::vector<PredRecord>& records);

// ---------------------------------------------------------------- online

struct OnlineRow {
    double budget = 100.0;
    AccuracyCi accuracy;
};

struct OnlineOptions {
    std::vector<double> budgets = {1, 5, 10, 25, 50, 100};
    std::vector<int> folds = {0, 1};
    bool retrain_per_budget = true; // off: train at 100%, evaluate on prefixes
    FitOptions fit;
};

std::vector<OnlineRow> online_eval(ClassifierKind kind, const Corpus& corpus,
                                   const SplitPlan& plan, const OnlineOptions& options);

} // namespace eval
} // namespace gazedec
