#include "gazedec/eval.hpp"

#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gazedec {
namespace eval {

AccuracyCi accuracy_ci(const std::vector<double>& per_fold) {
    if (per_fold.size() < 2)
        throw compute_error(ErrorKind::TooFewFolds, "accuracy CI needs at least 2 folds");
    AccuracyCi out;
    out.per_fold = per_fold;
    const double k = static_cast<double>(per_fold.size());
    out.mean = std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / k;
    double var = 0;
    for (double a : per_fold) var += (a - out.mean) * (a - out.mean);
    out.half_width = 1.96 * std::sqrt(var / k) / std::sqrt(k);
    return out;
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw compute_error(ErrorKind::SingleClass, "AUROC requires both classes");

    // rank-based Mann-Whitney with midranks for ties
    std::vector<size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0;
    size_t i = 0;
    while (i < idx.size()) {
        size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // average of ranks i+1..j
        for (size_t t = i; t < j; ++t)
            if (labels[idx[t]]) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double cohens_kappa(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw compute_error(ErrorKind::ColumnMismatch, "kappa: prediction sets differ in size");
    const double n = static_cast<double>(a.size());
    double agree = 0, a1 = 0, b1 = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) agree += 1;
        if (a[i]) a1 += 1;
        if (b[i]) b1 += 1;
    }
    const double p_o = agree / n;
    const double p_e = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1 - p_e);
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
    size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw compute_error(ErrorKind::SingleClass, "ROC requires both classes");

    std::vector<size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> out;
    out.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    size_t tp = 0, fp = 0, i = 0;
    while (i < idx.size()) {
        size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        for (size_t t = i; t < j; ++t) (labels[idx[t]] ? tp : fp)++;
        out.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos,
                       scores[idx[i]]});
        i = j;
    }
    return out;
}

Ensemble fit_ensemble(const std::vector<double>& val_matrix, const std::vector<int>& labels,
                      size_t k) {
    if (k == 0 || labels.empty() || val_matrix.size() != labels.size() * k)
        throw compute_error(ErrorKind::ColumnMismatch,
                            "ensemble: probability matrix does not match labels x models");
    Ensemble e;
    e.n_models = k;
    LogisticFitOptions opt;
    opt.max_iterations = 20000;
    e.model = fit_logistic(val_matrix, labels, k, opt);
    return e;
}

std::vector<double> ensemble_predict(const Ensemble& e, const std::vector<double>& matrix) {
    if (e.n_models == 0 || matrix.size() % e.n_models != 0)
        throw compute_error(ErrorKind::ColumnMismatch,
                            "ensemble: test matrix width does not match the fitted model count");
    const size_t n = matrix.size() / e.n_models;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = e.model.probability(matrix.data() + i * e.n_models);
    return out;
}

Trial prefix_truncate(const Trial& trial, double percent) {
    if (!(percent > 0.0) || percent > 100.0)
        throw compute_error(ErrorKind::InvalidPercent,
                            "prefix percent must be in (0,100], got " + std::to_string(percent));
    Trial out = trial;
    const size_t keep = static_cast<size_t>(
        std::ceil(percent / 100.0 * static_cast<double>(trial.fixations.size())));
    out.fixations.resize(std::max<size_t>(1, keep));
    return out;
}

void write_predictions_csv(const std::string& path, const std::vector<PredRecord>& records) {
    CsvWriter w(path, {"model", "fold", "participant_id", "paragraph_id", "regime", "prob_is",
                       "label_pred", "label_true"});
    for (const PredRecord& r : records) {
        w.field(r.model)
            .field(r.fold)
            .field(r.participant_id)
            .field(r.paragraph_id)
            .field(std::string(to_string(r.regime)))
            .field(r.prob_is)
            .field(std::string(to_string(r.label_pred)))
            .field(std::string(to_string(r.label_true)));
        w.end_row();
    }
}

std::vector<PredRecord> read_predictions_csv(const std::string& path) {
    CsvTable t = CsvTable::read_file(path);
    std::vector<PredRecord> out;
    out.reserve(t.row_count());
    for (size_t r = 0; r < t.row_count(); ++r) {
        PredRecord p;
        p.model = t.str(r, "model");
        p.fold = static_cast<int>(t.integer(r, "fold"));
        p.participant_id = t.str(r, "participant_id");
        p.paragraph_id = t.str(r, "paragraph_id");
        p.regime = regime_from_string(t.str(r, "regime"));
        p.prob_is = t.num(r, "prob_is");
        p.label_pred = goal_from_string(t.str(r, "label_pred"));
        p.label_true = goal_from_string(t.str(r, "label_true"));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<EvalRow> build_eval_report(const std::vector<PredRecord>& records) {
    // model -> regime -> fold -> records
    std::map<std::string, std::map<std::string, std::map<int, std::vector<const PredRecord*>>>>
        groups;
    for (const PredRecord& r : records) {
        groups[r.model][to_string(r.regime)][r.fold].push_back(&r);
        groups[r.model]["all"][r.fold].push_back(&r);
    }

    std::vector<EvalRow> rows;
    for (const auto& [model, regimes] : groups) {
        for (const auto& [regime, folds] : regimes) {
            if (folds.size() < 2) continue;
            std::vector<double> accs;
            std::vector<double> aucs;
            size_t n = 0;
            for (const auto& [fold, recs] : folds) {
                double correct = 0;
                std::vector<double> scores;
                std::vector<int> labels;
                for (const PredRecord* r : recs) {
                    if (r->correct()) correct += 1;
                    scores.push_back(r->prob_is);
                    labels.push_back(r->label_true == Goal::InformationSeeking ? 1 : 0);
                }
                accs.push_back(correct / static_cast<double>(recs.size()));
                n += recs.size();
                const bool has_both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                                      std::count(labels.begin(), labels.end(), 0) > 0;
                if (has_both) aucs.push_back(auroc(scores, labels));
            }
            EvalRow row;
            row.model = model;
            row.regime = regime;
            row.accuracy = accuracy_ci(accs);
            if (!aucs.empty()) {
                const double k = static_cast<double>(aucs.size());
                row.auroc_mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / k;
                double var = 0;
                for (double a : aucs) var += (a - row.auroc_mean) * (a - row.auroc_mean);
                row.auroc_sd = std::sqrt(var / k);
            }
            row.n_trials = n;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<OnlineRow> online_eval(ClassifierKind kind, const Corpus& corpus,
                                   const SplitPlan& plan, const OnlineOptions& options) {
    const std::vector<double> allowed = {1, 5, 10, 25, 50, 100};
    for (double b : options.budgets)
        if (std::find(allowed.begin(), allowed.end(), b) == allowed.end())
            throw compute_error(ErrorKind::InvalidPercent,
                                "online budgets must be among {1,5,10,25,50,100}");
    if (options.folds.size() < 2)
        throw compute_error(ErrorKind::TooFewFolds, "online evaluation needs >= 2 folds");

    std::vector<OnlineRow> rows;
    for (double budget : options.budgets) {
        std::vector<double> fold_accs;
        for (int fold : options.folds) {
            auto train = trials_in_regime(corpus, plan, fold, Regime::Train);
            auto val = trials_in_regime(corpus, plan, fold, Regime::Val);
            auto test = test_trials(corpus, plan, fold);

            const double train_budget = options.retrain_per_budget ? budget : 100.0;
            std::vector<Trial> train_cut, val_cut, test_cut;
            train_cut.reserve(train.size());
            for (const Trial* t : train) train_cut.push_back(prefix_truncate(*t, train_budget));
            for (const Trial* t : val) val_cut.push_back(prefix_truncate(*t, train_budget));
            for (const Trial* t : test) test_cut.push_back(prefix_truncate(*t, budget));

            auto ptrs = [](const std::vector<Trial>& v) {
                std::vector<const Trial*> p;
                p.reserve(v.size());
                for (const Trial& t : v) p.push_back(&t);
                return p;
            };
            auto model = fit_classifier(kind, ptrs(train_cut), ptrs(val_cut), options.fit);
            const auto preds = model->predict_all(ptrs(test_cut));
            fold_accs.push_back(prediction_accuracy(preds, ptrs(test_cut)));
        }
        OnlineRow row;
        row.budget = budget;
        row.accuracy = accuracy_ci(fold_accs);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace eval
} // namespace gazedec
