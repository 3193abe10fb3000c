#include "gazedec/features.hpp"

#include "gazedec/errors.hpp"

#include <cmath>

namespace gazedec {

const std::array<const char*, 9>& GlobalFeatures::names() {
    static const std::array<const char*, 9> n = {
        "mean_first_fixation_duration", "mean_gaze_duration",
        "mean_total_reading_time_per_word", "mean_single_fixation_duration",
        "mean_forward_saccade_length", "regression_rate", "first_pass_skip_rate",
        "refixation_rate", "reading_speed"};
    return n;
}

GlobalFeatures global_features(const Trial& trial) {
    const auto& fixations = trial.fixations;
    const int n_words = trial.word_count();

    bool any_on_text = false;
    for (const Fixation& f : fixations) {
        if (f.word_index >= 0) {
            any_on_text = true;
            break;
        }
    }
    if (!any_on_text)
        throw data_error(ErrorKind::NoOnTextFixations,
                         "trial " + trial.key() + " has no on-text fixations");

    const std::vector<bool> fp = first_pass_mask(trial);

    std::vector<double> gaze(n_words, 0.0);
    std::vector<double> total_rt(n_words, 0.0);
    std::vector<double> first_fix(n_words, 0.0);
    std::vector<int> n_first_pass(n_words, 0);
    std::vector<int> n_any(n_words, 0);

    for (size_t i = 0; i < fixations.size(); ++i) {
        const int w = fixations[i].word_index;
        if (w < 0) continue;
        total_rt[w] += fixations[i].duration_ms;
        ++n_any[w];
        if (fp[i]) {
            if (n_first_pass[w] == 0) first_fix[w] = fixations[i].duration_ms;
            gaze[w] += fixations[i].duration_ms;
            ++n_first_pass[w];
        }
    }

    GlobalFeatures g;

    double sum_ffd = 0, sum_gaze = 0, sum_trt = 0, sum_sfd = 0;
    int n_fp_words = 0, n_any_words = 0, n_single = 0, n_skipped = 0;
    for (int w = 0; w < n_words; ++w) {
        if (n_first_pass[w] > 0) {
            sum_ffd += first_fix[w];
            sum_gaze += gaze[w];
            ++n_fp_words;
            if (n_first_pass[w] == 1) {
                sum_sfd += first_fix[w];
                ++n_single;
            }
        } else {
            ++n_skipped;
        }
        if (n_any[w] > 0) {
            sum_trt += total_rt[w];
            ++n_any_words;
        }
    }
    if (n_fp_words > 0) {
        g.mean_first_fixation_duration = sum_ffd / n_fp_words;
        g.mean_gaze_duration = sum_gaze / n_fp_words;
    }
    if (n_any_words > 0) g.mean_total_reading_time_per_word = sum_trt / n_any_words;
    if (n_single > 0) g.mean_single_fixation_duration = sum_sfd / n_single;
    g.first_pass_skip_rate = n_words > 0 ? static_cast<double>(n_skipped) / n_words : 0.0;

    int n_saccades = 0, n_regressions = 0, n_refixations = 0, n_forward = 0;
    double sum_forward_len = 0;
    for (size_t i = 1; i < fixations.size(); ++i) {
        const SaccadeClass c = classify_saccade(fixations[i - 1], fixations[i], trial.words());
        ++n_saccades;
        switch (c) {
            case SaccadeClass::Regression: ++n_regressions; break;
            case SaccadeClass::Refixation: ++n_refixations; break;
            case SaccadeClass::Forward:
            case SaccadeClass::Skip:
                sum_forward_len += fixations[i].word_index - fixations[i - 1].word_index;
                ++n_forward;
                break;
            default: break;
        }
    }
    if (n_saccades > 0) {
        g.regression_rate = static_cast<double>(n_regressions) / n_saccades;
        g.refixation_rate = static_cast<double>(n_refixations) / n_saccades;
    }
    if (n_forward > 0) g.mean_forward_saccade_length = sum_forward_len / n_forward;

    double total_ms = 0;
    for (const Fixation& f : fixations) total_ms += f.duration_ms;
    g.reading_speed = n_words / (total_ms / 1000.0);

    return g;
}

double reading_time_per_word(const Trial& trial) {
    double total = 0;
    for (const Fixation& f : trial.fixations) total += f.duration_ms;
    return total / trial.word_count();
}

FixationFeatures fixation_features(const Trial& trial) {
    const auto& fixations = trial.fixations;
    const auto& words = trial.words();
    const int n_words = trial.word_count();
    const std::vector<bool> fp = first_pass_mask(trial);

    FixationFeatures out;
    out.rows = fixations.size();
    out.data.assign(out.rows * kFixDim, 0.0);
    out.incoming_class.assign(out.rows, static_cast<int>(SaccadeClass::Other));

    for (size_t i = 0; i < fixations.size(); ++i) {
        double* r = out.row(i);
        const Fixation& f = fixations[i];
        r[kFixDuration] = f.duration_ms;

        SaccadeClass cls = SaccadeClass::Other;
        double in_len = 0.0;
        if (i > 0) {
            cls = classify_saccade(fixations[i - 1], f, words);
            if (f.word_index >= 0 && fixations[i - 1].word_index >= 0)
                in_len = f.word_index - fixations[i - 1].word_index;
        }
        out.incoming_class[i] = static_cast<int>(cls);
        r[kFixIncomingLength] = in_len;
        r[kFixClassOneHot + static_cast<int>(cls)] = 1.0;
        r[kFixIsFirstPass] = fp[i] ? 1.0 : 0.0;

        if (f.word_index >= 0) {
            const Word& w = words[static_cast<size_t>(f.word_index)];
            r[kFixWordLength] = w.length;
            r[kFixLogFrequency] = w.log_frequency;
            r[kFixSurprisal] = w.surprisal;
            r[kFixRelPosition] =
                n_words > 1 ? static_cast<double>(f.word_index) / (n_words - 1) : 0.0;
        }
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<double>& rows, size_t dim) {
    if (rows.empty() || dim == 0)
        throw data_error(ErrorKind::EmptyTrainingSet, "standardizer needs a nonempty training set");
    const size_t n = rows.size() / dim;

    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.sd.assign(dim, 1.0);
    s.active.assign(dim, false);

    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < dim; ++j) s.mean[j] += rows[i * dim + j];
    for (size_t j = 0; j < dim; ++j) s.mean[j] /= static_cast<double>(n);

    std::vector<double> var(dim, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < dim; ++j) {
            const double d = rows[i * dim + j] - s.mean[j];
            var[j] += d * d;
        }
    for (size_t j = 0; j < dim; ++j) {
        var[j] /= static_cast<double>(n);
        if (var[j] > 0.0) {
            s.sd[j] = std::sqrt(var[j]);
            s.active[j] = true;
        }
    }
    return s;
}

void Standardizer::apply_row(double* row) const {
    for (size_t j = 0; j < mean.size(); ++j)
        if (active[j]) row[j] = (row[j] - mean[j]) / sd[j];
}

void Standardizer::invert_row(double* row) const {
    for (size_t j = 0; j < mean.size(); ++j)
        if (active[j]) row[j] = row[j] * sd[j] + mean[j];
}

std::vector<double> Standardizer::apply(const std::vector<double>& row) const {
    std::vector<double> out = row;
    apply_row(out.data());
    return out;
}

} // namespace gazedec
