#pragma once

// Naive reference implementations used as independent oracles. These
// deliberately mirror the definitions, not the production code paths:
// per-word scans instead of single-pass accumulation, O(n^2) first-pass
// logic, exhaustive pair counting for AUROC, Newton/IRLS for logistic
// regression, and a dense covariance evaluation of the LMM likelihood.

#include "gazedec/core.hpp"
#include "gazedec/features.hpp"
#include "gazedec/lmm.hpp"
#include "gazedec/rng.hpp"

#include <cmath>
#include <vector>

namespace oracles {

using namespace gazedec;

// ---------------------------------------------------------------- trials

// Random trials with arbitrary structure (off-text fixations, repeats,
// jumps); harsher than generator output.
inline Trial random_trial(Paragraph& storage, Rng& rng, int min_words = 3, int max_words = 30,
                          int min_fix = 1, int max_fix = 60) {
    const int n_words = static_cast<int>(runif(rng, min_words, max_words + 1));
    storage.words.clear();
    int line = 0;
    for (int i = 0; i < n_words; ++i) {
        Word w;
        w.index = i;
        w.length = 1 + static_cast<int>(runif(rng, 0, 9));
        w.text = std::string(static_cast<size_t>(w.length), 'a');
        w.log_frequency = -runif(rng, 1, 10);
        w.surprisal = runif(rng, 0.5, 20);
        if (i > 0 && runif(rng) < 0.12) ++line;
        w.line = line;
        storage.words.push_back(w);
    }

    Trial t;
    t.participant_id = "p0";
    t.article_id = "a0";
    t.paragraph_id = storage.id;
    t.paragraph = &storage;
    const int n_fix = static_cast<int>(runif(rng, min_fix, max_fix + 1));
    for (int i = 0; i < n_fix; ++i) {
        Fixation f;
        f.order = i;
        f.word_index = runif(rng) < 0.05 ? -1 : static_cast<int>(runif(rng, 0, n_words));
        f.x = runif(rng, 0, 1000);
        f.y = runif(rng, 0, 700);
        // integer-valued durations keep summation-order properties exact
        f.duration_ms = std::floor(runif(rng, 40, 600));
        t.fixations.push_back(f);
    }
    t.cs_start_word = std::min(n_words - 1, 1);
    t.cs_end_word = std::min(n_words - 1, 2);
    return t;
}

// ------------------------------------------------------------- first pass

inline std::vector<bool> naive_first_pass(const Trial& t) {
    std::vector<bool> mask(t.fixations.size(), false);
    for (size_t i = 0; i < t.fixations.size(); ++i) {
        const int w = t.fixations[i].word_index;
        if (w < 0) continue;
        bool passed = false;
        for (size_t j = 0; j < i; ++j) {
            if (t.fixations[j].word_index > w) passed = true;
        }
        mask[i] = !passed;
    }
    return mask;
}

// --------------------------------------------------------------- saccades

inline SaccadeClass naive_saccade(const Trial& t, size_t i) {
    const Fixation& a = t.fixations[i - 1];
    const Fixation& b = t.fixations[i];
    if (a.word_index < 0 || b.word_index < 0) return SaccadeClass::Other;
    const int delta = b.word_index - a.word_index;
    if (delta == 0) return SaccadeClass::Refixation;
    if (delta < 0) return SaccadeClass::Regression;
    const int la = t.words()[static_cast<size_t>(a.word_index)].line;
    const int lb = t.words()[static_cast<size_t>(b.word_index)].line;
    if (lb == la && delta == 1) return SaccadeClass::Forward;
    if (lb == la) return SaccadeClass::Skip;
    if (lb == la + 1) return SaccadeClass::ReturnSweep;
    return SaccadeClass::Other;
}

// ---------------------------------------------------------------- globals

// Per-word scans; accumulation runs over words in index order and over
// fixations in temporal order, mirroring the definitional reading.
inline GlobalFeatures naive_global_features(const Trial& t) {
    const auto mask = naive_first_pass(t);
    const int n_words = t.word_count();
    GlobalFeatures g;

    double sum_ffd = 0, sum_gaze = 0, sum_trt = 0, sum_sfd = 0;
    int n_fp_words = 0, n_any_words = 0, n_single = 0, n_skipped = 0;
    for (int w = 0; w < n_words; ++w) {
        double gaze = 0, trt = 0, first = 0;
        int n_fp = 0, n_any = 0;
        for (size_t i = 0; i < t.fixations.size(); ++i) {
            if (t.fixations[i].word_index != w) continue;
            trt += t.fixations[i].duration_ms;
            ++n_any;
            if (mask[i]) {
                if (n_fp == 0) first = t.fixations[i].duration_ms;
                gaze += t.fixations[i].duration_ms;
                ++n_fp;
            }
        }
        if (n_fp > 0) {
            sum_ffd += first;
            sum_gaze += gaze;
            ++n_fp_words;
            if (n_fp == 1) {
                sum_sfd += first;
                ++n_single;
            }
        } else {
            ++n_skipped;
        }
        if (n_any > 0) {
            sum_trt += trt;
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

    int n_sac = 0, n_reg = 0, n_refix = 0, n_fwd = 0;
    double fwd_len = 0;
    for (size_t i = 1; i < t.fixations.size(); ++i) {
        const SaccadeClass c = naive_saccade(t, i);
        ++n_sac;
        if (c == SaccadeClass::Regression) ++n_reg;
        if (c == SaccadeClass::Refixation) ++n_refix;
        if (c == SaccadeClass::Forward || c == SaccadeClass::Skip) {
            fwd_len += t.fixations[i].word_index - t.fixations[i - 1].word_index;
            ++n_fwd;
        }
    }
    if (n_sac > 0) {
        g.regression_rate = static_cast<double>(n_reg) / n_sac;
        g.refixation_rate = static_cast<double>(n_refix) / n_sac;
    }
    if (n_fwd > 0) g.mean_forward_saccade_length = fwd_len / n_fwd;

    double total = 0;
    for (const Fixation& f : t.fixations) total += f.duration_ms;
    g.reading_speed = n_words / (total / 1000.0);
    return g;
}

// ------------------------------------------------------------------ auroc

inline double brute_force_auroc(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
    double wins = 0;
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        ++n_pos;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    for (int y : labels)
        if (!y) ++n_neg;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// ------------------------------------------------------------------- IRLS

// Newton iterations on the penalized logistic objective.
inline std::vector<double> irls_logistic(const std::vector<double>& X, const std::vector<int>& y,
                                         size_t dim, double lambda = 0.0, int max_iter = 200) {
    const size_t n = y.size();
    const size_t d = dim + 1; // intercept last
    std::vector<double> w(d, 0.0);
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> H(d * d, 0.0), grad(d, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double* xi = X.data() + i * dim;
            double z = w[dim];
            for (size_t j = 0; j < dim; ++j) z += w[j] * xi[j];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double r = p - y[i];
            const double s = std::max(p * (1 - p), 1e-10);
            auto xv = [&](size_t j) { return j == dim ? 1.0 : xi[j]; };
            for (size_t a = 0; a < d; ++a) {
                grad[a] += r * xv(a);
                for (size_t b = 0; b < d; ++b) H[a * d + b] += s * xv(a) * xv(b);
            }
        }
        for (size_t j = 0; j < dim; ++j) {
            grad[j] += lambda * static_cast<double>(n) * w[j];
            H[j * d + j] += lambda * static_cast<double>(n);
        }
        // solve H step = grad by Gaussian elimination
        std::vector<double> A = H, b = grad;
        for (size_t c = 0; c < d; ++c) {
            size_t piv = c;
            for (size_t r2 = c + 1; r2 < d; ++r2)
                if (std::abs(A[r2 * d + c]) > std::abs(A[piv * d + c])) piv = r2;
            for (size_t k = 0; k < d; ++k) std::swap(A[c * d + k], A[piv * d + k]);
            std::swap(b[c], b[piv]);
            for (size_t r2 = c + 1; r2 < d; ++r2) {
                const double m = A[r2 * d + c] / A[c * d + c];
                for (size_t k = c; k < d; ++k) A[r2 * d + k] -= m * A[c * d + k];
                b[r2] -= m * b[c];
            }
        }
        std::vector<double> step(d);
        for (size_t r2 = d; r2-- > 0;) {
            double s = b[r2];
            for (size_t k = r2 + 1; k < d; ++k) s -= A[r2 * d + k] * step[k];
            step[r2] = s / A[r2 * d + r2];
        }
        double norm = 0;
        for (size_t j = 0; j < d; ++j) {
            w[j] -= step[j];
            norm += step[j] * step[j];
        }
        if (std::sqrt(norm) < 1e-12) break;
    }
    return w; // weights..., intercept
}

// -------------------------------------------------------------- dense LMM

// log N(y; X beta, sigma2 * (I + sum theta_f^2 Z_f Z_f^T)) computed with
// the explicit n x n covariance.
inline double dense_lmm_loglik(const lmm::LmmSpec& spec, const std::vector<double>& beta,
                               double sigma2, const std::vector<double>& theta) {
    const size_t n = spec.response.size();
    const size_t p = spec.n_fixed;
    std::vector<double> V(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) V[i * n + i] = 1.0;
    for (size_t f = 0; f < spec.factors.size(); ++f) {
        const double t2 = theta[f] * theta[f];
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (spec.factors[f].level[i] == spec.factors[f].level[j]) V[i * n + j] += t2;
    }
    for (double& v : V) v *= sigma2;

    // Cholesky of V
    std::vector<double> L = V;
    for (size_t j = 0; j < n; ++j) {
        double d = L[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
        L[j * n + j] = std::sqrt(d);
        for (size_t i = j + 1; i < n; ++i) {
            double s = L[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = s / L[j * n + j];
        }
    }
    std::vector<double> r(n);
    for (size_t i = 0; i < n; ++i) {
        r[i] = spec.response[i];
        for (size_t j = 0; j < p; ++j) r[i] -= spec.design[i * p + j] * beta[j];
    }
    // solve L z = r
    for (size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (size_t k = 0; k < i; ++k) s -= L[i * n + k] * r[k];
        r[i] = s / L[i * n + i];
    }
    double quad = 0, logdet = 0;
    for (size_t i = 0; i < n; ++i) {
        quad += r[i] * r[i];
        logdet += std::log(L[i * n + i]);
    }
    return -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI) - logdet - 0.5 * quad;
}

// ------------------------------------------------------------ KS two-sample

inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

inline double ks_p_value(double d, size_t n, size_t m) {
    const double ne = std::sqrt(static_cast<double>(n) * m / static_cast<double>(n + m));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

} // namespace oracles
