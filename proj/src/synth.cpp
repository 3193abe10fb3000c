#include "gazedec/synth.hpp"

#include "gazedec/errors.hpp"
#include "gazedec/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gazedec {
namespace synth {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

struct ParaLayout {
    std::string article_id;
    int cs_start = 0;
    int cs_end = 0;
    double question_difficulty = 0.0;
    std::vector<double> word_x;
    std::vector<double> word_w;
    std::vector<double> word_y;
};

void check_config(const SynthConfig& c) {
    if (c.n_batches < 1 || c.articles_per_batch < 1 || c.participants_per_batch < 2 ||
        c.paragraphs_per_article_min < 1 ||
        c.paragraphs_per_article_max < c.paragraphs_per_article_min)
        throw compute_error(ErrorKind::InvalidConfig, "synth: shape parameters must be positive");
    if (c.participants_per_batch % 2 != 0)
        throw compute_error(ErrorKind::InvalidConfig,
                            "synth: participants_per_batch must be even for goal balance");
    if (c.delta < 0.0)
        throw compute_error(ErrorKind::InvalidConfig, "synth: delta must be >= 0");
    if (c.word_count_min < 2 || c.word_count_max < c.word_count_min ||
        c.duration_sigma < 0.0 || c.word_count_sd < 0.0)
        throw compute_error(ErrorKind::InvalidConfig, "synth: invalid distribution parameters");
}

Word make_word(int index, int line, Rng& rng) {
    Word w;
    w.index = index;
    w.line = line;
    w.length = static_cast<int>(clamp(std::lround(std::exp(rnorm(rng, 1.45, 0.42))), 1, 14));
    w.text.reserve(static_cast<size_t>(w.length));
    for (int i = 0; i < w.length; ++i)
        w.text.push_back(static_cast<char>('a' + static_cast<int>(runif(rng, 0.0, 26.0)) % 26));
    w.log_frequency = -(1.0 + 0.28 * w.length + std::exponential_distribution<double>(0.9)(rng));
    w.surprisal = clamp(1.0 + 0.5 * (-w.log_frequency) + rnorm(rng, 0.0, 1.3), 0.3, 25.0);
    return w;
}

} // namespace

GeneratedCorpus generate(const SynthConfig& cfg) {
    check_config(cfg);

    GeneratedCorpus out;
    Corpus& corpus = out.corpus;
    out.truth.delta = cfg.delta;
    out.truth.duration_scale_outside_span = 1.0 / (1.0 + cfg.delta);
    out.truth.skip_probability_boost = cfg.skip_boost_coef * cfg.delta;
    out.truth.termination_probability = std::min(cfg.termination_coef * cfg.delta, 0.9);

    // --- items (shared across participants) ---
    Rng item_rng(derive_seed(cfg.seed, "items"));
    std::map<std::string, ParaLayout> layouts;
    std::map<int, std::vector<std::string>> batch_paragraphs; // batch -> paragraph ids

    for (int b = 1; b <= cfg.n_batches; ++b) {
        for (int a = 0; a < cfg.articles_per_batch; ++a) {
            char art_id[24];
            std::snprintf(art_id, sizeof(art_id), "b%da%02d", b, a);
            int n_paras = cfg.paragraphs_per_article_min;
            if (cfg.paragraphs_per_article_max > cfg.paragraphs_per_article_min &&
                runif(item_rng) < cfg.prob_max_paragraphs)
                n_paras = cfg.paragraphs_per_article_max;
            for (int p = 0; p < n_paras; ++p) {
                char para_id[48];
                std::snprintf(para_id, sizeof(para_id), "%sp%d", art_id, p);

                const int n_words = static_cast<int>(clamp(
                    std::lround(rnorm(item_rng, cfg.word_count_mean, cfg.word_count_sd)),
                    cfg.word_count_min, cfg.word_count_max));

                Paragraph para;
                para.id = para_id;
                ParaLayout layout;
                layout.article_id = art_id;

                int line = 0;
                double line_chars = 0;
                for (int wi = 0; wi < n_words; ++wi) {
                    Word w = make_word(wi, 0, item_rng);
                    if (line_chars + w.length + 1 > 78.0) {
                        ++line;
                        line_chars = 0;
                    }
                    w.line = line;
                    layout.word_x.push_back(60.0 + 9.6 * line_chars);
                    layout.word_w.push_back(9.6 * w.length);
                    layout.word_y.push_back(120.0 + 44.0 * line);
                    line_chars += w.length + 1;
                    para.words.push_back(std::move(w));
                }

                const double rel_start = runif(item_rng, 0.1, 0.7);
                const double rel_len = runif(item_rng, 0.15, 0.4);
                layout.cs_start = std::min(n_words - 2, static_cast<int>(std::lround(rel_start * n_words)));
                const int cs_len = std::max(1, static_cast<int>(std::lround(rel_len * n_words)));
                layout.cs_end = std::min(n_words - 1, layout.cs_start + cs_len - 1);
                layout.question_difficulty = runif(item_rng, 0.05, 0.6);
                for (int wi = layout.cs_start; wi <= layout.cs_end; ++wi)
                    para.words[static_cast<size_t>(wi)].in_critical_span = true;

                corpus.paragraphs[para_id] = std::move(para);
                layouts[para_id] = std::move(layout);
                batch_paragraphs[b].push_back(para_id);
            }
        }
    }

    // --- participants and scanpaths ---
    for (int b = 1; b <= cfg.n_batches; ++b) {
        const auto& paragraph_ids = batch_paragraphs[b];
        for (int i = 0; i < cfg.participants_per_batch; ++i) {
            char pid[32];
            std::snprintf(pid, sizeof(pid), "b%ds%03d", b, i);
            const Goal goal = (i % 2 == 0) ? Goal::InformationSeeking : Goal::OrdinaryReading;
            const Level level = ((i / 2) % 2 == 0) ? Level::Advanced : Level::Elementary;
            const bool is_seeking = goal == Goal::InformationSeeking;

            Rng rng(derive_seed(cfg.seed, pid));
            const double speed_p = std::exp(rnorm(rng, 0.0, cfg.participant_speed_sigma));

            std::vector<std::string> order = paragraph_ids;
            std::shuffle(order.begin(), order.end(), rng);

            for (size_t pos = 0; pos < order.size(); ++pos) {
                const std::string& para_id = order[pos];
                const Paragraph& para = corpus.paragraphs.at(para_id);
                const ParaLayout& layout = layouts.at(para_id);
                const int n = static_cast<int>(para.words.size());

                Trial t;
                t.participant_id = pid;
                t.article_id = layout.article_id;
                t.paragraph_id = para_id;
                t.batch_id = b;
                t.level = level;
                t.goal = goal;
                t.paragraph = &corpus.paragraphs.at(para_id);
                t.paragraph_position = static_cast<int>(pos) + 1;
                t.cs_start_word = layout.cs_start;
                t.cs_end_word = layout.cs_end;
                t.question_difficulty = layout.question_difficulty;

                const double speed_t = std::exp(rnorm(rng, 0.0, cfg.trial_speed_sigma));
                const double log_speed = std::log(speed_p) + std::log(speed_t);

                auto emit = [&](int w) {
                    const Word& word = para.words[static_cast<size_t>(w)];
                    const bool in_span = w >= layout.cs_start && w <= layout.cs_end;
                    double lg = cfg.duration_mu + 0.020 * (word.surprisal - 6.0) +
                                0.012 * (word.length - 5.0) + rnorm(rng, 0.0, cfg.duration_sigma) +
                                log_speed;
                    if (is_seeking && !in_span) lg -= std::log1p(cfg.delta);
                    Fixation f;
                    f.word_index = w;
                    f.duration_ms = clamp(std::exp(lg), 25.0, 4000.0);
                    f.x = layout.word_x[static_cast<size_t>(w)] +
                          runif(rng, 0.15, 0.85) * layout.word_w[static_cast<size_t>(w)];
                    f.y = layout.word_y[static_cast<size_t>(w)] + rnorm(rng, 0.0, 2.5);
                    t.fixations.push_back(f);
                };
                auto emit_off_text = [&]() {
                    Fixation f;
                    f.word_index = -1;
                    f.duration_ms = clamp(std::exp(cfg.duration_mu - 0.5 + rnorm(rng, 0.0, 0.3)),
                                          25.0, 2000.0);
                    f.x = runif(rng, 20.0, 980.0);
                    f.y = runif(rng, 40.0, 700.0);
                    t.fixations.push_back(f);
                };

                int w = 0;
                while (w < n) {
                    const Word& word = para.words[static_cast<size_t>(w)];
                    const bool in_span = w >= layout.cs_start && w <= layout.cs_end;

                    const double p_term =
                        (is_seeking && w > layout.cs_end) ? out.truth.termination_probability : 0.0;
                    if (runif(rng) < p_term) break;

                    double p_skip = clamp(cfg.skip_base * (1.0 + 0.06 * (4.0 - word.length)), 0.02, 0.7);
                    if (is_seeking && !in_span)
                        p_skip = clamp(p_skip + out.truth.skip_probability_boost, 0.0, 0.85);
                    if (w > 0 && runif(rng) < p_skip) {
                        ++w;
                        continue;
                    }

                    emit(w);
                    const double p_refix = clamp(0.04 + 0.018 * (word.length - 4.0), 0.0, 0.35);
                    if (runif(rng) < p_refix) emit(w);
                    if (runif(rng) < cfg.off_text_prob) emit_off_text();
                    if (w >= 2 && runif(rng) < cfg.regression_base) {
                        const int span = std::min(w, 8);
                        const int back = w - 1 - static_cast<int>(runif(rng, 0.0, span));
                        emit(std::max(0, back));
                        if (runif(rng) < 0.5) emit(w);
                    }
                    ++w;
                }
                if (t.fixations.empty()) emit(0);
                for (size_t k = 0; k < t.fixations.size(); ++k)
                    t.fixations[k].order = static_cast<int>(k);

                const double p_correct =
                    clamp(0.88 - 0.5 * layout.question_difficulty +
                              cfg.answered_speed_coupling * (-std::log(speed_t)),
                          0.02, 0.98);
                t.answered_correctly = runif(rng) < p_correct;

                corpus.trials.push_back(std::move(t));
            }
        }
    }

    validate_corpus(corpus);
    return out;
}

} // namespace synth
} // namespace gazedec
