#pragma once

#include "gazedec/core.hpp"

#include <cstdint>

namespace gazedec {
namespace synth {

// Parametric generator of OneStop-shaped corpora. delta = 0 produces
// label-independent trials; delta > 0 plants an information-seeking
// effect: durations outside the critical span shrink by 1/(1+delta),
// outside-span skips become more likely, and reading tends to stop
// shortly after the span.
struct SynthConfig {
    int n_batches = 3;
    int articles_per_batch = 10;
    int paragraphs_per_article_min = 5;
    int paragraphs_per_article_max = 6;
    double prob_max_paragraphs = 0.4; // P(article gets the max count); mean 5.4
    int participants_per_batch = 120;

    double delta = 0.0;
    uint64_t seed = 1;

    // paragraph length in words
    double word_count_mean = 109.0;
    double word_count_sd = 28.0;
    int word_count_min = 50;
    int word_count_max = 165;

    // scanpath dynamics
    double duration_mu = 5.35; // log ms, ~210 ms median
    double duration_sigma = 0.35;
    double skip_base = 0.22;
    double regression_base = 0.10;
    double off_text_prob = 0.008;

    // label-independent speed variation
    double trial_speed_sigma = 0.30;
    double participant_speed_sigma = 0.0;

    // delta-proportional effect coefficients
    double skip_boost_coef = 0.15;
    double termination_coef = 0.22;

    // optional coupling of answer correctness to trial speed
    double answered_speed_coupling = 0.0;
};

// What was planted, for downstream recovery tests.
struct TruthRecord {
    double delta = 0.0;
    double duration_scale_outside_span = 1.0;
    double skip_probability_boost = 0.0;
    double termination_probability = 0.0;
};

struct GeneratedCorpus {
    Corpus corpus;
    TruthRecord truth;
};

GeneratedCorpus generate(const SynthConfig& config);

} // namespace synth
} // namespace gazedec
