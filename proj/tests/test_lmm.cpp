#include <doctest.h>

#include "gazedec/errors.hpp"
#include "gazedec/lmm.hpp"
#include "gazedec/synth.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace gazedec;
using namespace gazedec::lmm;

namespace {

// n rows, p fixed effects (incl. intercept), up to 3 crossed factors
LmmSpec random_spec(Rng& rng, size_t n, size_t p, const std::vector<int>& factor_levels,
                    const std::vector<double>& true_theta, double sigma = 1.0) {
    LmmSpec spec;
    spec.n_fixed = p;
    for (size_t j = 0; j < p; ++j) spec.fixed_names.push_back("b" + std::to_string(j));

    std::vector<double> beta(p);
    for (auto& b : beta) b = rnorm(rng);

    std::vector<std::vector<double>> intercepts;
    for (size_t f = 0; f < factor_levels.size(); ++f) {
        GroupingFactor gf;
        gf.name = "f" + std::to_string(f);
        gf.n_levels = factor_levels[f];
        for (size_t i = 0; i < n; ++i)
            gf.level.push_back(static_cast<int>(runif(rng, 0, factor_levels[f])));
        // ensure every level appears
        for (int l = 0; l < factor_levels[f]; ++l) gf.level[static_cast<size_t>(l) % n] = l;
        spec.factors.push_back(std::move(gf));
        std::vector<double> u(static_cast<size_t>(factor_levels[f]));
        for (auto& v : u) v = rnorm(rng, 0.0, sigma * true_theta[f]);
        intercepts.push_back(std::move(u));
    }

    for (size_t i = 0; i < n; ++i) {
        double y = 0;
        spec.design.push_back(1.0);
        y += beta[0];
        for (size_t j = 1; j < p; ++j) {
            const double x = rnorm(rng);
            spec.design.push_back(x);
            y += beta[j] * x;
        }
        for (size_t f = 0; f < spec.factors.size(); ++f)
            y += intercepts[f][static_cast<size_t>(spec.factors[f].level[i])];
        y += rnorm(rng, 0.0, sigma);
        spec.response.push_back(y);
    }
    return spec;
}

} // namespace

TEST_SUITE("lmm") {

TEST_CASE("profiling at theta zero reproduces ordinary least squares") {
    Rng rng(41);
    LmmSpec spec = random_spec(rng, 60, 3, {5}, {0.8});
    const ProfileResult r = lmm_profile(spec, {0.0});

    // direct OLS via the normal equations
    const size_t p = 3, n = spec.response.size();
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t a = 0; a < p; ++a) {
            xty[a] += spec.design[i * p + a] * spec.response[i];
            for (size_t b = 0; b < p; ++b)
                xtx[a * p + b] += spec.design[i * p + a] * spec.design[i * p + b];
        }
    // tiny Gaussian elimination
    std::vector<double> A = xtx, beta = xty;
    for (size_t c = 0; c < p; ++c) {
        for (size_t r2 = c + 1; r2 < p; ++r2) {
            const double m = A[r2 * p + c] / A[c * p + c];
            for (size_t k = 0; k < p; ++k) A[r2 * p + k] -= m * A[c * p + k];
            beta[r2] -= m * beta[c];
        }
    }
    std::vector<double> ols(p);
    for (size_t r2 = p; r2-- > 0;) {
        double s = beta[r2];
        for (size_t k = r2 + 1; k < p; ++k) s -= A[r2 * p + k] * ols[k];
        ols[r2] = s / A[r2 * p + r2];
    }
    for (size_t j = 0; j < p; ++j) CHECK(r.beta[j] == doctest::Approx(ols[j]).epsilon(1e-8));

    double rss = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = spec.response[i];
        for (size_t j = 0; j < p; ++j) e -= spec.design[i * p + j] * ols[j];
        rss += e * e;
    }
    CHECK(r.sigma2 == doctest::Approx(rss / static_cast<double>(n)).epsilon(1e-8));
}

TEST_CASE("fitted likelihood matches the dense-covariance oracle on small crossed designs") {
    Rng rng(42);
    for (int rep = 0; rep < 8; ++rep) {
        const size_t n = 18 + static_cast<size_t>(runif(rng, 0, 33)); // up to 50 rows
        LmmSpec spec = random_spec(rng, n, 2, {3, 3}, {0.7, 0.4}, 0.8);
        const LmmFit fit = lmm_fit(spec);
        const double dense =
            oracles::dense_lmm_loglik(spec, fit.beta, fit.sigma2, fit.theta);
        CHECK(fit.loglik == doctest::Approx(dense).epsilon(1e-6));
        CHECK(fit.sigma2 > 0);
        for (double t : fit.theta) CHECK(t >= 0);
    }
}

TEST_CASE("profiled log-likelihood at the optimum dominates the multi-start inits") {
    Rng rng(43);
    LmmSpec spec = random_spec(rng, 120, 2, {10, 6}, {0.9, 0.3});
    const LmmFit fit = lmm_fit(spec);
    for (double start : {0.01, 0.3, 1.0}) {
        const ProfileResult at_start =
            lmm_profile(spec, std::vector<double>(spec.factors.size(), start));
        CHECK(fit.loglik >= at_start.loglik - 1e-9);
    }
}

TEST_CASE("single-factor recovery sanity") {
    // 20 groups x 10 observations, intercept sd 1.0, residual 0.5
    Rng rng(44);
    int ratio_ok = 0;
    for (int rep = 0; rep < 5; ++rep) {
        LmmSpec spec;
        spec.n_fixed = 1;
        spec.fixed_names = {"intercept"};
        GroupingFactor f;
        f.name = "group";
        f.n_levels = 20;
        std::vector<double> u(20);
        for (auto& v : u) v = rnorm(rng, 0.0, 1.0);
        for (int g = 0; g < 20; ++g) {
            for (int i = 0; i < 10; ++i) {
                spec.design.push_back(1.0);
                f.level.push_back(g);
                spec.response.push_back(2.0 + u[static_cast<size_t>(g)] + rnorm(rng, 0.0, 0.5));
            }
        }
        spec.factors.push_back(std::move(f));
        const LmmFit fit = lmm_fit(spec);
        // true std ratio = 1.0 / 0.5 = 2
        if (fit.theta[0] > 1.0 && fit.theta[0] < 4.0) ++ratio_ok;
        CHECK(std::abs(fit.beta[0] - 2.0) < 3.0 * fit.se[0] + 1e-9);
    }
    CHECK(ratio_ok >= 4);
}

TEST_CASE("wald tests") {
    const auto w = wald_tests({0.0, 1.96, 10.0}, {1.0, 1.0, 1.0}, 10);
    CHECK(w[0].p_raw == doctest::Approx(1.0));
    CHECK(w[0].p_corrected == doctest::Approx(1.0));
    CHECK(w[1].p_raw == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(w[1].p_corrected == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(w[2].p_corrected <= 1.0);
    for (const auto& t : w) CHECK(t.p_corrected <= 1.0);
}

TEST_CASE("comparing a model to itself gives a zero effect with p one") {
    std::vector<eval::PredRecord> preds;
    Rng rng(45);
    for (int i = 0; i < 40; ++i) {
        eval::PredRecord r;
        r.participant_id = "s" + std::to_string(i % 8);
        r.paragraph_id = "p" + std::to_string(i % 5);
        r.label_true = Goal::InformationSeeking;
        r.label_pred = runif(rng) < 0.7 ? Goal::InformationSeeking : Goal::OrdinaryReading;
        preds.push_back(std::move(r));
    }
    Corpus dummy;
    const CompareResult res = compare_models(preds, preds, dummy);
    CHECK(std::abs(res.coefficient) < 1e-10);
    CHECK(res.p == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("extreme separation yields a significant negative effect for the weaker model") {
    std::vector<eval::PredRecord> a, b;
    for (int i = 0; i < 40; ++i) {
        eval::PredRecord r;
        r.participant_id = "s" + std::to_string(i % 8);
        r.paragraph_id = "p" + std::to_string(i / 8);
        r.label_true = Goal::InformationSeeking;
        r.label_pred = Goal::InformationSeeking; // A correct on all
        a.push_back(r);
        r.label_pred = Goal::OrdinaryReading; // B correct on none
        b.push_back(r);
    }
    Corpus dummy;
    const CompareResult res = compare_models(a, b, dummy);
    CHECK(res.coefficient < 0);
    CHECK(res.p < 0.001);
}

TEST_CASE("compare_models is invariant to trial order") {
    std::vector<eval::PredRecord> a, b;
    Rng rng(46);
    for (int i = 0; i < 30; ++i) {
        eval::PredRecord r;
        r.participant_id = "s" + std::to_string(i % 6);
        r.paragraph_id = "p" + std::to_string(i % 5);
        r.label_true = Goal::InformationSeeking;
        r.label_pred = runif(rng) < 0.6 ? Goal::InformationSeeking : Goal::OrdinaryReading;
        a.push_back(r);
        r.label_pred = runif(rng) < 0.4 ? Goal::InformationSeeking : Goal::OrdinaryReading;
        b.push_back(r);
    }
    Corpus dummy;
    const CompareResult r1 = compare_models(a, b, dummy);
    // permute both sets identically (0/1 data keeps the cross-products exact)
    std::vector<size_t> perm(a.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 7 + 3) % perm.size();
    std::vector<eval::PredRecord> a2, b2;
    for (size_t i : perm) {
        a2.push_back(a[i]);
        b2.push_back(b[i]);
    }
    const CompareResult r2 = compare_models(a2, b2, dummy);
    CHECK(r1.coefficient == doctest::Approx(r2.coefficient).epsilon(1e-12));
    CHECK(r1.se == doctest::Approx(r2.se).epsilon(1e-12));
    CHECK(r1.p == doctest::Approx(r2.p).epsilon(1e-12));
}

TEST_CASE("error analysis with a constant response has zero feature coefficients") {
    synth::SynthConfig cfg;
    cfg.n_batches = 1;
    cfg.participants_per_batch = 10;
    cfg.paragraphs_per_article_min = cfg.paragraphs_per_article_max = 2;
    cfg.word_count_mean = 20;
    cfg.word_count_sd = 3;
    cfg.word_count_min = 12;
    cfg.word_count_max = 30;
    cfg.seed = 47;
    const auto gen = synth::generate(cfg);

    std::vector<eval::PredRecord> preds;
    for (const Trial& t : gen.corpus.trials) {
        eval::PredRecord r;
        r.participant_id = t.participant_id;
        r.paragraph_id = t.paragraph_id;
        r.label_true = t.goal;
        r.prob_is = t.goal == Goal::InformationSeeking ? 0.75 : 0.25; // constant prob_true
        r.label_pred = label_from_probability(r.prob_is);
        r.regime = Regime::NewItem;
        preds.push_back(std::move(r));
    }
    const ErrorAnalysisResult res =
        error_analysis(preds, gen.corpus, Goal::InformationSeeking);
    for (size_t i = 1; i < res.fit.beta.size(); ++i)
        CHECK(std::abs(res.fit.beta[i]) < 1e-6);
}

TEST_CASE("error analysis recovers a planted critical-span-length effect") {
    synth::SynthConfig cfg;
    cfg.n_batches = 1;
    cfg.participants_per_batch = 20;
    cfg.paragraphs_per_article_min = cfg.paragraphs_per_article_max = 3;
    cfg.word_count_mean = 25;
    cfg.word_count_sd = 5;
    cfg.word_count_min = 15;
    cfg.word_count_max = 40;
    cfg.seed = 48;
    const auto gen = synth::generate(cfg);

    Rng rng(49);
    std::vector<eval::PredRecord> preds;
    const Regime regimes[3] = {Regime::NewItem, Regime::NewParticipant,
                               Regime::NewItemParticipant};
    for (const Trial& t : gen.corpus.trials) {
        const auto feats = trial_feature_row(t);
        const double cs_len = feats[8]; // cs_length_relative, raw units
        // planted: short critical spans make IS trials easier
        const double p_true =
            std::clamp(0.72 - 0.5 * (cs_len - 0.27) + rnorm(rng, 0.0, 0.06), 0.02, 0.98);
        eval::PredRecord r;
        r.participant_id = t.participant_id;
        r.paragraph_id = t.paragraph_id;
        r.label_true = t.goal;
        r.prob_is = t.goal == Goal::InformationSeeking ? p_true : 1.0 - p_true;
        r.label_pred = label_from_probability(r.prob_is);
        r.regime = regimes[static_cast<size_t>(runif(rng, 0, 3))];
        preds.push_back(std::move(r));
    }
    const ErrorAnalysisResult res =
        error_analysis(preds, gen.corpus, Goal::InformationSeeking);
    const size_t idx = 9; // intercept + feature index 8
    CHECK(res.fit.fixed_names[idx] == std::string("cs_length_relative"));
    CHECK(res.fit.beta[idx] < 0);
    CHECK(res.fit.wald[idx].p_corrected < 0.05);
}

TEST_CASE("z-normalization keeps significance invariant to affine feature rescaling") {
    synth::SynthConfig cfg;
    cfg.n_batches = 1;
    cfg.participants_per_batch = 16;
    cfg.paragraphs_per_article_min = cfg.paragraphs_per_article_max = 2;
    cfg.word_count_mean = 20;
    cfg.word_count_sd = 3;
    cfg.word_count_min = 12;
    cfg.word_count_max = 30;
    cfg.delta = 1.0;
    cfg.seed = 50;
    auto gen = synth::generate(cfg);

    Rng rng(51);
    std::vector<eval::PredRecord> preds;
    for (const Trial& t : gen.corpus.trials) {
        const double rt = reading_time_per_word(t);
        const double p_true = std::clamp(0.5 + 0.002 * (rt - 200) + rnorm(rng, 0.0, 0.05), 0.02, 0.98);
        eval::PredRecord r;
        r.participant_id = t.participant_id;
        r.paragraph_id = t.paragraph_id;
        r.label_true = t.goal;
        r.prob_is = t.goal == Goal::InformationSeeking ? p_true : 1.0 - p_true;
        r.label_pred = label_from_probability(r.prob_is);
        r.regime = Regime::NewItem;
        preds.push_back(std::move(r));
    }
    const auto res_ms = error_analysis(preds, gen.corpus, Goal::InformationSeeking);

    // rescale every duration (ms -> tenths of seconds): rt features change units
    Corpus scaled;
    scaled.paragraphs = gen.corpus.paragraphs;
    for (Trial t : gen.corpus.trials) {
        for (auto& f : t.fixations) f.duration_ms /= 100.0;
        t.paragraph = &scaled.paragraphs.at(t.paragraph_id);
        scaled.trials.push_back(std::move(t));
    }
    const auto res_ds = error_analysis(preds, scaled, Goal::InformationSeeking);

    for (size_t i = 1; i < res_ms.fit.beta.size(); ++i) {
        const bool sig_ms = res_ms.fit.wald[i].p_corrected < 0.05;
        const bool sig_ds = res_ds.fit.wald[i].p_corrected < 0.05;
        CHECK(sig_ms == sig_ds);
    }
}

TEST_CASE("invalid specs are rejected") {
    LmmSpec spec;
    spec.n_fixed = 1;
    spec.fixed_names = {"intercept"};
    spec.response = {1.0, 2.0};
    spec.design = {1.0, 1.0};
    GroupingFactor f;
    f.name = "g";
    f.n_levels = 1; // too few levels
    f.level = {0, 0};
    spec.factors.push_back(f);
    CHECK_THROWS_AS(lmm_fit(spec), Error);
}

} // TEST_SUITE
