#include <doctest.h>

#include "gazedec/classifiers.hpp"
#include "gazedec/errors.hpp"
#include "gazedec/splits.hpp"
#include "gazedec/synth.hpp"

#include <cmath>
#include <sstream>

using namespace gazedec;

namespace {

synth::SynthConfig small_cfg(double delta, uint64_t seed, int participants = 20) {
    synth::SynthConfig cfg;
    cfg.n_batches = 1;
    cfg.participants_per_batch = participants;
    cfg.paragraphs_per_article_min = cfg.paragraphs_per_article_max = 2;
    cfg.word_count_mean = 30;
    cfg.word_count_sd = 6;
    cfg.word_count_min = 18;
    cfg.word_count_max = 45;
    cfg.delta = delta;
    cfg.seed = seed;
    return cfg;
}

struct SplitSets {
    std::vector<const Trial*> train, val, heldout;
};

// participant-blocked split: first 70% train, next 15% val, rest held out
SplitSets simple_split(const Corpus& corpus) {
    const std::set<std::string> ids = corpus.participant_ids();
    std::vector<std::string> participants(ids.begin(), ids.end());
    const size_t n = participants.size();
    std::set<std::string> train_p(participants.begin(), participants.begin() + n * 7 / 10);
    std::set<std::string> val_p(participants.begin() + n * 7 / 10,
                                participants.begin() + n * 17 / 20);
    SplitSets out;
    for (const Trial& t : corpus.trials) {
        if (train_p.count(t.participant_id))
            out.train.push_back(&t);
        else if (val_p.count(t.participant_id))
            out.val.push_back(&t);
        else
            out.heldout.push_back(&t);
    }
    return out;
}

FitOptions quick_fit(uint64_t seed, int epochs = 10) {
    FitOptions opt;
    opt.train.seed = seed;
    opt.train.max_epochs = epochs;
    opt.train.early_stop_patience = epochs - 1;
    opt.train.learning_rate = 3e-3;
    return opt;
}

} // namespace

TEST_SUITE("classifiers") {

TEST_CASE("majority class follows the training share with the tie rule") {
    const auto gen = synth::generate(small_cfg(0.0, 60));
    std::vector<const Trial*> train;
    for (const Trial& t : gen.corpus.trials) train.push_back(&t);

    // balanced: probability 0.5, tie broken to information seeking
    auto m = fit_classifier(ClassifierKind::MajorityClass, train, train);
    const Prediction p = m->predict(*train[0]);
    CHECK(p.probability_is == doctest::Approx(0.5));
    CHECK(p.label == Goal::InformationSeeking);

    // 60/40 split
    std::vector<const Trial*> biased;
    size_t is_count = 0;
    for (const Trial* t : train) {
        if (t->goal == Goal::InformationSeeking) {
            if (is_count < 60) {
                biased.push_back(t);
                ++is_count;
            }
        } else if (biased.size() - is_count < 40) {
            biased.push_back(t);
        }
    }
    auto m2 = fit_classifier(ClassifierKind::MajorityClass, biased, biased);
    CHECK(m2->predict(*train[0]).probability_is == doctest::Approx(0.6));
}

TEST_CASE("reading-time baseline separates a strong speed effect") {
    synth::SynthConfig cfg = small_cfg(2.0, 61, 30);
    cfg.trial_speed_sigma = 0.05; // nearly clean 3x speed difference
    const auto gen = synth::generate(cfg);
    const SplitSets s = simple_split(gen.corpus);
    auto m = fit_classifier(ClassifierKind::ReadingTime, s.train, s.val);
    CHECK(prediction_accuracy(m->predict_all(s.heldout), s.heldout) > 0.9);
}

TEST_CASE("reading-time baseline is at chance on null data") {
    const auto gen = synth::generate(small_cfg(0.0, 62, 30));
    const SplitSets s = simple_split(gen.corpus);
    auto m = fit_classifier(ClassifierKind::ReadingTime, s.train, s.val);
    const auto eval_gen = synth::generate(small_cfg(0.0, 63, 30));
    std::vector<const Trial*> fresh;
    for (const Trial& t : eval_gen.corpus.trials) fresh.push_back(&t);
    const double acc = prediction_accuracy(m->predict_all(fresh), fresh);
    CHECK(acc > 0.42);
    CHECK(acc < 0.58);
}

TEST_CASE("logistic-global selects its penalty on validation accuracy") {
    const auto gen = synth::generate(small_cfg(1.0, 64, 30));
    const SplitSets s = simple_split(gen.corpus);
    auto m = fit_classifier(ClassifierKind::LogisticGlobal, s.train, s.val);
    const auto& report = m->selection_report();
    REQUIRE(report.size() == 6); // no-penalty + 5 C values
    double best = -1;
    size_t best_idx = 0, chosen_idx = 0;
    for (size_t i = 0; i < report.size(); ++i) {
        if (report[i].val_accuracy > best) {
            best = report[i].val_accuracy;
            best_idx = i;
        }
        if (report[i].chosen) chosen_idx = i;
    }
    CHECK(best_idx == chosen_idx);
    // and the reported accuracies really are validation accuracies
    const auto preds = m->predict_all(s.val);
    CHECK(report[chosen_idx].val_accuracy ==
          doctest::Approx(prediction_accuracy(preds, s.val)));
    CHECK(prediction_accuracy(m->predict_all(s.heldout), s.heldout) > 0.6);
}

TEST_CASE("neural classifiers produce finite probabilities on one-fixation trials") {
    const auto gen = synth::generate(small_cfg(0.5, 65));
    const SplitSets s = simple_split(gen.corpus);
    FitOptions opt = quick_fit(5, 2);

    Trial tiny = *s.heldout[0];
    tiny.fixations.resize(1);

    for (ClassifierKind kind : {ClassifierKind::RnnFixation, ClassifierKind::TransformerFusion,
                                ClassifierKind::ImageConvnet}) {
        auto m = fit_classifier(kind, s.train, s.val, opt);
        const Prediction p = m->predict(tiny);
        CHECK(std::isfinite(p.probability_is));
        CHECK(p.probability_is >= 0.0);
        CHECK(p.probability_is <= 1.0);
    }
}

TEST_CASE("no classifier reads label, question, answer, or span fields at predict time") {
    const auto gen = synth::generate(small_cfg(1.0, 66));
    const SplitSets s = simple_split(gen.corpus);
    FitOptions opt = quick_fit(6, 2);

    for (ClassifierKind kind :
         {ClassifierKind::MajorityClass, ClassifierKind::ReadingTime,
          ClassifierKind::LogisticGlobal, ClassifierKind::RnnFixation,
          ClassifierKind::TransformerFusion, ClassifierKind::ImageConvnet}) {
        auto m = fit_classifier(kind, s.train, s.val, opt);
        for (size_t i = 0; i < 5; ++i) {
            Trial t = *s.heldout[i];
            const double before = m->predict(t).probability_is;
            t.goal = t.goal == Goal::InformationSeeking ? Goal::OrdinaryReading
                                                        : Goal::InformationSeeking;
            t.question_difficulty = 1.0 - t.question_difficulty;
            t.answered_correctly = !t.answered_correctly;
            t.cs_start_word = 0;
            t.cs_end_word = t.word_count() - 1;
            const double after = m->predict(t).probability_is;
            INFO(to_string(kind));
            CHECK(before == after);
        }
    }
}

TEST_CASE("prediction label matches the probability threshold for every kind") {
    const auto gen = synth::generate(small_cfg(1.0, 67));
    const SplitSets s = simple_split(gen.corpus);
    FitOptions opt = quick_fit(7, 2);
    for (ClassifierKind kind :
         {ClassifierKind::MajorityClass, ClassifierKind::ReadingTime,
          ClassifierKind::LogisticGlobal, ClassifierKind::RnnFixation,
          ClassifierKind::TransformerFusion, ClassifierKind::ImageConvnet}) {
        auto m = fit_classifier(kind, s.train, s.val, opt);
        for (const Prediction& p : m->predict_all(s.heldout)) {
            CHECK(p.label == (p.probability_is >= 0.5 ? Goal::InformationSeeking
                                                      : Goal::OrdinaryReading));
        }
    }
}

TEST_CASE("model files round-trip through the binary container") {
    const auto gen = synth::generate(small_cfg(1.0, 68));
    const SplitSets s = simple_split(gen.corpus);
    FitOptions opt = quick_fit(8, 2);

    for (ClassifierKind kind :
         {ClassifierKind::MajorityClass, ClassifierKind::ReadingTime,
          ClassifierKind::LogisticGlobal, ClassifierKind::RnnFixation,
          ClassifierKind::TransformerFusion, ClassifierKind::ImageConvnet}) {
        auto m = fit_classifier(kind, s.train, s.val, opt);
        std::stringstream buffer;
        m->save(buffer);
        auto loaded = load_classifier(buffer);
        CHECK(loaded->kind() == kind);
        for (size_t i = 0; i < 10; ++i) {
            const Prediction a = m->predict(*s.heldout[i]);
            const Prediction b = loaded->predict(*s.heldout[i]);
            INFO(to_string(kind));
            CHECK(a.probability_is == b.probability_is);
        }
    }
}

TEST_CASE("recurrent model learns structure that mean reading time misses") {
    synth::SynthConfig cfg = small_cfg(1.0, 69, 40);
    cfg.paragraphs_per_article_min = cfg.paragraphs_per_article_max = 3;
    const auto gen = synth::generate(cfg);
    const SplitSets s = simple_split(gen.corpus);

    auto rt = fit_classifier(ClassifierKind::ReadingTime, s.train, s.val);
    const double rt_acc = prediction_accuracy(rt->predict_all(s.heldout), s.heldout);

    FitOptions opt = quick_fit(9, 15);
    auto rnn = fit_classifier(ClassifierKind::RnnFixation, s.train, s.val, opt);
    const double rnn_acc = prediction_accuracy(rnn->predict_all(s.heldout), s.heldout);

    CHECK(rt_acc > 0.55);
    CHECK(rnn_acc >= rt_acc);
}

TEST_CASE("the no-eye-features ablation still trains and predicts") {
    const auto gen = synth::generate(small_cfg(1.0, 70));
    const SplitSets s = simple_split(gen.corpus);
    FitOptions opt = quick_fit(10, 3);
    opt.no_eye_features = true;
    auto m = fit_classifier(ClassifierKind::RnnFixation, s.train, s.val, opt);
    const auto preds = m->predict_all(s.heldout);
    CHECK(preds.size() == s.heldout.size());

    // with eye features stripped, duration changes cannot move predictions
    Trial t = *s.heldout[0];
    const double before = m->predict(t).probability_is;
    for (auto& f : t.fixations) f.duration_ms *= 3.0;
    CHECK(m->predict(t).probability_is == before);
}

} // TEST_SUITE
