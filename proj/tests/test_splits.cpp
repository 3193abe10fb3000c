#include <doctest.h>

#include "gazedec/errors.hpp"
#include "gazedec/splits.hpp"
#include "gazedec/synth.hpp"

#include <filesystem>
#include <map>

using namespace gazedec;

namespace {

// 10 articles x 1 paragraph, 10 participants, every participant reads
// every paragraph: 100 trials
Corpus toy_corpus() {
    Corpus c;
    for (int a = 0; a < 10; ++a) {
        Paragraph& p = c.paragraphs["p" + std::to_string(a)];
        p.id = "p" + std::to_string(a);
        Word w;
        w.index = 0;
        w.text = "x";
        w.length = 1;
        p.words.push_back(w);
    }
    for (int s = 0; s < 10; ++s) {
        for (int a = 0; a < 10; ++a) {
            Trial t;
            t.participant_id = "s" + std::to_string(s);
            t.article_id = "a" + std::to_string(a);
            t.paragraph_id = "p" + std::to_string(a);
            t.batch_id = 1;
            t.goal = s % 2 ? Goal::OrdinaryReading : Goal::InformationSeeking;
            t.paragraph = &c.paragraphs.at(t.paragraph_id);
            t.paragraph_position = a + 1;
            Fixation f;
            f.order = 0;
            f.word_index = 0;
            f.duration_ms = 100;
            t.fixations.push_back(f);
            c.trials.push_back(std::move(t));
        }
    }
    return c;
}

synth::SynthConfig onestop_one_batch() {
    synth::SynthConfig cfg;
    cfg.n_batches = 1;
    cfg.participants_per_batch = 120;
    cfg.word_count_mean = 20; // small words-per-paragraph for speed
    cfg.word_count_sd = 4;
    cfg.word_count_min = 10;
    cfg.word_count_max = 30;
    cfg.seed = 5;
    return cfg;
}

} // namespace

TEST_SUITE("splits") {

TEST_CASE("toy corpus regime counts match the exhaustive enumeration") {
    Corpus c = toy_corpus();
    const SplitPlan plan = make_folds(c, 3, true);
    for (int fold = 0; fold < kFoldCount; ++fold) {
        std::map<Regime, int> counts;
        for (const Trial& t : c.trials) counts[plan.regime_of(t, fold)]++;
        CHECK(counts[Regime::Train] == 63);
        CHECK(counts[Regime::Val] == 18);
        CHECK(counts[Regime::NewItem] == 9);
        CHECK(counts[Regime::NewParticipant] == 9);
        CHECK(counts[Regime::NewItemParticipant] == 1);
    }
}

TEST_CASE("same seed produces the same plan, different seeds differ") {
    Corpus c = toy_corpus();
    const SplitPlan a = make_folds(c, 17, true);
    const SplitPlan b = make_folds(c, 17, true);
    const SplitPlan d = make_folds(c, 18, true);
    bool same_ab = true, same_ad = true;
    for (int f = 0; f < kFoldCount; ++f) {
        same_ab &= a.folds[f].test_articles == b.folds[f].test_articles &&
                   a.folds[f].val_articles == b.folds[f].val_articles &&
                   a.folds[f].test_participants == b.folds[f].test_participants;
        same_ad &= a.folds[f].test_articles == d.folds[f].test_articles &&
                   a.folds[f].test_participants == d.folds[f].test_participants;
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ad);
}

TEST_CASE("regime definitions") {
    Corpus c = toy_corpus();
    const SplitPlan plan = make_folds(c, 3, true);
    const FoldSets& f0 = plan.folds[0];
    for (const Trial& t : c.trials) {
        const bool p_test = f0.test_participants.count(t.participant_id) > 0;
        const bool a_test = f0.test_articles.count(t.article_id) > 0;
        const bool a_val = f0.val_articles.count(t.article_id) > 0;
        const Regime r = plan.regime_of(t, 0);
        if (p_test && a_test) CHECK(r == Regime::NewItemParticipant);
        if (p_test && !a_test) CHECK(r == Regime::NewParticipant);
        if (!p_test && a_test) CHECK(r == Regime::NewItem);
        if (!p_test && a_val) CHECK(r == Regime::Val);
    }

    // partition: the five regimes cover every trial exactly once per fold
    for (int fold = 0; fold < kFoldCount; ++fold) {
        size_t total = 0;
        for (Regime r : {Regime::Train, Regime::Val, Regime::NewItem, Regime::NewParticipant,
                         Regime::NewItemParticipant})
            total += trials_in_regime(c, plan, fold, r).size();
        CHECK(total == c.trials.size());
    }
}

TEST_CASE("unknown trials are rejected") {
    Corpus c = toy_corpus();
    const SplitPlan plan = make_folds(c, 3, true);
    Trial ghost = c.trials[0];
    ghost.participant_id = "someone_else";
    try {
        plan.regime_of(ghost, 0);
        FAIL("expected UnknownTrial");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownTrial);
    }
}

TEST_CASE("onestop-shaped corpus: proportions, coverage, purity, rotation") {
    const auto gen = synth::generate(onestop_one_batch());
    const Corpus& c = gen.corpus;
    const SplitPlan plan = make_folds(c, 11);
    const double n = static_cast<double>(c.trials.size());

    std::set<std::string> covered_new_item, covered_new_participant, covered_nip;
    std::set<std::string> test_articles_union, test_participants_union;

    for (int fold = 0; fold < kFoldCount; ++fold) {
        std::map<Regime, double> share;
        for (const Trial& t : c.trials) {
            const Regime r = plan.regime_of(t, fold);
            share[r] += 1.0 / n;
            if (r == Regime::NewItem) covered_new_item.insert(t.key());
            if (r == Regime::NewParticipant) covered_new_participant.insert(t.key());
            if (r == Regime::NewItemParticipant) covered_nip.insert(t.key());
        }
        // the published 64/17/9/9/1 proportions, within +/- 2 points
        CHECK(std::abs(share[Regime::Train] - 0.64) <= 0.02);
        CHECK(std::abs(share[Regime::Val] - 0.17) <= 0.02);
        CHECK(std::abs(share[Regime::NewItem] - 0.09) <= 0.02);
        CHECK(std::abs(share[Regime::NewParticipant] - 0.09) <= 0.02);
        CHECK(std::abs(share[Regime::NewItemParticipant] - 0.01) <= 0.02);

        // article-level purity: no paragraph of a test article in train/val
        const FoldSets& fs = plan.folds[fold];
        for (const Trial& t : c.trials) {
            if (fs.test_articles.count(t.article_id)) {
                const Regime r = plan.regime_of(t, fold);
                CHECK((r == Regime::NewItem || r == Regime::NewItemParticipant));
            }
        }
        test_articles_union.insert(fs.test_articles.begin(), fs.test_articles.end());
        test_participants_union.insert(fs.test_participants.begin(), fs.test_participants.end());
    }

    // aggregated coverage is exactly 90 / 90 / 10 percent of trials
    CHECK(covered_new_item.size() == static_cast<size_t>(0.9 * n));
    CHECK(covered_new_participant.size() == static_cast<size_t>(0.9 * n));
    CHECK(covered_nip.size() == static_cast<size_t>(0.1 * n));

    // rotation completeness
    CHECK(test_articles_union == c.article_ids());
    CHECK(test_participants_union == c.participant_ids());
}

TEST_CASE("malformed corpora are rejected") {
    Corpus c = toy_corpus();
    // drop one article entirely
    std::erase_if(c.trials, [](const Trial& t) { return t.article_id == "a9"; });
    try {
        make_folds(c, 3, true);
        FAIL("expected MalformedCorpus");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedCorpus);
    }

    // strict shape requires 120 participants
    Corpus c2 = toy_corpus();
    try {
        make_folds(c2, 3, false);
        FAIL("expected MalformedCorpus");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedCorpus);
    }
}

TEST_CASE("splits csv round trip preserves regimes") {
    Corpus c = toy_corpus();
    const SplitPlan plan = make_folds(c, 23, true);
    const std::string path =
        (std::filesystem::temp_directory_path() / "gazedec_splits.csv").string();
    write_splits_csv(c, plan, path);
    const SplitPlan back = read_splits_csv(path);
    for (int fold = 0; fold < kFoldCount; ++fold)
        for (const Trial& t : c.trials)
            CHECK(plan.regime_of(t, fold) == back.regime_of(t, fold));
    std::filesystem::remove(path);
}

} // TEST_SUITE
