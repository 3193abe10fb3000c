#include "gazedec/splits.hpp"

#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"
#include "gazedec/rng.hpp"

#include <algorithm>
#include <map>

namespace gazedec {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::Train: return "train";
        case Regime::Val: return "val";
        case Regime::NewItem: return "new_item";
        case Regime::NewParticipant: return "new_participant";
        case Regime::NewItemParticipant: return "new_item_participant";
    }
    return "train";
}

Regime regime_from_string(const std::string& s) {
    if (s == "train") return Regime::Train;
    if (s == "val") return Regime::Val;
    if (s == "new_item") return Regime::NewItem;
    if (s == "new_participant") return Regime::NewParticipant;
    if (s == "new_item_participant") return Regime::NewItemParticipant;
    throw data_error(ErrorKind::InvalidValue, "unknown regime '" + s + "'");
}

Regime SplitPlan::regime_of(const Trial& trial, int fold) const {
    if (fold < 0 || fold >= static_cast<int>(folds.size()))
        throw data_error(ErrorKind::InvalidValue, "fold " + std::to_string(fold) + " out of range");
    if (!known_articles.count(trial.article_id) || !known_participants.count(trial.participant_id))
        throw data_error(ErrorKind::UnknownTrial,
                         "trial " + trial.key() + " is not covered by the split plan");
    const FoldSets& f = folds[static_cast<size_t>(fold)];
    const bool p_test = f.test_participants.count(trial.participant_id) > 0;
    const bool a_test = f.test_articles.count(trial.article_id) > 0;
    if (p_test) return a_test ? Regime::NewItemParticipant : Regime::NewParticipant;
    if (a_test) return Regime::NewItem;
    if (f.val_articles.count(trial.article_id)) return Regime::Val;
    return Regime::Train;
}

SplitPlan make_folds(const Corpus& corpus, uint64_t seed, bool allow_small_shapes) {
    // group articles and participants by batch
    std::map<int, std::set<std::string>> batch_articles;
    std::map<int, std::set<std::string>> batch_participants;
    for (const Trial& t : corpus.trials) {
        batch_articles[t.batch_id].insert(t.article_id);
        batch_participants[t.batch_id].insert(t.participant_id);
    }
    if (batch_articles.empty())
        throw data_error(ErrorKind::MalformedCorpus, "corpus has no trials");

    SplitPlan plan;
    plan.folds.resize(kFoldCount);

    for (const auto& [batch, articles_set] : batch_articles) {
        const auto& participants_set = batch_participants[batch];
        if (articles_set.size() != kFoldCount)
            throw data_error(ErrorKind::MalformedCorpus,
                             "batch " + std::to_string(batch) + " has " +
                                 std::to_string(articles_set.size()) + " articles, expected 10");
        if (!allow_small_shapes && participants_set.size() != 120)
            throw data_error(ErrorKind::MalformedCorpus,
                             "batch " + std::to_string(batch) + " has " +
                                 std::to_string(participants_set.size()) +
                                 " participants, expected 120");
        if (participants_set.size() % kFoldCount != 0 || participants_set.empty())
            throw data_error(ErrorKind::MalformedCorpus,
                             "batch " + std::to_string(batch) + " participant count " +
                                 std::to_string(participants_set.size()) +
                                 " is not divisible into 10 rotation blocks");

        std::vector<std::string> articles(articles_set.begin(), articles_set.end());
        std::vector<std::string> participants(participants_set.begin(), participants_set.end());
        Rng art_rng(derive_seed(seed, "articles", static_cast<uint64_t>(batch)));
        Rng part_rng(derive_seed(seed, "participants", static_cast<uint64_t>(batch)));
        std::shuffle(articles.begin(), articles.end(), art_rng);
        std::shuffle(participants.begin(), participants.end(), part_rng);

        const size_t block = participants.size() / kFoldCount;
        for (int f = 0; f < kFoldCount; ++f) {
            FoldSets& fs = plan.folds[static_cast<size_t>(f)];
            fs.test_articles.insert(articles[static_cast<size_t>(f)]);
            fs.val_articles.insert(articles[static_cast<size_t>((f + 1) % kFoldCount)]);
            fs.val_articles.insert(articles[static_cast<size_t>((f + 2) % kFoldCount)]);
            for (size_t i = static_cast<size_t>(f) * block; i < static_cast<size_t>(f + 1) * block; ++i)
                fs.test_participants.insert(participants[i]);
        }
        plan.known_articles.insert(articles.begin(), articles.end());
        plan.known_participants.insert(participants.begin(), participants.end());
    }
    return plan;
}

std::vector<const Trial*> trials_in_regime(const Corpus& corpus, const SplitPlan& plan,
                                           int fold, Regime regime) {
    std::vector<const Trial*> out;
    for (const Trial& t : corpus.trials)
        if (plan.regime_of(t, fold) == regime) out.push_back(&t);
    return out;
}

std::vector<const Trial*> test_trials(const Corpus& corpus, const SplitPlan& plan, int fold) {
    std::vector<const Trial*> out;
    for (const Trial& t : corpus.trials) {
        const Regime r = plan.regime_of(t, fold);
        if (r == Regime::NewItem || r == Regime::NewParticipant || r == Regime::NewItemParticipant)
            out.push_back(&t);
    }
    return out;
}

void write_splits_csv(const Corpus& corpus, const SplitPlan& plan, const std::string& path) {
    CsvWriter w(path, {"participant_id", "paragraph_id", "article_id", "fold", "regime"});
    for (const Trial& t : corpus.trials) {
        for (int f = 0; f < static_cast<int>(plan.folds.size()); ++f) {
            w.field(t.participant_id)
                .field(t.paragraph_id)
                .field(t.article_id)
                .field(f)
                .field(std::string(to_string(plan.regime_of(t, f))));
            w.end_row();
        }
    }
}

SplitPlan read_splits_csv(const std::string& path) {
    CsvTable t = CsvTable::read_file(path);
    SplitPlan plan;
    plan.folds.resize(kFoldCount);
    for (size_t r = 0; r < t.row_count(); ++r) {
        const int fold = static_cast<int>(t.integer(r, "fold"));
        if (fold < 0 || fold >= kFoldCount)
            throw data_error(ErrorKind::InvalidValue,
                             path + " row " + std::to_string(t.file_row(r)) + ": fold out of range");
        const Regime regime = regime_from_string(t.str(r, "regime"));
        const std::string participant = t.str(r, "participant_id");
        const std::string article = t.str(r, "article_id");
        plan.known_articles.insert(article);
        plan.known_participants.insert(participant);
        FoldSets& fs = plan.folds[static_cast<size_t>(fold)];
        switch (regime) {
            case Regime::NewItem: fs.test_articles.insert(article); break;
            case Regime::Val: fs.val_articles.insert(article); break;
            case Regime::NewParticipant: fs.test_participants.insert(participant); break;
            case Regime::NewItemParticipant:
                fs.test_articles.insert(article);
                fs.test_participants.insert(participant);
                break;
            case Regime::Train: break;
        }
    }
    return plan;
}

} // namespace gazedec
