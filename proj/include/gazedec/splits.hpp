#pragma once

#include "gazedec/core.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace gazedec {

enum class Regime : uint8_t { Train, Val, NewItem, NewParticipant, NewItemParticipant };
constexpr int kFoldCount = 10;

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

// Ten folds; per fold and per batch one test article, two validation
// articles, and one tenth of the batch's participants held out.
struct FoldSets {
    std::set<std::string> test_articles;
    std::set<std::string> val_articles;
    std::set<std::string> test_participants;
};

class SplitPlan {
public:
    std::vector<FoldSets> folds; // size kFoldCount
    std::set<std::string> known_articles;
    std::set<std::string> known_participants;

    Regime regime_of(const Trial& trial, int fold) const;
};

// Builds the 10-fold plan with article-level allocation per batch.
// Strict shape: 10 articles and 120 participants per batch; with
// allow_small_shapes, any batch with exactly 10 articles and a
// participant count divisible by 10 is accepted.
SplitPlan make_folds(const Corpus& corpus, uint64_t seed, bool allow_small_shapes = false);

std::vector<const Trial*> trials_in_regime(const Corpus& corpus, const SplitPlan& plan,
                                           int fold, Regime regime);

// Test regimes pooled (NewItem + NewParticipant + NewItemParticipant).
std::vector<const Trial*> test_trials(const Corpus& corpus, const SplitPlan& plan, int fold);

void write_splits_csv(const Corpus& corpus, const SplitPlan& plan, const std::string& path);
SplitPlan read_splits_csv(const std::string& path);

} // namespace gazedec
