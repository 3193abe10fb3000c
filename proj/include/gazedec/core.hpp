#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gazedec {

enum class Goal : uint8_t { InformationSeeking, OrdinaryReading };
enum class Level : uint8_t { Advanced, Elementary };

// Five-way saccade taxonomy plus a catch-all for anything that does not
// fit (including transitions involving off-text fixations).
enum class SaccadeClass : uint8_t {
    Forward = 0,
    Skip = 1,
    Refixation = 2,
    ReturnSweep = 3,
    Regression = 4,
    Other = 5,
};
constexpr int kSaccadeClassCount = 6;

const char* to_string(SaccadeClass c);
const char* to_string(Goal g);
const char* to_string(Level l);
Goal goal_from_string(const std::string& s);
Level level_from_string(const std::string& s);

struct Word {
    int index = 0;              // 0-based position within the paragraph
    std::string text;
    int length = 1;             // character count
    double log_frequency = 0.0; // ingested, arbitrary base
    double surprisal = 0.0;     // bits; proxied by -log_frequency when absent
    int line = 0;               // 0-based display line
    bool in_critical_span = false;
};

struct Paragraph {
    std::string id;
    std::vector<Word> words;
};

struct Fixation {
    int order = 0;       // 0-based index in temporal sequence
    int word_index = -1; // -1 when off-text
    double x = 0.0;      // pixels
    double y = 0.0;
    double duration_ms = 0.0;
};

// One participant x one paragraph. Word data is shared through the
// owning Corpus; trials hold a non-owning pointer.
struct Trial {
    std::string participant_id;
    std::string article_id;
    std::string paragraph_id;
    int batch_id = 1;
    Level level = Level::Advanced;
    Goal goal = Goal::OrdinaryReading;
    std::vector<Fixation> fixations;
    const Paragraph* paragraph = nullptr;
    int paragraph_position = 1; // 1-based position in the presentation order
    bool answered_correctly = false;
    int cs_start_word = 0;
    int cs_end_word = 0; // inclusive
    double question_difficulty = 0.0;

    const std::vector<Word>& words() const { return paragraph->words; }
    int word_count() const { return static_cast<int>(paragraph->words.size()); }
    std::string key() const { return participant_id + "/" + paragraph_id; }
};

class Corpus {
public:
    Corpus() = default;
    Corpus(const Corpus&) = delete;
    Corpus& operator=(const Corpus&) = delete;
    Corpus(Corpus&&) = default;
    Corpus& operator=(Corpus&&) = default;

    // std::map keeps node addresses stable, so Trial::paragraph pointers
    // survive moves of the corpus.
    std::map<std::string, Paragraph> paragraphs;
    std::vector<Trial> trials;

    const Paragraph* find_paragraph(const std::string& id) const;
    const Trial* find_trial(const std::string& participant_id,
                            const std::string& paragraph_id) const;

    std::set<std::string> participant_ids() const;
    std::set<std::string> article_ids() const;
    std::set<std::string> paragraph_ids() const;
};

// Every trial invariant from the data model; throws on violation.
void validate_corpus(const Corpus& corpus);

// Classifies the transition prev -> cur. Total and deterministic.
SaccadeClass classify_saccade(const Fixation& prev, const Fixation& cur,
                              const std::vector<Word>& words);

std::vector<SaccadeClass> saccade_classes(const Trial& trial);

// mask[i] is true iff fixation i lands on a word that has not yet been
// passed to the right by any earlier fixation. Off-text fixations are
// false and do not advance the frontier.
std::vector<bool> first_pass_mask(const Trial& trial);

} // namespace gazedec
