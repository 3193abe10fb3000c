#include "gazedec/core.hpp"

#include "gazedec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gazedec {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::DanglingReference: return "DanglingReference";
        case ErrorKind::DuplicateTrial: return "DuplicateTrial";
        case ErrorKind::EmptyTrial: return "EmptyTrial";
        case ErrorKind::InvalidValue: return "InvalidValue";
        case ErrorKind::MalformedCorpus: return "MalformedCorpus";
        case ErrorKind::UnknownTrial: return "UnknownTrial";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::NoOnTextFixations: return "NoOnTextFixations";
        case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NonFiniteActivation: return "NonFiniteActivation";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::DivergedTraining: return "DivergedTraining";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::TooFewFolds: return "TooFewFolds";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::ColumnMismatch: return "ColumnMismatch";
        case ErrorKind::InvalidPercent: return "InvalidPercent";
        case ErrorKind::SingularDesign: return "SingularDesign";
        case ErrorKind::MissingFeature: return "MissingFeature";
        case ErrorKind::UsageError: return "UsageError";
    }
    return "Unknown";
}

const char* to_string(SaccadeClass c) {
    switch (c) {
        case SaccadeClass::Forward: return "forward";
        case SaccadeClass::Skip: return "skip";
        case SaccadeClass::Refixation: return "refixation";
        case SaccadeClass::ReturnSweep: return "return_sweep";
        case SaccadeClass::Regression: return "regression";
        case SaccadeClass::Other: return "other";
    }
    return "other";
}

const char* to_string(Goal g) {
    return g == Goal::InformationSeeking ? "is" : "or";
}

const char* to_string(Level l) {
    return l == Level::Advanced ? "adv" : "ele";
}

Goal goal_from_string(const std::string& s) {
    if (s == "is") return Goal::InformationSeeking;
    if (s == "or") return Goal::OrdinaryReading;
    throw data_error(ErrorKind::InvalidValue, "unknown goal code '" + s + "' (expected is/or)");
}

Level level_from_string(const std::string& s) {
    if (s == "adv") return Level::Advanced;
    if (s == "ele") return Level::Elementary;
    throw data_error(ErrorKind::InvalidValue, "unknown level code '" + s + "' (expected adv/ele)");
}

const Paragraph* Corpus::find_paragraph(const std::string& id) const {
    auto it = paragraphs.find(id);
    return it == paragraphs.end() ? nullptr : &it->second;
}

const Trial* Corpus::find_trial(const std::string& participant_id,
                                const std::string& paragraph_id) const {
    for (const Trial& t : trials) {
        if (t.participant_id == participant_id && t.paragraph_id == paragraph_id) return &t;
    }
    return nullptr;
}

std::set<std::string> Corpus::participant_ids() const {
    std::set<std::string> out;
    for (const Trial& t : trials) out.insert(t.participant_id);
    return out;
}

std::set<std::string> Corpus::article_ids() const {
    std::set<std::string> out;
    for (const Trial& t : trials) out.insert(t.article_id);
    return out;
}

std::set<std::string> Corpus::paragraph_ids() const {
    std::set<std::string> out;
    for (const Trial& t : trials) out.insert(t.paragraph_id);
    return out;
}

void validate_corpus(const Corpus& corpus) {
    std::set<std::string> seen_trials;
    std::map<std::string, Goal> participant_goal;

    for (auto& [id, para] : corpus.paragraphs) {
        if (para.words.empty())
            throw data_error(ErrorKind::InvalidValue, "paragraph " + id + " has no words");
        for (size_t i = 0; i < para.words.size(); ++i) {
            const Word& w = para.words[i];
            if (w.index != static_cast<int>(i))
                throw data_error(ErrorKind::InvalidValue,
                                 "paragraph " + id + ": word indices not contiguous from 0 at position " +
                                     std::to_string(i));
            if (w.length < 1 || w.line < 0)
                throw data_error(ErrorKind::InvalidValue,
                                 "paragraph " + id + " word " + std::to_string(i) +
                                     ": length must be >= 1 and line >= 0");
        }
    }

    for (const Trial& t : corpus.trials) {
        const std::string key = t.key();
        if (!seen_trials.insert(key).second)
            throw data_error(ErrorKind::DuplicateTrial, "duplicate trial " + key);
        if (t.paragraph == nullptr)
            throw data_error(ErrorKind::DanglingReference, "trial " + key + " has no paragraph");
        if (t.fixations.empty())
            throw data_error(ErrorKind::EmptyTrial, "trial " + key + " has no fixations");

        const int n_words = t.word_count();
        for (size_t i = 0; i < t.fixations.size(); ++i) {
            const Fixation& f = t.fixations[i];
            if (f.order != static_cast<int>(i))
                throw data_error(ErrorKind::InvalidValue,
                                 "trial " + key + ": fixation orders not contiguous from 0 at " +
                                     std::to_string(i));
            if (f.duration_ms <= 0.0)
                throw data_error(ErrorKind::InvalidValue,
                                 "trial " + key + " fixation " + std::to_string(i) +
                                     ": duration must be positive");
            if (f.word_index < -1 || f.word_index >= n_words)
                throw data_error(ErrorKind::DanglingReference,
                                 "trial " + key + " fixation " + std::to_string(i) +
                                     ": word_index " + std::to_string(f.word_index) +
                                     " outside paragraph of " + std::to_string(n_words) + " words");
        }

        if (t.cs_start_word < 0 || t.cs_start_word > t.cs_end_word || t.cs_end_word >= n_words)
            throw data_error(ErrorKind::InvalidValue,
                             "trial " + key + ": critical span [" + std::to_string(t.cs_start_word) +
                                 "," + std::to_string(t.cs_end_word) + "] invalid for " +
                                 std::to_string(n_words) + " words");
        if (t.paragraph_position < 1)
            throw data_error(ErrorKind::InvalidValue, "trial " + key + ": paragraph_position must be >= 1");
        if (t.question_difficulty < 0.0 || t.question_difficulty > 1.0)
            throw data_error(ErrorKind::InvalidValue, "trial " + key + ": question_difficulty outside [0,1]");

        auto [it, inserted] = participant_goal.emplace(t.participant_id, t.goal);
        if (!inserted && it->second != t.goal)
            throw data_error(ErrorKind::InvalidValue,
                             "participant " + t.participant_id +
                                 " has trials under both goals (between-subjects design)");
    }
}

SaccadeClass classify_saccade(const Fixation& prev, const Fixation& cur,
                              const std::vector<Word>& words) {
    if (prev.word_index < 0 || cur.word_index < 0) return SaccadeClass::Other;
    if (cur.word_index == prev.word_index) return SaccadeClass::Refixation;
    // word-index decrease counts as a regression regardless of line change
    if (cur.word_index < prev.word_index) return SaccadeClass::Regression;

    const int prev_line = words[static_cast<size_t>(prev.word_index)].line;
    const int cur_line = words[static_cast<size_t>(cur.word_index)].line;
    const int delta = cur.word_index - prev.word_index;
    if (cur_line == prev_line) {
        return delta == 1 ? SaccadeClass::Forward : SaccadeClass::Skip;
    }
    if (cur_line == prev_line + 1) return SaccadeClass::ReturnSweep;
    return SaccadeClass::Other;
}

std::vector<SaccadeClass> saccade_classes(const Trial& trial) {
    std::vector<SaccadeClass> out;
    if (trial.fixations.size() < 2) return out;
    out.reserve(trial.fixations.size() - 1);
    for (size_t i = 1; i < trial.fixations.size(); ++i) {
        out.push_back(classify_saccade(trial.fixations[i - 1], trial.fixations[i], trial.words()));
    }
    return out;
}

std::vector<bool> first_pass_mask(const Trial& trial) {
    std::vector<bool> mask(trial.fixations.size(), false);
    int frontier = -1; // max word index seen so far
    for (size_t i = 0; i < trial.fixations.size(); ++i) {
        const int w = trial.fixations[i].word_index;
        if (w < 0) continue;
        if (w >= frontier) mask[i] = true;
        frontier = std::max(frontier, w);
    }
    return mask;
}

} // namespace gazedec
