#include "gazedec/parse.hpp"

#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

namespace gazedec {

Corpus parse_corpus(const std::string& fixations_path,
                    const std::string& words_path,
                    const std::string& trials_path) {
    Corpus corpus;

    CsvTable words = CsvTable::read_file(words_path);
    const bool has_surprisal = words.has_column("surprisal");
    for (size_t r = 0; r < words.row_count(); ++r) {
        Word w;
        const std::string pid = words.str(r, "paragraph_id");
        w.index = static_cast<int>(words.integer(r, "index"));
        w.text = words.str(r, "text");
        w.length = static_cast<int>(words.integer(r, "length"));
        w.log_frequency = words.num(r, "log_frequency");
        w.surprisal = has_surprisal ? words.num(r, "surprisal") : -w.log_frequency;
        w.line = static_cast<int>(words.integer(r, "line"));
        w.in_critical_span = words.integer(r, "in_critical_span") != 0;
        Paragraph& para = corpus.paragraphs[pid];
        para.id = pid;
        para.words.push_back(w);
    }
    for (auto& [pid, para] : corpus.paragraphs) {
        std::sort(para.words.begin(), para.words.end(),
                  [](const Word& a, const Word& b) { return a.index < b.index; });
        for (size_t i = 0; i < para.words.size(); ++i) {
            if (para.words[i].index != static_cast<int>(i))
                throw data_error(ErrorKind::InvalidValue,
                                 words_path + ": paragraph " + pid +
                                     " word indices are not contiguous from 0");
        }
    }

    CsvTable trials = CsvTable::read_file(trials_path);
    std::map<std::string, size_t> trial_index;
    for (size_t r = 0; r < trials.row_count(); ++r) {
        Trial t;
        t.participant_id = trials.str(r, "participant_id");
        t.article_id = trials.str(r, "article_id");
        t.paragraph_id = trials.str(r, "paragraph_id");
        t.batch_id = static_cast<int>(trials.integer(r, "batch_id"));
        t.level = level_from_string(trials.str(r, "level"));
        t.goal = goal_from_string(trials.str(r, "goal"));
        t.paragraph_position = static_cast<int>(trials.integer(r, "paragraph_position"));
        t.answered_correctly = trials.integer(r, "answered_correctly") != 0;
        t.cs_start_word = static_cast<int>(trials.integer(r, "cs_start_word"));
        t.cs_end_word = static_cast<int>(trials.integer(r, "cs_end_word"));
        t.question_difficulty = trials.num(r, "question_difficulty");

        const Paragraph* para = corpus.find_paragraph(t.paragraph_id);
        if (!para)
            throw data_error(ErrorKind::DanglingReference,
                             trials_path + " row " + std::to_string(trials.file_row(r)) +
                                 ": unknown paragraph " + t.paragraph_id);
        t.paragraph = para;

        const std::string key = t.key();
        if (!trial_index.emplace(key, corpus.trials.size()).second)
            throw data_error(ErrorKind::DuplicateTrial,
                             trials_path + " row " + std::to_string(trials.file_row(r)) +
                                 ": duplicate trial " + key);
        corpus.trials.push_back(std::move(t));
    }

    CsvTable fx = CsvTable::read_file(fixations_path);
    for (size_t r = 0; r < fx.row_count(); ++r) {
        const std::string key = fx.str(r, "participant_id") + "/" + fx.str(r, "paragraph_id");
        auto it = trial_index.find(key);
        if (it == trial_index.end())
            throw data_error(ErrorKind::DanglingReference,
                             fixations_path + " row " + std::to_string(fx.file_row(r)) +
                                 ": fixation references unknown trial " + key);
        Trial& t = corpus.trials[it->second];

        Fixation f;
        f.order = static_cast<int>(fx.integer(r, "order"));
        f.word_index = static_cast<int>(fx.integer(r, "word_index"));
        f.x = fx.num(r, "x");
        f.y = fx.num(r, "y");
        f.duration_ms = fx.num(r, "duration_ms");
        if (f.word_index < -1 || f.word_index >= t.word_count())
            throw data_error(ErrorKind::DanglingReference,
                             fixations_path + " row " + std::to_string(fx.file_row(r)) +
                                 ": word_index " + std::to_string(f.word_index) +
                                 " outside paragraph " + t.paragraph_id + " of " +
                                 std::to_string(t.word_count()) + " words");
        t.fixations.push_back(f);
    }

    for (Trial& t : corpus.trials) {
        if (t.fixations.empty())
            throw data_error(ErrorKind::EmptyTrial, "trial " + t.key() + " has no fixations");
        std::sort(t.fixations.begin(), t.fixations.end(),
                  [](const Fixation& a, const Fixation& b) { return a.order < b.order; });
    }

    validate_corpus(corpus);
    return corpus;
}

void write_corpus(const Corpus& corpus,
                  const std::string& fixations_path,
                  const std::string& words_path,
                  const std::string& trials_path) {
    {
        CsvWriter w(words_path, {"paragraph_id", "index", "text", "length", "log_frequency",
                                 "surprisal", "line", "in_critical_span"});
        for (const auto& [pid, para] : corpus.paragraphs) {
            for (const Word& word : para.words) {
                w.field(pid)
                    .field(word.index)
                    .field(word.text)
                    .field(word.length)
                    .field(word.log_frequency)
                    .field(word.surprisal)
                    .field(word.line)
                    .field(word.in_critical_span ? 1L : 0L);
                w.end_row();
            }
        }
    }
    {
        CsvWriter w(trials_path, {"participant_id", "article_id", "paragraph_id", "batch_id",
                                  "level", "goal", "paragraph_position", "answered_correctly",
                                  "cs_start_word", "cs_end_word", "question_difficulty"});
        for (const Trial& t : corpus.trials) {
            w.field(t.participant_id)
                .field(t.article_id)
                .field(t.paragraph_id)
                .field(t.batch_id)
                .field(std::string(to_string(t.level)))
                .field(std::string(to_string(t.goal)))
                .field(t.paragraph_position)
                .field(t.answered_correctly ? 1L : 0L)
                .field(t.cs_start_word)
                .field(t.cs_end_word)
                .field(t.question_difficulty);
            w.end_row();
        }
    }
    {
        CsvWriter w(fixations_path,
                    {"participant_id", "paragraph_id", "order", "word_index", "x", "y", "duration_ms"});
        for (const Trial& t : corpus.trials) {
            for (const Fixation& f : t.fixations) {
                w.field(t.participant_id)
                    .field(t.paragraph_id)
                    .field(f.order)
                    .field(f.word_index)
                    .field(f.x)
                    .field(f.y)
                    .field(f.duration_ms);
                w.end_row();
            }
        }
    }
}

Corpus load_corpus_dir(const std::string& dir) {
    return parse_corpus(dir + "/fixations.csv", dir + "/words.csv", dir + "/trials.csv");
}

void write_corpus_dir(const Corpus& corpus, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_corpus(corpus, dir + "/fixations.csv", dir + "/words.csv", dir + "/trials.csv");
}

bool corpus_equal(const Corpus& a, const Corpus& b) {
    if (a.paragraphs.size() != b.paragraphs.size() || a.trials.size() != b.trials.size())
        return false;
    for (const auto& [pid, pa] : a.paragraphs) {
        const Paragraph* pb = b.find_paragraph(pid);
        if (!pb || pa.words.size() != pb->words.size()) return false;
        for (size_t i = 0; i < pa.words.size(); ++i) {
            const Word& x = pa.words[i];
            const Word& y = pb->words[i];
            if (x.index != y.index || x.text != y.text || x.length != y.length ||
                x.log_frequency != y.log_frequency || x.surprisal != y.surprisal ||
                x.line != y.line || x.in_critical_span != y.in_critical_span)
                return false;
        }
    }
    auto trial_key = [](const Trial& t) { return t.key(); };
    std::map<std::string, const Trial*> bmap;
    for (const Trial& t : b.trials) bmap[trial_key(t)] = &t;
    for (const Trial& ta : a.trials) {
        auto it = bmap.find(trial_key(ta));
        if (it == bmap.end()) return false;
        const Trial& tb = *it->second;
        if (ta.article_id != tb.article_id || ta.batch_id != tb.batch_id || ta.level != tb.level ||
            ta.goal != tb.goal || ta.paragraph_position != tb.paragraph_position ||
            ta.answered_correctly != tb.answered_correctly ||
            ta.cs_start_word != tb.cs_start_word || ta.cs_end_word != tb.cs_end_word ||
            ta.question_difficulty != tb.question_difficulty ||
            ta.fixations.size() != tb.fixations.size())
            return false;
        for (size_t i = 0; i < ta.fixations.size(); ++i) {
            const Fixation& fa = ta.fixations[i];
            const Fixation& fb = tb.fixations[i];
            if (fa.order != fb.order || fa.word_index != fb.word_index || fa.x != fb.x ||
                fa.y != fb.y || fa.duration_ms != fb.duration_ms)
                return false;
        }
    }
    return true;
}

} // namespace gazedec
