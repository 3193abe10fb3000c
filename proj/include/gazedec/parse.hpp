#pragma once

#include "gazedec/core.hpp"

#include <string>

namespace gazedec {

// Ingests the three-file interest-area fixation report format:
//   fixations.csv: participant_id, paragraph_id, order, word_index, x, y, duration_ms
//   words.csv:     paragraph_id, index, text, length, log_frequency, surprisal, line,
//                  in_critical_span (0/1)
//   trials.csv:    participant_id, article_id, paragraph_id, batch_id, level (adv/ele),
//                  goal (is/or), paragraph_position, answered_correctly (0/1),
//                  cs_start_word, cs_end_word, question_difficulty
// A missing surprisal column is proxied by -log_frequency.
Corpus parse_corpus(const std::string& fixations_path,
                    const std::string& words_path,
                    const std::string& trials_path);

// Writes the same three files; parse(write(c)) == c field for field.
void write_corpus(const Corpus& corpus,
                  const std::string& fixations_path,
                  const std::string& words_path,
                  const std::string& trials_path);

// Convenience wrappers for a directory holding the three files under
// their canonical names.
Corpus load_corpus_dir(const std::string& dir);
void write_corpus_dir(const Corpus& corpus, const std::string& dir);

bool corpus_equal(const Corpus& a, const Corpus& b);

} // namespace gazedec
