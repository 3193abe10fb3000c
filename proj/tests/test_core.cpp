#include <doctest.h>

#include "gazedec/core.hpp"
#include "gazedec/errors.hpp"
#include "gazedec/parse.hpp"
#include "support/oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace gazedec;

namespace {

// one trial, 3 words, 4 fixations: w0 200ms, w1 180ms, w0 150ms, w2 220ms
Corpus micro_corpus() {
    Corpus c;
    Paragraph& p = c.paragraphs["p1"];
    p.id = "p1";
    for (int i = 0; i < 3; ++i) {
        Word w;
        w.index = i;
        w.text = std::string(1, static_cast<char>('a' + i));
        w.length = 3;
        w.log_frequency = -4.0;
        w.surprisal = 5.0;
        w.line = 0;
        p.words.push_back(w);
    }
    Trial t;
    t.participant_id = "s1";
    t.article_id = "a1";
    t.paragraph_id = "p1";
    t.paragraph = &p;
    t.goal = Goal::InformationSeeking;
    t.cs_start_word = 1;
    t.cs_end_word = 1;
    const int words[] = {0, 1, 0, 2};
    const double durs[] = {200, 180, 150, 220};
    for (int i = 0; i < 4; ++i) {
        Fixation f;
        f.order = i;
        f.word_index = words[i];
        f.x = 100 + 40 * words[i];
        f.y = 120;
        f.duration_ms = durs[i];
        t.fixations.push_back(f);
    }
    c.trials.push_back(std::move(t));
    return c;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

struct TmpDir {
    std::filesystem::path path;
    explicit TmpDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TmpDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_SUITE("core") {

TEST_CASE("parse round-trips a hand-written three-file corpus") {
    TmpDir dir("gazedec_core_parse");
    write_file(dir.file("words.csv"),
               "paragraph_id,index,text,length,log_frequency,surprisal,line,in_critical_span\n"
               "p1,0,the,3,-2.5,3.1,0,0\n"
               "p1,1,cat,3,-4.5,7.2,0,1\n"
               "p1,2,sat,3,-5,8,0,0\n");
    write_file(dir.file("trials.csv"),
               "participant_id,article_id,paragraph_id,batch_id,level,goal,paragraph_position,"
               "answered_correctly,cs_start_word,cs_end_word,question_difficulty\n"
               "s1,a1,p1,1,adv,is,5,1,1,1,0.25\n");
    write_file(dir.file("fixations.csv"),
               "participant_id,paragraph_id,order,word_index,x,y,duration_ms\n"
               "s1,p1,0,0,100,120,200\n"
               "s1,p1,1,1,140,120,180\n"
               "s1,p1,2,0,101,121,150\n"
               "s1,p1,3,2,180,120,220\n");

    Corpus c = parse_corpus(dir.file("fixations.csv"), dir.file("words.csv"),
                            dir.file("trials.csv"));
    REQUIRE(c.trials.size() == 1);
    const Trial& t = c.trials[0];
    CHECK(t.word_count() == 3);
    CHECK(t.fixations.size() == 4);
    CHECK(t.fixations[3].order == 3);
    CHECK(t.goal == Goal::InformationSeeking);
    CHECK(t.level == Level::Advanced);
    CHECK(t.words()[1].in_critical_span);
    CHECK(t.question_difficulty == 0.25);

    // serialize back and re-parse: identical corpus
    write_corpus_dir(c, dir.file("copy"));
    Corpus c2 = load_corpus_dir(dir.file("copy"));
    CHECK(corpus_equal(c, c2));
}

TEST_CASE("parse reports dangling word references") {
    TmpDir dir("gazedec_core_dangle");
    write_file(dir.file("words.csv"),
               "paragraph_id,index,text,length,log_frequency,surprisal,line,in_critical_span\n"
               "p1,0,a,1,-2,3,0,0\np1,1,b,1,-2,3,0,0\np1,2,c,1,-2,3,0,0\n");
    write_file(dir.file("trials.csv"),
               "participant_id,article_id,paragraph_id,batch_id,level,goal,paragraph_position,"
               "answered_correctly,cs_start_word,cs_end_word,question_difficulty\n"
               "s1,a1,p1,1,adv,is,1,1,0,1,0.5\n");
    write_file(dir.file("fixations.csv"),
               "participant_id,paragraph_id,order,word_index,x,y,duration_ms\n"
               "s1,p1,0,7,100,120,200\n");
    try {
        parse_corpus(dir.file("fixations.csv"), dir.file("words.csv"), dir.file("trials.csv"));
        FAIL("expected DanglingReference");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DanglingReference);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("parse reports duplicate trials and missing columns") {
    TmpDir dir("gazedec_core_dup");
    write_file(dir.file("words.csv"),
               "paragraph_id,index,text,length,log_frequency,surprisal,line,in_critical_span\n"
               "p1,0,a,1,-2,3,0,0\n");
    write_file(dir.file("trials.csv"),
               "participant_id,article_id,paragraph_id,batch_id,level,goal,paragraph_position,"
               "answered_correctly,cs_start_word,cs_end_word,question_difficulty\n"
               "s1,a1,p1,1,adv,is,1,1,0,0,0.5\n"
               "s1,a1,p1,1,adv,is,2,1,0,0,0.5\n");
    write_file(dir.file("fixations.csv"),
               "participant_id,paragraph_id,order,word_index,x,y,duration_ms\n"
               "s1,p1,0,0,100,120,200\n");
    CHECK_THROWS_WITH_AS(parse_corpus(dir.file("fixations.csv"), dir.file("words.csv"),
                                      dir.file("trials.csv")),
                         doctest::Contains("duplicate trial"), Error);

    write_file(dir.file("bad_words.csv"), "paragraph_id,index\np1,0\n");
    try {
        parse_corpus(dir.file("fixations.csv"), dir.file("bad_words.csv"),
                     dir.file("trials.csv"));
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingColumn);
    }
}

TEST_CASE("saccade taxonomy definitions") {
    Corpus c = micro_corpus();
    Paragraph& p = c.paragraphs["p1"];
    // lines 0,0,0,0,0,0,1,2 across words 0..7
    for (int i = 3; i < 8; ++i) {
        Word w;
        w.index = i;
        w.text = "x";
        w.length = 2;
        w.line = i >= 7 ? 2 : (i >= 6 ? 1 : 0);
        p.words.push_back(w);
    }
    auto fix = [](int w) {
        Fixation f;
        f.word_index = w;
        f.duration_ms = 100;
        return f;
    };
    CHECK(classify_saccade(fix(0), fix(1), p.words) == SaccadeClass::Forward);
    CHECK(classify_saccade(fix(0), fix(2), p.words) == SaccadeClass::Skip);
    CHECK(classify_saccade(fix(5), fix(6), p.words) == SaccadeClass::ReturnSweep);
    CHECK(classify_saccade(fix(4), fix(1), p.words) == SaccadeClass::Regression);
    CHECK(classify_saccade(fix(1), fix(1), p.words) == SaccadeClass::Refixation);
    CHECK(classify_saccade(fix(-1), fix(1), p.words) == SaccadeClass::Other);
    CHECK(classify_saccade(fix(1), fix(-1), p.words) == SaccadeClass::Other);
    // a forward jump across two display lines is not a return sweep
    CHECK(classify_saccade(fix(0), fix(7), p.words) == SaccadeClass::Other);
}

TEST_CASE("first-pass mask on the hand-simulated sequence") {
    Corpus c = micro_corpus();
    const auto mask = first_pass_mask(c.trials[0]); // words 0,1,0,2
    REQUIRE(mask.size() == 4);
    CHECK(mask[0]);
    CHECK(mask[1]);
    CHECK_FALSE(mask[2]);
    CHECK(mask[3]);
}

TEST_CASE("first-pass mask boundary cases") {
    Corpus c = micro_corpus();
    Trial& t = c.trials[0];

    // strictly left-to-right: all true
    t.fixations.clear();
    for (int i = 0; i < 3; ++i) {
        Fixation f;
        f.order = i;
        f.word_index = i;
        f.duration_ms = 100;
        t.fixations.push_back(f);
    }
    for (bool b : first_pass_mask(t)) CHECK(b);

    // all fixations on word 0: never proceeds right, all true
    for (auto& f : t.fixations) f.word_index = 0;
    for (bool b : first_pass_mask(t)) CHECK(b);
}

TEST_CASE("saccade classes are total and first-pass matches the naive oracle") {
    Rng rng(20240817);
    for (int rep = 0; rep < 1000; ++rep) {
        Paragraph storage;
        storage.id = "p";
        Trial t = oracles::random_trial(storage, rng);

        const auto classes = saccade_classes(t);
        CHECK(classes.size() == t.fixations.size() - 1);
        int counts[kSaccadeClassCount] = {0};
        for (size_t i = 0; i < classes.size(); ++i) {
            ++counts[static_cast<int>(classes[i])];
            REQUIRE(classes[i] == oracles::naive_saccade(t, i + 1));
        }
        int total = 0;
        for (int v : counts) total += v;
        CHECK(total == static_cast<int>(t.fixations.size()) - 1);

        const auto mask = first_pass_mask(t);
        const auto naive = oracles::naive_first_pass(t);
        REQUIRE(mask == naive);
    }
}

TEST_CASE("corpus validation rejects mixed goals per participant") {
    Corpus c = micro_corpus();
    Trial t2 = c.trials[0];
    t2.paragraph_id = "p1"; // same paragraph would be a duplicate; give it a new one
    Paragraph& p2 = c.paragraphs["p2"];
    p2.id = "p2";
    p2.words = c.paragraphs["p1"].words;
    t2.paragraph_id = "p2";
    t2.paragraph = &p2;
    t2.goal = Goal::OrdinaryReading;
    c.trials.push_back(t2);
    try {
        validate_corpus(c);
        FAIL("expected between-subjects violation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidValue);
    }
}

} // TEST_SUITE
