#include <doctest.h>

#include "gazedec/csv.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

#ifndef GAZEDEC_CLI_PATH
#define GAZEDEC_CLI_PATH "gazedec"
#endif

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GAZEDEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

struct TmpDir {
    fs::path path;
    explicit TmpDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

size_t count_lines(const std::string& path) {
    std::ifstream in(path);
    size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("smoke pipeline produces an evaluation report with rows for all folds") {
    TmpDir dir("gazedec_cli_smoke");
    const std::string out = " --out " + dir.str() + " --seed 7 ";
    REQUIRE(run_cli(out + "synth --delta 1.0 --batches 1 --participants 20 "
                          "--paragraphs-min 2 --paragraphs-max 2 --word-mean 25 --word-sd 4 "
                          "--word-min 15 --word-max 35") == 0);
    REQUIRE(run_cli(out + "split --allow-small") == 0);
    REQUIRE(run_cli(out + "train --model rt --folds all") == 0);
    REQUIRE(run_cli(out + "train --model logistic --folds all") == 0);
    REQUIRE(run_cli(out + "predict --model rt --folds all --set test") == 0);
    REQUIRE(run_cli(out + "predict --model rt --folds all --set val") == 0);
    REQUIRE(run_cli(out + "predict --model logistic --folds all --set test") == 0);
    REQUIRE(run_cli(out + "predict --model logistic --folds all --set val") == 0);
    REQUIRE(run_cli(out + "evaluate") == 0);

    const std::string eval_csv = dir.str() + "/reports/eval.csv";
    REQUIRE(fs::exists(eval_csv));
    gazedec::CsvTable t = gazedec::CsvTable::read_file(eval_csv);
    bool found_all_regime = false;
    for (size_t r = 0; r < t.row_count(); ++r) {
        if (t.str(r, "model") == "rt" && t.str(r, "regime") == "all") {
            found_all_regime = true;
            CHECK(t.integer(r, "folds") == 10);
        }
    }
    CHECK(found_all_regime);

    // follow-on reports
    REQUIRE(run_cli(out + "agreement") == 0);
    REQUIRE(run_cli(out + "roc") == 0);
    REQUIRE(run_cli(out + "ensemble --models rt,logistic --folds all") == 0);
    CHECK(fs::exists(dir.str() + "/reports/agreement.csv"));
    CHECK(fs::exists(dir.str() + "/roc/rt_all.svg"));
    CHECK(count_lines(dir.str() + "/reports/ensemble.csv") == 11); // header + 10 folds

    REQUIRE(run_cli(out + "analyze --model rt") == 0);
    CHECK(fs::exists(dir.str() + "/reports/coefficients.csv"));
    CHECK(fs::exists(dir.str() + "/reports/coefficients_is.svg"));
    REQUIRE(run_cli(out + "compare --model-a rt --model-b logistic") == 0);
    CHECK(fs::exists(dir.str() + "/reports/compare.csv"));

    // manifests written by every artifact-producing command
    for (const char* cmd : {"synth", "split", "train", "predict", "evaluate", "ensemble",
                            "agreement", "roc", "analyze", "compare"})
        CHECK(fs::exists(dir.str() + "/manifests/" + std::string(cmd) + ".json"));
}

TEST_CASE("featurize render and gradcheck subcommands") {
    TmpDir dir("gazedec_cli_misc");
    const std::string out = " --out " + dir.str() + " --seed 3 ";
    REQUIRE(run_cli(out + "synth --delta 0 --batches 1 --participants 4 "
                          "--paragraphs-min 1 --paragraphs-max 1 --word-mean 20 --word-sd 2 "
                          "--word-min 12 --word-max 25") == 0);
    REQUIRE(run_cli(out + "featurize --kind global") == 0);
    REQUIRE(run_cli(out + "featurize --kind fixation") == 0);
    CHECK(count_lines(dir.str() + "/features_global.csv") == 41); // header + 4*10 trials
    CHECK(fs::exists(dir.str() + "/features_fixation.csv"));

    REQUIRE(run_cli(out + "render --canvas 48") == 0);
    size_t pngs = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.str() + "/renders")) ++pngs;
    CHECK(pngs == 40);

    REQUIRE(run_cli(out + "gradcheck") == 0);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("--no-such-flag") == 2);
    CHECK(run_cli("") == 2);
    TmpDir dir("gazedec_cli_usage");
    CHECK(run_cli("--out " + dir.str() + " featurize --kind nonsense") == 2);
}

TEST_CASE("evaluate before train is a data error naming the missing input") {
    TmpDir dir("gazedec_cli_noinput");
    CHECK(run_cli("--out " + dir.str() + " evaluate") == 3);
    // predict without a model file mentions the missing path on stderr
    const std::string out = " --out " + dir.str() + " --seed 3 ";
    REQUIRE(run_cli(out + "synth --delta 0 --batches 1 --participants 10 "
                          "--paragraphs-min 1 --paragraphs-max 1 --word-mean 20 --word-sd 2 "
                          "--word-min 12 --word-max 25") == 0);
    REQUIRE(run_cli(out + "split --allow-small") == 0);
    const std::string cmd = std::string(GAZEDEC_CLI_PATH) + " " + out +
                            " predict --model transformer --folds 0 2>" + dir.str() + "/err.txt";
    (void)std::system(cmd.c_str());
    std::ifstream err(dir.str() + "/err.txt");
    std::stringstream ss;
    ss << err.rdbuf();
    CHECK(ss.str().find("transformer_fold0.bin") != std::string::npos);
}

TEST_CASE("config file supplies defaults and flags win") {
    TmpDir dir("gazedec_cli_config");
    std::ofstream cfg(dir.str() + "/run.cfg");
    cfg << "out=" << dir.str() << "/from_config\n";
    cfg << "seed=9\n";
    cfg.close();
    REQUIRE(run_cli("--config " + dir.str() +
                    "/run.cfg synth --delta 0 --batches 1 --participants 4 "
                    "--paragraphs-min 1 --paragraphs-max 1 --word-mean 20 --word-sd 2 "
                    "--word-min 12 --word-max 25") == 0);
    CHECK(fs::exists(dir.str() + "/from_config/corpus/trials.csv"));

    // explicit flag beats the config value
    REQUIRE(run_cli("--config " + dir.str() + "/run.cfg --out " + dir.str() +
                    "/flag_wins synth --delta 0 --batches 1 --participants 4 "
                    "--paragraphs-min 1 --paragraphs-max 1 --word-mean 20 --word-sd 2 "
                    "--word-min 12 --word-max 25") == 0);
    CHECK(fs::exists(dir.str() + "/flag_wins/corpus/trials.csv"));
}

} // TEST_SUITE
