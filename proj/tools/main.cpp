#include "gazedec/classifiers.hpp"
#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"
#include "gazedec/eval.hpp"
#include "gazedec/features.hpp"
#include "gazedec/lmm.hpp"
#include "gazedec/manifest.hpp"
#include "gazedec/nn/train.hpp"
#include "gazedec/parse.hpp"
#include "gazedec/png.hpp"
#include "gazedec/raster.hpp"
#include "gazedec/splits.hpp"
#include "gazedec/svg.hpp"
#include "gazedec/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace gazedec;

namespace {

struct GlobalOptions {
    std::string out = "out";
    uint64_t seed = 1;
    int threads = 1;
};

std::string corpus_dir(const GlobalOptions& g, const std::string& corpus_flag) {
    return corpus_flag.empty() ? g.out + "/corpus" : corpus_flag;
}

std::string splits_path(const GlobalOptions& g, const std::string& splits_flag) {
    return splits_flag.empty() ? g.out + "/splits.csv" : splits_flag;
}

void require_file(const std::string& path, const std::string& hint) {
    if (!fs::exists(path))
        throw data_error(ErrorKind::IoError, "missing " + path + " (run `" + hint + "` first)");
}

std::vector<int> parse_fold_list(const std::string& s) {
    if (s == "all") {
        std::vector<int> out(kFoldCount);
        for (int i = 0; i < kFoldCount; ++i) out[i] = i;
        return out;
    }
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw usage_error("empty fold list");
    return out;
}

void run_jobs(std::vector<std::function<void()>> jobs, int threads) {
    if (threads <= 1 || jobs.size() <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    const size_t n_workers = std::min<size_t>(static_cast<size_t>(threads), jobs.size());
    std::vector<std::exception_ptr> errors(n_workers);
    for (size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) jobs[i]();
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string model_path(const GlobalOptions& g, const std::string& model, int fold) {
    return g.out + "/models/" + model + "_fold" + std::to_string(fold) + ".bin";
}

std::string preds_path(const GlobalOptions& g, const std::string& model, int fold,
                       const std::string& set) {
    return g.out + "/preds/" + model + "_fold" + std::to_string(fold) + "_" + set + ".csv";
}

// ----------------------------------------------------------------- synth

int cmd_synth(const GlobalOptions& g, const synth::SynthConfig& cfg_in) {
    synth::SynthConfig cfg = cfg_in;
    cfg.seed = g.seed;
    synth::GeneratedCorpus gen = synth::generate(cfg);
    const std::string dir = g.out + "/corpus";
    write_corpus_dir(gen.corpus, dir);

    nlohmann::json truth{{"delta", gen.truth.delta},
                         {"duration_scale_outside_span", gen.truth.duration_scale_outside_span},
                         {"skip_probability_boost", gen.truth.skip_probability_boost},
                         {"termination_probability", gen.truth.termination_probability},
                         {"trials", gen.corpus.trials.size()}};
    std::ofstream tf(dir + "/truth.json");
    tf << truth.dump(2) << "\n";

    RunManifest m;
    m.command = "synth";
    m.seed = g.seed;
    m.config["delta"] = format_double(cfg.delta);
    m.config["n_batches"] = std::to_string(cfg.n_batches);
    m.config["participants_per_batch"] = std::to_string(cfg.participants_per_batch);
    m.outputs = {dir + "/fixations.csv", dir + "/words.csv", dir + "/trials.csv",
                 dir + "/truth.json"};
    m.write(g.out);

    std::cout << "synth: " << gen.corpus.trials.size() << " trials, "
              << gen.corpus.paragraphs.size() << " paragraphs -> " << dir << "\n";
    return 0;
}

// ----------------------------------------------------------------- split

int cmd_split(const GlobalOptions& g, const std::string& corpus_flag, bool allow_small) {
    const std::string dir = corpus_dir(g, corpus_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    Corpus corpus = load_corpus_dir(dir);
    SplitPlan plan = make_folds(corpus, g.seed, allow_small);
    const std::string path = g.out + "/splits.csv";
    fs::create_directories(g.out);
    write_splits_csv(corpus, plan, path);

    RunManifest m;
    m.command = "split";
    m.seed = g.seed;
    m.add_input(dir + "/trials.csv");
    m.outputs = {path};
    m.write(g.out);

    std::cout << "split: " << corpus.trials.size() << " trials x " << kFoldCount << " folds -> "
              << path << "\n";
    return 0;
}

// -------------------------------------------------------------- featurize

int cmd_featurize(const GlobalOptions& g, const std::string& corpus_flag,
                  const std::string& kind) {
    if (kind != "global" && kind != "fixation")
        throw usage_error("--kind must be global or fixation");
    const std::string dir = corpus_dir(g, corpus_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    Corpus corpus = load_corpus_dir(dir);
    fs::create_directories(g.out);

    std::string path;
    if (kind == "global") {
        path = g.out + "/features_global.csv";
        std::vector<std::string> header = {"participant_id", "paragraph_id"};
        for (const char* n : GlobalFeatures::names()) header.push_back(n);
        header.push_back("reading_time_per_word");
        CsvWriter w(path, header);
        for (const Trial& t : corpus.trials) {
            w.field(t.participant_id).field(t.paragraph_id);
            for (double v : global_features(t).as_array()) w.field(v);
            w.field(reading_time_per_word(t));
            w.end_row();
        }
    } else if (kind == "fixation") {
        path = g.out + "/features_fixation.csv";
        CsvWriter w(path, {"participant_id", "paragraph_id", "order", "duration",
                           "incoming_saccade_length", "class_forward", "class_skip",
                           "class_refixation", "class_return_sweep", "class_regression",
                           "class_other", "is_first_pass", "word_length", "log_frequency",
                           "surprisal", "relative_word_position"});
        for (const Trial& t : corpus.trials) {
            const FixationFeatures f = fixation_features(t);
            for (size_t i = 0; i < f.rows; ++i) {
                w.field(t.participant_id).field(t.paragraph_id).field(static_cast<long>(i));
                for (int j = 0; j < kFixDim; ++j) w.field(f.row(i)[j]);
                w.end_row();
            }
        }
    } else {
        throw usage_error("--kind must be global or fixation");
    }

    RunManifest m;
    m.command = "featurize";
    m.seed = g.seed;
    m.config["kind"] = kind;
    m.add_input(dir + "/trials.csv");
    m.outputs = {path};
    m.write(g.out);
    std::cout << "featurize: " << kind << " -> " << path << "\n";
    return 0;
}

// ----------------------------------------------------------------- render

int cmd_render(const GlobalOptions& g, const std::string& corpus_flag, size_t canvas) {
    const std::string dir = corpus_dir(g, corpus_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    Corpus corpus = load_corpus_dir(dir);
    const std::string out_dir = g.out + "/renders";
    fs::create_directories(out_dir);

    raster::RenderConfig cfg;
    cfg.width = canvas;
    cfg.height = canvas;
    for (const Trial& t : corpus.trials) {
        const raster::ScanpathImage img = raster::render_scanpath(t, cfg);
        raster::export_png(img, out_dir + "/" + t.participant_id + "_" + t.paragraph_id + ".png");
    }

    RunManifest m;
    m.command = "render";
    m.seed = g.seed;
    m.config["canvas"] = std::to_string(canvas);
    m.add_input(dir + "/trials.csv");
    m.outputs = {out_dir};
    m.write(g.out);
    std::cout << "render: " << corpus.trials.size() << " images -> " << out_dir << "\n";
    return 0;
}

// -------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GlobalOptions& g) {
    bool ok = true;
    double worst = 0;
    for (uint64_t s = 0; s < 3; ++s) {
        const auto results = nn::grad_check_all_layers(derive_seed(g.seed, "gradcheck", s));
        for (const auto& r : results) {
            std::printf("seed %llu  %-28s max_rel_err %.3e\n",
                        static_cast<unsigned long long>(s), r.layer.c_str(), r.max_rel_error);
            worst = std::max(worst, r.max_rel_error);
            if (!(r.max_rel_error < 1e-4)) ok = false;
        }
    }
    std::printf("gradcheck: worst %.3e -> %s\n", worst, ok ? "pass" : "FAIL");
    if (!ok) throw compute_error(ErrorKind::NonFiniteGradient, "gradient check failed");
    return 0;
}

// ------------------------------------------------------------------ train

struct TrainFlags {
    std::string model = "transformer";
    bool all = false;
    std::string folds = "0";
    std::string corpus;
    std::string splits;
    std::string grid_file;
    double lr = 1e-3;
    double dropout = 0.1;
    int epochs = 40;
    int patience = 8;
    int batch_size = 16;
    bool no_eye_features = false;
    size_t rnn_hidden = 64;
    size_t rnn_embed = 4;
    size_t image_size = 32;
};

FitOptions make_fit_options(const GlobalOptions& g, const TrainFlags& f) {
    FitOptions opt;
    opt.train.learning_rate = f.lr;
    opt.train.dropout_rate = f.dropout;
    opt.train.max_epochs = f.epochs;
    opt.train.early_stop_patience = f.patience;
    opt.train.batch_size = f.batch_size;
    opt.train.seed = g.seed;
    opt.no_eye_features = f.no_eye_features;
    opt.rnn_hidden = f.rnn_hidden;
    opt.rnn_class_embed = f.rnn_embed;
    opt.image_size = f.image_size;
    return opt;
}

// grid file: one candidate per line, comma-separated key=value pairs
std::vector<std::map<std::string, std::string>> read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error(ErrorKind::IoError, "cannot open grid file " + path);
    std::vector<std::map<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::map<std::string, std::string> kv;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw data_error(ErrorKind::InvalidValue, path + ": expected key=value, got " + tok);
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        out.push_back(std::move(kv));
    }
    return out;
}

void apply_grid_entry(FitOptions& opt, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "lr")
            opt.train.learning_rate = std::stod(v);
        else if (k == "dropout")
            opt.train.dropout_rate = std::stod(v);
        else if (k == "hidden")
            opt.rnn_hidden = static_cast<size_t>(std::stoul(v));
        else if (k == "embed")
            opt.rnn_class_embed = static_cast<size_t>(std::stoul(v));
        else
            throw data_error(ErrorKind::InvalidValue, "unknown grid key " + k);
    }
}

std::string grid_desc(const std::map<std::string, std::string>& kv) {
    std::string s;
    for (const auto& [k, v] : kv) s += (s.empty() ? "" : ",") + k + "=" + v;
    return s.empty() ? "default" : s;
}

void train_one(const GlobalOptions& g, const TrainFlags& f, const Corpus& corpus,
               const SplitPlan& plan, ClassifierKind kind, int fold) {
    const auto train_set = trials_in_regime(corpus, plan, fold, Regime::Train);
    const auto val_set = trials_in_regime(corpus, plan, fold, Regime::Val);

    std::unique_ptr<Classifier> best;
    double best_acc = -1;
    std::vector<SelectionEntry> report;

    std::vector<std::map<std::string, std::string>> grid;
    if (!f.grid_file.empty())
        grid = read_grid_file(f.grid_file);
    else
        grid.push_back({});

    for (const auto& entry : grid) {
        FitOptions opt = make_fit_options(g, f);
        apply_grid_entry(opt, entry);
        auto c = fit_classifier(kind, train_set, val_set, opt);
        const auto preds = c->predict_all(val_set);
        const double acc = prediction_accuracy(preds, val_set);
        report.push_back({grid_desc(entry), acc, false});
        if (acc > best_acc) {
            best_acc = acc;
            best = std::move(c);
            report.back().chosen = true;
            for (size_t i = 0; i + 1 < report.size(); ++i) report[i].chosen = false;
        }
    }

    const std::string name = to_string(kind);
    fs::create_directories(g.out + "/models");
    fs::create_directories(g.out + "/reports");
    save_classifier_file(*best, model_path(g, name, fold));

    CsvWriter w(g.out + "/reports/val_" + name + "_fold" + std::to_string(fold) + ".csv",
                {"candidate", "val_accuracy", "chosen"});
    for (const auto& e : report) {
        w.field(e.description).field(e.val_accuracy).field(e.chosen ? 1L : 0L);
        w.end_row();
    }
    for (const auto& e : best->selection_report()) {
        // training-internal report (best epoch etc.)
        CsvWriter w2(g.out + "/reports/fitlog_" + name + "_fold" + std::to_string(fold) + ".csv",
                     {"detail", "val_accuracy"});
        w2.field(e.description).field(e.val_accuracy);
        w2.end_row();
    }
    std::cout << "train: " << name << " fold " << fold << " val_acc=" << best_acc << "\n";
}

int cmd_train(const GlobalOptions& g, const TrainFlags& f) {
    const std::string dir = corpus_dir(g, f.corpus);
    const std::string spath = splits_path(g, f.splits);
    require_file(dir + "/trials.csv", "gazedec synth");
    require_file(spath, "gazedec split");
    Corpus corpus = load_corpus_dir(dir);
    SplitPlan plan = read_splits_csv(spath);

    std::vector<ClassifierKind> kinds;
    if (f.all) {
        kinds = {ClassifierKind::MajorityClass,  ClassifierKind::ReadingTime,
                 ClassifierKind::LogisticGlobal, ClassifierKind::RnnFixation,
                 ClassifierKind::TransformerFusion, ClassifierKind::ImageConvnet};
    } else {
        kinds = {classifier_kind_from_string(f.model)};
    }
    const std::vector<int> folds = parse_fold_list(f.folds);

    std::vector<std::function<void()>> jobs;
    for (ClassifierKind kind : kinds)
        for (int fold : folds)
            jobs.push_back([&, kind, fold] { train_one(g, f, corpus, plan, kind, fold); });
    run_jobs(std::move(jobs), g.threads);

    RunManifest m;
    m.command = "train";
    m.seed = g.seed;
    m.config["model"] = f.all ? "all" : f.model;
    m.config["folds"] = f.folds;
    m.config["lr"] = format_double(f.lr);
    m.config["epochs"] = std::to_string(f.epochs);
    m.add_input(spath);
    for (ClassifierKind kind : kinds)
        for (int fold : folds) m.outputs.push_back(model_path(g, to_string(kind), fold));
    m.write(g.out);
    return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(const GlobalOptions& g, const std::string& model, const std::string& folds_flag,
                const std::string& corpus_flag, const std::string& splits_flag,
                const std::string& set) {
    const std::string dir = corpus_dir(g, corpus_flag);
    const std::string spath = splits_path(g, splits_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    require_file(spath, "gazedec split");
    Corpus corpus = load_corpus_dir(dir);
    SplitPlan plan = read_splits_csv(spath);
    fs::create_directories(g.out + "/preds");

    RunManifest m;
    m.command = "predict";
    m.seed = g.seed;
    m.config["model"] = model;
    m.config["set"] = set;

    for (int fold : parse_fold_list(folds_flag)) {
        const std::string mpath = model_path(g, model, fold);
        require_file(mpath, "gazedec train --model " + model + " --folds " +
                                std::to_string(fold));
        auto classifier = load_classifier_file(mpath);

        std::vector<const Trial*> trials;
        if (set == "val")
            trials = trials_in_regime(corpus, plan, fold, Regime::Val);
        else if (set == "test")
            trials = test_trials(corpus, plan, fold);
        else
            throw usage_error("--set must be val or test");

        std::vector<eval::PredRecord> records;
        records.reserve(trials.size());
        for (const Trial* t : trials) {
            const Prediction p = classifier->predict(*t);
            eval::PredRecord r;
            r.model = model;
            r.fold = fold;
            r.participant_id = t->participant_id;
            r.paragraph_id = t->paragraph_id;
            r.regime = plan.regime_of(*t, fold);
            r.prob_is = p.probability_is;
            r.label_pred = p.label;
            r.label_true = t->goal;
            records.push_back(std::move(r));
        }
        const std::string path = preds_path(g, model, fold, set);
        eval::write_predictions_csv(path, records);
        m.outputs.push_back(path);
        std::cout << "predict: " << model << " fold " << fold << " " << set << " ("
                  << records.size() << " trials) -> " << path << "\n";
    }
    m.write(g.out);
    return 0;
}

// --------------------------------------------------------------- evaluate

std::vector<eval::PredRecord> read_all_preds(const GlobalOptions& g, const std::string& set) {
    const std::string dir = g.out + "/preds";
    if (!fs::exists(dir))
        throw data_error(ErrorKind::IoError, "missing " + dir + " (run `gazedec predict` first)");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() > 4 + set.size() &&
            name.substr(name.size() - 4 - set.size()) == set + ".csv")
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw data_error(ErrorKind::IoError,
                         "no *_" + set + ".csv prediction files under " + dir);
    std::vector<eval::PredRecord> out;
    for (const std::string& f : files) {
        auto recs = eval::read_predictions_csv(f);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

int cmd_evaluate(const GlobalOptions& g) {
    const auto records = read_all_preds(g, "test");
    const auto rows = eval::build_eval_report(records);
    fs::create_directories(g.out + "/reports");
    const std::string path = g.out + "/reports/eval.csv";
    CsvWriter w(path, {"model", "regime", "accuracy_mean", "accuracy_ci95_half", "auroc_mean",
                       "auroc_sd", "n_trials", "folds"});
    for (const auto& r : rows) {
        w.field(r.model)
            .field(r.regime)
            .field(r.accuracy.mean)
            .field(r.accuracy.half_width)
            .field(r.auroc_mean)
            .field(r.auroc_sd)
            .field(static_cast<long>(r.n_trials))
            .field(static_cast<long>(r.accuracy.per_fold.size()));
        w.end_row();
    }

    const std::string folds_path = g.out + "/reports/eval_folds.csv";
    {
        CsvWriter wf(folds_path, {"model", "regime", "fold_rank", "accuracy"});
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.accuracy.per_fold.size(); ++i) {
                wf.field(r.model)
                    .field(r.regime)
                    .field(static_cast<long>(i))
                    .field(r.accuracy.per_fold[i]);
                wf.end_row();
            }
        }
    }

    RunManifest m;
    m.command = "evaluate";
    m.seed = g.seed;
    m.outputs = {path, folds_path};
    m.write(g.out);
    std::cout << "evaluate: " << rows.size() << " rows -> " << path << "\n";
    return 0;
}

// --------------------------------------------------------------- ensemble

int cmd_ensemble(const GlobalOptions& g, const std::string& models_flag,
                 const std::string& folds_flag) {
    std::vector<std::string> models;
    {
        std::stringstream ss(models_flag);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) models.push_back(tok);
    }
    if (models.size() < 1) throw usage_error("--models needs at least one model");

    fs::create_directories(g.out + "/reports");
    const std::string report_path = g.out + "/reports/ensemble.csv";
    CsvWriter report(report_path, {"fold", "ensemble_val_accuracy", "best_single_val_accuracy",
                                   "best_single_model", "ensemble_test_accuracy"});

    RunManifest m;
    m.command = "ensemble";
    m.seed = g.seed;
    m.config["models"] = models_flag;

    for (int fold : parse_fold_list(folds_flag)) {
        // load aligned per-model val and test predictions
        std::map<std::string, eval::PredRecord> first_val, first_test;
        std::vector<std::vector<eval::PredRecord>> val_sets, test_sets;
        for (const std::string& model : models) {
            const std::string vpath = preds_path(g, model, fold, "val");
            const std::string tpath = preds_path(g, model, fold, "test");
            require_file(vpath, "gazedec predict --model " + model + " --set val");
            require_file(tpath, "gazedec predict --model " + model + " --set test");
            auto v = eval::read_predictions_csv(vpath);
            auto t = eval::read_predictions_csv(tpath);
            auto by_key = [](std::vector<eval::PredRecord>& rs) {
                std::sort(rs.begin(), rs.end(),
                          [](const auto& a, const auto& b) {
                              return std::tie(a.participant_id, a.paragraph_id) <
                                     std::tie(b.participant_id, b.paragraph_id);
                          });
            };
            by_key(v);
            by_key(t);
            val_sets.push_back(std::move(v));
            test_sets.push_back(std::move(t));
        }
        const size_t k = models.size();
        const size_t n_val = val_sets[0].size(), n_test = test_sets[0].size();
        for (size_t mi = 1; mi < k; ++mi)
            if (val_sets[mi].size() != n_val || test_sets[mi].size() != n_test)
                throw compute_error(ErrorKind::ColumnMismatch,
                                    "ensemble: prediction files disagree on trial sets");

        std::vector<double> val_matrix(n_val * k), test_matrix(n_test * k);
        std::vector<int> val_labels(n_val);
        for (size_t i = 0; i < n_val; ++i) {
            val_labels[i] =
                val_sets[0][i].label_true == Goal::InformationSeeking ? 1 : 0;
            for (size_t mi = 0; mi < k; ++mi) val_matrix[i * k + mi] = val_sets[mi][i].prob_is;
        }
        for (size_t i = 0; i < n_test; ++i)
            for (size_t mi = 0; mi < k; ++mi) test_matrix[i * k + mi] = test_sets[mi][i].prob_is;

        const eval::Ensemble ens = eval::fit_ensemble(val_matrix, val_labels, k);
        const auto val_probs = eval::ensemble_predict(ens, val_matrix);
        const auto test_probs = eval::ensemble_predict(ens, test_matrix);

        // ensemble records on the test side
        std::vector<eval::PredRecord> out_records;
        double test_correct = 0;
        for (size_t i = 0; i < n_test; ++i) {
            eval::PredRecord r = test_sets[0][i];
            r.model = "ensemble";
            r.prob_is = test_probs[i];
            r.label_pred = label_from_probability(test_probs[i]);
            if (r.correct()) test_correct += 1;
            out_records.push_back(std::move(r));
        }
        const std::string opath = preds_path(g, "ensemble", fold, "test");
        eval::write_predictions_csv(opath, out_records);
        m.outputs.push_back(opath);

        double ens_val_correct = 0;
        for (size_t i = 0; i < n_val; ++i)
            if ((val_probs[i] >= 0.5 ? 1 : 0) == val_labels[i]) ens_val_correct += 1;
        const double ens_val_acc = ens_val_correct / static_cast<double>(n_val);

        double best_single = -1;
        std::string best_name;
        for (size_t mi = 0; mi < k; ++mi) {
            double c = 0;
            for (const auto& r : val_sets[mi])
                if (r.correct()) c += 1;
            const double acc = c / static_cast<double>(n_val);
            if (acc > best_single) {
                best_single = acc;
                best_name = models[mi];
            }
        }
        report.field(fold)
            .field(ens_val_acc)
            .field(best_single)
            .field(best_name)
            .field(n_test ? test_correct / static_cast<double>(n_test) : 0.0);
        report.end_row();
        std::cout << "ensemble: fold " << fold << " val_acc=" << ens_val_acc
                  << " best_single=" << best_single << " (" << best_name << ")\n";
    }
    m.outputs.push_back(report_path);
    m.write(g.out);
    return 0;
}

// ----------------------------------------------------------------- online

int cmd_online(const GlobalOptions& g, const TrainFlags& f, const std::string& budgets_flag,
               bool no_retrain) {
    const std::string dir = corpus_dir(g, f.corpus);
    const std::string spath = splits_path(g, f.splits);
    require_file(dir + "/trials.csv", "gazedec synth");
    require_file(spath, "gazedec split");
    Corpus corpus = load_corpus_dir(dir);
    SplitPlan plan = read_splits_csv(spath);

    eval::OnlineOptions opt;
    opt.fit = make_fit_options(g, f);
    opt.folds = parse_fold_list(f.folds);
    opt.retrain_per_budget = !no_retrain;
    opt.budgets.clear();
    for (const std::string& tok : [&] {
             std::vector<std::string> v;
             std::stringstream ss(budgets_flag);
             std::string t;
             while (std::getline(ss, t, ','))
                 if (!t.empty()) v.push_back(t);
             return v;
         }())
        opt.budgets.push_back(std::stod(tok));

    const auto rows =
        eval::online_eval(classifier_kind_from_string(f.model), corpus, plan, opt);

    fs::create_directories(g.out + "/reports");
    const std::string path = g.out + "/reports/online.csv";
    CsvWriter w(path, {"budget_percent", "accuracy_mean", "accuracy_ci95_half", "folds"});
    for (const auto& r : rows) {
        w.field(r.budget)
            .field(r.accuracy.mean)
            .field(r.accuracy.half_width)
            .field(static_cast<long>(r.accuracy.per_fold.size()));
        w.end_row();
        std::cout << "online: budget " << r.budget << "% acc=" << r.accuracy.mean << " +/- "
                  << r.accuracy.half_width << "\n";
    }

    RunManifest m;
    m.command = "online";
    m.seed = g.seed;
    m.config["model"] = f.model;
    m.config["budgets"] = budgets_flag;
    m.config["retrain"] = no_retrain ? "0" : "1";
    m.add_input(spath);
    m.outputs = {path};
    m.write(g.out);
    return 0;
}

// -------------------------------------------------------------- agreement

int cmd_agreement(const GlobalOptions& g) {
    const auto records = read_all_preds(g, "val");
    // model -> (fold, key) -> pred
    std::map<std::string, std::map<std::string, int>> by_model;
    for (const auto& r : records) {
        by_model[r.model][std::to_string(r.fold) + "/" + r.participant_id + "/" +
                          r.paragraph_id] =
            r.label_pred == Goal::InformationSeeking ? 1 : 0;
    }
    std::vector<std::string> models;
    for (const auto& [m, _] : by_model) models.push_back(m);

    fs::create_directories(g.out + "/reports");
    const std::string path = g.out + "/reports/agreement.csv";
    CsvWriter w(path, {"model_a", "model_b", "kappa", "n"});
    for (size_t a = 0; a < models.size(); ++a) {
        for (size_t b = a + 1; b < models.size(); ++b) {
            const auto& ma = by_model[models[a]];
            const auto& mb = by_model[models[b]];
            std::vector<int> pa, pb;
            for (const auto& [key, v] : ma) {
                auto it = mb.find(key);
                if (it != mb.end()) {
                    pa.push_back(v);
                    pb.push_back(it->second);
                }
            }
            if (pa.empty()) continue;
            w.field(models[a])
                .field(models[b])
                .field(eval::cohens_kappa(pa, pb))
                .field(static_cast<long>(pa.size()));
            w.end_row();
        }
    }

    RunManifest m;
    m.command = "agreement";
    m.seed = g.seed;
    m.outputs = {path};
    m.write(g.out);
    std::cout << "agreement: " << models.size() << " models -> " << path << "\n";
    return 0;
}

// -------------------------------------------------------------------- roc

int cmd_roc(const GlobalOptions& g) {
    const auto records = read_all_preds(g, "test");
    // model -> regime -> fold -> records
    std::map<std::string, std::map<std::string, std::map<int, std::vector<const eval::PredRecord*>>>>
        groups;
    for (const auto& r : records) {
        groups[r.model][to_string(r.regime)][r.fold].push_back(&r);
        groups[r.model]["all"][r.fold].push_back(&r);
    }
    fs::create_directories(g.out + "/roc");

    RunManifest m;
    m.command = "roc";
    m.seed = g.seed;

    for (const auto& [model, regimes] : groups) {
        for (const auto& [regime, folds] : regimes) {
            const std::string base = g.out + "/roc/" + model + "_" + regime;
            CsvWriter w(base + ".csv", {"fold", "fpr", "tpr", "threshold"});
            std::vector<svg::Curve> curves;
            std::vector<double> aucs;
            for (const auto& [fold, recs] : folds) {
                std::vector<double> scores;
                std::vector<int> labels;
                for (const auto* r : recs) {
                    scores.push_back(r->prob_is);
                    labels.push_back(r->label_true == Goal::InformationSeeking ? 1 : 0);
                }
                if (std::count(labels.begin(), labels.end(), 1) == 0 ||
                    std::count(labels.begin(), labels.end(), 0) == 0)
                    continue;
                const auto pts = eval::roc_points(scores, labels);
                svg::Curve curve;
                curve.label = "fold " + std::to_string(fold);
                for (const auto& p : pts) {
                    w.field(fold).field(p.fpr).field(p.tpr).field(p.threshold);
                    w.end_row();
                    curve.points.push_back({p.fpr, p.tpr});
                }
                aucs.push_back(eval::auroc(scores, labels));
                curves.push_back(std::move(curve));
            }
            if (!aucs.empty()) {
                double mean = 0;
                for (double a : aucs) mean += a;
                mean /= static_cast<double>(aucs.size());
                double var = 0;
                for (double a : aucs) var += (a - mean) * (a - mean);
                char title[160];
                std::snprintf(title, sizeof(title), "%s / %s  AUROC %.3f +/- %.3f", model.c_str(),
                              regime.c_str(), mean, std::sqrt(var / aucs.size()));
                svg::write_line_chart(base + ".svg", title, curves);
            }
            m.outputs.push_back(base + ".csv");
        }
    }
    m.write(g.out);
    std::cout << "roc: wrote curves for " << groups.size() << " models -> " << g.out << "/roc\n";
    return 0;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const GlobalOptions& g, const std::string& model, const std::string& corpus_flag,
                bool logit_response) {
    const std::string dir = corpus_dir(g, corpus_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    Corpus corpus = load_corpus_dir(dir);

    auto records = read_all_preds(g, "test");
    std::erase_if(records, [&](const eval::PredRecord& r) { return r.model != model; });
    if (records.empty())
        throw data_error(ErrorKind::IoError, "no test predictions found for model " + model);

    lmm::ErrorAnalysisOptions opt;
    opt.logit_response = logit_response;

    fs::create_directories(g.out + "/reports");
    const std::string path = g.out + "/reports/coefficients.csv";
    CsvWriter w(path, {"goal_subset", "feature", "beta", "se", "z", "p_raw", "p_corrected"});

    RunManifest m;
    m.command = "analyze";
    m.seed = g.seed;
    m.config["model"] = model;
    m.config["response"] = logit_response ? "logit" : "probability";
    m.config["estimation"] = "ml_random_intercepts"; // slopes simplified away

    for (Goal goal : {Goal::InformationSeeking, Goal::OrdinaryReading}) {
        const auto res = lmm::error_analysis(records, corpus, goal, opt);
        std::vector<svg::CoefficientEntry> entries;
        for (size_t i = 0; i < res.fit.beta.size(); ++i) {
            w.field(res.goal_subset)
                .field(res.fit.fixed_names[i])
                .field(res.fit.beta[i])
                .field(res.fit.se[i])
                .field(res.fit.wald[i].z)
                .field(res.fit.wald[i].p_raw)
                .field(res.fit.wald[i].p_corrected);
            w.end_row();
            if (i == 0) continue; // intercept not plotted
            svg::CoefficientEntry e;
            e.name = res.fit.fixed_names[i];
            e.value = res.fit.beta[i];
            e.ci_half_width = 1.96 * res.fit.se[i];
            const double p = res.fit.wald[i].p_corrected;
            e.stars = p < 0.001 ? "***" : p < 0.01 ? "**" : p < 0.05 ? "*" : "";
            entries.push_back(std::move(e));
        }
        const std::string svg_path =
            g.out + "/reports/coefficients_" + res.goal_subset + ".svg";
        svg::write_coefficient_chart(svg_path,
                                     std::string("error analysis (") + res.goal_subset + ")",
                                     entries);
        m.outputs.push_back(svg_path);
        std::cout << "analyze: " << res.goal_subset << " subset, " << res.n_rows << " rows\n";
    }
    m.outputs.push_back(path);
    m.write(g.out);
    return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const GlobalOptions& g, const std::string& model_a, const std::string& model_b,
                const std::string& corpus_flag) {
    const std::string dir = corpus_dir(g, corpus_flag);
    require_file(dir + "/trials.csv", "gazedec synth");
    Corpus corpus = load_corpus_dir(dir);

    auto records = read_all_preds(g, "test");
    std::vector<eval::PredRecord> a, b;
    for (auto& r : records) {
        if (r.model == model_a) a.push_back(r);
        if (r.model == model_b) b.push_back(r);
    }
    auto by_key = [](std::vector<eval::PredRecord>& rs) {
        std::sort(rs.begin(), rs.end(), [](const auto& x, const auto& y) {
            return std::tie(x.fold, x.participant_id, x.paragraph_id) <
                   std::tie(y.fold, y.participant_id, y.paragraph_id);
        });
    };
    by_key(a);
    by_key(b);

    const auto res = lmm::compare_models(a, b, corpus);
    fs::create_directories(g.out + "/reports");
    const std::string path = g.out + "/reports/compare.csv";
    CsvWriter w(path, {"model_a", "model_b", "coefficient_b_minus_a", "se", "z", "p"});
    w.field(model_a).field(model_b).field(res.coefficient).field(res.se).field(res.z).field(res.p);
    w.end_row();

    RunManifest m;
    m.command = "compare";
    m.seed = g.seed;
    m.config["model_a"] = model_a;
    m.config["model_b"] = model_b;
    m.config["estimation"] = "ml_random_intercepts"; // slopes simplified away
    m.outputs = {path};
    m.write(g.out);
    std::cout << "compare: " << model_a << " vs " << model_b << " coef=" << res.coefficient
              << " p=" << res.p << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gazedec: decoding reading goals from eye-movement scanpaths"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags win");

    GlobalOptions g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for independent jobs")
        ->capture_default_str();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth::SynthConfig scfg;
    synth_cmd->add_option("--delta", scfg.delta, "effect size (0 = null)")->capture_default_str();
    synth_cmd->add_option("--batches", scfg.n_batches)->capture_default_str();
    synth_cmd->add_option("--articles", scfg.articles_per_batch)->capture_default_str();
    synth_cmd->add_option("--paragraphs-min", scfg.paragraphs_per_article_min)
        ->capture_default_str();
    synth_cmd->add_option("--paragraphs-max", scfg.paragraphs_per_article_max)
        ->capture_default_str();
    synth_cmd->add_option("--participants", scfg.participants_per_batch)->capture_default_str();
    synth_cmd->add_option("--word-mean", scfg.word_count_mean)->capture_default_str();
    synth_cmd->add_option("--word-sd", scfg.word_count_sd)->capture_default_str();
    synth_cmd->add_option("--word-min", scfg.word_count_min)->capture_default_str();
    synth_cmd->add_option("--word-max", scfg.word_count_max)->capture_default_str();
    synth_cmd->add_option("--trial-speed-sigma", scfg.trial_speed_sigma)->capture_default_str();
    synth_cmd->add_option("--participant-speed-sigma", scfg.participant_speed_sigma)
        ->capture_default_str();

    // split
    auto* split_cmd = app.add_subcommand("split", "build the 10-fold split plan");
    std::string split_corpus;
    bool allow_small = false;
    split_cmd->add_option("--corpus", split_corpus, "corpus directory");
    split_cmd->add_flag("--allow-small", allow_small, "accept non-OneStop participant counts");

    // featurize
    auto* feat_cmd = app.add_subcommand("featurize", "emit feature CSVs");
    std::string feat_corpus, feat_kind = "global";
    feat_cmd->add_option("--corpus", feat_corpus);
    feat_cmd->add_option("--kind", feat_kind, "global or fixation")->capture_default_str();

    // render
    auto* render_cmd = app.add_subcommand("render", "render scanpath PNGs");
    std::string render_corpus;
    size_t render_canvas = 224;
    render_cmd->add_option("--corpus", render_corpus);
    render_cmd->add_option("--canvas", render_canvas)->capture_default_str();

    // gradcheck
    app.add_subcommand("gradcheck", "finite-difference gradient verification");

    // train
    auto* train_cmd = app.add_subcommand("train", "fit classifiers per fold");
    TrainFlags tf;
    train_cmd->add_option("--model", tf.model, "majority|rt|logistic|rnn|transformer|convnet")
        ->capture_default_str();
    train_cmd->add_flag("--all", tf.all, "train all six model kinds");
    train_cmd->add_option("--folds", tf.folds, "comma list or 'all'")->capture_default_str();
    train_cmd->add_option("--corpus", tf.corpus);
    train_cmd->add_option("--splits", tf.splits);
    train_cmd->add_option("--grid-file", tf.grid_file, "hyperparameter grid, key=value per line");
    train_cmd->add_option("--lr", tf.lr)->capture_default_str();
    train_cmd->add_option("--dropout", tf.dropout)->capture_default_str();
    train_cmd->add_option("--epochs", tf.epochs)->capture_default_str();
    train_cmd->add_option("--patience", tf.patience)->capture_default_str();
    train_cmd->add_option("--batch-size", tf.batch_size)->capture_default_str();
    train_cmd->add_flag("--no-eye-features", tf.no_eye_features,
                        "fixation-ordered word features only");
    train_cmd->add_option("--rnn-hidden", tf.rnn_hidden)->capture_default_str();
    train_cmd->add_option("--rnn-embed", tf.rnn_embed)->capture_default_str();
    train_cmd->add_option("--image-size", tf.image_size)->capture_default_str();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "write prediction CSVs");
    std::string pr_model = "transformer", pr_folds = "0", pr_corpus, pr_splits, pr_set = "test";
    predict_cmd->add_option("--model", pr_model)->capture_default_str();
    predict_cmd->add_option("--folds", pr_folds)->capture_default_str();
    predict_cmd->add_option("--corpus", pr_corpus);
    predict_cmd->add_option("--splits", pr_splits);
    predict_cmd->add_option("--set", pr_set, "val or test")->capture_default_str();

    // evaluate
    app.add_subcommand("evaluate", "accuracy/AUROC report over test predictions");

    // ensemble
    auto* ens_cmd = app.add_subcommand("ensemble", "logistic ensemble over base models");
    std::string ens_models = "majority,rt,logistic", ens_folds = "all";
    ens_cmd->add_option("--models", ens_models)->capture_default_str();
    ens_cmd->add_option("--folds", ens_folds)->capture_default_str();

    // online
    auto* online_cmd = app.add_subcommand("online", "prefix-budget evaluation");
    TrainFlags of;
    of.model = "rnn";
    of.folds = "0,1";
    std::string online_budgets = "1,5,10,25,50,100";
    bool online_no_retrain = false;
    online_cmd->add_option("--model", of.model)->capture_default_str();
    online_cmd->add_option("--folds", of.folds)->capture_default_str();
    online_cmd->add_option("--budgets", online_budgets)->capture_default_str();
    online_cmd->add_flag("--no-retrain", online_no_retrain,
                         "evaluate a full-data model on prefixes instead of retraining");
    online_cmd->add_option("--corpus", of.corpus);
    online_cmd->add_option("--splits", of.splits);
    online_cmd->add_option("--lr", of.lr)->capture_default_str();
    online_cmd->add_option("--epochs", of.epochs)->capture_default_str();
    online_cmd->add_option("--dropout", of.dropout)->capture_default_str();

    // agreement
    app.add_subcommand("agreement", "pairwise Cohen's kappa on validation predictions");

    // roc
    app.add_subcommand("roc", "ROC curves per model and regime");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "mixed-effects error analysis");
    std::string an_model = "transformer", an_corpus;
    bool an_logit = false;
    analyze_cmd->add_option("--model", an_model)->capture_default_str();
    analyze_cmd->add_option("--corpus", an_corpus);
    analyze_cmd->add_flag("--logit", an_logit, "model the logit of P(correct)");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "mixed-effects model comparison");
    std::string cm_a = "rt", cm_b = "transformer", cm_corpus;
    compare_cmd->add_option("--model-a", cm_a)->capture_default_str();
    compare_cmd->add_option("--model-b", cm_b)->capture_default_str();
    compare_cmd->add_option("--corpus", cm_corpus);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0; // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        fs::create_directories(g.out);
        if (synth_cmd->parsed()) return cmd_synth(g, scfg);
        if (split_cmd->parsed()) return cmd_split(g, split_corpus, allow_small);
        if (feat_cmd->parsed()) return cmd_featurize(g, feat_corpus, feat_kind);
        if (render_cmd->parsed()) return cmd_render(g, render_corpus, render_canvas);
        if (app.get_subcommand("gradcheck")->parsed()) return cmd_gradcheck(g);
        if (train_cmd->parsed()) return cmd_train(g, tf);
        if (predict_cmd->parsed())
            return cmd_predict(g, pr_model, pr_folds, pr_corpus, pr_splits, pr_set);
        if (app.get_subcommand("evaluate")->parsed()) return cmd_evaluate(g);
        if (ens_cmd->parsed()) return cmd_ensemble(g, ens_models, ens_folds);
        if (online_cmd->parsed()) return cmd_online(g, of, online_budgets, online_no_retrain);
        if (app.get_subcommand("agreement")->parsed()) return cmd_agreement(g);
        if (app.get_subcommand("roc")->parsed()) return cmd_roc(g);
        if (analyze_cmd->parsed()) return cmd_analyze(g, an_model, an_corpus, an_logit);
        if (compare_cmd->parsed()) return cmd_compare(g, cm_a, cm_b, cm_corpus);
        std::cerr << "usage error: no subcommand\n";
        return 2;
    } catch (const Error& e) {
        switch (e.error_class()) {
            case ErrorClass::Usage:
                std::cerr << "usage error: " << e.what() << "\n";
                return 2;
            case ErrorClass::Data:
                std::cerr << "data error [" << error_kind_name(e.kind()) << "]: " << e.what()
                          << "\n";
                return 3;
            case ErrorClass::Compute:
                std::cerr << "compute error [" << error_kind_name(e.kind()) << "]: " << e.what()
                          << "\n";
                return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
