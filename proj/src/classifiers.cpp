#include "gazedec/classifiers.hpp"

#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace gazedec {

using nlohmann::json;

namespace {

// ------------------------------------------------- binary container I/O

constexpr char kMagic[4] = {'G', 'Z', 'D', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T)); // little-endian host
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw data_error(ErrorKind::IoError, "model file truncated");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<long>(s.size()));
}

std::string read_string(std::istream& in) {
    const uint32_t n = read_raw<uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw data_error(ErrorKind::IoError, "model file truncated");
    return s;
}

void write_header(std::ostream& out, ClassifierKind kind, const json& meta,
                  const std::vector<nn::Param*>& tensors) {
    out.write(kMagic, 4);
    write_raw<uint32_t>(out, kVersion);
    write_raw<uint8_t>(out, static_cast<uint8_t>(kind));
    write_string(out, meta.dump());
    write_raw<uint64_t>(out, tensors.size());
    for (const nn::Param* p : tensors) {
        write_string(out, p->name);
        write_raw<uint32_t>(out, static_cast<uint32_t>(p->value.shape.size()));
        for (size_t d : p->value.shape) write_raw<uint64_t>(out, d);
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<long>(p->value.data.size() * sizeof(double)));
    }
}

void read_tensors(std::istream& in, std::vector<nn::Param*>& tensors) {
    const uint64_t count = read_raw<uint64_t>(in);
    if (count != tensors.size())
        throw data_error(ErrorKind::InvalidValue, "model file: unexpected tensor count");
    for (nn::Param* p : tensors) {
        const std::string name = read_string(in);
        if (name != p->name)
            throw data_error(ErrorKind::InvalidValue,
                             "model file: tensor " + name + " does not match " + p->name);
        const uint32_t ndim = read_raw<uint32_t>(in);
        std::vector<size_t> shape(ndim);
        for (auto& d : shape) d = read_raw<uint64_t>(in);
        if (shape != p->value.shape)
            throw data_error(ErrorKind::InvalidValue, "model file: shape mismatch on " + p->name);
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<long>(p->value.data.size() * sizeof(double)));
        if (!in) throw data_error(ErrorKind::IoError, "model file truncated");
    }
}

json standardizer_to_json(const Standardizer& s) {
    return json{{"mean", s.mean}, {"sd", s.sd}, {"active", s.active}};
}

Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    s.active = j.at("active").get<std::vector<bool>>();
    return s;
}

// --------------------------------------------------- feature assembly

constexpr std::array<int, 7> kEyeAndWordIdx = {kFixDuration,     kFixIncomingLength,
                                               kFixIsFirstPass,  kFixWordLength,
                                               kFixLogFrequency, kFixSurprisal,
                                               kFixRelPosition};
constexpr std::array<int, 4> kWordOnlyIdx = {kFixWordLength, kFixLogFrequency, kFixSurprisal,
                                             kFixRelPosition};

std::vector<double> global_row(const Trial& t) {
    const auto a = global_features(t).as_array();
    return std::vector<double>(a.begin(), a.end());
}

Standardizer fit_global_standardizer(const std::vector<const Trial*>& trials) {
    std::vector<double> rows;
    rows.reserve(trials.size() * 9);
    for (const Trial* t : trials) {
        const auto r = global_row(*t);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return fit_standardizer(rows, 9);
}

Standardizer fit_fixation_standardizer(const std::vector<const Trial*>& trials) {
    std::vector<double> rows;
    for (const Trial* t : trials) {
        const FixationFeatures f = fixation_features(*t);
        rows.insert(rows.end(), f.data.begin(), f.data.end());
    }
    return fit_standardizer(rows, kFixDim);
}

std::vector<int> trial_labels_as_int(const std::vector<const Trial*>& trials) {
    std::vector<int> y;
    y.reserve(trials.size());
    for (const Trial* t : trials) y.push_back(t->goal == Goal::InformationSeeking ? 1 : 0);
    return y;
}

Prediction make_prediction(const Trial& t, double p) {
    return Prediction{t.participant_id, t.paragraph_id, p, label_from_probability(p)};
}

// ------------------------------------------------------------ majority

class MajorityClassifier : public Classifier {
public:
    explicit MajorityClassifier(double p_is) : p_is_(p_is) {}

    ClassifierKind kind() const override { return ClassifierKind::MajorityClass; }
    Prediction predict(const Trial& t) override { return make_prediction(t, p_is_); }
    void save(std::ostream& out) const override {
        write_header(out, kind(), json{{"p_is", p_is_}}, {});
    }

    static std::unique_ptr<Classifier> load(const json& meta) {
        return std::make_unique<MajorityClassifier>(meta.at("p_is").get<double>());
    }

private:
    double p_is_;
};

// -------------------------------------------------------- reading time

class ReadingTimeClassifier : public Classifier {
public:
    ReadingTimeClassifier(Standardizer s, LogisticModel m)
        : standardizer_(std::move(s)), model_(std::move(m)) {}

    ClassifierKind kind() const override { return ClassifierKind::ReadingTime; }

    Prediction predict(const Trial& t) override {
        double x = reading_time_per_word(t);
        standardizer_.apply_row(&x);
        return make_prediction(t, model_.probability(&x));
    }

    void save(std::ostream& out) const override {
        json meta{{"standardizer", standardizer_to_json(standardizer_)},
                  {"weights", model_.weights},
                  {"intercept", model_.intercept}};
        write_header(out, kind(), meta, {});
    }

    static std::unique_ptr<Classifier> load(const json& meta) {
        LogisticModel m;
        m.weights = meta.at("weights").get<std::vector<double>>();
        m.intercept = meta.at("intercept").get<double>();
        return std::make_unique<ReadingTimeClassifier>(
            standardizer_from_json(meta.at("standardizer")), std::move(m));
    }

private:
    Standardizer standardizer_;
    LogisticModel model_;
};

// ----------------------------------------------------- logistic global

class LogisticGlobalClassifier : public Classifier {
public:
    LogisticGlobalClassifier(Standardizer s, LogisticModel m, std::string penalty)
        : standardizer_(std::move(s)), model_(std::move(m)), penalty_(std::move(penalty)) {}

    ClassifierKind kind() const override { return ClassifierKind::LogisticGlobal; }

    Prediction predict(const Trial& t) override {
        std::vector<double> x = global_row(t);
        standardizer_.apply_row(x.data());
        return make_prediction(t, model_.probability(x.data()));
    }

    void save(std::ostream& out) const override {
        json meta{{"standardizer", standardizer_to_json(standardizer_)},
                  {"weights", model_.weights},
                  {"intercept", model_.intercept},
                  {"penalty", penalty_}};
        write_header(out, kind(), meta, {});
    }

    static std::unique_ptr<Classifier> load(const json& meta) {
        LogisticModel m;
        m.weights = meta.at("weights").get<std::vector<double>>();
        m.intercept = meta.at("intercept").get<double>();
        return std::make_unique<LogisticGlobalClassifier>(
            standardizer_from_json(meta.at("standardizer")), std::move(m),
            meta.at("penalty").get<std::string>());
    }

private:
    Standardizer standardizer_;
    LogisticModel model_;
    std::string penalty_;
};

// --------------------------------------------------------- neural nets

struct NeuralFeaturizer {
    Standardizer fix_standardizer;
    Standardizer global_standardizer;
    std::map<std::string, int> vocab; // word text -> id, 0 reserved for unknown
    bool no_eye_features = false;

    nn::BatchItem rnn_item(const Trial& t) const {
        FixationFeatures f = fixation_features(t);
        for (size_t i = 0; i < f.rows; ++i) fix_standardizer.apply_row(f.row(i));

        nn::BatchItem item;
        const size_t dim = no_eye_features ? kWordOnlyIdx.size() : kEyeAndWordIdx.size();
        item.fixations = nn::Tensor({f.rows, dim});
        for (size_t i = 0; i < f.rows; ++i) {
            const double* src = f.row(i);
            double* dst = item.fixations.row(i);
            if (no_eye_features) {
                for (size_t j = 0; j < kWordOnlyIdx.size(); ++j) dst[j] = src[kWordOnlyIdx[j]];
            } else {
                for (size_t j = 0; j < kEyeAndWordIdx.size(); ++j) dst[j] = src[kEyeAndWordIdx[j]];
            }
        }
        item.saccade_class = no_eye_features
                                 ? std::vector<int>(f.rows, static_cast<int>(SaccadeClass::Other))
                                 : f.incoming_class;

        std::vector<double> g = global_row(t);
        global_standardizer.apply_row(g.data());
        if (no_eye_features) g.assign(g.size(), 0.0);
        item.global = std::move(g);
        return item;
    }

    nn::BatchItem transformer_item(const Trial& t) const {
        FixationFeatures f = fixation_features(t);
        for (size_t i = 0; i < f.rows; ++i) fix_standardizer.apply_row(f.row(i));

        nn::BatchItem item;
        item.fixations = nn::Tensor({f.rows, static_cast<size_t>(kFixDim)}, std::move(f.data));
        item.word_id.resize(f.rows, 0);
        const auto& words = t.words();
        for (size_t i = 0; i < f.rows; ++i) {
            const int wi = t.fixations[i].word_index;
            if (wi >= 0) {
                auto it = vocab.find(words[static_cast<size_t>(wi)].text);
                item.word_id[i] = it == vocab.end() ? 0 : it->second;
            }
        }
        return item;
    }

    json to_json() const {
        return json{{"fix_standardizer", standardizer_to_json(fix_standardizer)},
                    {"global_standardizer", standardizer_to_json(global_standardizer)},
                    {"vocab", vocab},
                    {"no_eye_features", no_eye_features}};
    }

    static NeuralFeaturizer from_json(const json& j) {
        NeuralFeaturizer f;
        f.fix_standardizer = standardizer_from_json(j.at("fix_standardizer"));
        f.global_standardizer = standardizer_from_json(j.at("global_standardizer"));
        f.vocab = j.at("vocab").get<std::map<std::string, int>>();
        f.no_eye_features = j.at("no_eye_features").get<bool>();
        return f;
    }
};

std::map<std::string, int> build_vocab(const std::vector<const Trial*>& trials) {
    std::map<std::string, int> vocab;
    int next = 1;
    std::set<const Paragraph*> seen;
    for (const Trial* t : trials) {
        if (!seen.insert(t->paragraph).second) continue;
        for (const Word& w : t->words())
            if (vocab.emplace(w.text, next).second) ++next;
    }
    return vocab;
}

raster::RenderConfig model_render_config(size_t image_size) {
    const double scale = static_cast<double>(image_size) / 224.0;
    raster::RenderConfig cfg;
    cfg.width = image_size;
    cfg.height = image_size;
    cfg.duration_to_diameter = 0.06 * scale;
    cfg.min_diameter = std::max(1.2, 3.0 * scale);
    cfg.max_diameter = std::max(cfg.min_diameter, 31.0 * scale);
    return cfg;
}

class RnnClassifier : public Classifier {
public:
    RnnClassifier(NeuralFeaturizer f, nn::RnnFixationConfig cfg, uint64_t seed)
        : featurizer_(std::move(f)), cfg_(cfg), net_(cfg, seed), seed_(seed) {}

    ClassifierKind kind() const override { return ClassifierKind::RnnFixation; }

    Prediction predict(const Trial& t) override {
        return make_prediction(t, net_.predict(featurizer_.rnn_item(t)));
    }

    void save(std::ostream& out) const override {
        json meta{{"featurizer", featurizer_.to_json()},
                  {"seed", seed_},
                  {"feature_dim", cfg_.feature_dim},
                  {"class_embed_dim", cfg_.class_embed_dim},
                  {"hidden_dim", cfg_.hidden_dim},
                  {"global_dim", cfg_.global_dim},
                  {"dropout", cfg_.dropout}};
        write_header(out, kind(), meta, const_cast<RnnClassifier*>(this)->net_.params());
    }

    static std::unique_ptr<Classifier> load(const json& meta, std::istream& in) {
        nn::RnnFixationConfig cfg;
        cfg.feature_dim = meta.at("feature_dim").get<size_t>();
        cfg.class_embed_dim = meta.at("class_embed_dim").get<size_t>();
        cfg.hidden_dim = meta.at("hidden_dim").get<size_t>();
        cfg.global_dim = meta.at("global_dim").get<size_t>();
        cfg.dropout = meta.at("dropout").get<double>();
        auto c = std::make_unique<RnnClassifier>(NeuralFeaturizer::from_json(meta.at("featurizer")),
                                                 cfg, meta.at("seed").get<uint64_t>());
        read_tensors(in, c->net_.params());
        return c;
    }

    nn::RnnFixationNet& net() { return net_; }

private:
    NeuralFeaturizer featurizer_;
    nn::RnnFixationConfig cfg_;
    nn::RnnFixationNet net_;
    uint64_t seed_;
};

class TransformerClassifier : public Classifier {
public:
    TransformerClassifier(NeuralFeaturizer f, nn::TransformerConfig cfg, uint64_t seed)
        : featurizer_(std::move(f)), cfg_(cfg), net_(cfg, seed), seed_(seed) {}

    ClassifierKind kind() const override { return ClassifierKind::TransformerFusion; }

    Prediction predict(const Trial& t) override {
        return make_prediction(t, net_.predict(featurizer_.transformer_item(t)));
    }

    void save(std::ostream& out) const override {
        json meta{{"featurizer", featurizer_.to_json()},
                  {"seed", seed_},
                  {"vocab_size", cfg_.vocab},
                  {"word_embed_dim", cfg_.word_embed_dim},
                  {"feature_dim", cfg_.feature_dim},
                  {"d_model", cfg_.d_model},
                  {"heads", cfg_.heads},
                  {"layers", cfg_.layers},
                  {"mlp_hidden", cfg_.mlp_hidden},
                  {"max_len", cfg_.max_len},
                  {"dropout", cfg_.dropout}};
        write_header(out, kind(), meta, const_cast<TransformerClassifier*>(this)->net_.params());
    }

    static std::unique_ptr<Classifier> load(const json& meta, std::istream& in) {
        nn::TransformerConfig cfg;
        cfg.vocab = meta.at("vocab_size").get<size_t>();
        cfg.word_embed_dim = meta.at("word_embed_dim").get<size_t>();
        cfg.feature_dim = meta.at("feature_dim").get<size_t>();
        cfg.d_model = meta.at("d_model").get<size_t>();
        cfg.heads = meta.at("heads").get<size_t>();
        cfg.layers = meta.at("layers").get<size_t>();
        cfg.mlp_hidden = meta.at("mlp_hidden").get<size_t>();
        cfg.max_len = meta.at("max_len").get<size_t>();
        cfg.dropout = meta.at("dropout").get<double>();
        auto c = std::make_unique<TransformerClassifier>(
            NeuralFeaturizer::from_json(meta.at("featurizer")), cfg,
            meta.at("seed").get<uint64_t>());
        read_tensors(in, c->net_.params());
        return c;
    }

    nn::TransformerNet& net() { return net_; }

private:
    NeuralFeaturizer featurizer_;
    nn::TransformerConfig cfg_;
    nn::TransformerNet net_;
    uint64_t seed_;
};

class ConvnetClassifier : public Classifier {
public:
    ConvnetClassifier(nn::ConvNetConfig cfg, uint64_t seed)
        : cfg_(cfg), net_(cfg, seed), seed_(seed), render_(model_render_config(cfg.image_size)) {}

    ClassifierKind kind() const override { return ClassifierKind::ImageConvnet; }

    Prediction predict(const Trial& t) override {
        nn::BatchItem item;
        item.image = raster::render_scanpath(t, render_).to_tensor();
        return make_prediction(t, net_.predict(item));
    }

    void save(std::ostream& out) const override {
        json meta{{"seed", seed_},
                  {"image_size", cfg_.image_size},
                  {"c1", cfg_.c1},
                  {"c2", cfg_.c2},
                  {"c3", cfg_.c3},
                  {"kernel", cfg_.kernel},
                  {"pool", cfg_.pool},
                  {"dropout", cfg_.dropout}};
        write_header(out, kind(), meta, const_cast<ConvnetClassifier*>(this)->net_.params());
    }

    static std::unique_ptr<Classifier> load(const json& meta, std::istream& in) {
        nn::ConvNetConfig cfg;
        cfg.image_size = meta.at("image_size").get<size_t>();
        cfg.c1 = meta.at("c1").get<size_t>();
        cfg.c2 = meta.at("c2").get<size_t>();
        cfg.c3 = meta.at("c3").get<size_t>();
        cfg.kernel = meta.at("kernel").get<size_t>();
        cfg.pool = meta.at("pool").get<size_t>();
        cfg.dropout = meta.at("dropout").get<double>();
        auto c = std::make_unique<ConvnetClassifier>(cfg, meta.at("seed").get<uint64_t>());
        read_tensors(in, c->net_.params());
        return c;
    }

    nn::ConvNet& net() { return net_; }
    const raster::RenderConfig& render_config() const { return render_; }

private:
    nn::ConvNetConfig cfg_;
    nn::ConvNet net_;
    uint64_t seed_;
    raster::RenderConfig render_;
};

// ------------------------------------------------------------- fitting

std::unique_ptr<Classifier> fit_majority(const std::vector<const Trial*>& train) {
    if (train.empty()) throw compute_error(ErrorKind::EmptyTrainingSet, "majority: empty train set");
    double is = 0;
    for (const Trial* t : train)
        if (t->goal == Goal::InformationSeeking) is += 1;
    return std::make_unique<MajorityClassifier>(is / static_cast<double>(train.size()));
}

std::unique_ptr<Classifier> fit_reading_time(const std::vector<const Trial*>& train) {
    if (train.empty())
        throw compute_error(ErrorKind::EmptyTrainingSet, "reading time: empty train set");
    std::vector<double> xs;
    xs.reserve(train.size());
    for (const Trial* t : train) xs.push_back(reading_time_per_word(*t));
    Standardizer s = fit_standardizer(xs, 1);
    for (double& x : xs) s.apply_row(&x);
    LogisticFitOptions opt;
    opt.max_iterations = 20000;
    LogisticModel m = fit_logistic(xs, trial_labels_as_int(train), 1, opt);
    return std::make_unique<ReadingTimeClassifier>(std::move(s), std::move(m));
}

std::unique_ptr<Classifier> fit_logistic_global_impl(const std::vector<const Trial*>& train,
                                                     const std::vector<const Trial*>& val,
                                                     const FitOptions& options) {
    if (train.empty() || val.empty())
        throw compute_error(ErrorKind::EmptyTrainingSet, "logistic global: empty train or val set");

    Standardizer s = fit_global_standardizer(train);
    auto rows_of = [&](const std::vector<const Trial*>& ts) {
        std::vector<double> rows;
        rows.reserve(ts.size() * 9);
        for (const Trial* t : ts) {
            std::vector<double> r = global_row(*t);
            s.apply_row(r.data());
            rows.insert(rows.end(), r.begin(), r.end());
        }
        return rows;
    };
    const std::vector<double> Xtr = rows_of(train);
    const std::vector<double> Xval = rows_of(val);
    const std::vector<int> ytr = trial_labels_as_int(train);
    const std::vector<int> yval = trial_labels_as_int(val);

    struct Candidate {
        std::string desc;
        double lambda;
    };
    std::vector<Candidate> candidates;
    if (options.try_unpenalized) candidates.push_back({"no_penalty", 0.0});
    for (double c : options.c_grid)
        candidates.push_back({"l2 C=" + format_double(c),
                              1.0 / (c * static_cast<double>(train.size()))});

    std::vector<SelectionEntry> report;
    LogisticModel best_model;
    std::string best_desc;
    double best_acc = -1.0;
    for (const Candidate& cand : candidates) {
        LogisticFitOptions opt;
        opt.lambda = cand.lambda;
        opt.max_iterations = 20000;
        LogisticModel m = fit_logistic(Xtr, ytr, 9, opt);
        const double acc = logistic_accuracy(m, Xval, yval, 9);
        report.push_back({cand.desc, acc, false});
        if (acc > best_acc) {
            best_acc = acc;
            best_model = std::move(m);
            best_desc = cand.desc;
        }
    }
    for (auto& e : report) e.chosen = e.description == best_desc;

    auto c = std::make_unique<LogisticGlobalClassifier>(std::move(s), std::move(best_model),
                                                        best_desc);
    c->set_selection_report(std::move(report));
    return c;
}

template <typename Net, typename MakeItem>
SelectionEntry train_net(Net& net, const std::vector<const Trial*>& train,
                         const std::vector<const Trial*>& val, const nn::TrainConfig& cfg,
                         MakeItem make_item, const std::string& desc) {
    std::vector<nn::BatchItem> train_items, val_items;
    std::vector<double> train_labels, val_labels;
    train_items.reserve(train.size());
    for (const Trial* t : train) {
        train_items.push_back(make_item(*t));
        train_labels.push_back(goal_label(t->goal));
    }
    val_items.reserve(val.size());
    for (const Trial* t : val) {
        val_items.push_back(make_item(*t));
        val_labels.push_back(goal_label(t->goal));
    }
    const nn::TrainResult r = nn::train(net, train_items, train_labels, val_items, val_labels, cfg);
    return SelectionEntry{desc + " best_epoch=" + std::to_string(r.best_epoch),
                          r.best_val_accuracy, true};
}

} // namespace

const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::MajorityClass: return "majority";
        case ClassifierKind::ReadingTime: return "rt";
        case ClassifierKind::LogisticGlobal: return "logistic";
        case ClassifierKind::RnnFixation: return "rnn";
        case ClassifierKind::TransformerFusion: return "transformer";
        case ClassifierKind::ImageConvnet: return "convnet";
    }
    return "majority";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "majority") return ClassifierKind::MajorityClass;
    if (s == "rt") return ClassifierKind::ReadingTime;
    if (s == "logistic") return ClassifierKind::LogisticGlobal;
    if (s == "rnn") return ClassifierKind::RnnFixation;
    if (s == "transformer") return ClassifierKind::TransformerFusion;
    if (s == "convnet") return ClassifierKind::ImageConvnet;
    throw usage_error("unknown model '" + s +
                      "' (expected majority|rt|logistic|rnn|transformer|convnet)");
}

std::vector<Prediction> Classifier::predict_all(const std::vector<const Trial*>& trials) {
    std::vector<Prediction> out;
    out.reserve(trials.size());
    for (const Trial* t : trials) out.push_back(predict(*t));
    return out;
}

double prediction_accuracy(const std::vector<Prediction>& preds,
                           const std::vector<const Trial*>& trials) {
    if (preds.empty() || preds.size() != trials.size()) return 0.0;
    size_t correct = 0;
    for (size_t i = 0; i < preds.size(); ++i)
        if (preds[i].label == trials[i]->goal) ++correct;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::unique_ptr<Classifier> fit_classifier(ClassifierKind kind,
                                           const std::vector<const Trial*>& train,
                                           const std::vector<const Trial*>& val,
                                           const FitOptions& options) {
    switch (kind) {
        case ClassifierKind::MajorityClass: return fit_majority(train);
        case ClassifierKind::ReadingTime: return fit_reading_time(train);
        case ClassifierKind::LogisticGlobal: return fit_logistic_global_impl(train, val, options);
        case ClassifierKind::RnnFixation: {
            NeuralFeaturizer f;
            f.fix_standardizer = fit_fixation_standardizer(train);
            f.global_standardizer = fit_global_standardizer(train);
            f.no_eye_features = options.no_eye_features;

            nn::RnnFixationConfig cfg;
            cfg.feature_dim = options.no_eye_features ? kWordOnlyIdx.size() : kEyeAndWordIdx.size();
            cfg.class_embed_dim = options.rnn_class_embed;
            cfg.hidden_dim = options.rnn_hidden;
            cfg.global_dim = 9;
            cfg.dropout = options.train.dropout_rate;

            auto c = std::make_unique<RnnClassifier>(f, cfg, options.train.seed);
            auto entry = train_net(
                c->net(), train, val, options.train,
                [&](const Trial& t) { return f.rnn_item(t); }, "rnn");
            c->set_selection_report({entry});
            return c;
        }
        case ClassifierKind::TransformerFusion: {
            NeuralFeaturizer f;
            f.fix_standardizer = fit_fixation_standardizer(train);
            f.global_standardizer = fit_global_standardizer(train);
            f.vocab = build_vocab(train);

            nn::TransformerConfig cfg;
            cfg.vocab = f.vocab.size() + 1;
            cfg.word_embed_dim = options.tf_word_embed;
            cfg.feature_dim = kFixDim;
            cfg.d_model = options.tf_d_model;
            cfg.heads = options.tf_heads;
            cfg.layers = options.tf_layers;
            cfg.mlp_hidden = options.tf_mlp_hidden;
            cfg.max_len = options.tf_max_len;
            cfg.dropout = options.train.dropout_rate;

            auto c = std::make_unique<TransformerClassifier>(f, cfg, options.train.seed);
            auto entry = train_net(
                c->net(), train, val, options.train,
                [&](const Trial& t) { return f.transformer_item(t); }, "transformer");
            c->set_selection_report({entry});
            return c;
        }
        case ClassifierKind::ImageConvnet: {
            nn::ConvNetConfig cfg;
            cfg.image_size = options.image_size;
            cfg.dropout = options.train.dropout_rate;
            auto c = std::make_unique<ConvnetClassifier>(cfg, options.train.seed);
            const raster::RenderConfig render = c->render_config();
            auto entry = train_net(
                c->net(), train, val, options.train,
                [&](const Trial& t) {
                    nn::BatchItem item;
                    item.image = raster::render_scanpath(t, render).to_tensor();
                    return item;
                },
                "convnet");
            c->set_selection_report({entry});
            return c;
        }
    }
    throw usage_error("unknown classifier kind");
}

std::unique_ptr<Classifier> load_classifier(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw data_error(ErrorKind::InvalidValue, "not a model file (bad magic)");
    const uint32_t version = read_raw<uint32_t>(in);
    if (version != kVersion)
        throw data_error(ErrorKind::InvalidValue,
                         "unsupported model version " + std::to_string(version));
    const auto kind = static_cast<ClassifierKind>(read_raw<uint8_t>(in));
    const json meta = json::parse(read_string(in));

    switch (kind) {
        case ClassifierKind::MajorityClass: {
            read_raw<uint64_t>(in);
            return MajorityClassifier::load(meta);
        }
        case ClassifierKind::ReadingTime: {
            read_raw<uint64_t>(in);
            return ReadingTimeClassifier::load(meta);
        }
        case ClassifierKind::LogisticGlobal: {
            read_raw<uint64_t>(in);
            return LogisticGlobalClassifier::load(meta);
        }
        case ClassifierKind::RnnFixation: return RnnClassifier::load(meta, in);
        case ClassifierKind::TransformerFusion: return TransformerClassifier::load(meta, in);
        case ClassifierKind::ImageConvnet: return ConvnetClassifier::load(meta, in);
    }
    throw data_error(ErrorKind::InvalidValue, "model file has unknown classifier kind");
}

std::unique_ptr<Classifier> load_classifier_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error(ErrorKind::IoError, "cannot open model file " + path);
    return load_classifier(in);
}

void save_classifier_file(const Classifier& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(ErrorKind::IoError, "cannot write model file " + path);
    c.save(out);
}

} // namespace gazedec
