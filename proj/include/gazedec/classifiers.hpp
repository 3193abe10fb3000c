#pragma once

#include "gazedec/core.hpp"
#include "gazedec/features.hpp"
#include "gazedec/logistic.hpp"
#include "gazedec/nn/train.hpp"
#include "gazedec/raster.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gazedec {

enum class ClassifierKind {
    MajorityClass,
    ReadingTime,
    LogisticGlobal,
    RnnFixation,
    TransformerFusion,
    ImageConvnet,
};

const char* to_string(ClassifierKind k);
ClassifierKind classifier_kind_from_string(const std::string& s);

// label == InformationSeeking iff probability_is >= 0.5
struct Prediction {
    std::string participant_id;
    std::string paragraph_id;
    double probability_is = 0.5;
    Goal label = Goal::InformationSeeking;
};

struct FitOptions {
    nn::TrainConfig train;

    // logistic-global grid (sklearn-style inverse regularization)
    std::vector<double> c_grid = {0.1, 5.0, 10.0, 50.0, 100.0};
    bool try_unpenalized = true;

    // recurrent model
    size_t rnn_hidden = 64;
    size_t rnn_class_embed = 4;
    bool no_eye_features = false; // fixation-ordered word features only

    // transformer
    size_t tf_word_embed = 16;
    size_t tf_d_model = 32;
    size_t tf_heads = 2;
    size_t tf_layers = 2;
    size_t tf_mlp_hidden = 64;
    size_t tf_max_len = 256;

    // image model
    size_t image_size = 32;
};

// One row per hyperparameter candidate, scored on the validation set.
struct SelectionEntry {
    std::string description;
    double val_accuracy = 0.0;
    bool chosen = false;
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ClassifierKind kind() const = 0;
    // Reads only the allowed inputs (gaze, word properties, layout);
    // never goal, question, answer, or critical-span fields.
    virtual Prediction predict(const Trial& trial) = 0;
    virtual void save(std::ostream& out) const = 0;

    std::vector<Prediction> predict_all(const std::vector<const Trial*>& trials);
    const std::vector<SelectionEntry>& selection_report() const { return selection_; }
    void set_selection_report(std::vector<SelectionEntry> entries) {
        selection_ = std::move(entries);
    }

protected:
    std::vector<SelectionEntry> selection_;
};

std::unique_ptr<Classifier> fit_classifier(ClassifierKind kind,
                                           const std::vector<const Trial*>& train,
                                           const std::vector<const Trial*>& val,
                                           const FitOptions& options = {});

std::unique_ptr<Classifier> load_classifier(std::istream& in);
std::unique_ptr<Classifier> load_classifier_file(const std::string& path);
void save_classifier_file(const Classifier& c, const std::string& path);

inline double goal_label(Goal g) { return g == Goal::InformationSeeking ? 1.0 : 0.0; }
inline Goal label_from_probability(double p) {
    return p >= 0.5 ? Goal::InformationSeeking : Goal::OrdinaryReading;
}

double prediction_accuracy(const std::vector<Prediction>& preds,
                           const std::vector<const Trial*>& trials);

} // namespace gazedec
