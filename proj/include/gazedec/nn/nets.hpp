#pragma once

#include "gazedec/core.hpp"
#include "gazedec/nn/layers.hpp"

#include <memory>
#include <vector>

namespace gazedec {
namespace nn {

// One training example. Each network reads the slots it needs.
struct BatchItem {
    // [T, d] per-fixation features (standardized), plus per-fixation
    // incoming-saccade class and word-identity indices
    Tensor fixations;
    std::vector<int> saccade_class;
    std::vector<int> word_id;
    // trial-level feature vector (standardized global features)
    std::vector<double> global;
    // [C,H,W] scanpath image
    Tensor image;
};

class Net {
public:
    virtual ~Net() = default;

    // Forward + backward for one example; accumulates parameter
    // gradients of the BCE loss and returns the loss value.
    virtual double loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) = 0;
    virtual double predict(const BatchItem& item) = 0;

    std::vector<Param*>& params();
    void zero_grads();
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& snap);

protected:
    virtual void collect_params(std::vector<Param*>& out) = 0;

private:
    std::vector<Param*> params_;
};

// Plain feed-forward head over the `global` slot; hidden == 0 gives a
// logistic-equivalent model. Used by toy specs and tests.
class FeedForwardNet : public Net {
public:
    FeedForwardNet(size_t in, size_t hidden, uint64_t seed);

    double loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) override;
    double predict(const BatchItem& item) override;

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    double forward_logit(const BatchItem& item);
    size_t hidden_;
    LinearLayer fc_;
    Tensor act_;
    SigmoidHead head_;
};

struct RnnFixationConfig {
    size_t feature_dim = 7;  // numeric per-fixation features
    size_t class_embed_dim = 4;
    size_t hidden_dim = 64;
    size_t global_dim = 9;
    double dropout = 0.1;
};

// LSTM over fixation vectors; saccade classes pass through a learned
// embedding; the final hidden state is concatenated with the global
// features before the head.
class RnnFixationNet : public Net {
public:
    RnnFixationNet(const RnnFixationConfig& cfg, uint64_t seed);

    double loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) override;
    double predict(const BatchItem& item) override;

    const RnnFixationConfig& config() const { return cfg_; }

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    double forward_logit(const BatchItem& item, bool training, Rng* rng);
    RnnFixationConfig cfg_;
    EmbeddingLayer class_embed_;
    LstmLayer lstm_;
    DropoutLayer dropout_;
    SigmoidHead head_;
    size_t seq_len_ = 0;
};

struct TransformerConfig {
    size_t vocab = 1;          // includes the unknown token at id 0
    size_t word_embed_dim = 16;
    size_t feature_dim = 13;   // standardized fixation vector
    size_t d_model = 32;
    size_t heads = 2;
    size_t layers = 2;
    size_t mlp_hidden = 64;
    size_t max_len = 256;
    double dropout = 0.1;
};

// Input-level fusion: per fixation, word embedding ++ fixation features
// projected to d_model; a classification token is prepended and
// attention blocks run over the sequence.
class TransformerNet : public Net {
public:
    TransformerNet(const TransformerConfig& cfg, uint64_t seed);

    double loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) override;
    double predict(const BatchItem& item) override;

    const TransformerConfig& config() const { return cfg_; }

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    struct Block {
        MultiHeadSelfAttention attn;
        LayerNormLayer norm1;
        MlpLayer mlp;
        LayerNormLayer norm2;
        DropoutLayer drop1, drop2;
        Tensor x_in, after_attn; // residual caches
    };

    double forward_logit(const BatchItem& item, bool training, Rng* rng);
    void backward_from_logit(double dlogit);

    TransformerConfig cfg_;
    EmbeddingLayer word_embed_;
    LinearLayer input_proj_;
    Param cls_;
    DropoutLayer embed_drop_;
    std::vector<std::unique_ptr<Block>> blocks_;
    SigmoidHead head_;
    size_t used_len_ = 0;
    Tensor proj_in_; // cache for input projection backward routing
};

struct ConvNetConfig {
    size_t channels_in = 3;
    size_t image_size = 32;
    size_t c1 = 8, c2 = 16, c3 = 32;
    size_t kernel = 3;
    size_t pool = 2;
    double dropout = 0.1;
};

// Three conv+pool stages over the scanpath image, then a linear head.
class ConvNet : public Net {
public:
    ConvNet(const ConvNetConfig& cfg, uint64_t seed);

    double loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) override;
    double predict(const BatchItem& item) override;

    const ConvNetConfig& config() const { return cfg_; }

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    double forward_logit(const BatchItem& item, bool training, Rng* rng);
    ConvNetConfig cfg_;
    Conv2dLayer conv1_, conv2_, conv3_;
    MaxPoolLayer pool1_, pool2_, pool3_;
    Tensor a1_, a2_, a3_; // tanh caches
    DropoutLayer dropout_;
    size_t flat_dim_ = 0;
    SigmoidHead head_;
};

} // namespace nn
} // namespace gazedec
