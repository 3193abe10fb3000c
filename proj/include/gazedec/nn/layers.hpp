#pragma once

#include "gazedec/nn/tensor.hpp"

#include <string>
#include <vector>

namespace gazedec {
namespace nn {

// Layers hold their parameters, gradient buffers, and the forward
// caches needed by the matching backward call. One sample is processed
// at a time; batching accumulates gradients across samples.

class LinearLayer {
public:
    LinearLayer() = default;
    LinearLayer(const std::string& name, size_t in, size_t out, Rng& rng);

    // x: [n, in] -> [n, out]
    Tensor forward(const Tensor& x);
    // dy: [n, out] -> dx [n, in]; accumulates parameter grads
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);
    size_t in_dim() const { return W.value.cols(); }
    size_t out_dim() const { return W.value.rows(); }

    Param W, b;

private:
    Tensor x_cache_;
};

class EmbeddingLayer {
public:
    EmbeddingLayer() = default;
    EmbeddingLayer(const std::string& name, size_t vocab, size_t dim, Rng& rng);

    Tensor forward(const std::vector<int>& indices); // [n, dim]
    void backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);
    size_t dim() const { return table.value.cols(); }
    size_t vocab() const { return table.value.rows(); }

    Param table;

private:
    std::vector<int> idx_cache_;
};

// Standard LSTM over a whole sequence; returns the final hidden state.
class LstmLayer {
public:
    LstmLayer() = default;
    LstmLayer(const std::string& name, size_t in, size_t hidden, Rng& rng);

    // x: [T, in] -> h_T [1, hidden]
    Tensor forward(const Tensor& x);
    // dh_T: [1, hidden] -> dx [T, in]
    Tensor backward(const Tensor& dh_last);

    void collect(std::vector<Param*>& out);
    size_t hidden() const { return hidden_; }

    Param Wx, Wh, b; // gate order: input, forget, cell, output

private:
    size_t in_ = 0, hidden_ = 0;
    Tensor x_cache_;
    std::vector<std::vector<double>> gates_; // per t: i,f,g,o concatenated (4H)
    std::vector<std::vector<double>> c_, h_, tanh_c_;
};

class MultiHeadSelfAttention {
public:
    MultiHeadSelfAttention() = default;
    MultiHeadSelfAttention(const std::string& name, size_t d_model, size_t heads, Rng& rng);

    Tensor forward(const Tensor& x); // [T, d] -> [T, d]
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);

    Param Wq, bq, Wk, bk, Wv, bv, Wo, bo;

private:
    size_t d_ = 0, heads_ = 0, dh_ = 0;
    Tensor x_cache_, q_, k_, v_, attn_, concat_;
};

class LayerNormLayer {
public:
    LayerNormLayer() = default;
    LayerNormLayer(const std::string& name, size_t dim);

    Tensor forward(const Tensor& x); // normalizes the last dim per row
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);

    Param gamma, beta;

private:
    Tensor xhat_;
    std::vector<double> inv_std_;
    // small enough that unit-variance input passes through unchanged
    static constexpr double kEps = 1e-8;
};

// Linear -> tanh -> Linear, the transformer feed-forward block.
class MlpLayer {
public:
    MlpLayer() = default;
    MlpLayer(const std::string& name, size_t dim, size_t hidden, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);

    LinearLayer fc1, fc2;

private:
    Tensor act_cache_;
};

class Conv2dLayer {
public:
    Conv2dLayer() = default;
    Conv2dLayer(const std::string& name, size_t in_ch, size_t out_ch, size_t kernel,
                size_t stride, Rng& rng);

    // x: [C,H,W] flattened into shape {C,H,W}
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);
    size_t out_ch() const { return out_ch_; }

    Param W, b; // W: [out_ch, in_ch*k*k]

private:
    size_t in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 0;
    Tensor x_cache_;
};

class MaxPoolLayer {
public:
    explicit MaxPoolLayer(size_t k = 2) : k_(k) {}

    Tensor forward(const Tensor& x); // [C,H,W] -> [C,H/k,W/k]
    Tensor backward(const Tensor& dy);

private:
    size_t k_;
    std::vector<size_t> argmax_;
    std::vector<size_t> in_shape_;
};

// Inverted dropout; identity when rate == 0, not training, or no rng.
class DropoutLayer {
public:
    explicit DropoutLayer(double rate = 0.0) : rate_(rate) {}

    Tensor forward(const Tensor& x, bool training, Rng* rng);
    Tensor backward(const Tensor& dy);

    void set_rate(double r) { rate_ = r; }

private:
    double rate_;
    std::vector<double> mask_;
    bool active_ = false;
};

// Final projection to a single logit plus the sigmoid/BCE pieces.
class SigmoidHead {
public:
    SigmoidHead() = default;
    SigmoidHead(const std::string& name, size_t in, Rng& rng);

    double forward_logit(const Tensor& x); // x: [1, in]
    // d(loss)/d(logit) -> dx [1, in]
    Tensor backward(double dlogit);

    void collect(std::vector<Param*>& out);

    LinearLayer proj;
};

double sigmoid(double z);
// numerically stable; y in {0,1}
double bce_loss(double logit, double y);
// d(bce)/d(logit) = sigmoid(logit) - y
double bce_grad(double logit, double y);

Tensor tanh_forward(const Tensor& x);
Tensor tanh_backward(const Tensor& y, const Tensor& dy); // y = tanh(x)

} // namespace nn
} // namespace gazedec
