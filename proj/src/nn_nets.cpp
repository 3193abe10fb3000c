#include "gazedec/nn/nets.hpp"

#include "gazedec/errors.hpp"

#include <cmath>

namespace gazedec {
namespace nn {

std::vector<Param*>& Net::params() {
    if (params_.empty()) collect_params(params_);
    return params_;
}

void Net::zero_grads() {
    for (Param* p : params()) p->grad.zero();
}

std::vector<Tensor> Net::snapshot() const {
    std::vector<Tensor> out;
    for (Param* p : const_cast<Net*>(this)->params()) out.push_back(p->value);
    return out;
}

void Net::restore(const std::vector<Tensor>& snap) {
    auto& ps = params();
    for (size_t i = 0; i < ps.size(); ++i) ps[i]->value = snap[i];
}

// ---------------------------------------------------------- feed-forward

FeedForwardNet::FeedForwardNet(size_t in, size_t hidden, uint64_t seed) : hidden_(hidden) {
    Rng rng(seed);
    if (hidden_ > 0) {
        fc_ = LinearLayer("ff.fc", in, hidden, rng);
        head_ = SigmoidHead("ff.head", hidden, rng);
    } else {
        head_ = SigmoidHead("ff.head", in, rng);
    }
}

double FeedForwardNet::forward_logit(const BatchItem& item) {
    Tensor x({1, item.global.size()}, item.global);
    if (hidden_ > 0) {
        act_ = tanh_forward(fc_.forward(x));
        return head_.forward_logit(act_);
    }
    return head_.forward_logit(x);
}

double FeedForwardNet::loss_and_grad(const BatchItem& item, double label, bool, Rng&) {
    const double logit = forward_logit(item);
    const double loss = bce_loss(logit, label);
    Tensor dx = head_.backward(bce_grad(logit, label));
    if (hidden_ > 0) fc_.backward(tanh_backward(act_, dx));
    return loss;
}

double FeedForwardNet::predict(const BatchItem& item) { return sigmoid(forward_logit(item)); }

void FeedForwardNet::collect_params(std::vector<Param*>& out) {
    if (hidden_ > 0) fc_.collect(out);
    head_.collect(out);
}

// ------------------------------------------------------------------- RNN

RnnFixationNet::RnnFixationNet(const RnnFixationConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    class_embed_ = EmbeddingLayer("rnn.class_embed", kSaccadeClassCount, cfg.class_embed_dim, rng);
    lstm_ = LstmLayer("rnn.lstm", cfg.feature_dim + cfg.class_embed_dim, cfg.hidden_dim, rng);
    dropout_.set_rate(cfg.dropout);
    head_ = SigmoidHead("rnn.head", cfg.hidden_dim + cfg.global_dim, rng);
}

double RnnFixationNet::forward_logit(const BatchItem& item, bool training, Rng* rng) {
    const size_t T = item.fixations.rows();
    if (item.fixations.cols() != cfg_.feature_dim || item.saccade_class.size() != T)
        throw compute_error(ErrorKind::ShapeMismatch, "rnn: bad fixation input");
    if (item.global.size() != cfg_.global_dim)
        throw compute_error(ErrorKind::ShapeMismatch, "rnn: bad global feature width");
    seq_len_ = T;

    Tensor emb = class_embed_.forward(item.saccade_class);
    Tensor x({T, cfg_.feature_dim + cfg_.class_embed_dim});
    for (size_t t = 0; t < T; ++t) {
        double* r = x.row(t);
        const double* f = item.fixations.row(t);
        for (size_t j = 0; j < cfg_.feature_dim; ++j) r[j] = f[j];
        const double* e = emb.row(t);
        for (size_t j = 0; j < cfg_.class_embed_dim; ++j) r[cfg_.feature_dim + j] = e[j];
    }
    Tensor h = lstm_.forward(x);
    h = dropout_.forward(h, training, rng);

    Tensor cat({1, cfg_.hidden_dim + cfg_.global_dim});
    for (size_t j = 0; j < cfg_.hidden_dim; ++j) cat.data[j] = h.data[j];
    for (size_t j = 0; j < cfg_.global_dim; ++j) cat.data[cfg_.hidden_dim + j] = item.global[j];
    const double logit = head_.forward_logit(cat);
    if (!std::isfinite(logit))
        throw compute_error(ErrorKind::NonFiniteActivation, "rnn: non-finite logit");
    return logit;
}

double RnnFixationNet::loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) {
    const double logit = forward_logit(item, training, &rng);
    const double loss = bce_loss(logit, label);
    Tensor dcat = head_.backward(bce_grad(logit, label));

    Tensor dh({1, cfg_.hidden_dim});
    for (size_t j = 0; j < cfg_.hidden_dim; ++j) dh.data[j] = dcat.data[j];
    dh = dropout_.backward(dh);
    Tensor dx = lstm_.backward(dh);

    Tensor demb({seq_len_, cfg_.class_embed_dim});
    for (size_t t = 0; t < seq_len_; ++t) {
        const double* r = dx.row(t);
        double* e = demb.row(t);
        for (size_t j = 0; j < cfg_.class_embed_dim; ++j) e[j] = r[cfg_.feature_dim + j];
    }
    class_embed_.backward(demb);
    return loss;
}

double RnnFixationNet::predict(const BatchItem& item) {
    return sigmoid(forward_logit(item, false, nullptr));
}

void RnnFixationNet::collect_params(std::vector<Param*>& out) {
    class_embed_.collect(out);
    lstm_.collect(out);
    head_.collect(out);
}

// ----------------------------------------------------------- transformer

TransformerNet::TransformerNet(const TransformerConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    word_embed_ = EmbeddingLayer("tf.word_embed", cfg.vocab, cfg.word_embed_dim, rng);
    input_proj_ =
        LinearLayer("tf.input_proj", cfg.word_embed_dim + cfg.feature_dim, cfg.d_model, rng);
    cls_ = Param("tf.cls", {cfg.d_model});
    cls_.init_uniform(rng, 0.5 / std::sqrt(static_cast<double>(cfg.d_model)));
    embed_drop_.set_rate(cfg.dropout);
    for (size_t l = 0; l < cfg.layers; ++l) {
        auto blk = std::make_unique<Block>();
        const std::string prefix = "tf.block" + std::to_string(l);
        blk->attn = MultiHeadSelfAttention(prefix + ".attn", cfg.d_model, cfg.heads, rng);
        blk->norm1 = LayerNormLayer(prefix + ".norm1", cfg.d_model);
        blk->mlp = MlpLayer(prefix + ".mlp", cfg.d_model, cfg.mlp_hidden, rng);
        blk->norm2 = LayerNormLayer(prefix + ".norm2", cfg.d_model);
        blk->drop1.set_rate(cfg.dropout);
        blk->drop2.set_rate(cfg.dropout);
        blocks_.push_back(std::move(blk));
    }
    head_ = SigmoidHead("tf.head", cfg.d_model, rng);
}

double TransformerNet::forward_logit(const BatchItem& item, bool training, Rng* rng) {
    size_t T = item.fixations.rows();
    if (item.fixations.cols() != cfg_.feature_dim || item.word_id.size() != T)
        throw compute_error(ErrorKind::ShapeMismatch, "transformer: bad fixation input");
    T = std::min(T, cfg_.max_len);
    used_len_ = T;

    std::vector<int> ids(item.word_id.begin(), item.word_id.begin() + static_cast<long>(T));
    Tensor emb = word_embed_.forward(ids);

    proj_in_ = Tensor({T, cfg_.word_embed_dim + cfg_.feature_dim});
    for (size_t t = 0; t < T; ++t) {
        double* r = proj_in_.row(t);
        const double* e = emb.row(t);
        for (size_t j = 0; j < cfg_.word_embed_dim; ++j) r[j] = e[j];
        const double* f = item.fixations.row(t);
        for (size_t j = 0; j < cfg_.feature_dim; ++j) r[cfg_.word_embed_dim + j] = f[j];
    }
    Tensor tokens = input_proj_.forward(proj_in_);

    Tensor x({T + 1, cfg_.d_model});
    for (size_t j = 0; j < cfg_.d_model; ++j) x.data[j] = cls_.value.data[j];
    for (size_t t = 0; t < T; ++t) {
        double* r = x.row(t + 1);
        const double* s = tokens.row(t);
        for (size_t j = 0; j < cfg_.d_model; ++j) r[j] = s[j];
    }
    x = embed_drop_.forward(x, training, rng);

    for (auto& blk : blocks_) {
        blk->x_in = x;
        Tensor a = blk->attn.forward(x);
        a = blk->drop1.forward(a, training, rng);
        for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += x.data[i];
        Tensor n1 = blk->norm1.forward(a);
        blk->after_attn = n1;
        Tensor m = blk->mlp.forward(n1);
        m = blk->drop2.forward(m, training, rng);
        for (size_t i = 0; i < m.data.size(); ++i) m.data[i] += n1.data[i];
        x = blk->norm2.forward(m);
    }

    Tensor cls_out({1, cfg_.d_model});
    for (size_t j = 0; j < cfg_.d_model; ++j) cls_out.data[j] = x.at(0, j);
    const double logit = head_.forward_logit(cls_out);
    if (!std::isfinite(logit))
        throw compute_error(ErrorKind::NonFiniteActivation, "transformer: non-finite logit");
    return logit;
}

void TransformerNet::backward_from_logit(double dlogit) {
    Tensor dcls = head_.backward(dlogit);
    const size_t T = used_len_;
    Tensor dx({T + 1, cfg_.d_model});
    for (size_t j = 0; j < cfg_.d_model; ++j) dx.at(0, j) = dcls.data[j];

    for (size_t bi = blocks_.size(); bi-- > 0;) {
        Block& blk = *blocks_[bi];
        Tensor dm = blk.norm2.backward(dx);
        // residual: dm flows to both the MLP branch and norm1 output
        Tensor dmlp_out = blk.drop2.backward(dm);
        Tensor dn1 = blk.mlp.backward(dmlp_out);
        for (size_t i = 0; i < dn1.data.size(); ++i) dn1.data[i] += dm.data[i];
        Tensor da = blk.norm1.backward(dn1);
        Tensor dattn_out = blk.drop1.backward(da);
        Tensor dxin = blk.attn.backward(dattn_out);
        for (size_t i = 0; i < dxin.data.size(); ++i) dxin.data[i] += da.data[i];
        dx = std::move(dxin);
    }
    dx = embed_drop_.backward(dx);

    for (size_t j = 0; j < cfg_.d_model; ++j) cls_.grad.data[j] += dx.at(0, j);
    Tensor dtokens({T, cfg_.d_model});
    for (size_t t = 0; t < T; ++t)
        for (size_t j = 0; j < cfg_.d_model; ++j) dtokens.at(t, j) = dx.at(t + 1, j);

    Tensor dproj_in = input_proj_.backward(dtokens);
    Tensor demb({T, cfg_.word_embed_dim});
    for (size_t t = 0; t < T; ++t)
        for (size_t j = 0; j < cfg_.word_embed_dim; ++j) demb.at(t, j) = dproj_in.at(t, j);
    word_embed_.backward(demb);
}

double TransformerNet::loss_and_grad(const BatchItem& item, double label, bool training,
                                     Rng& rng) {
    const double logit = forward_logit(item, training, &rng);
    const double loss = bce_loss(logit, label);
    backward_from_logit(bce_grad(logit, label));
    return loss;
}

double TransformerNet::predict(const BatchItem& item) {
    return sigmoid(forward_logit(item, false, nullptr));
}

void TransformerNet::collect_params(std::vector<Param*>& out) {
    word_embed_.collect(out);
    input_proj_.collect(out);
    out.push_back(&cls_);
    for (auto& blk : blocks_) {
        blk->attn.collect(out);
        blk->norm1.collect(out);
        blk->mlp.collect(out);
        blk->norm2.collect(out);
    }
    head_.collect(out);
}

// ----------------------------------------------------------------- conv

ConvNet::ConvNet(const ConvNetConfig& cfg, uint64_t seed)
    : cfg_(cfg), pool1_(cfg.pool), pool2_(cfg.pool), pool3_(cfg.pool) {
    Rng rng(seed);
    conv1_ = Conv2dLayer("cnn.conv1", cfg.channels_in, cfg.c1, cfg.kernel, 1, rng);
    conv2_ = Conv2dLayer("cnn.conv2", cfg.c1, cfg.c2, cfg.kernel, 1, rng);
    conv3_ = Conv2dLayer("cnn.conv3", cfg.c2, cfg.c3, cfg.kernel, 1, rng);
    dropout_.set_rate(cfg.dropout);

    size_t s = cfg.image_size;
    for (int stage = 0; stage < 3; ++stage) {
        if (s < cfg.kernel)
            throw compute_error(ErrorKind::InvalidConfig, "convnet: image too small for the stack");
        s = (s - cfg.kernel + 1) / cfg.pool;
        if (s == 0)
            throw compute_error(ErrorKind::InvalidConfig, "convnet: image too small for the stack");
    }
    flat_dim_ = cfg.c3 * s * s;
    head_ = SigmoidHead("cnn.head", flat_dim_, rng);
}

double ConvNet::forward_logit(const BatchItem& item, bool training, Rng* rng) {
    if (item.image.shape.size() != 3 || item.image.shape[0] != cfg_.channels_in)
        throw compute_error(ErrorKind::ShapeMismatch, "convnet: bad image shape");
    Tensor x = conv1_.forward(item.image);
    a1_ = tanh_forward(x);
    x = pool1_.forward(a1_);
    x = conv2_.forward(x);
    a2_ = tanh_forward(x);
    x = pool2_.forward(a2_);
    x = conv3_.forward(x);
    a3_ = tanh_forward(x);
    x = pool3_.forward(a3_);

    Tensor flat({1, flat_dim_}, x.data);
    flat = dropout_.forward(flat, training, rng);
    const double logit = head_.forward_logit(flat);
    if (!std::isfinite(logit))
        throw compute_error(ErrorKind::NonFiniteActivation, "convnet: non-finite logit");
    return logit;
}

double ConvNet::loss_and_grad(const BatchItem& item, double label, bool training, Rng& rng) {
    const double logit = forward_logit(item, training, &rng);
    const double loss = bce_loss(logit, label);
    Tensor dflat = head_.backward(bce_grad(logit, label));
    dflat = dropout_.backward(dflat);

    // MaxPool backward only consumes the flat gradient values
    Tensor d = pool3_.backward(Tensor({dflat.data.size()}, dflat.data));
    d = tanh_backward(a3_, d);
    d = conv3_.backward(d);
    d = pool2_.backward(d);
    d = tanh_backward(a2_, d);
    d = conv2_.backward(d);
    d = pool1_.backward(d);
    d = tanh_backward(a1_, d);
    conv1_.backward(d);
    return loss;
}

double ConvNet::predict(const BatchItem& item) {
    return sigmoid(forward_logit(item, false, nullptr));
}

void ConvNet::collect_params(std::vector<Param*>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    conv3_.collect(out);
    head_.collect(out);
}

} // namespace nn
} // namespace gazedec
