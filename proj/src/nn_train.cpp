#include "gazedec/nn/train.hpp"

#include "gazedec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazedec {
namespace nn {

void TrainConfig::validate() const {
    if (learning_rate <= 0 || batch_size <= 0 || max_epochs <= 0 || early_stop_patience <= 0 ||
        warmup_ratio < 0 || weight_decay < 0 || dropout_rate < 0 || dropout_rate >= 1)
        throw compute_error(ErrorKind::InvalidConfig, "train config values must be positive");
    if (early_stop_patience >= max_epochs)
        throw compute_error(ErrorKind::InvalidConfig, "patience must be below max_epochs");
}

AdamW::AdamW(std::vector<Param*> params, const TrainConfig& cfg, size_t total_steps)
    : params_(std::move(params)), lr_(cfg.learning_rate), weight_decay_(cfg.weight_decay) {
    warmup_steps_ = static_cast<size_t>(std::ceil(cfg.warmup_ratio * static_cast<double>(total_steps)));
    for (Param* p : params_) {
        m_.emplace_back(p->value.shape);
        v_.emplace_back(p->value.shape);
    }
}

double AdamW::current_lr() const {
    if (warmup_steps_ == 0 || t_ >= warmup_steps_) return lr_;
    return lr_ * static_cast<double>(t_ + 1) / static_cast<double>(warmup_steps_);
}

void AdamW::step() {
    const double lr_t = current_lr();
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Param& p = *params_[pi];
        double* m = m_[pi].data.data();
        double* v = v_[pi].data.data();
        for (size_t i = 0; i < p.value.data.size(); ++i) {
            const double g = p.grad.data[i];
            if (!std::isfinite(g))
                throw compute_error(ErrorKind::NonFiniteGradient,
                                    p.name + ": non-finite gradient in optimizer step");
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value.data[i] -= lr_t * (mhat / (std::sqrt(vhat) + kEps) + weight_decay_ * p.value.data[i]);
        }
    }
}

double accuracy(Net& net, const std::vector<BatchItem>& items, const std::vector<double>& labels) {
    if (items.empty()) return 0.0;
    size_t correct = 0;
    for (size_t i = 0; i < items.size(); ++i) {
        const double p = net.predict(items[i]);
        const int pred = p >= 0.5 ? 1 : 0;
        if (pred == static_cast<int>(labels[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(items.size());
}

TrainResult train(Net& net, const std::vector<BatchItem>& train_items,
                  const std::vector<double>& train_labels,
                  const std::vector<BatchItem>& val_items,
                  const std::vector<double>& val_labels, const TrainConfig& cfg) {
    cfg.validate();
    if (train_items.empty() || val_items.empty())
        throw compute_error(ErrorKind::EmptyTrainingSet, "train/val sets must be nonempty");

    const size_t n = train_items.size();
    const size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    AdamW opt(net.params(), cfg, batches_per_epoch * static_cast<size_t>(cfg.max_epochs));

    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});

    TrainResult result;
    std::vector<Tensor> best_snapshot = net.snapshot();

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;

        for (size_t start = 0; start < n; start += cfg.batch_size) {
            const size_t end = std::min(n, start + cfg.batch_size);
            net.zero_grads();
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                const size_t idx = order[i];
                batch_loss +=
                    net.loss_and_grad(train_items[idx], train_labels[idx], true, dropout_rng);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            if (!std::isfinite(batch_loss))
                throw compute_error(ErrorKind::DivergedTraining, "non-finite training loss");
            for (Param* p : net.params())
                for (double& g : p->grad.data) g *= inv;
            opt.step();
            epoch_loss += batch_loss;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss / static_cast<double>(n);
        stats.val_accuracy = accuracy(net, val_items, val_labels);
        result.history.push_back(stats);

        if (stats.val_accuracy > result.best_val_accuracy || result.best_epoch == 0) {
            result.best_val_accuracy = stats.val_accuracy;
            result.best_epoch = epoch;
            best_snapshot = net.snapshot();
        } else if (epoch - result.best_epoch >= cfg.early_stop_patience) {
            break;
        }
    }

    net.restore(best_snapshot);
    return result;
}

double grad_check(Net& net, const std::vector<BatchItem>& items,
                  const std::vector<double>& labels, double epsilon) {
    Rng dummy(0);
    auto mean_loss = [&]() {
        double s = 0;
        for (size_t i = 0; i < items.size(); ++i)
            s += net.loss_and_grad(items[i], labels[i], false, dummy);
        return s / static_cast<double>(items.size());
    };

    // analytic gradients of the mean loss
    net.zero_grads();
    for (size_t i = 0; i < items.size(); ++i) {
        Rng r(0);
        net.loss_and_grad(items[i], labels[i], false, r);
    }
    std::vector<Tensor> analytic;
    for (Param* p : net.params()) {
        Tensor g = p->grad;
        for (double& v : g.data) v /= static_cast<double>(items.size());
        analytic.push_back(std::move(g));
    }

    double max_rel = 0.0;
    auto& params = net.params();
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Param& p = *params[pi];
        for (size_t i = 0; i < p.value.data.size(); ++i) {
            const double orig = p.value.data[i];
            p.value.data[i] = orig + epsilon;
            const double fp = mean_loss();
            p.value.data[i] = orig - epsilon;
            const double fm = mean_loss();
            p.value.data[i] = orig;
            const double fd = (fp - fm) / (2.0 * epsilon);
            const double a = analytic[pi].data[i];
            // floor keeps FD truncation/roundoff on negligible gradients
            // from registering as relative error; any live-path error
            // shows at gradient scale and is unaffected
            const double denom = std::max({std::abs(a), std::abs(fd), 1e-5});
            max_rel = std::max(max_rel, std::abs(a - fd) / denom);
        }
    }
    return max_rel;
}

namespace {

// Scalar gain -> MaxPool -> Linear head. The image is positive and the
// gain stays positive under the FD perturbation, so the pooling argmax
// cannot flip while the pooling backward is still on the gradient path.
class MaxPoolProbeNet : public Net {
public:
    MaxPoolProbeNet(size_t channels, size_t size, size_t pool, uint64_t seed)
        : pool_(pool) {
        Rng rng(seed);
        gain_ = Param("poolprobe.gain", {1});
        gain_.value.data[0] = 1.0;
        const size_t s = size / pool;
        head_ = SigmoidHead("poolprobe.head", channels * s * s, rng);
    }

    double loss_and_grad(const BatchItem& item, double label, bool, Rng&) override {
        const double logit = forward_logit(item);
        const double loss = bce_loss(logit, label);
        Tensor dflat = head_.backward(bce_grad(logit, label));
        Tensor dpool = pool_.backward(Tensor({dflat.data.size()}, dflat.data));
        double g = 0;
        for (size_t i = 0; i < dpool.data.size(); ++i) g += dpool.data[i] * item.image.data[i];
        gain_.grad.data[0] += g;
        return loss;
    }

    double predict(const BatchItem& item) override { return sigmoid(forward_logit(item)); }

protected:
    void collect_params(std::vector<Param*>& out) override {
        out.push_back(&gain_);
        head_.collect(out);
    }

private:
    double forward_logit(const BatchItem& item) {
        Tensor scaled = item.image;
        for (double& v : scaled.data) v *= gain_.value.data[0];
        Tensor pooled = pool_.forward(scaled);
        Tensor flat({1, pooled.data.size()}, pooled.data);
        return head_.forward_logit(flat);
    }
    Param gain_;
    MaxPoolLayer pool_;
    SigmoidHead head_;
};

BatchItem random_item(uint64_t seed, size_t T, size_t feat_dim, size_t global_dim,
                      size_t vocab, size_t img_ch, size_t img_size) {
    Rng rng(seed);
    BatchItem item;
    item.fixations = Tensor({T, feat_dim});
    for (double& v : item.fixations.data) v = rnorm(rng);
    item.saccade_class.resize(T);
    item.word_id.resize(T);
    for (size_t t = 0; t < T; ++t) {
        item.saccade_class[t] = static_cast<int>(runif(rng, 0.0, kSaccadeClassCount)) % kSaccadeClassCount;
        item.word_id[t] = static_cast<int>(runif(rng, 0.0, static_cast<double>(vocab))) %
                          static_cast<int>(vocab);
    }
    item.global.resize(global_dim);
    for (double& v : item.global) v = rnorm(rng);
    if (img_ch > 0) {
        item.image = Tensor({img_ch, img_size, img_size});
        for (double& v : item.image.data) v = runif(rng);
    }
    return item;
}

} // namespace

std::vector<LayerProbeResult> grad_check_all_layers(uint64_t seed, double epsilon) {
    std::vector<LayerProbeResult> results;

    auto run = [&](const std::string& name, Net& net, const std::vector<BatchItem>& items,
                   const std::vector<double>& labels) {
        results.push_back({name, grad_check(net, items, labels, epsilon)});
    };

    std::vector<double> labels = {1.0, 0.0, 1.0};
    auto items3 = [&](size_t T, size_t feat, size_t glob, size_t vocab, size_t ch, size_t img) {
        std::vector<BatchItem> v;
        for (uint64_t i = 0; i < 3; ++i)
            v.push_back(random_item(derive_seed(seed, "item", i), T, feat, glob, vocab, ch, img));
        return v;
    };

    { // Linear + SigmoidHead on a plain feature vector
        FeedForwardNet net(5, 0, derive_seed(seed, "linear"));
        run("linear", net, items3(1, 1, 5, 1, 0, 0), labels);
        FeedForwardNet net2(5, 4, derive_seed(seed, "sigmoid_head"));
        run("sigmoid_head", net2, items3(1, 1, 5, 1, 0, 0), labels);
    }
    { // Embedding + LstmCell via the recurrent net
        RnnFixationConfig cfg;
        cfg.feature_dim = 4;
        cfg.class_embed_dim = 3;
        cfg.hidden_dim = 5;
        cfg.global_dim = 3;
        cfg.dropout = 0.0;
        RnnFixationNet net(cfg, derive_seed(seed, "lstm"));
        auto items = items3(6, 4, 3, 1, 0, 0);
        run("embedding", net, items, labels);
        results.back().layer = "embedding";
        RnnFixationNet net2(cfg, derive_seed(seed, "lstm2"));
        run("lstm_cell", net2, items, labels);
    }
    { // MultiHeadSelfAttention + LayerNorm + Mlp via the transformer
        TransformerConfig cfg;
        cfg.vocab = 7;
        cfg.word_embed_dim = 4;
        cfg.feature_dim = 5;
        cfg.d_model = 8;
        cfg.heads = 2;
        cfg.layers = 1;
        cfg.mlp_hidden = 6;
        cfg.dropout = 0.0;
        auto items = items3(5, 5, 1, 7, 0, 0);
        TransformerNet net(cfg, derive_seed(seed, "attn"));
        run("multi_head_self_attention", net, items, labels);
        TransformerNet net2(cfg, derive_seed(seed, "ln"));
        run("layer_norm", net2, items, labels);
        TransformerNet net3(cfg, derive_seed(seed, "mlp"));
        run("mlp", net3, items, labels);
    }
    { // Conv2d + MaxPool via the image net
        ConvNetConfig cfg;
        cfg.channels_in = 2;
        cfg.image_size = 10;
        cfg.c1 = 3;
        cfg.c2 = 3;
        cfg.c3 = 4;
        cfg.pool = 1; // keep spatial extent through the tiny stack
        cfg.dropout = 0.0;
        auto items = items3(1, 1, 1, 1, 2, 10);
        ConvNet net(cfg, derive_seed(seed, "conv"));
        run("conv2d", net, items, labels);
        MaxPoolProbeNet net2(2, 8, 2, derive_seed(seed, "pool"));
        auto items2 = items3(1, 1, 1, 1, 2, 8);
        run("max_pool", net2, items2, labels);
    }
    return results;
}

} // namespace nn
} // namespace gazedec
