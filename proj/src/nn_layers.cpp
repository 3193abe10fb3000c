#include "gazedec/nn/layers.hpp"

#include "gazedec/errors.hpp"

#include <cmath>

namespace gazedec {
namespace nn {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce_loss(double logit, double y) {
    const double softplus = logit > 30 ? logit : std::log1p(std::exp(std::min(logit, 30.0)));
    return softplus - y * logit;
}

double bce_grad(double logit, double y) { return sigmoid(logit) - y; }

Tensor tanh_forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = std::tanh(v);
    return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= 1.0 - y.data[i] * y.data[i];
    return dx;
}

// ---------------------------------------------------------------- Linear

LinearLayer::LinearLayer(const std::string& name, size_t in, size_t out, Rng& rng)
    : W(name + ".W", {out, in}), b(name + ".b", {out}) {
    W.init_uniform(rng, std::sqrt(6.0 / static_cast<double>(in + out)));
}

Tensor LinearLayer::forward(const Tensor& x) {
    if (x.cols() != in_dim())
        throw compute_error(ErrorKind::ShapeMismatch,
                            W.name + ": input dim " + std::to_string(x.cols()) + " != " +
                                std::to_string(in_dim()));
    x_cache_ = x;
    Tensor y;
    linear_forward(x, W.value, b.value, y);
    return y;
}

Tensor LinearLayer::backward(const Tensor& dy) {
    Tensor dx;
    linear_backward(x_cache_, W.value, dy, W.grad, b.grad, dx);
    return dx;
}

void LinearLayer::collect(std::vector<Param*>& out) {
    out.push_back(&W);
    out.push_back(&b);
}

// ------------------------------------------------------------- Embedding

EmbeddingLayer::EmbeddingLayer(const std::string& name, size_t vocab, size_t dim, Rng& rng)
    : table(name + ".table", {vocab, dim}) {
    table.init_uniform(rng, 0.5 / std::sqrt(static_cast<double>(dim)));
}

Tensor EmbeddingLayer::forward(const std::vector<int>& indices) {
    idx_cache_ = indices;
    Tensor y({indices.size(), dim()});
    for (size_t i = 0; i < indices.size(); ++i) {
        const double* src = table.value.row(static_cast<size_t>(indices[i]));
        double* dst = y.row(i);
        for (size_t j = 0; j < dim(); ++j) dst[j] = src[j];
    }
    return y;
}

void EmbeddingLayer::backward(const Tensor& dy) {
    for (size_t i = 0; i < idx_cache_.size(); ++i) {
        double* g = table.grad.row(static_cast<size_t>(idx_cache_[i]));
        const double* d = dy.row(i);
        for (size_t j = 0; j < dim(); ++j) g[j] += d[j];
    }
}

void EmbeddingLayer::collect(std::vector<Param*>& out) { out.push_back(&table); }

// ------------------------------------------------------------------ LSTM

LstmLayer::LstmLayer(const std::string& name, size_t in, size_t hidden, Rng& rng)
    : Wx(name + ".Wx", {4 * hidden, in}),
      Wh(name + ".Wh", {4 * hidden, hidden}),
      b(name + ".b", {4 * hidden}),
      in_(in),
      hidden_(hidden) {
    Wx.init_uniform(rng, std::sqrt(6.0 / static_cast<double>(in + hidden)));
    Wh.init_uniform(rng, std::sqrt(6.0 / static_cast<double>(2 * hidden)));
    // forget-gate bias starts positive
    for (size_t j = hidden; j < 2 * hidden; ++j) b.value.data[j] = 1.0;
}

Tensor LstmLayer::forward(const Tensor& x) {
    if (x.cols() != in_)
        throw compute_error(ErrorKind::ShapeMismatch, Wx.name + ": bad LSTM input width");
    const size_t T = x.rows();
    const size_t H = hidden_;
    x_cache_ = x;
    gates_.assign(T, std::vector<double>(4 * H, 0.0));
    c_.assign(T, std::vector<double>(H, 0.0));
    h_.assign(T, std::vector<double>(H, 0.0));
    tanh_c_.assign(T, std::vector<double>(H, 0.0));

    std::vector<double> a(4 * H);
    for (size_t t = 0; t < T; ++t) {
        const double* xt = x.row(t);
        const double* hprev = t > 0 ? h_[t - 1].data() : nullptr;
        for (size_t r = 0; r < 4 * H; ++r) {
            double s = b.value.data[r];
            const double* wx = Wx.value.row(r);
            for (size_t j = 0; j < in_; ++j) s += wx[j] * xt[j];
            if (hprev) {
                const double* wh = Wh.value.row(r);
                for (size_t j = 0; j < H; ++j) s += wh[j] * hprev[j];
            }
            a[r] = s;
        }
        auto& g = gates_[t];
        for (size_t j = 0; j < H; ++j) {
            const double i_g = sigmoid(a[j]);
            const double f_g = sigmoid(a[H + j]);
            const double g_g = std::tanh(a[2 * H + j]);
            const double o_g = sigmoid(a[3 * H + j]);
            g[j] = i_g;
            g[H + j] = f_g;
            g[2 * H + j] = g_g;
            g[3 * H + j] = o_g;
            const double cprev = t > 0 ? c_[t - 1][j] : 0.0;
            c_[t][j] = f_g * cprev + i_g * g_g;
            tanh_c_[t][j] = std::tanh(c_[t][j]);
            h_[t][j] = o_g * tanh_c_[t][j];
        }
    }
    Tensor out({1, H});
    for (size_t j = 0; j < H; ++j) out.data[j] = h_[T - 1][j];
    return out;
}

Tensor LstmLayer::backward(const Tensor& dh_last) {
    const size_t T = x_cache_.rows();
    const size_t H = hidden_;
    Tensor dx({T, in_});

    std::vector<double> dh(dh_last.data);
    std::vector<double> dc(H, 0.0);
    std::vector<double> da(4 * H);

    for (size_t t = T; t-- > 0;) {
        const auto& g = gates_[t];
        for (size_t j = 0; j < H; ++j) {
            const double i_g = g[j], f_g = g[H + j], g_g = g[2 * H + j], o_g = g[3 * H + j];
            const double tc = tanh_c_[t][j];
            const double do_ = dh[j] * tc;
            const double dct = dh[j] * o_g * (1.0 - tc * tc) + dc[j];
            const double cprev = t > 0 ? c_[t - 1][j] : 0.0;
            const double di = dct * g_g;
            const double df = dct * cprev;
            const double dg = dct * i_g;
            da[j] = di * i_g * (1.0 - i_g);
            da[H + j] = df * f_g * (1.0 - f_g);
            da[2 * H + j] = dg * (1.0 - g_g * g_g);
            da[3 * H + j] = do_ * o_g * (1.0 - o_g);
            dc[j] = dct * f_g;
        }

        const double* xt = x_cache_.row(t);
        const double* hprev = t > 0 ? h_[t - 1].data() : nullptr;
        double* dxt = dx.row(t);
        std::fill(dh.begin(), dh.end(), 0.0);
        for (size_t r = 0; r < 4 * H; ++r) {
            const double d = da[r];
            if (d == 0.0) continue;
            double* gwx = Wx.grad.row(r);
            const double* wx = Wx.value.row(r);
            for (size_t j = 0; j < in_; ++j) {
                gwx[j] += d * xt[j];
                dxt[j] += d * wx[j];
            }
            b.grad.data[r] += d;
            if (hprev) {
                double* gwh = Wh.grad.row(r);
                const double* wh = Wh.value.row(r);
                for (size_t j = 0; j < H; ++j) {
                    gwh[j] += d * hprev[j];
                    dh[j] += d * wh[j];
                }
            }
        }
    }
    return dx;
}

void LstmLayer::collect(std::vector<Param*>& out) {
    out.push_back(&Wx);
    out.push_back(&Wh);
    out.push_back(&b);
}

// ------------------------------------------------------------- attention

MultiHeadSelfAttention::MultiHeadSelfAttention(const std::string& name, size_t d_model,
                                               size_t heads, Rng& rng)
    : Wq(name + ".Wq", {d_model, d_model}),
      bq(name + ".bq", {d_model}),
      Wk(name + ".Wk", {d_model, d_model}),
      bk(name + ".bk", {d_model}),
      Wv(name + ".Wv", {d_model, d_model}),
      bv(name + ".bv", {d_model}),
      Wo(name + ".Wo", {d_model, d_model}),
      bo(name + ".bo", {d_model}),
      d_(d_model),
      heads_(heads),
      dh_(d_model / heads) {
    if (d_model % heads != 0)
        throw compute_error(ErrorKind::InvalidConfig, "d_model must be divisible by heads");
    const double s = std::sqrt(3.0 / static_cast<double>(d_model));
    Wq.init_uniform(rng, s);
    Wk.init_uniform(rng, s);
    Wv.init_uniform(rng, s);
    Wo.init_uniform(rng, s);
}

Tensor MultiHeadSelfAttention::forward(const Tensor& x) {
    if (x.cols() != d_)
        throw compute_error(ErrorKind::ShapeMismatch, Wq.name + ": bad attention input width");
    const size_t T = x.rows();
    x_cache_ = x;
    linear_forward(x, Wq.value, bq.value, q_);
    linear_forward(x, Wk.value, bk.value, k_);
    linear_forward(x, Wv.value, bv.value, v_);

    attn_ = Tensor({heads_, T * T});
    concat_ = Tensor({T, d_});
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));

    std::vector<double> row(T);
    for (size_t h = 0; h < heads_; ++h) {
        const size_t off = h * dh_;
        double* ah = attn_.row(h);
        for (size_t i = 0; i < T; ++i) {
            double maxv = -1e300;
            for (size_t j = 0; j < T; ++j) {
                double s = 0;
                const double* qi = q_.row(i) + off;
                const double* kj = k_.row(j) + off;
                for (size_t p = 0; p < dh_; ++p) s += qi[p] * kj[p];
                row[j] = s * scale;
                maxv = std::max(maxv, row[j]);
            }
            double z = 0;
            for (size_t j = 0; j < T; ++j) {
                row[j] = std::exp(row[j] - maxv);
                z += row[j];
            }
            for (size_t j = 0; j < T; ++j) ah[i * T + j] = row[j] / z;

            double* out = concat_.row(i) + off;
            for (size_t p = 0; p < dh_; ++p) out[p] = 0.0;
            for (size_t j = 0; j < T; ++j) {
                const double w = ah[i * T + j];
                const double* vj = v_.row(j) + off;
                for (size_t p = 0; p < dh_; ++p) out[p] += w * vj[p];
            }
        }
    }
    Tensor y;
    linear_forward(concat_, Wo.value, bo.value, y);
    return y;
}

Tensor MultiHeadSelfAttention::backward(const Tensor& dy) {
    const size_t T = x_cache_.rows();
    Tensor dconcat;
    linear_backward(concat_, Wo.value, dy, Wo.grad, bo.grad, dconcat);

    Tensor dq({T, d_}), dk({T, d_}), dv({T, d_});
    std::vector<double> dattn(T);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));

    for (size_t h = 0; h < heads_; ++h) {
        const size_t off = h * dh_;
        const double* ah = attn_.row(h);
        for (size_t i = 0; i < T; ++i) {
            const double* dout = dconcat.row(i) + off;
            // dV and d(attention row)
            double dot = 0;
            for (size_t j = 0; j < T; ++j) {
                const double* vj = v_.row(j) + off;
                double s = 0;
                for (size_t p = 0; p < dh_; ++p) s += dout[p] * vj[p];
                dattn[j] = s;
                dot += s * ah[i * T + j];
                double* dvj = dv.row(j) + off;
                const double w = ah[i * T + j];
                for (size_t p = 0; p < dh_; ++p) dvj[p] += w * dout[p];
            }
            // softmax backward, then scores -> q,k
            double* dqi = dq.row(i) + off;
            for (size_t j = 0; j < T; ++j) {
                const double ds = ah[i * T + j] * (dattn[j] - dot) * scale;
                if (ds == 0.0) continue;
                const double* kj = k_.row(j) + off;
                const double* qi = q_.row(i) + off;
                double* dkj = dk.row(j) + off;
                for (size_t p = 0; p < dh_; ++p) {
                    dqi[p] += ds * kj[p];
                    dkj[p] += ds * qi[p];
                }
            }
        }
    }

    Tensor dx({T, d_}), tmp;
    linear_backward(x_cache_, Wq.value, dq, Wq.grad, bq.grad, tmp);
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += tmp.data[i];
    linear_backward(x_cache_, Wk.value, dk, Wk.grad, bk.grad, tmp);
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += tmp.data[i];
    linear_backward(x_cache_, Wv.value, dv, Wv.grad, bv.grad, tmp);
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += tmp.data[i];
    return dx;
}

void MultiHeadSelfAttention::collect(std::vector<Param*>& out) {
    for (Param* p : {&Wq, &bq, &Wk, &bk, &Wv, &bv, &Wo, &bo}) out.push_back(p);
}

// ----------------------------------------------------------- layer norm

LayerNormLayer::LayerNormLayer(const std::string& name, size_t dim)
    : gamma(name + ".gamma", {dim}), beta(name + ".beta", {dim}) {
    for (double& v : gamma.value.data) v = 1.0;
}

Tensor LayerNormLayer::forward(const Tensor& x) {
    const size_t n = x.rows(), d = x.cols();
    xhat_ = Tensor({n, d});
    inv_std_.assign(n, 0.0);
    Tensor y({n, d});
    for (size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double mean = 0;
        for (size_t j = 0; j < d; ++j) mean += xi[j];
        mean /= static_cast<double>(d);
        double var = 0;
        for (size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + kEps);
        inv_std_[i] = inv;
        double* xh = xhat_.row(i);
        double* yi = y.row(i);
        for (size_t j = 0; j < d; ++j) {
            xh[j] = (xi[j] - mean) * inv;
            yi[j] = gamma.value.data[j] * xh[j] + beta.value.data[j];
        }
    }
    return y;
}

Tensor LayerNormLayer::backward(const Tensor& dy) {
    const size_t n = dy.rows(), d = dy.cols();
    Tensor dx({n, d});
    for (size_t i = 0; i < n; ++i) {
        const double* dyi = dy.row(i);
        const double* xh = xhat_.row(i);
        double* dxi = dx.row(i);
        double mean_dxhat = 0, mean_dxhat_xhat = 0;
        for (size_t j = 0; j < d; ++j) {
            const double dxhat = dyi[j] * gamma.value.data[j];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xh[j];
            gamma.grad.data[j] += dyi[j] * xh[j];
            beta.grad.data[j] += dyi[j];
        }
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        for (size_t j = 0; j < d; ++j) {
            const double dxhat = dyi[j] * gamma.value.data[j];
            dxi[j] = inv_std_[i] * (dxhat - mean_dxhat - xh[j] * mean_dxhat_xhat);
        }
    }
    return dx;
}

void LayerNormLayer::collect(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

// ------------------------------------------------------------------- MLP

MlpLayer::MlpLayer(const std::string& name, size_t dim, size_t hidden, Rng& rng)
    : fc1(name + ".fc1", dim, hidden, rng), fc2(name + ".fc2", hidden, dim, rng) {}

Tensor MlpLayer::forward(const Tensor& x) {
    Tensor h = fc1.forward(x);
    act_cache_ = tanh_forward(h);
    return fc2.forward(act_cache_);
}

Tensor MlpLayer::backward(const Tensor& dy) {
    Tensor dh = fc2.backward(dy);
    Tensor da = tanh_backward(act_cache_, dh);
    return fc1.backward(da);
}

void MlpLayer::collect(std::vector<Param*>& out) {
    fc1.collect(out);
    fc2.collect(out);
}

// ------------------------------------------------------------------ conv

Conv2dLayer::Conv2dLayer(const std::string& name, size_t in_ch, size_t out_ch, size_t kernel,
                         size_t stride, Rng& rng)
    : W(name + ".W", {out_ch, in_ch * kernel * kernel}),
      b(name + ".b", {out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(kernel),
      stride_(stride) {
    W.init_uniform(rng, std::sqrt(3.0 / static_cast<double>(in_ch * kernel * kernel)));
}

Tensor Conv2dLayer::forward(const Tensor& x) {
    if (x.shape.size() != 3 || x.shape[0] != in_ch_)
        throw compute_error(ErrorKind::ShapeMismatch, W.name + ": bad conv input shape");
    const size_t H = x.shape[1], Wd = x.shape[2];
    if (H < k_ || Wd < k_)
        throw compute_error(ErrorKind::ShapeMismatch, W.name + ": input smaller than kernel");
    const size_t Ho = (H - k_) / stride_ + 1;
    const size_t Wo = (Wd - k_) / stride_ + 1;
    x_cache_ = x;

    Tensor y({out_ch_, Ho, Wo});
    for (size_t oc = 0; oc < out_ch_; ++oc) {
        const double* wrow = W.value.row(oc);
        for (size_t oy = 0; oy < Ho; ++oy) {
            for (size_t ox = 0; ox < Wo; ++ox) {
                double s = b.value.data[oc];
                size_t wi = 0;
                for (size_t ic = 0; ic < in_ch_; ++ic) {
                    const double* plane = x.data.data() + ic * H * Wd;
                    for (size_t ky = 0; ky < k_; ++ky) {
                        const double* src = plane + (oy * stride_ + ky) * Wd + ox * stride_;
                        for (size_t kx = 0; kx < k_; ++kx) s += wrow[wi++] * src[kx];
                    }
                }
                y.data[(oc * Ho + oy) * Wo + ox] = s;
            }
        }
    }
    return y;
}

Tensor Conv2dLayer::backward(const Tensor& dy) {
    const size_t H = x_cache_.shape[1], Wd = x_cache_.shape[2];
    const size_t Ho = dy.shape[1], Wo = dy.shape[2];
    Tensor dx({in_ch_, H, Wd});

    for (size_t oc = 0; oc < out_ch_; ++oc) {
        const double* wrow = W.value.row(oc);
        double* gw = W.grad.row(oc);
        for (size_t oy = 0; oy < Ho; ++oy) {
            for (size_t ox = 0; ox < Wo; ++ox) {
                const double d = dy.data[(oc * Ho + oy) * Wo + ox];
                if (d == 0.0) continue;
                b.grad.data[oc] += d;
                size_t wi = 0;
                for (size_t ic = 0; ic < in_ch_; ++ic) {
                    const double* plane = x_cache_.data.data() + ic * H * Wd;
                    double* dplane = dx.data.data() + ic * H * Wd;
                    for (size_t ky = 0; ky < k_; ++ky) {
                        const size_t base = (oy * stride_ + ky) * Wd + ox * stride_;
                        for (size_t kx = 0; kx < k_; ++kx) {
                            gw[wi] += d * plane[base + kx];
                            dplane[base + kx] += d * wrow[wi];
                            ++wi;
                        }
                    }
                }
            }
        }
    }
    return dx;
}

void Conv2dLayer::collect(std::vector<Param*>& out) {
    out.push_back(&W);
    out.push_back(&b);
}

// ------------------------------------------------------------------ pool

Tensor MaxPoolLayer::forward(const Tensor& x) {
    const size_t C = x.shape[0], H = x.shape[1], Wd = x.shape[2];
    const size_t Ho = H / k_, Wo = Wd / k_;
    in_shape_ = x.shape;
    argmax_.assign(C * Ho * Wo, 0);
    Tensor y({C, Ho, Wo});
    for (size_t c = 0; c < C; ++c) {
        const double* plane = x.data.data() + c * H * Wd;
        for (size_t oy = 0; oy < Ho; ++oy) {
            for (size_t ox = 0; ox < Wo; ++ox) {
                double best = -1e300;
                size_t best_idx = 0;
                for (size_t ky = 0; ky < k_; ++ky) {
                    for (size_t kx = 0; kx < k_; ++kx) {
                        const size_t idx = (oy * k_ + ky) * Wd + ox * k_ + kx;
                        if (plane[idx] > best) {
                            best = plane[idx];
                            best_idx = idx;
                        }
                    }
                }
                const size_t out_idx = (c * Ho + oy) * Wo + ox;
                y.data[out_idx] = best;
                argmax_[out_idx] = c * H * Wd + best_idx;
            }
        }
    }
    return y;
}

Tensor MaxPoolLayer::backward(const Tensor& dy) {
    Tensor dx(in_shape_);
    for (size_t i = 0; i < dy.data.size(); ++i) dx.data[argmax_[i]] += dy.data[i];
    return dx;
}

// --------------------------------------------------------------- dropout

Tensor DropoutLayer::forward(const Tensor& x, bool training, Rng* rng) {
    if (!training || rate_ <= 0.0 || rng == nullptr) {
        active_ = false;
        return x;
    }
    active_ = true;
    mask_.assign(x.data.size(), 0.0);
    const double keep = 1.0 - rate_;
    Tensor y = x;
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (size_t i = 0; i < y.data.size(); ++i) {
        mask_[i] = dist(*rng) < keep ? 1.0 / keep : 0.0;
        y.data[i] *= mask_[i];
    }
    return y;
}

Tensor DropoutLayer::backward(const Tensor& dy) {
    if (!active_) return dy;
    Tensor dx = dy;
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
}

// ------------------------------------------------------------------ head

SigmoidHead::SigmoidHead(const std::string& name, size_t in, Rng& rng)
    : proj(name, in, 1, rng) {}

double SigmoidHead::forward_logit(const Tensor& x) { return proj.forward(x).data[0]; }

Tensor SigmoidHead::backward(double dlogit) {
    Tensor dy({1, 1});
    dy.data[0] = dlogit;
    return proj.backward(dy);
}

void SigmoidHead::collect(std::vector<Param*>& out) { proj.collect(out); }

} // namespace nn
} // namespace gazedec
