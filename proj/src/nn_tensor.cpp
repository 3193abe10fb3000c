#include "gazedec/nn/tensor.hpp"

#include <cmath>

namespace gazedec {
namespace nn {

bool Tensor::finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void matmul(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate) {
    const size_t n = A.rows(), k = A.cols(), m = B.cols();
    if (C.shape.size() != 2 || C.rows() != n || C.cols() != m) {
        C.shape = {n, m};
        C.data.assign(n * m, 0.0);
    } else if (!accumulate) {
        C.zero();
    }
    for (size_t i = 0; i < n; ++i) {
        const double* a = A.row(i);
        double* c = C.row(i);
        for (size_t p = 0; p < k; ++p) {
            const double av = a[p];
            const double* b = B.row(p);
            for (size_t j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

void matmul_bt(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate) {
    const size_t n = A.rows(), k = A.cols(), m = B.rows();
    if (C.shape.size() != 2 || C.rows() != n || C.cols() != m) {
        C.shape = {n, m};
        C.data.assign(n * m, 0.0);
    } else if (!accumulate) {
        C.zero();
    }
    for (size_t i = 0; i < n; ++i) {
        const double* a = A.row(i);
        double* c = C.row(i);
        for (size_t j = 0; j < m; ++j) {
            const double* b = B.row(j);
            double s = 0;
            for (size_t p = 0; p < k; ++p) s += a[p] * b[p];
            c[j] += s;
        }
    }
}

void matmul_at(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate) {
    const size_t n = A.rows(), k = A.cols(), m = B.cols();
    if (C.shape.size() != 2 || C.rows() != k || C.cols() != m) {
        C.shape = {k, m};
        C.data.assign(k * m, 0.0);
    } else if (!accumulate) {
        C.zero();
    }
    for (size_t i = 0; i < n; ++i) {
        const double* a = A.row(i);
        const double* b = B.row(i);
        for (size_t p = 0; p < k; ++p) {
            const double av = a[p];
            double* c = C.row(p);
            for (size_t j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

void linear_forward(const Tensor& x, const Tensor& W, const Tensor& b, Tensor& y) {
    matmul_bt(x, W, y);
    const size_t n = y.rows(), m = y.cols();
    for (size_t i = 0; i < n; ++i) {
        double* yr = y.row(i);
        for (size_t j = 0; j < m; ++j) yr[j] += b.data[j];
    }
}

void linear_backward(const Tensor& x, const Tensor& W, const Tensor& dy, Tensor& dW,
                     Tensor& db, Tensor& dx) {
    matmul_at(dy, x, dW, true);
    const size_t n = dy.rows(), m = dy.cols();
    for (size_t i = 0; i < n; ++i) {
        const double* d = dy.row(i);
        for (size_t j = 0; j < m; ++j) db.data[j] += d[j];
    }
    matmul(dy, W, dx);
}

void Param::init_uniform(Rng& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (double& v : value.data) v = dist(rng);
    grad.zero();
}

} // namespace nn
} // namespace gazedec
