#pragma once

#include "gazedec/rng.hpp"

#include <cstddef>
#include <vector>

namespace gazedec {
namespace nn {

// Row-major dense tensor of doubles. Kept deliberately small: shape,
// data, and the few access patterns the layers need.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }
    Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static size_t count(const std::vector<size_t>& s) {
        size_t n = 1;
        for (size_t d : s) n *= d;
        return n;
    }
    size_t size() const { return data.size(); }
    size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(size_t i, size_t j) { return data[i * cols() + j]; }
    double at(size_t i, size_t j) const { return data[i * cols() + j]; }
    double* row(size_t i) { return data.data() + i * cols(); }
    const double* row(size_t i) const { return data.data() + i * cols(); }

    void zero() { std::fill(data.begin(), data.end(), 0.0); }
    bool finite() const;
};

// y [n,out] = x [n,in] * W^T [in,out] + b
void linear_forward(const Tensor& x, const Tensor& W, const Tensor& b, Tensor& y);
// dx = dy * W; dW += dy^T x; db += colsum(dy)
void linear_backward(const Tensor& x, const Tensor& W, const Tensor& dy, Tensor& dW,
                     Tensor& db, Tensor& dx);

// C [n,m] (+)= A [n,k] * B [k,m]
void matmul(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate = false);
// C [n,m] (+)= A [n,k] * B^T where B is [m,k]
void matmul_bt(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate = false);
// C [k,m] (+)= A^T [n,k] * B [n,m]
void matmul_at(const Tensor& A, const Tensor& B, Tensor& C, bool accumulate = false);

// Named parameter with a gradient buffer.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param() = default;
    Param(std::string n, std::vector<size_t> shape)
        : name(std::move(n)), value(shape), grad(std::move(shape)) {}

    void init_uniform(Rng& rng, double scale);
    size_t size() const { return value.size(); }
};

} // namespace nn
} // namespace gazedec
