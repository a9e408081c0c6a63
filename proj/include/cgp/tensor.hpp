// Dense and CSR kernels with explicit backward contracts.
// All kernels accumulate sequentially (row-major, left-to-right) so results
// are bit-deterministic for identical inputs.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cgp {

using Rng = std::mt19937_64;

template <class T>
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, T fill = T{0})
        : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

template <class T>
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;  // length rows+1, nondecreasing
    std::vector<std::size_t> col_idx;  // sorted within each row
    std::vector<T> values;

    std::size_t nnz() const { return values.size(); }
};

inline void check_dims(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("dimension mismatch: " + what);
}

template <class T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    check_dims(a.cols == b.rows, "matmul " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
    DenseMatrix<T> c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T aik = a(i, k);
            if (aik == T{0}) continue;
            for (std::size_t j = 0; j < b.cols; ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

// aᵀ · b
template <class T>
DenseMatrix<T> matmul_at(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    check_dims(a.rows == b.rows, "matmul_at");
    DenseMatrix<T> c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k)
        for (std::size_t i = 0; i < a.cols; ++i) {
            const T aki = a(k, i);
            if (aki == T{0}) continue;
            for (std::size_t j = 0; j < b.cols; ++j)
                c(i, j) += aki * b(k, j);
        }
    return c;
}

// a · bᵀ
template <class T>
DenseMatrix<T> matmul_bt(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    check_dims(a.cols == b.cols, "matmul_bt");
    DenseMatrix<T> c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            T acc{0};
            for (std::size_t k = 0; k < a.cols; ++k)
                acc += a(i, k) * b(j, k);
            c(i, j) = acc;
        }
    return c;
}

template <class T>
DenseMatrix<T> spmm(const SparseMatrix<T>& s, const DenseMatrix<T>& x) {
    check_dims(s.cols == x.rows, "spmm");
    DenseMatrix<T> y(s.rows, x.cols);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const T v = s.values[k];
            const std::size_t j = s.col_idx[k];
            for (std::size_t c = 0; c < x.cols; ++c)
                y(i, c) += v * x(j, c);
        }
    return y;
}

// gvalues[k] = dot(gout[row(k),:], x[col(k),:]);  gx = sᵀ·gout
template <class T>
std::pair<std::vector<T>, DenseMatrix<T>>
spmm_backward(const SparseMatrix<T>& s, const DenseMatrix<T>& x, const DenseMatrix<T>& gout) {
    check_dims(s.cols == x.rows && gout.rows == s.rows && gout.cols == x.cols, "spmm_backward");
    std::vector<T> gvalues(s.nnz(), T{0});
    DenseMatrix<T> gx(x.rows, x.cols);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const std::size_t j = s.col_idx[k];
            T acc{0};
            for (std::size_t c = 0; c < x.cols; ++c) {
                acc += gout(i, c) * x(j, c);
                gx(j, c) += s.values[k] * gout(i, c);
            }
            gvalues[k] = acc;
        }
    return {std::move(gvalues), std::move(gx)};
}

template <class T>
DenseMatrix<T> densify(const SparseMatrix<T>& s) {
    DenseMatrix<T> d(s.rows, s.cols);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k)
            d(i, s.col_idx[k]) += s.values[k];
    return d;
}

template <class T>
DenseMatrix<T> relu_fwd(const DenseMatrix<T>& x) {
    DenseMatrix<T> y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        y.data[i] = x.data[i] > T{0} ? x.data[i] : T{0};
    return y;
}

// subgradient at 0 is 0
template <class T>
DenseMatrix<T> relu_bwd(const DenseMatrix<T>& x, const DenseMatrix<T>& gout) {
    check_dims(x.same_shape(gout), "relu_bwd");
    DenseMatrix<T> gin(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        gin.data[i] = x.data[i] > T{0} ? gout.data[i] : T{0};
    return gin;
}

// Inverted dropout: kept units scaled by 1/(1-rate).
template <class T>
std::pair<DenseMatrix<T>, std::vector<std::uint8_t>>
dropout_fwd(const DenseMatrix<T>& x, double rate, Rng& rng) {
    if (rate >= 1.0 || rate < 0.0) throw std::invalid_argument("dropout rate must be in [0,1)");
    std::vector<std::uint8_t> keep(x.data.size(), 1);
    DenseMatrix<T> y(x.rows, x.cols);
    if (rate == 0.0) {
        y.data = x.data;
        return {std::move(y), std::move(keep)};
    }
    const T scale = T{1} / static_cast<T>(1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (u(rng) < rate) {
            keep[i] = 0;
            y.data[i] = T{0};
        } else {
            y.data[i] = x.data[i] * scale;
        }
    }
    return {std::move(y), std::move(keep)};
}

template <class T>
DenseMatrix<T> dropout_bwd(const std::vector<std::uint8_t>& keep, double rate,
                           const DenseMatrix<T>& gout) {
    check_dims(keep.size() == gout.data.size(), "dropout_bwd");
    DenseMatrix<T> gin(gout.rows, gout.cols);
    const T scale = rate == 0.0 ? T{1} : T{1} / static_cast<T>(1.0 - rate);
    for (std::size_t i = 0; i < gout.data.size(); ++i)
        gin.data[i] = keep[i] ? gout.data[i] * scale : T{0};
    return gin;
}

// Mean negative log-likelihood over idx_subset; glogits is zero outside the
// subset. Softmax uses max-subtraction.
template <class T>
std::pair<double, DenseMatrix<T>>
softmax_xent(const DenseMatrix<T>& logits, const std::vector<int>& labels,
             const std::vector<std::size_t>& idx_subset) {
    if (idx_subset.empty()) throw std::invalid_argument("softmax_xent: empty subset");
    check_dims(labels.size() == logits.rows, "softmax_xent labels");
    DenseMatrix<T> glogits(logits.rows, logits.cols);
    double loss = 0.0;
    const T inv_n = T{1} / static_cast<T>(idx_subset.size());
    for (std::size_t r : idx_subset) {
        T mx = logits(r, 0);
        for (std::size_t j = 1; j < logits.cols; ++j)
            if (logits(r, j) > mx) mx = logits(r, j);
        T denom{0};
        for (std::size_t j = 0; j < logits.cols; ++j)
            denom += std::exp(logits(r, j) - mx);
        const int y = labels[r];
        loss += -static_cast<double>(logits(r, y) - mx - std::log(denom));
        for (std::size_t j = 0; j < logits.cols; ++j) {
            T p = std::exp(logits(r, j) - mx) / denom;
            glogits(r, j) = (p - (static_cast<int>(j) == y ? T{1} : T{0})) * inv_n;
        }
    }
    loss /= static_cast<double>(idx_subset.size());
    return {loss, std::move(glogits)};
}

// Column j scaled by factor[j].
template <class T>
DenseMatrix<T> scale_columns(const DenseMatrix<T>& x, const std::vector<T>& factor) {
    check_dims(factor.size() == x.cols, "scale_columns");
    DenseMatrix<T> y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            y(i, j) = x(i, j) * factor[j];
    return y;
}

}  // namespace cgp
