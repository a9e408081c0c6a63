// GCN and SGC forward/backward with the weight, edge, and feature masks
// applied. Backward returns gradients w.r.t. the *effective* weights
// (pre-mask), so pruned positions still carry regrowth scores.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cgp/graph.hpp"
#include "cgp/sparsify.hpp"
#include "cgp/tensor.hpp"

namespace cgp {

enum class RunMode { train, eval };

template <class T>
struct GcnModel {
    MaskedTensor<T> W0;  // d x h
    MaskedTensor<T> W1;  // h x C
    std::size_t hidden = 0;
    double dropout_rate = 0.5;
};

template <class T>
struct SgcModel {
    MaskedTensor<T> W;  // d x C
    std::size_t K = 2;
};

template <class T>
struct GradBundle {
    DenseMatrix<T> dW0, dW1;  // GCN; SGC uses dW0 only
    std::vector<T> dMa;       // per arc
    std::vector<T> dMx;       // per feature channel
};

// Â′: non-diagonal entry k scaled by m_a[arc_map(k)], diagonal untouched.
template <class T>
SparseMatrix<T> masked_adjacency(const NormAdj& na, const SoftMask<T>& m_a) {
    if (m_a.size() != na.arc_count)
        throw std::invalid_argument("masked_adjacency: mask length != arc count");
    SparseMatrix<T> s;
    s.rows = s.cols = na.n;
    s.row_ptr = na.row_ptr;
    s.col_idx = na.col_idx;
    s.values.resize(na.values.size());
    for (std::size_t k = 0; k < na.values.size(); ++k) {
        const std::size_t arc = na.arc_map[k];
        const T base = static_cast<T>(na.values[k]);
        s.values[k] = arc == NormAdj::kNoArc ? base : base * m_a.values[arc];
    }
    return s;
}

template <class T>
struct GcnCache {
    SparseMatrix<T> adj;             // Â′ used by this pass
    DenseMatrix<T> X;                // raw input features
    DenseMatrix<T> Xd;               // (X ⊙ m_x) after input dropout
    std::vector<std::uint8_t> keep_in;
    DenseMatrix<T> S1;               // Â′ Xd
    DenseMatrix<T> H1pre;            // S1 W0′
    DenseMatrix<T> Hd;               // ReLU(H1pre) after hidden dropout
    std::vector<std::uint8_t> keep_hid;
    DenseMatrix<T> S2;               // Â′ Hd
    double dropout_rate = 0.0;
    bool train_mode = false;
};

// Z = Â′ ReLU(Â′ (X⊙m_x) W0′) W1′ as pre-softmax logits. Dropout on the masked
// input and on the hidden activation, train mode only.
template <class T>
std::pair<DenseMatrix<T>, GcnCache<T>>
gcn_forward(const NormAdj& na, const DenseMatrix<T>& X, const GcnModel<T>& model,
            const SoftMask<T>& m_a, const SoftMask<T>& m_x, RunMode mode, Rng& rng) {
    if (m_x.size() != X.cols) throw std::invalid_argument("gcn_forward: feature mask length");
    GcnCache<T> c;
    c.adj = masked_adjacency(na, m_a);
    c.X = X;
    c.dropout_rate = model.dropout_rate;
    c.train_mode = mode == RunMode::train;

    DenseMatrix<T> Xm = scale_columns(X, m_x.values);
    if (c.train_mode) {
        auto [xd, keep] = dropout_fwd(Xm, model.dropout_rate, rng);
        c.Xd = std::move(xd);
        c.keep_in = std::move(keep);
    } else {
        c.Xd = std::move(Xm);
    }

    c.S1 = spmm(c.adj, c.Xd);
    c.H1pre = matmul(c.S1, model.W0.effective());
    DenseMatrix<T> H1 = relu_fwd(c.H1pre);
    if (c.train_mode) {
        auto [hd, keep] = dropout_fwd(H1, model.dropout_rate, rng);
        c.Hd = std::move(hd);
        c.keep_hid = std::move(keep);
    } else {
        c.Hd = std::move(H1);
    }

    c.S2 = spmm(c.adj, c.Hd);
    DenseMatrix<T> logits = matmul(c.S2, model.W1.effective());
    return {std::move(logits), std::move(c)};
}

template <class T>
GradBundle<T> gcn_backward(const NormAdj& na, const GcnCache<T>& c, const GcnModel<T>& model,
                           const DenseMatrix<T>& glogits) {
    GradBundle<T> g;
    g.dW1 = matmul_at(c.S2, glogits);
    DenseMatrix<T> dS2 = matmul_bt(glogits, model.W1.effective());
    auto [gvals2, dHd] = spmm_backward(c.adj, c.Hd, dS2);

    DenseMatrix<T> dH1 = c.train_mode
                             ? dropout_bwd(c.keep_hid, c.dropout_rate, dHd)
                             : std::move(dHd);
    DenseMatrix<T> dH1pre = relu_bwd(c.H1pre, dH1);
    g.dW0 = matmul_at(c.S1, dH1pre);
    DenseMatrix<T> dS1 = matmul_bt(dH1pre, model.W0.effective());
    auto [gvals1, dXd] = spmm_backward(c.adj, c.Xd, dS1);

    DenseMatrix<T> dXm = c.train_mode
                             ? dropout_bwd(c.keep_in, c.dropout_rate, dXd)
                             : std::move(dXd);

    // dMa[arc] = base_value(k)·(per-entry spmm gradients from both layers)
    g.dMa.assign(na.arc_count, T{0});
    for (std::size_t k = 0; k < na.arc_map.size(); ++k) {
        const std::size_t arc = na.arc_map[k];
        if (arc == NormAdj::kNoArc) continue;
        g.dMa[arc] += static_cast<T>(na.values[k]) * (gvals1[k] + gvals2[k]);
    }
    // dMx[j] = Σ_i X[i,j]·(dL/dXm)[i,j]
    g.dMx.assign(c.X.cols, T{0});
    for (std::size_t i = 0; i < c.X.rows; ++i)
        for (std::size_t j = 0; j < c.X.cols; ++j)
            g.dMx[j] += c.X(i, j) * dXm(i, j);
    return g;
}

template <class T>
struct SgcCache {
    SparseMatrix<T> adj;
    DenseMatrix<T> X;
    std::vector<DenseMatrix<T>> props;  // P_0 = X⊙m_x .. P_K
};

// logits = Â′^K (X ⊙ m_x) W′. No nonlinearity, no dropout.
template <class T>
std::pair<DenseMatrix<T>, SgcCache<T>>
sgc_forward(const NormAdj& na, const DenseMatrix<T>& X, const SgcModel<T>& model,
            const SoftMask<T>& m_a, const SoftMask<T>& m_x, RunMode /*mode*/) {
    if (m_x.size() != X.cols) throw std::invalid_argument("sgc_forward: feature mask length");
    if (model.K < 1) throw std::invalid_argument("sgc_forward: K must be >= 1");
    SgcCache<T> c;
    c.adj = masked_adjacency(na, m_a);
    c.X = X;
    c.props.push_back(scale_columns(X, m_x.values));
    for (std::size_t k = 0; k < model.K; ++k)
        c.props.push_back(spmm(c.adj, c.props.back()));
    DenseMatrix<T> logits = matmul(c.props.back(), model.W.effective());
    return {std::move(logits), std::move(c)};
}

template <class T>
GradBundle<T> sgc_backward(const NormAdj& na, const SgcCache<T>& c, const SgcModel<T>& model,
                           const DenseMatrix<T>& glogits) {
    GradBundle<T> g;
    const std::size_t K = c.props.size() - 1;
    g.dW0 = matmul_at(c.props.back(), glogits);
    DenseMatrix<T> dP = matmul_bt(glogits, model.W.effective());

    g.dMa.assign(na.arc_count, T{0});
    for (std::size_t k = K; k >= 1; --k) {
        auto [gvals, dPrev] = spmm_backward(c.adj, c.props[k - 1], dP);
        for (std::size_t e = 0; e < na.arc_map.size(); ++e) {
            const std::size_t arc = na.arc_map[e];
            if (arc == NormAdj::kNoArc) continue;
            g.dMa[arc] += static_cast<T>(na.values[e]) * gvals[e];
        }
        dP = std::move(dPrev);
    }
    g.dMx.assign(c.X.cols, T{0});
    for (std::size_t i = 0; i < c.X.rows; ++i)
        for (std::size_t j = 0; j < c.X.cols; ++j)
            g.dMx[j] += c.X(i, j) * dP(i, j);
    return g;
}

// Argmax ties broken by lowest class index.
template <class T>
double accuracy(const DenseMatrix<T>& logits, const std::vector<int>& labels,
                const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw std::invalid_argument("accuracy: empty index set");
    std::size_t hits = 0;
    for (std::size_t r : idx) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols; ++j)
            if (logits(r, j) > logits(r, best)) best = j;
        if (static_cast<int>(best) == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace cgp
