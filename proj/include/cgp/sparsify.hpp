// Masks, the cubic gradual-pruning schedule, magnitude pruning, and
// prune-then-regrow events. Ties are always broken by ascending element index
// so repeated runs produce identical masks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgp/tensor.hpp"

namespace cgp {

using Bitset = std::vector<std::uint8_t>;

template <class T>
struct MaskedTensor {
    DenseMatrix<T> values;
    Bitset mask;             // flattened, same length as values.data
    std::vector<T> momentum;  // EMA of pre-mask gradients

    static MaskedTensor zeros(std::size_t r, std::size_t c) {
        MaskedTensor m;
        m.values = DenseMatrix<T>(r, c);
        m.mask.assign(r * c, 1);
        m.momentum.assign(r * c, T{0});
        return m;
    }
    std::size_t size() const { return mask.size(); }
    std::size_t active_count() const {
        return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    }
    // m_w ⊙ W
    DenseMatrix<T> effective() const {
        DenseMatrix<T> e(values.rows, values.cols);
        for (std::size_t i = 0; i < mask.size(); ++i)
            e.data[i] = mask[i] ? values.data[i] : T{0};
        return e;
    }
};

enum class MaskKind { edge, feature };

template <class T>
struct SoftMask {
    std::vector<T> values;
    Bitset active;
    std::vector<T> momentum;
    MaskKind kind = MaskKind::edge;

    static SoftMask ones(std::size_t n, MaskKind kind) {
        SoftMask m;
        m.values.assign(n, T{1});
        m.active.assign(n, 1);
        m.momentum.assign(n, T{0});
        m.kind = kind;
        return m;
    }
    std::size_t size() const { return active.size(); }
    std::size_t active_count() const {
        return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
    }
};

struct PruneSchedule {
    double p_i = 0.0;   // initial sparsity
    double p_f = 0.0;   // target sparsity
    std::size_t t0 = 0;
    std::size_t dt = 10;
    std::size_t n = 1;  // number of pruning events after the first

    bool is_event(std::size_t t) const {
        return t >= t0 && t <= t0 + n * dt && (t - t0) % dt == 0;
    }
    std::size_t end() const { return t0 + n * dt; }
};

// p_t = p_f + (p_i - p_f)(1 - (t - t0)/(nΔt))³
inline double schedule_rate(const PruneSchedule& s, std::size_t t) {
    if (!s.is_event(t))
        throw std::invalid_argument("schedule_rate: t=" + std::to_string(t) +
                                    " is not an event epoch");
    const double frac = static_cast<double>(t - s.t0) / static_cast<double>(s.n * s.dt);
    const double rem = 1.0 - frac;
    return s.p_f + (s.p_i - s.p_f) * rem * rem * rem;
}

enum class RegrowthScheme { none, random, gradient, momentum };

struct RegrowthPolicy {
    RegrowthScheme scheme = RegrowthScheme::none;
    double rate = 0.2;           // fraction of active elements, floor rounding
    double momentum_decay = 0.9;  // β of the EMA
};

enum class PruneMode { global, layerwise };

struct PruneScope {
    PruneMode mode = PruneMode::global;
};

namespace detail {

// Indices of the k smallest (score, index) pairs.
inline std::vector<std::size_t> smallest_k(const std::vector<double>& scores,
                                           const std::vector<std::size_t>& candidates,
                                           std::size_t k) {
    std::vector<std::size_t> idx = candidates;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] < scores[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

inline std::vector<std::size_t> largest_k(const std::vector<double>& scores,
                                          const std::vector<std::size_t>& candidates,
                                          std::size_t k) {
    std::vector<std::size_t> idx = candidates;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

}  // namespace detail

// TopK(-|scores|, ⌈p·N⌉): deactivates the quota smallest-|score| elements.
// Already-inactive elements score 0, sort first among ties, and are never
// reactivated, so cumulative sparsity equals the per-event target whenever the
// quota is at least the current inactive count. Layerwise scope applies the
// quota per [layer_boundaries] segment.
inline Bitset magnitude_prune(const std::vector<double>& scores, const Bitset& active,
                              double target_sparsity, PruneScope scope = {},
                              const std::vector<std::size_t>& layer_boundaries = {}) {
    if (scores.size() != active.size())
        throw std::invalid_argument("magnitude_prune: scores/active length mismatch");
    if (target_sparsity < 0.0 || target_sparsity >= 1.0)
        throw std::invalid_argument("magnitude_prune: target sparsity out of range");

    const std::size_t N = scores.size();
    std::vector<double> eff(N);
    for (std::size_t i = 0; i < N; ++i) eff[i] = active[i] ? std::abs(scores[i]) : 0.0;

    Bitset out = active;
    auto prune_segment = [&](std::size_t lo, std::size_t hi) {
        const std::size_t seg = hi - lo;
        const std::size_t quota =
            static_cast<std::size_t>(std::ceil(target_sparsity * static_cast<double>(seg)));
        if (quota > seg) throw std::invalid_argument("magnitude_prune: quota exceeds segment");
        std::vector<std::size_t> cand(seg);
        std::iota(cand.begin(), cand.end(), lo);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(quota),
                          cand.end(), [&](std::size_t a, std::size_t b) {
                              if (eff[a] != eff[b]) return eff[a] < eff[b];
                              if (active[a] != active[b]) return active[a] < active[b];
                              return a < b;
                          });
        for (std::size_t k = 0; k < quota; ++k) out[cand[k]] = 0;
    };

    if (scope.mode == PruneMode::layerwise && layer_boundaries.size() > 1) {
        for (std::size_t s = 0; s + 1 < layer_boundaries.size(); ++s)
            prune_segment(layer_boundaries[s], layer_boundaries[s + 1]);
    } else {
        prune_segment(0, N);
    }
    return out;
}

// Remove ⌊r·active⌋ lowest-|keep_score| active elements, then activate the same
// number of inactive candidates with the largest add_scores. Active count is
// preserved exactly; k clamps to the number of inactive candidates.
inline Bitset regrow(const Bitset& active, const std::vector<double>& keep_scores,
                     const std::vector<double>& add_scores, double r) {
    if (r < 0.0 || r >= 1.0) throw std::invalid_argument("regrow: r out of range");
    if (keep_scores.size() != active.size() || add_scores.size() != active.size())
        throw std::invalid_argument("regrow: length mismatch");

    std::vector<std::size_t> act, inact;
    for (std::size_t i = 0; i < active.size(); ++i)
        (active[i] ? act : inact).push_back(i);

    std::size_t k = static_cast<std::size_t>(std::floor(r * static_cast<double>(act.size())));
    k = std::min(k, inact.size());
    Bitset out = active;
    if (k == 0) return out;

    std::vector<double> abs_keep(active.size(), 0.0);
    for (std::size_t i : act) abs_keep[i] = std::abs(keep_scores[i]);
    for (std::size_t i : detail::smallest_k(abs_keep, act, k)) out[i] = 0;
    for (std::size_t i : detail::largest_k(add_scores, inact, k)) out[i] = 1;
    return out;
}

// Scores for regrowth candidates. gradient → |g|, momentum → |EMA|,
// random → i.i.d. uniform draws.
inline std::vector<double> add_score(const RegrowthPolicy& policy,
                                     const std::vector<double>& grads,
                                     const std::vector<double>& momentum, Rng& rng) {
    const std::size_t n = std::max(grads.size(), momentum.size());
    std::vector<double> s(n, 0.0);
    switch (policy.scheme) {
        case RegrowthScheme::gradient:
            for (std::size_t i = 0; i < grads.size(); ++i) s[i] = std::abs(grads[i]);
            break;
        case RegrowthScheme::momentum:
            for (std::size_t i = 0; i < momentum.size(); ++i) s[i] = std::abs(momentum[i]);
            break;
        case RegrowthScheme::random: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (auto& v : s) v = u(rng);
            break;
        }
        case RegrowthScheme::none:
            throw std::invalid_argument("add_score: scheme is none");
    }
    return s;
}

// One element kind of a prune event: magnitude-prune to the cumulative target
// p_t, zero the deactivated values, then regrow (prune line first, regrow line
// second). Newly activated elements take reactivation_value: 0 for weights,
// 1 for soft masks.
template <class T>
void prune_and_regrow(std::vector<T>& values, Bitset& active, const std::vector<T>& momentum,
                      const std::vector<T>& grads, double p_t, T reactivation_value,
                      const RegrowthPolicy& policy, Rng& rng, PruneScope scope = {},
                      const std::vector<std::size_t>& layer_boundaries = {}) {
    std::vector<double> scores(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        scores[i] = static_cast<double>(values[i]);
    Bitset pruned = magnitude_prune(scores, active, p_t, scope, layer_boundaries);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!pruned[i]) values[i] = T{0};
    active = std::move(pruned);

    if (policy.scheme == RegrowthScheme::none || policy.rate == 0.0) return;
    std::vector<double> keep(values.size()), gd(grads.size()), mo(momentum.size());
    for (std::size_t i = 0; i < values.size(); ++i) keep[i] = static_cast<double>(values[i]);
    for (std::size_t i = 0; i < grads.size(); ++i) gd[i] = static_cast<double>(grads[i]);
    for (std::size_t i = 0; i < momentum.size(); ++i) mo[i] = static_cast<double>(momentum[i]);
    Bitset regrown = regrow(active, keep, add_score(policy, gd, mo, rng), policy.rate);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!regrown[i]) values[i] = T{0};
        else if (!active[i]) values[i] = reactivation_value;
    }
    active = std::move(regrown);
}

// momentum ← β·momentum + (1-β)·grad, maintained for every element so pruned
// positions keep a usable regrowth statistic.
template <class T>
void update_momentum(std::vector<T>& momentum, const std::vector<T>& grads, double beta) {
    for (std::size_t i = 0; i < momentum.size(); ++i)
        momentum[i] = static_cast<T>(beta) * momentum[i] +
                      static_cast<T>(1.0 - beta) * grads[i];
}

}  // namespace cgp
