// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything here is checked against independent references --
// closed-form values, full-sort oracles, finite differences, or a mask-free
// reimplementation of the training loop.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cgp/cost.hpp"
#include "cgp/graph.hpp"
#include "cgp/model.hpp"
#include "cgp/report_io.hpp"
#include "cgp/sparsify.hpp"
#include "cgp/tensor.hpp"
#include "cgp/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cgp;

namespace {

int g_failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- criterion 1

void criterion_schedule() {
    bool ok = true;
    std::string detail;
    const PruneSchedule s{0.0, 0.8, 0, 10, 5};
    // closed-form values for (p_i=0, p_f=0.8, dt=10, n=5)
    const std::vector<std::pair<std::size_t, double>> expected = {
        {0, 0.0}, {10, 0.3904}, {20, 0.6272}, {30, 0.7488}, {40, 0.7936}, {50, 0.8}};
    for (const auto& [t, want] : expected)
        if (std::abs(schedule_rate(s, t) - want) > 1e-12) {
            ok = false;
            detail = "value mismatch at t=" + std::to_string(t);
        }
    // endpoints exact for arbitrary p_i
    const PruneSchedule s2{0.3, 0.9, 20, 7, 4};
    if (std::abs(schedule_rate(s2, 20) - 0.3) > 1e-12 ||
        std::abs(schedule_rate(s2, 48) - 0.9) > 1e-12) {
        ok = false;
        detail = "endpoint not exact";
    }
    // increments strictly decrease (pruning decelerates)
    double prev_inc = -1.0;
    for (std::size_t k = 1; k <= 5; ++k) {
        const double inc = schedule_rate(s, k * 10) - schedule_rate(s, (k - 1) * 10);
        if (prev_inc >= 0.0 && inc >= prev_inc) {
            ok = false;
            detail = "increments not decreasing";
        }
        prev_inc = inc;
    }
    // non-event epochs rejected
    try {
        schedule_rate(s, 15);
        ok = false;
        detail = "non-event epoch accepted";
    } catch (const std::invalid_argument&) {
    }
    verdict(1, "cubic schedule matches closed form within 1e-12", ok, detail);
}

// ---------------------------------------------------------------- criterion 2

struct FdStats {
    double worst = 0.0;
    std::size_t checked = 0;
    bool ok = true;
};

void fd_check(FdStats& st, double analytic, double fd) {
    const double err = std::abs(analytic - fd);
    const double scale = std::max(std::abs(analytic), std::abs(fd));
    const double rel = err / std::max(scale, 1e-3);
    st.worst = std::max(st.worst, rel);
    ++st.checked;
    if (err > 1e-5 * scale && err > 1e-8) st.ok = false;
}

void criterion_gradients() {
    FdStats st;
    const double h = 1e-5;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const bool use_sgc = trial >= 12;
        SbmResult data = generate_sbm({.n_nodes = 10 + 2 * (trial % 8),
                                       .n_classes = 2 + trial % 2,
                                       .d = 4 + trial % 3,
                                       .intra_p = 0.6,
                                       .inter_p = 0.25,
                                       .feature_noise = 0.8,
                                       .seed = 500 + trial});
        const Graph& g = data.graph;
        NormAdj na = normalize_adjacency(g);
        DenseMatrix<double> X(g.n_nodes, g.d);
        for (std::size_t i = 0; i < X.data.size(); ++i) X.data[i] = g.features.data[i];

        Rng rng(trial + 1);
        std::uniform_real_distribution<double> u(0.6, 1.4);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        SoftMask<double> m_a = SoftMask<double>::ones(na.arc_count, MaskKind::edge);
        SoftMask<double> m_x = SoftMask<double>::ones(g.d, MaskKind::feature);
        for (std::size_t i = 0; i < m_a.size(); ++i) {
            if (coin(rng) < 0.2) {
                m_a.active[i] = 0;
                m_a.values[i] = 0.0;
            } else {
                m_a.values[i] = u(rng);
            }
        }
        for (std::size_t i = 0; i < m_x.size(); ++i) m_x.values[i] = u(rng);

        GcnModel<double> gcn;
        SgcModel<double> sgc;
        if (!use_sgc) {
            gcn.hidden = 4;
            gcn.dropout_rate = 0.0;
            gcn.W0 = MaskedTensor<double>::zeros(g.d, gcn.hidden);
            gcn.W1 = MaskedTensor<double>::zeros(gcn.hidden, g.n_classes);
            detail::glorot_init(gcn.W0.values, rng);
            detail::glorot_init(gcn.W1.values, rng);
            for (auto& b : gcn.W0.mask) b = coin(rng) < 0.3 ? 0 : 1;
        } else {
            sgc.K = 2;
            sgc.W = MaskedTensor<double>::zeros(g.d, g.n_classes);
            detail::glorot_init(sgc.W.values, rng);
            for (auto& b : sgc.W.mask) b = coin(rng) < 0.3 ? 0 : 1;
        }

        auto loss_of = [&]() {
            Rng dummy(0);
            DenseMatrix<double> logits =
                use_sgc ? sgc_forward(na, X, sgc, m_a, m_x, RunMode::eval).first
                        : gcn_forward(na, X, gcn, m_a, m_x, RunMode::eval, dummy).first;
            return softmax_xent(logits, g.labels, data.splits.train_idx).first;
        };
        auto fd_at = [&](double& slot) {
            const double keep = slot;
            slot = keep + h;
            const double lp = loss_of();
            slot = keep - h;
            const double lm = loss_of();
            slot = keep;
            return (lp - lm) / (2.0 * h);
        };

        GradBundle<double> bundle;
        {
            Rng dummy(0);
            if (use_sgc) {
                auto [logits, cache] = sgc_forward(na, X, sgc, m_a, m_x, RunMode::eval);
                auto [l, glogits] = softmax_xent(logits, g.labels, data.splits.train_idx);
                bundle = sgc_backward(na, cache, sgc, glogits);
            } else {
                auto [logits, cache] = gcn_forward(na, X, gcn, m_a, m_x, RunMode::eval, dummy);
                auto [l, glogits] = softmax_xent(logits, g.labels, data.splits.train_idx);
                bundle = gcn_backward(na, cache, gcn, glogits);
            }
        }

        auto check_weight = [&](MaskedTensor<double>& w, const DenseMatrix<double>& dw) {
            for (std::size_t i = 0; i < w.size(); ++i)
                if (w.mask[i]) fd_check(st, dw.data[i], fd_at(w.values.data[i]));
        };
        if (use_sgc) {
            check_weight(sgc.W, bundle.dW0);
        } else {
            check_weight(gcn.W0, bundle.dW0);
            check_weight(gcn.W1, bundle.dW1);
        }
        for (std::size_t i = 0; i < m_a.size(); ++i)
            if (m_a.active[i]) fd_check(st, bundle.dMa[i], fd_at(m_a.values[i]));
        for (std::size_t i = 0; i < m_x.size(); ++i)
            fd_check(st, bundle.dMx[i], fd_at(m_x.values[i]));
    }
    std::ostringstream d;
    d << st.checked << " entries, worst rel err " << st.worst;
    verdict(2, "analytic gradients match central finite differences", st.ok, d.str());
}

// ---------------------------------------------------------------- criterion 3

void criterion_mask_accounting() {
    bool ok = true;
    std::string detail;
    try {
        SbmResult data = generate_sbm({.n_nodes = 80, .n_classes = 3, .d = 12, .intra_p = 0.3,
                                       .inter_p = 0.05, .feature_noise = 0.5, .seed = 11});
        TrainConfig cfg;
        cfg.epochs = 30;
        cfg.hidden = 8;
        cfg.t0 = 0;
        cfg.dt = 5;
        cfg.n_events = 4;
        cfg.p_w = 0.7;
        cfg.p_a = 0.5;
        cfg.p_x = 0.25;
        cfg.regrowth.scheme = RegrowthScheme::gradient;
        cfg.regrowth.rate = 0.3;
        cfg.seed = 2;
        // the trainer itself asserts the per-event quota and regrowth count
        // preservation and throws std::logic_error on any violation
        auto result = train<double>(data.graph, data.splits, cfg);

        // recompute the expected sparsity trajectory independently
        const std::size_t Nw = result.gcn.W0.size() + result.gcn.W1.size();
        const std::size_t Na = result.m_a.size();
        const std::size_t Nx = result.m_x.size();
        auto expect = [&](double p_f, std::size_t N, std::size_t t) {
            const PruneSchedule s{0.0, p_f, cfg.t0, cfg.dt, cfg.n_events};
            double last = 0.0;
            for (std::size_t e = cfg.dt; e <= t && e <= s.end(); e += cfg.dt)
                last = schedule_rate(s, e);
            return std::ceil(last * static_cast<double>(N)) / static_cast<double>(N);
        };
        for (const auto& r : result.report.epochs) {
            if (std::abs(r.sparsity_w - expect(cfg.p_w, Nw, r.epoch)) > 1e-12 ||
                std::abs(r.sparsity_a - expect(cfg.p_a, Na, r.epoch)) > 1e-12 ||
                std::abs(r.sparsity_x - expect(cfg.p_x, Nx, r.epoch)) > 1e-12) {
                ok = false;
                detail = "sparsity trajectory off at epoch " + std::to_string(r.epoch);
                break;
            }
        }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    verdict(3, "mask accounting holds at every prune/regrow event", ok, detail);
}

// ---------------------------------------------------------------- criterion 4

Bitset oracle_prune(const std::vector<double>& scores, const Bitset& active, double target) {
    const std::size_t N = scores.size();
    const std::size_t quota =
        static_cast<std::size_t>(std::ceil(target * static_cast<double>(N)));
    std::vector<double> eff(N);
    for (std::size_t i = 0; i < N; ++i) eff[i] = active[i] ? std::abs(scores[i]) : 0.0;
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (eff[a] != eff[b]) return eff[a] < eff[b];
        if (active[a] != active[b]) return active[a] < active[b];
        return a < b;
    });
    Bitset out = active;
    for (std::size_t k = 0; k < quota; ++k) out[idx[k]] = 0;
    return out;
}

Bitset oracle_regrow(const Bitset& active, const std::vector<double>& keep,
                     const std::vector<double>& add, double r) {
    std::vector<std::size_t> act, inact;
    for (std::size_t i = 0; i < active.size(); ++i) (active[i] ? act : inact).push_back(i);
    std::size_t k = static_cast<std::size_t>(std::floor(r * static_cast<double>(act.size())));
    k = std::min(k, inact.size());
    Bitset out = active;
    std::sort(act.begin(), act.end(), [&](std::size_t a, std::size_t b) {
        const double ka = std::abs(keep[a]), kb = std::abs(keep[b]);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    std::sort(inact.begin(), inact.end(), [&](std::size_t a, std::size_t b) {
        if (add[a] != add[b]) return add[a] > add[b];
        return a < b;
    });
    for (std::size_t i = 0; i < k; ++i) out[act[i]] = 0;
    for (std::size_t i = 0; i < k; ++i) out[inact[i]] = 1;
    return out;
}

void criterion_prune_oracles() {
    bool ok = true;
    std::string detail;
    Rng rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t inst = 0; inst < 1000 && ok; ++inst) {
        const std::size_t N = 1 + static_cast<std::size_t>(u(rng) * 63.0);
        std::vector<double> scores(N), keep(N), add(N);
        Bitset active(N);
        const bool quantize = inst % 2 == 0;  // force heavy ties on half the instances
        for (std::size_t i = 0; i < N; ++i) {
            auto draw = [&]() {
                const double v = 2.0 * u(rng) - 1.0;
                return quantize ? std::round(v * 4.0) / 4.0 : v;
            };
            scores[i] = draw();
            keep[i] = draw();
            add[i] = std::abs(draw());
            active[i] = u(rng) < 0.7 ? 1 : 0;
        }
        const double target = u(rng) * 0.99;
        const Bitset got = magnitude_prune(scores, active, target);
        const Bitset want = oracle_prune(scores, active, target);
        if (got != want) {
            ok = false;
            detail = "prune mismatch on instance " + std::to_string(inst);
            break;
        }
        const double r = u(rng) * 0.5;
        const Bitset rg = regrow(got, keep, add, r);
        const Bitset rw = oracle_regrow(got, keep, add, r);
        if (rg != rw) {
            ok = false;
            detail = "regrow mismatch on instance " + std::to_string(inst);
            break;
        }
        if (std::count(rg.begin(), rg.end(), 1) != std::count(got.begin(), got.end(), 1)) {
            ok = false;
            detail = "regrow changed active count on instance " + std::to_string(inst);
            break;
        }
    }
    verdict(4, "prune/regrow agree with full-sort oracles on 1000 instances", ok, detail);
}

// ---------------------------------------------------------------- criterion 5

// Mask-free training loop written against the raw kernels only: no masked
// tensors, no soft masks, no prune events. Mirrors the RNG consumption order
// (W0 init, W1 init, two dropout draws per epoch).
std::vector<double> reference_losses(const Graph& g, const SplitSet& sp,
                                     const TrainConfig& cfg) {
    Rng rng(cfg.seed);
    const std::size_t n = g.n_nodes, d = g.d, C = g.n_classes, h = cfg.hidden;
    DenseMatrix<double> X(n, d);
    for (std::size_t i = 0; i < X.data.size(); ++i) X.data[i] = g.features.data[i];
    NormAdj na = normalize_adjacency(g);
    SparseMatrix<double> A;
    A.rows = A.cols = na.n;
    A.row_ptr = na.row_ptr;
    A.col_idx = na.col_idx;
    A.values.assign(na.values.begin(), na.values.end());

    auto glorot = [&](DenseMatrix<double>& w) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (auto& v : w.data) v = u(rng);
    };
    DenseMatrix<double> W0(d, h), W1(h, C);
    glorot(W0);
    glorot(W1);

    struct Adam {
        std::vector<double> m, v;
        std::size_t step = 0;
    };
    Adam a0{std::vector<double>(W0.data.size(), 0.0), std::vector<double>(W0.data.size(), 0.0)};
    Adam a1{std::vector<double>(W1.data.size(), 0.0), std::vector<double>(W1.data.size(), 0.0)};
    auto adam = [&](Adam& st, std::vector<double>& p, const std::vector<double>& grad) {
        ++st.step;
        const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(st.step));
        const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(st.step));
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gr = grad[i] + cfg.weight_decay * p[i];
            st.m[i] = 0.9 * st.m[i] + (1.0 - 0.9) * gr;
            st.v[i] = 0.999 * st.v[i] + (1.0 - 0.999) * gr * gr;
            const double mh = st.m[i] / bc1;
            const double vh = st.v[i] / bc2;
            p[i] = p[i] - cfg.lr * mh / (std::sqrt(vh) + 1e-8);
        }
    };

    std::vector<double> losses;
    for (std::size_t t = 1; t <= cfg.epochs; ++t) {
        auto [Xd, keep_in] = dropout_fwd(X, cfg.dropout, rng);
        DenseMatrix<double> S1 = spmm(A, Xd);
        DenseMatrix<double> H1pre = matmul(S1, W0);
        DenseMatrix<double> H1 = relu_fwd(H1pre);
        auto [Hd, keep_hid] = dropout_fwd(H1, cfg.dropout, rng);
        DenseMatrix<double> S2 = spmm(A, Hd);
        DenseMatrix<double> logits = matmul(S2, W1);
        auto [loss, glogits] = softmax_xent(logits, g.labels, sp.train_idx);
        losses.push_back(loss);

        DenseMatrix<double> dW1 = matmul_at(S2, glogits);
        DenseMatrix<double> dS2 = matmul_bt(glogits, W1);
        auto [gv2, dHd] = spmm_backward(A, Hd, dS2);
        DenseMatrix<double> dH1 = dropout_bwd(keep_hid, cfg.dropout, dHd);
        DenseMatrix<double> dH1pre = relu_bwd(H1pre, dH1);
        DenseMatrix<double> dW0 = matmul_at(S1, dH1pre);

        adam(a0, W0.data, dW0.data);
        adam(a1, W1.data, dW1.data);
    }
    return losses;
}

void criterion_degeneracy() {
    bool ok = true;
    std::string detail;
    try {
        SbmResult data = generate_sbm({.n_nodes = 400, .n_classes = 4, .d = 16,
                                       .intra_p = 0.08, .inter_p = 0.01,
                                       .feature_noise = 0.8, .seed = 21});
        TrainConfig cfg;
        cfg.epochs = 40;
        cfg.hidden = 16;
        cfg.dropout = 0.5;
        cfg.t0 = 0;
        cfg.dt = 10;
        cfg.n_events = 2;
        cfg.seed = 5;
        // all targets zero, regrowth none: must collapse to plain training
        auto result = train<double>(data.graph, data.splits, cfg);
        const std::vector<double> ref = reference_losses(data.graph, data.splits, cfg);
        if (ref.size() != result.report.epochs.size()) {
            ok = false;
            detail = "epoch count mismatch";
        } else {
            for (std::size_t i = 0; i < ref.size(); ++i)
                if (result.report.epochs[i].train_loss != ref[i]) {
                    ok = false;
                    detail = "loss differs at epoch " + std::to_string(i + 1);
                    break;
                }
        }
        for (const auto& r : result.report.epochs)
            if (r.sparsity_w != 0.0 || r.sparsity_a != 0.0 || r.sparsity_x != 0.0) {
                ok = false;
                detail = "nonzero sparsity in baseline run";
            }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    verdict(5, "zero-target run is bitwise identical to a mask-free baseline", ok, detail);
}

// ---------------------------------------------------------------- criterion 6

void criterion_cost_model() {
    bool ok = true;
    std::string detail;
    const auto toy = inference_cost(ModelKind::gcn, 4, 4, 3, 2, 2, {1.0, 1.0});
    if (toy.total_macs != 72.0 || toy.total_flops != 144.0) {
        ok = false;
        detail = "toy graph cost mismatch";
    }
    const double dense = inference_cost(ModelKind::gcn, 100, 400, 32, 16, 4, {1.0, 1.0}).total_macs;
    double prev_arc = dense + 1.0;
    for (std::size_t arcs : {400u, 300u, 200u, 100u, 0u}) {
        double worst_for_arc = 0.0;
        for (std::size_t feats : {32u, 16u, 8u, 1u})
            for (double wd : {1.0, 0.5, 0.25, 0.0}) {
                const double c =
                    inference_cost(ModelKind::gcn, 100, arcs, feats, 16, 4, {wd, wd}).total_macs;
                if (c > dense) {
                    ok = false;
                    detail = "cost exceeds dense cost";
                }
                worst_for_arc = std::max(worst_for_arc, c);
            }
        if (worst_for_arc >= prev_arc) {
            ok = false;
            detail = "cost not monotone in arc count";
        }
        prev_arc = worst_for_arc;
    }
    if (training_cost(toy, 10) != 30.0 * toy.total_flops) {
        ok = false;
        detail = "training cost convention mismatch";
    }
    verdict(6, "cost model reproduces the worked example and is monotone", ok, detail);
}

// ------------------------------------------------------- criteria 7, 8 and 9

struct ArmResult {
    std::vector<double> accs;
    double med = 0.0;
};

ArmResult run_arm(const SbmConfig& base, const TrainConfig& tmpl, std::size_t repeats) {
    ArmResult out;
    for (std::size_t r = 0; r < repeats; ++r) {
        SbmConfig sc = base;
        sc.seed = base.seed + r;
        SbmResult data = generate_sbm(sc);
        TrainConfig cfg = tmpl;
        cfg.seed = r;
        auto res = train<double>(data.graph, data.splits, cfg);
        out.accs.push_back(res.report.test_acc_at_best);
    }
    out.med = median(out.accs);
    return out;
}

TrainConfig study_config() {
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.hidden = 64;
    cfg.lr = 0.01;
    cfg.weight_decay = 5e-4;
    cfg.dropout = 0.5;
    cfg.t0 = 0;
    cfg.dt = 10;
    cfg.n_events = 10;
    return cfg;
}

void criterion_heterophily() {
    bool ok = true;
    std::string detail;
    try {
        // Low-homophily substitute: class-independent edge probability makes
        // the graph pure noise (homophily ~ 1/C), while the features stay
        // informative, so aggregation over neighbors actively hurts.
        SbmConfig sbm{.n_nodes = 400, .n_classes = 4, .d = 32, .intra_p = 0.02,
                      .inter_p = 0.02, .feature_noise = 0.8, .seed = 300};
        for (std::size_t r = 0; r < 5; ++r) {
            SbmConfig sc = sbm;
            sc.seed = sbm.seed + r;
            const double hom = edge_homophily(generate_sbm(sc).graph);
            if (hom > 0.3) {
                ok = false;
                detail = "fixture homophily " + std::to_string(hom) + " > 0.3";
            }
        }
        TrainConfig dense = study_config();
        TrainConfig cgp = study_config();
        cgp.p_a = 0.95;
        cgp.regrowth.scheme = RegrowthScheme::gradient;
        cgp.regrowth.rate = 0.2;
        const ArmResult dm = run_arm(sbm, dense, 5);
        const ArmResult cm = run_arm(sbm, cgp, 5);
        std::ostringstream d;
        d << "dense median " << dm.med << ", sparse median " << cm.med;
        detail = d.str() + (detail.empty() ? "" : "; " + detail);
        if (cm.med < dm.med + 0.10) ok = false;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    verdict(7, "graph pruning beats dense training by >=10 points on a heterophilous graph",
            ok, detail);
}

void criterion_homophily_and_sparse_init() {
    bool ok8 = true, ok9 = true;
    std::string d8, d9;
    try {
        SbmConfig sbm{.n_nodes = 400, .n_classes = 4, .d = 32, .intra_p = 0.15,
                      .inter_p = 0.01, .feature_noise = 0.8, .seed = 400};
        TrainConfig dense = study_config();
        TrainConfig cgp = study_config();
        cgp.p_w = 0.9;
        cgp.p_a = 0.5;
        cgp.p_x = 0.0;
        cgp.regrowth.scheme = RegrowthScheme::gradient;
        cgp.regrowth.rate = 0.2;
        TrainConfig cgp_sparse = cgp;
        cgp_sparse.init_weight_density = 0.5;

        const ArmResult dm = run_arm(sbm, dense, 5);
        const ArmResult cm = run_arm(sbm, cgp, 5);
        const ArmResult sm = run_arm(sbm, cgp_sparse, 5);

        std::ostringstream s8;
        s8 << "dense median " << dm.med << ", sparse median " << cm.med;
        d8 = s8.str();
        if (cm.med < dm.med - 0.02) ok8 = false;

        std::ostringstream s9;
        s9 << "dense-init median " << cm.med << ", 0.5-init median " << sm.med;
        d9 = s9.str();
        if (sm.med < cm.med - 0.02) ok9 = false;
    } catch (const std::exception& e) {
        ok8 = ok9 = false;
        d8 = d9 = e.what();
    }
    verdict(8, "high sparsity stays within 2 points of dense on a homophilous graph", ok8, d8);
    verdict(9, "sparse initialization at density 0.5 stays within 2 points", ok9, d9);
}

// --------------------------------------------------------------- criterion 10

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    bool ok = true;
    std::string detail;
    try {
        const fs::path tmp = fs::temp_directory_path() / "cgp_acceptance_determinism";
        fs::remove_all(tmp);
        fs::create_directories(tmp);
        nlohmann::json cfg = {{"sbm",
                               {{"n_nodes", 120}, {"n_classes", 3}, {"d", 12},
                                {"intra_p", 0.2}, {"inter_p", 0.03},
                                {"feature_noise", 0.6}, {"seed", 17}}},
                              {"epochs", 60},
                              {"hidden", 16},
                              {"dt", 10},
                              {"n_events", 3},
                              {"p_w", 0.5},
                              {"p_a", 0.3},
                              {"regrowth", "gradient"},
                              {"seed", 9}};
        {
            std::ofstream out(tmp / "cfg.json");
            out << cfg.dump(2);
        }
        auto run = [&](const std::string& sub) {
            const std::string cmd = std::string(CGP_CLI_PATH) + " train --config " +
                                    (tmp / "cfg.json").string() + " --out " +
                                    (tmp / sub).string() + " >/dev/null 2>&1";
            return WEXITSTATUS(std::system(cmd.c_str()));
        };
        if (run("r1") != 0 || run("r2") != 0) {
            ok = false;
            detail = "CLI run failed";
        } else {
            const std::string a = read_file(tmp / "r1" / "report.json");
            const std::string b = read_file(tmp / "r2" / "report.json");
            if (a.empty() || a != b) {
                ok = false;
                detail = "report.json differs between runs";
            }
        }
        fs::remove_all(tmp);
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    verdict(10, "repeated runs emit bitwise-identical report.json", ok, detail);
}

}  // namespace

int main() {
    criterion_schedule();
    criterion_gradients();
    criterion_mask_accounting();
    criterion_prune_oracles();
    criterion_degeneracy();
    criterion_cost_model();
    criterion_heterophily();
    criterion_homophily_and_sparse_init();
    criterion_determinism();
    if (g_failures == 0) {
        std::cout << "all criteria passed" << std::endl;
        return 0;
    }
    std::cout << g_failures << " criteria failed" << std::endl;
    return 1;
}
