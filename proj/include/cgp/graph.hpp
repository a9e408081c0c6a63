// Graph datasets: loading, validation, synthesis (SBM), and symmetric
// normalization. Arcs are directed COO pairs; undirected graphs store both
// directions. Self-loops live only inside NormAdj and are never prunable.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgp/tensor.hpp"
#include "json.hpp"

namespace cgp {

struct Graph {
    std::size_t n_nodes = 0;
    std::vector<std::pair<int, int>> arcs;  // (src,dst), lexicographically sorted
    DenseMatrix<double> features;           // n_nodes x d
    std::vector<int> labels;                // class ids in [0, n_classes)
    std::size_t d = 0;
    std::size_t n_classes = 0;
};

struct SplitSet {
    std::vector<std::size_t> train_idx, val_idx, test_idx;
};

struct NormAdj {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    // For each non-diagonal CSR entry, the index of its source arc; diagonal
    // entries carry kNoArc.
    static constexpr std::size_t kNoArc = static_cast<std::size_t>(-1);
    std::vector<std::size_t> arc_map;
    std::vector<std::size_t> self_loop_positions;  // one CSR position per node
    std::size_t arc_count = 0;
};

struct SbmConfig {
    std::size_t n_nodes = 0;
    std::size_t n_classes = 2;
    std::size_t d = 8;
    double intra_p = 0.5;
    double inter_p = 0.05;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;
};

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void validate_graph(const Graph& g) {
    std::set<std::pair<int, int>> seen;
    for (const auto& [s, t] : g.arcs) {
        if (s < 0 || t < 0 || static_cast<std::size_t>(s) >= g.n_nodes ||
            static_cast<std::size_t>(t) >= g.n_nodes)
            throw DatasetError("arc endpoint out of range: (" + std::to_string(s) + "," +
                               std::to_string(t) + ")");
        if (s == t) throw DatasetError("self-loop arc rejected: node " + std::to_string(s));
        if (!seen.insert({s, t}).second)
            throw DatasetError("duplicate arc: (" + std::to_string(s) + "," +
                               std::to_string(t) + ")");
    }
    if (g.labels.size() != g.n_nodes) throw DatasetError("labels missing for some nodes");
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        if (g.labels[i] < 0 || static_cast<std::size_t>(g.labels[i]) >= g.n_classes)
            throw DatasetError("label out of range at node " + std::to_string(i));
    for (double v : g.features.data)
        if (!std::isfinite(v)) throw DatasetError("non-finite feature value");
}

inline void validate_splits(const SplitSet& sp, std::size_t n) {
    const std::vector<const std::vector<std::size_t>*> parts = {&sp.train_idx, &sp.val_idx,
                                                                &sp.test_idx};
    const char* names[] = {"train", "val", "test"};
    std::set<std::size_t> seen;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (parts[p]->empty()) throw DatasetError(std::string("empty split: ") + names[p]);
        for (std::size_t i : *parts[p]) {
            if (i >= n)
                throw DatasetError(std::string("split index out of range in ") + names[p] +
                                   ": " + std::to_string(i));
            if (!seen.insert(i).second)
                throw DatasetError("overlapping splits at index " + std::to_string(i));
        }
    }
}

}  // namespace detail

inline Graph make_validated_graph(std::size_t n, std::vector<std::pair<int, int>> arcs,
                                  DenseMatrix<double> features, std::vector<int> labels,
                                  bool symmetrize) {
    Graph g;
    g.n_nodes = n;
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.d = g.features.cols;
    int maxl = -1;
    for (int l : g.labels) maxl = std::max(maxl, l);
    g.n_classes = static_cast<std::size_t>(maxl + 1);
    {
        std::set<std::pair<int, int>> seen;
        for (const auto& a : arcs)
            if (!seen.insert(a).second)
                throw DatasetError("duplicate arc: (" + std::to_string(a.first) + "," +
                                   std::to_string(a.second) + ")");
    }
    if (symmetrize) {
        std::set<std::pair<int, int>> all(arcs.begin(), arcs.end());
        for (const auto& [s, t] : arcs) all.insert({t, s});
        arcs.assign(all.begin(), all.end());
    } else {
        std::sort(arcs.begin(), arcs.end());
    }
    g.arcs = std::move(arcs);
    detail::validate_graph(g);
    return g;
}

inline std::pair<Graph, SplitSet> load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    for (const char* f : {"edges.tsv", "features.tsv", "labels.tsv", "splits.json"})
        if (!fs::exists(dir / f)) throw DatasetError("missing file: " + (dir / f).string());

    auto parse_error = [](const fs::path& file, std::size_t line, const std::string& what) {
        return DatasetError(file.string() + ":" + std::to_string(line) + ": " + what);
    };

    std::vector<std::pair<int, int>> arcs;
    {
        std::ifstream in(dir / "edges.tsv");
        std::string line;
        std::size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long s, t;
            if (!(ss >> s >> t)) throw parse_error(dir / "edges.tsv", ln, "expected two integers");
            arcs.emplace_back(static_cast<int>(s), static_cast<int>(t));
        }
    }

    DenseMatrix<double> feats;
    {
        std::ifstream in(dir / "features.tsv");
        std::string line;
        std::size_t ln = 0;
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line)) {
            ++ln;
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::vector<double> row;
            std::string tok;
            while (ss >> tok) {
                try {
                    std::size_t pos = 0;
                    double v = std::stod(tok, &pos);
                    if (pos != tok.size()) throw std::invalid_argument(tok);
                    row.push_back(v);
                } catch (const std::exception&) {
                    throw parse_error(dir / "features.tsv", ln, "non-numeric feature '" + tok + "'");
                }
            }
            if (!rows.empty() && row.size() != rows.front().size())
                throw parse_error(dir / "features.tsv", ln, "inconsistent feature width");
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw DatasetError((dir / "features.tsv").string() + ": no rows");
        feats = DenseMatrix<double>(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows[i].size(); ++j) feats(i, j) = rows[i][j];
    }

    std::vector<int> labels;
    {
        std::ifstream in(dir / "labels.tsv");
        std::string line;
        std::size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long l;
            if (!(ss >> l)) throw parse_error(dir / "labels.tsv", ln, "expected an integer label");
            labels.push_back(static_cast<int>(l));
        }
    }

    SplitSet sp;
    bool undirected = true;
    {
        std::ifstream in(dir / "splits.json");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw DatasetError((dir / "splits.json").string() + ": " + e.what());
        }
        for (const char* key : {"train", "val", "test"})
            if (!j.contains(key))
                throw DatasetError((dir / "splits.json").string() + ": missing key '" +
                                   key + "'");
        sp.train_idx = j["train"].get<std::vector<std::size_t>>();
        sp.val_idx = j["val"].get<std::vector<std::size_t>>();
        sp.test_idx = j["test"].get<std::vector<std::size_t>>();
        if (j.contains("undirected")) undirected = j["undirected"].get<bool>();
    }

    Graph g = make_validated_graph(feats.rows, std::move(arcs), std::move(feats),
                                   std::move(labels), undirected);
    detail::validate_splits(sp, g.n_nodes);
    return {std::move(g), std::move(sp)};
}

inline void save_dataset(const Graph& g, const SplitSet& sp, const std::filesystem::path& dir,
                         bool undirected = true) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        for (const auto& [s, t] : g.arcs) out << s << "\t" << t << "\n";
    }
    {
        std::ofstream out(dir / "features.tsv");
        out.precision(17);
        for (std::size_t i = 0; i < g.n_nodes; ++i) {
            for (std::size_t j = 0; j < g.d; ++j) out << (j ? "\t" : "") << g.features(i, j);
            out << "\n";
        }
    }
    {
        std::ofstream out(dir / "labels.tsv");
        for (int l : g.labels) out << l << "\n";
    }
    {
        nlohmann::json j;
        j["train"] = sp.train_idx;
        j["val"] = sp.val_idx;
        j["test"] = sp.test_idx;
        j["undirected"] = undirected;
        std::ofstream out(dir / "splits.json");
        out << j.dump(2) << "\n";
    }
}

// Â = D̂^{-1/2}(A + I)D̂^{-1/2}; degrees come from A+I and stay fixed for the
// lifetime of the NormAdj even as masks later zero edge values.
inline NormAdj normalize_adjacency(const Graph& g) {
    NormAdj na;
    na.n = g.n_nodes;
    na.arc_count = g.arcs.size();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows(g.n_nodes);
    for (std::size_t a = 0; a < g.arcs.size(); ++a)
        rows[g.arcs[a].first].push_back({static_cast<std::size_t>(g.arcs[a].second), a});
    std::vector<double> deg(g.n_nodes, 1.0);  // self-loop
    for (const auto& [s, t] : g.arcs) deg[static_cast<std::size_t>(s)] += 1.0;

    na.row_ptr.assign(g.n_nodes + 1, 0);
    na.self_loop_positions.assign(g.n_nodes, 0);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
        auto& r = rows[i];
        r.push_back({i, NormAdj::kNoArc});
        std::sort(r.begin(), r.end());
        na.row_ptr[i + 1] = na.row_ptr[i] + r.size();
        for (const auto& [j, arc] : r) {
            if (arc == NormAdj::kNoArc) na.self_loop_positions[i] = na.col_idx.size();
            na.col_idx.push_back(j);
            na.arc_map.push_back(arc);
            na.values.push_back(1.0 / std::sqrt(deg[i] * deg[j]));
        }
    }
    return na;
}

inline double edge_homophily(const Graph& g) {
    if (g.arcs.empty()) throw DatasetError("edge_homophily undefined on empty edge set");
    std::size_t same = 0;
    for (const auto& [s, t] : g.arcs)
        if (g.labels[static_cast<std::size_t>(s)] == g.labels[static_cast<std::size_t>(t)]) ++same;
    return static_cast<double>(same) / static_cast<double>(g.arcs.size());
}

struct SbmResult {
    Graph graph;
    SplitSet splits;
    bool zero_arcs = false;
};

inline SbmResult generate_sbm(const SbmConfig& cfg) {
    if (cfg.intra_p < 0 || cfg.intra_p > 1 || cfg.inter_p < 0 || cfg.inter_p > 1)
        throw DatasetError("probability out of range");
    if (cfg.n_classes < 2 || cfg.n_nodes < cfg.n_classes)
        throw DatasetError("need n_nodes >= n_classes >= 2");

    Rng rng(cfg.seed);
    const std::size_t n = cfg.n_nodes;
    const std::size_t C = cfg.n_classes;

    // Balanced contiguous blocks.
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * C / n);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<int, int>> arcs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? cfg.intra_p : cfg.inter_p;
            if (u(rng) < p) {
                arcs.emplace_back(static_cast<int>(i), static_cast<int>(j));
                arcs.emplace_back(static_cast<int>(j), static_cast<int>(i));
            }
        }

    // One-hot-like class centroid plus Gaussian noise.
    DenseMatrix<double> feats(n, cfg.d);
    std::normal_distribution<double> gauss(0.0, cfg.feature_noise);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cfg.d; ++j) {
            const double centroid = (j % C == static_cast<std::size_t>(labels[i])) ? 1.0 : 0.0;
            feats(i, j) = centroid + (cfg.feature_noise > 0 ? gauss(rng) : 0.0);
        }

    // 60/20/20 stratified by class.
    SplitSet sp;
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == static_cast<int>(c)) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        const std::size_t ntr = (members.size() * 6) / 10;
        const std::size_t nva = (members.size() * 2) / 10;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (k < ntr)
                sp.train_idx.push_back(members[k]);
            else if (k < ntr + nva)
                sp.val_idx.push_back(members[k]);
            else
                sp.test_idx.push_back(members[k]);
        }
    }
    // Tiny classes can starve a split; backfill from train so each is nonempty.
    while (sp.val_idx.empty() && sp.train_idx.size() > 1) {
        sp.val_idx.push_back(sp.train_idx.back());
        sp.train_idx.pop_back();
    }
    while (sp.test_idx.empty() && sp.train_idx.size() > 1) {
        sp.test_idx.push_back(sp.train_idx.back());
        sp.train_idx.pop_back();
    }
    std::sort(sp.train_idx.begin(), sp.train_idx.end());
    std::sort(sp.val_idx.begin(), sp.val_idx.end());
    std::sort(sp.test_idx.begin(), sp.test_idx.end());

    SbmResult res;
    res.zero_arcs = arcs.empty();
    res.graph = make_validated_graph(n, std::move(arcs), std::move(feats), std::move(labels),
                                     /*symmetrize=*/false);
    detail::validate_splits(sp, n);
    res.splits = std::move(sp);
    return res;
}

}  // namespace cgp
