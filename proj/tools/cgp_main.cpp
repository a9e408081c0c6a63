// cgp: dataset preparation, single training runs, sparsity sweeps, and
// report conversion. Exit codes: 0 success, 2 config/validation error,
// 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgp/graph.hpp"
#include "cgp/report_io.hpp"
#include "cgp/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

nlohmann::json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw cgp::ConfigError("cannot open config: " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

cgp::SbmConfig sbm_from_json(const nlohmann::json& j) {
    cgp::SbmConfig cfg;
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
    };
    get("n_nodes", cfg.n_nodes);
    get("n_classes", cfg.n_classes);
    get("d", cfg.d);
    get("intra_p", cfg.intra_p);
    get("inter_p", cfg.inter_p);
    get("feature_noise", cfg.feature_noise);
    get("seed", cfg.seed);
    return cfg;
}

std::string precision_override(const std::string& from_config) {
    if (const char* env = std::getenv("CGP_PRECISION")) {
        const std::string p = env;
        if (p != "double" && p != "single")
            throw cgp::ConfigError("CGP_PRECISION must be 'double' or 'single'");
        return p;
    }
    return from_config;
}

struct RunArtifacts {
    cgp::TrainReport report;
};

RunArtifacts run_one(const cgp::Graph& g, const cgp::SplitSet& sp, cgp::TrainConfig cfg,
                     const fs::path& out_dir) {
    fs::create_directories(out_dir);
    RunArtifacts art;
    if (cfg.precision == "single") {
        auto result = cgp::train<float>(g, sp, cfg);
        art.report = result.report;
        cgp::write_mask_dumps(result, cfg.model_kind, out_dir / "masks");
        std::ofstream ck(out_dir / "checkpoint.json");
        ck << result.best_checkpoint.dump() << "\n";
    } else {
        auto result = cgp::train<double>(g, sp, cfg);
        art.report = result.report;
        cgp::write_mask_dumps(result, cfg.model_kind, out_dir / "masks");
        std::ofstream ck(out_dir / "checkpoint.json");
        ck << result.best_checkpoint.dump() << "\n";
    }
    cgp::write_metrics_csv(art.report, out_dir / "metrics.csv");
    cgp::write_report_json(art.report, out_dir / "report.json");
    std::ofstream cfg_echo(out_dir / "config.json");
    cfg_echo << cgp::train_config_to_json(cfg).dump(2) << "\n";
    return art;
}

std::pair<cgp::Graph, cgp::SplitSet> load_data_source(const nlohmann::json& j) {
    const bool has_dataset = j.contains("dataset");
    const bool has_sbm = j.contains("sbm");
    if (has_dataset == has_sbm)
        throw cgp::ConfigError("config must name exactly one data source ('dataset' or 'sbm')");
    if (has_dataset) return cgp::load_dataset(j["dataset"].get<std::string>());
    auto res = cgp::generate_sbm(sbm_from_json(j["sbm"]));
    if (res.zero_arcs) std::cerr << "warning: generated graph has zero arcs\n";
    return {std::move(res.graph), std::move(res.splits)};
}

int cmd_prepare(const fs::path& config, const fs::path& out) {
    auto j = load_json(config);
    auto res = cgp::generate_sbm(sbm_from_json(j.contains("sbm") ? j["sbm"] : j));
    if (res.zero_arcs) std::cerr << "warning: generated graph has zero arcs\n";
    cgp::save_dataset(res.graph, res.splits, out);
    std::cout << "nodes: " << res.graph.n_nodes << "\narcs: " << res.graph.arcs.size()
              << "\nfeatures: " << res.graph.d << "\nclasses: " << res.graph.n_classes << "\n";
    if (!res.graph.arcs.empty())
        std::cout << "edge_homophily: " << cgp::edge_homophily(res.graph) << "\n";
    return 0;
}

int cmd_train(const fs::path& config, const fs::path& out, long long seed_override) {
    auto j = load_json(config);
    auto [g, sp] = load_data_source(j);
    cgp::TrainConfig cfg = cgp::train_config_from_json(j);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.precision = precision_override(cfg.precision);
    cfg.validate();
    run_one(g, sp, cfg, out);
    return 0;
}

int cmd_sweep(const fs::path& config, const fs::path& out, long long seed_override,
              unsigned jobs) {
    auto j = load_json(config);
    auto [g, sp] = load_data_source(j);
    cgp::TrainConfig base = cgp::train_config_from_json(j);
    if (seed_override >= 0) base.seed = static_cast<std::uint64_t>(seed_override);
    base.precision = precision_override(base.precision);

    auto grid = [&](const char* key, double fallback) {
        std::vector<double> v{fallback};
        if (j.contains(key)) v = j[key].get<std::vector<double>>();
        if (v.empty()) throw cgp::ConfigError(std::string("empty grid: ") + key);
        return v;
    };
    const auto gw = grid("grid_p_w", base.p_w);
    const auto ga = grid("grid_p_a", base.p_a);
    const auto gx = grid("grid_p_x", base.p_x);
    const std::size_t repeats = j.value("repeats", std::size_t{1});
    if (repeats < 1) throw cgp::ConfigError("repeats must be >= 1");

    struct Point {
        double pw, pa, px;
        std::size_t rep;
    };
    std::vector<Point> points;
    for (double pw : gw)
        for (double pa : ga)
            for (double px : gx)
                for (std::size_t r = 0; r < repeats; ++r) points.push_back({pw, pa, px, r});

    // Validate every grid point up front so a bad grid fails with exit 2.
    for (const auto& p : points) {
        cgp::TrainConfig cfg = base;
        cfg.p_w = p.pw;
        cfg.p_a = p.pa;
        cfg.p_x = p.px;
        cfg.validate();
    }

    fs::create_directories(out);
    struct Row {
        Point p;
        std::uint64_t seed;
        bool ok = false;
        double test_acc = 0, macs = 0, flops = 0;
        std::string error;
    };
    std::vector<Row> rows(points.size());

    std::mutex next_mu;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mu);
                if (next >= points.size()) return;
                i = next++;
            }
            const Point& p = points[i];
            cgp::TrainConfig cfg = base;
            cfg.p_w = p.pw;
            cfg.p_a = p.pa;
            cfg.p_x = p.px;
            cfg.seed = base.seed + p.rep;
            std::ostringstream dirname;
            dirname << "pw" << p.pw << "_pa" << p.pa << "_px" << p.px << "_s" << cfg.seed;
            Row row;
            row.p = p;
            row.seed = cfg.seed;
            try {
                auto art = run_one(g, sp, cfg, out / dirname.str());
                row.ok = true;
                row.test_acc = art.report.test_acc_at_best;
                row.macs = art.report.final_inference_macs;
                row.flops = art.report.total_training_flops;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows[i] = std::move(row);
        }
    };

    const unsigned nthreads = std::max(1u, jobs);
    std::vector<std::thread> threads;
    for (unsigned t = 0; t + 1 < nthreads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::ofstream summary(out / "summary.csv");
    summary << "p_w,p_a,p_x,seed,test_acc,inference_MACs,training_FLOPs,status\n";
    summary << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        summary << r.p.pw << ',' << r.p.pa << ',' << r.p.px << ',' << r.seed << ',';
        if (r.ok)
            summary << r.test_acc << ',' << r.macs << ',' << r.flops << ",ok\n";
        else
            summary << ",,,failed: " << r.error << "\n";
    }
    return 0;
}

// summary.csv -> plot-ready long format (one metric per row).
int cmd_report(const fs::path& summary_path, const fs::path& out) {
    std::ifstream in(summary_path);
    if (!in) throw cgp::ConfigError("cannot open " + summary_path.string());
    std::ofstream long_csv(out);
    long_csv << "p_w,p_a,p_x,seed,metric,value\n";
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 8 || cells[7] != "ok") continue;
        const char* metrics[] = {"test_acc", "inference_MACs", "training_FLOPs"};
        for (std::size_t m = 0; m < 3; ++m)
            long_csv << cells[0] << ',' << cells[1] << ',' << cells[2] << ',' << cells[3] << ','
                     << metrics[m] << ',' << cells[4 + m] << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CGP sparse-training engine for graph neural networks"};
    app.require_subcommand(1);

    std::string config, out = ".", summary;
    long long seed = -1;
    unsigned jobs = 1;

    auto* prepare = app.add_subcommand("prepare", "Generate a synthetic dataset directory");
    prepare->add_option("--config", config, "SBM config JSON")->required();
    prepare->add_option("--out", out, "Output dataset directory")->required();

    auto* train = app.add_subcommand("train", "Run one training job");
    train->add_option("--config", config, "Run config JSON")->required();
    train->add_option("--out", out, "Output directory")->required();
    train->add_option("--seed", seed, "Override the config seed");

    auto* sweep = app.add_subcommand("sweep", "Run a sparsity grid sweep");
    sweep->add_option("--config", config, "Sweep config JSON")->required();
    sweep->add_option("--out", out, "Output directory")->required();
    sweep->add_option("--seed", seed, "Override the base seed");
    sweep->add_option("--jobs", jobs, "Parallel runs");

    auto* report = app.add_subcommand("report", "Convert summary.csv to long-format CSV");
    report->add_option("--config", summary, "Path to summary.csv")->required();
    report->add_option("--out", out, "Output long-format CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) return cmd_prepare(config, out);
        if (train->parsed()) return cmd_train(config, out, seed);
        if (sweep->parsed()) return cmd_sweep(config, out, seed, jobs);
        if (report->parsed()) return cmd_report(summary, out);
    } catch (const cgp::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const cgp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cgp::DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
