// On-disk run artifacts: metrics.csv, report.json, mask dumps, checkpoints.

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

#include "cgp/sparsify.hpp"
#include "cgp/trainer.hpp"
#include "json.hpp"

namespace cgp {

inline constexpr const char* kMetricsHeader =
    "epoch,train_loss,train_acc,val_acc,test_acc,sparsity_w,sparsity_a,sparsity_x,event";

inline void write_metrics_csv(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << kMetricsHeader << "\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : report.epochs) {
        out << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.val_acc << ','
            << r.test_acc << ',' << r.sparsity_w << ',' << r.sparsity_a << ',' << r.sparsity_x
            << ',' << (r.event ? 1 : 0) << "\n";
    }
}

inline nlohmann::json report_to_json(const TrainReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["config"] = report.config_echo;
    j["best_epoch"] = report.best_epoch;
    j["best_val_acc"] = report.best_val_acc;
    j["test_acc_at_best"] = report.test_acc_at_best;
    j["final_inference_macs"] = report.final_inference_macs;
    j["total_training_flops"] = report.total_training_flops;
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& r : report.epochs) {
        eps.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"train_acc", r.train_acc},
                       {"val_acc", r.val_acc},
                       {"test_acc", r.test_acc},
                       {"sparsity_w", r.sparsity_w},
                       {"sparsity_a", r.sparsity_a},
                       {"sparsity_x", r.sparsity_x},
                       {"event", r.event}});
    }
    j["epochs"] = std::move(eps);
    return j;
}

inline void write_report_json(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << report_to_json(report).dump(2) << "\n";
}

// "index<TAB>active<TAB>value", one line per element.
template <class T>
void write_mask_dump(const std::vector<T>& values, const Bitset& active,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    out << std::setprecision(std::numeric_limits<T>::max_digits10);
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << '\t' << static_cast<int>(active[i]) << '\t' << values[i] << "\n";
}

template <class T>
void write_mask_dumps(const TrainResult<T>& result, ModelKind kind,
                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (kind == ModelKind::gcn) {
        std::vector<T> wvals = result.gcn.W0.values.data;
        wvals.insert(wvals.end(), result.gcn.W1.values.data.begin(),
                     result.gcn.W1.values.data.end());
        Bitset wmask = result.gcn.W0.mask;
        wmask.insert(wmask.end(), result.gcn.W1.mask.begin(), result.gcn.W1.mask.end());
        write_mask_dump(wvals, wmask, dir / "weights.tsv");
    } else {
        write_mask_dump(result.sgc.W.values.data, result.sgc.W.mask, dir / "weights.tsv");
    }
    write_mask_dump(result.m_a.values, result.m_a.active, dir / "edges.tsv");
    write_mask_dump(result.m_x.values, result.m_x.active, dir / "features.tsv");
}

}  // namespace cgp
