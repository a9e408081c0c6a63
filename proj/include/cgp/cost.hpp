// Analytic MAC/FLOP accounting for dense and pruned models. MACs count
// multiply-accumulates only; 1 MAC = 2 FLOPs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cgp {

enum class ModelKind { gcn, sgc };

struct CostBreakdown {
    std::vector<double> aggregation_macs;  // per layer
    std::vector<double> transform_macs;    // per layer
    double total_macs = 0.0;
    double total_flops = 0.0;
    double memory_elements = 0.0;

    void finalize() {
        total_macs = 0.0;
        for (double m : aggregation_macs) total_macs += m;
        for (double m : transform_macs) total_macs += m;
        total_flops = 2.0 * total_macs;
    }
};

// Per layer: transform = n·d_in_active·d_out·weight_density, aggregation =
// (active_arcs + n)·d_out (self-loops included). The feature mask shrinks only
// the input layer's d_in. For SGC, hidden is ignored and K aggregation hops
// apply at the output width.
inline CostBreakdown inference_cost(ModelKind kind, std::size_t n, std::size_t active_arcs,
                                    std::size_t active_features, std::size_t hidden,
                                    std::size_t classes,
                                    const std::vector<double>& weight_density_per_layer,
                                    std::size_t sgc_hops = 2) {
    CostBreakdown cb;
    const double agg_rows = static_cast<double>(active_arcs + n);
    const double nn = static_cast<double>(n);
    const double din = static_cast<double>(active_features);

    if (kind == ModelKind::gcn) {
        if (weight_density_per_layer.size() != 2)
            throw std::invalid_argument("inference_cost: GCN needs 2 layer densities");
        const double h = static_cast<double>(hidden);
        const double C = static_cast<double>(classes);
        cb.transform_macs = {nn * din * h * weight_density_per_layer[0],
                             nn * h * C * weight_density_per_layer[1]};
        cb.aggregation_macs = {agg_rows * h, agg_rows * C};
        cb.memory_elements = nn * din + nn * h + din * h * weight_density_per_layer[0] +
                             h * C * weight_density_per_layer[1];
    } else {
        if (weight_density_per_layer.size() != 1)
            throw std::invalid_argument("inference_cost: SGC needs 1 layer density");
        const double C = static_cast<double>(classes);
        cb.transform_macs = {nn * din * C * weight_density_per_layer[0]};
        cb.aggregation_macs.assign(sgc_hops, agg_rows * C);
        cb.memory_elements = nn * din + din * C * weight_density_per_layer[0];
    }
    cb.finalize();
    return cb;
}

// Forward + backward convention: one training epoch costs 3x the inference
// FLOPs of the epoch's current sparsity state.
inline double training_cost(const CostBreakdown& per_epoch, std::size_t epochs) {
    if (epochs < 1) throw std::invalid_argument("training_cost: epochs must be >= 1");
    return 3.0 * per_epoch.total_flops * static_cast<double>(epochs);
}

inline double training_cost(const std::vector<CostBreakdown>& per_epoch_costs) {
    double total = 0.0;
    for (const auto& c : per_epoch_costs) total += 3.0 * c.total_flops;
    return total;
}

}  // namespace cgp
