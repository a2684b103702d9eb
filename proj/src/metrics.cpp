#include "cbpmn/metrics.hpp"

#include "cbpmn/error.hpp"

#include <cmath>
#include <set>

namespace cbpmn {

double execution_time(const CostParams& p) {
    for (double v : {p.n, p.t_a, p.t_p, p.t_cm, p.t_th, p.c_ct}) {
        if (v < 0 || std::isnan(v)) throw Error("invalid-cost", "cost parameters must be non-negative");
    }
    return p.n * (p.t_a + p.t_p + p.t_cm + p.t_th + p.c_ct);
}

StructuralMetrics structural_metrics(const CBPMNModel& model, const ActivityChain& chain) {
    StructuralMetrics m;
    const long baseline =
        static_cast<long>(model.baseline.activities ? model.baseline.activities : model.chain.size());
    m.noa_extra = static_cast<long>(chain.size()) - baseline;
    m.noac_extra = m.noa_extra;
    const long events = static_cast<long>(chain.size());
    const long transfers = events;
    m.mcc_extra = chain.empty() ? 0 : transfers - events + 2;
    m.cfc = static_cast<long>(model.baseline.split_branches);
    return m;
}

HalsteadMetrics halstead(const HalsteadCounts& c) {
    if (c.n1 < 1 || c.n2 < 1 || c.N1 < c.n1 || c.N2 < c.n2) {
        throw Error("invalid-counts", "Halstead counts need N1 >= n1 >= 1 and N2 >= n2 >= 1");
    }
    HalsteadMetrics h;
    h.length = c.n1 * std::log2(c.n1) + c.n2 * std::log2(c.n2);
    h.volume = (c.N1 + c.N2) * std::log2(c.n1 + c.n2);
    h.difficulty = (c.n1 / 2.0) * (c.N2 / c.n2);
    return h;
}

HalsteadCounts halstead_counts(const CBPMNModel& model) {
    const Baseline& b = model.baseline;
    const double n = static_cast<double>(model.chain.size());
    std::size_t data_total = 0;
    std::set<std::string> data_unique;
    for (const auto& a : model.chain.ordered_nodes()) {
        data_total += a.output_data.size();
        data_unique.insert(a.output_data.begin(), a.output_data.end());
    }
    // Base figures default to the chain itself: activities plus start and end events.
    double n1 = b.unique_flow_elements ? static_cast<double>(b.unique_flow_elements) : n + 2;
    double N1 = b.total_flow_elements ? static_cast<double>(b.total_flow_elements) : n + 2;
    double n2 = b.unique_data_objects ? static_cast<double>(b.unique_data_objects)
                                      : static_cast<double>(data_unique.size());
    double N2 = b.total_data_objects ? static_cast<double>(b.total_data_objects) : static_cast<double>(data_total);
    return {n1 + 1, n2 + 1, n + N1, n + N2};
}

} // namespace cbpmn
