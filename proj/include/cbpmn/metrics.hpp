#pragma once

// Execution-time estimate and structural complexity figures of a C-BPMN model.

#include "cbpmn/engine.hpp"

namespace cbpmn {

/// Abstract time units.
struct CostParams {
    double n = 0;
    double t_a = 1;
    double t_p = 1;
    double t_cm = 1;
    double t_th = 1;
    double c_ct = 1;
};

/// n * (t_a + t_p + t_cm + t_th + C_ct). Throws Error("invalid-cost") on a negative input.
double execution_time(const CostParams& p);

struct StructuralMetrics {
    long noa_extra = 0;
    long noac_extra = 0;
    long mcc_extra = 0;
    long cfc = 0;
};

/// `chain` is the model's chain or an adapted one.
StructuralMetrics structural_metrics(const CBPMNModel& model, const ActivityChain& chain);

struct HalsteadCounts {
    double n1 = 0;
    double n2 = 0;
    double N1 = 0;
    double N2 = 0;
};

struct HalsteadMetrics {
    double length = 0;
    double volume = 0;
    double difficulty = 0;
};

/// Throws Error("invalid-counts") when a count is below 1.
HalsteadMetrics halstead(const HalsteadCounts& c);

/// Counts of the context-aware model: one extra unique flow element (the
/// contextual event) and one extra unique data object (its context state),
/// each occurring once per activity.
HalsteadCounts halstead_counts(const CBPMNModel& model);

} // namespace cbpmn
