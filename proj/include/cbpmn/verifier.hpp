#pragma once

// Two-layer net of a C-BPMN model and its state-space verdicts.
//
// Layer 2 holds the process spine Start -> Activity_1 -> INFO_1 -> ... ->
// Activity_n -> End together with the contextual event places. Each
// Activity_i is a substitution transition expanded into its task list (three
// generic tasks when none is given). A ContextualSituation token colored
// cs<i> is consumed by catchContext_i; throwActivity_i returns control to
// Activity_i through Returned_i and releases cs<i+1>.
//
// Layer 1 mirrors the context graph for the state nodes the model uses:
// State_s -> Mapping_s -> Entity_k -> Attributes_k -> A_l -> Grab_value_l ->
// value_l -> Composition_s -> VALUE_s, with a self-loop Dependency_<rule>
// over value places of co-used attributes. Layer-1 tokens carry the index of
// the activity whose event is being evaluated.

#include "cbpmn/engine.hpp"
#include "cbpmn/petri_net.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cbpmn {

/// Throws Error("invalid-model") when the graph or chain does not validate.
Net translate(const CBPMNModel& model);
/// Translates `chain` (for instance an adapted one) against the model's graph and events.
Net translate(const CBPMNModel& model, const ActivityChain& chain);

bool is_goal(const Net& net, const Marking& m);

struct VerificationReport {
    std::size_t places = 0;
    std::size_t transitions = 0;
    std::size_t net_arcs = 0;
    std::size_t substitutions = 0;
    std::size_t markings = 0;
    std::size_t space_arcs = 0;
    bool partial = false;
    std::uint32_t bound = 0;
    std::vector<std::pair<std::string, std::uint32_t>> place_bounds;
    std::vector<std::string> dead_transitions;
    std::vector<std::size_t> dead_markings;
    bool dead_marking_is_goal = false;
    bool goal_reachable = false;
    std::size_t witness_length = 0;
    bool goal_is_home = false;
    std::vector<std::pair<std::string, std::size_t>> occurrences;

    bool one_safe() const { return !partial && bound <= 1; }
    /// 1-safe, no dead transitions, the goal is the only dead marking and a home marking.
    bool ok() const;
};

VerificationReport verify(const Net& net, std::size_t limit, unsigned workers = 1);

} // namespace cbpmn
