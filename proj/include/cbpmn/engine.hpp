#pragma once

// C-BPMN model (context graph, activity chain, contextual events, rules and
// fragment repository) and the instance runner that adapts it.

#include "cbpmn/context.hpp"
#include "cbpmn/context_graph.hpp"
#include "cbpmn/fragment_repo.hpp"
#include "cbpmn/process_chain.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cbpmn {

/// Figures of the model before context awareness was added.
struct Baseline {
    std::size_t activities = 0;
    std::size_t gateways = 0;
    std::size_t split_branches = 0;
    std::size_t unique_flow_elements = 0;
    std::size_t unique_data_objects = 0;
    std::size_t total_flow_elements = 0;
    std::size_t total_data_objects = 0;
};

struct CBPMNModel {
    std::string name;
    ContextGraph graph;
    ActivityChain chain;
    /// Contextual event of each activity: its scope and the state node it instantiates.
    std::map<std::string, ScopeFilter> scopes;
    std::map<std::string, std::string> state_of;
    std::vector<AdaptationRule> rules;
    FragmentRepository repository;
    /// I_s: the assignment under which no rule fires.
    std::optional<ContextVector> ideal_state;
    Baseline baseline;
};

/// Timed CON(t) snapshots; each holds until the next one.
struct Scenario {
    std::vector<ContextVector> snapshots;
};

/// Findings cover the graph, the chain, the events and the rule table.
ValidationReport validate_model(const CBPMNModel& model);
ValidationReport validate_scenario(const Scenario& scenario);

struct TraceEntry {
    enum class Outcome { Applied, Deferred, Expired, Skipped, NoChange };
    LogicalTime time = 0;
    /// Activity whose contextual event produced the decision.
    std::string activity;
    std::string state;
    std::string value;
    std::optional<std::string> fragment;
    std::optional<std::string> rule;
    std::optional<Action> action;
    /// Resolved target activity.
    std::string target;
    Outcome outcome = Outcome::NoChange;
    std::optional<LogicalTime> deferred_until;
    std::string note;
};

std::string_view to_string(TraceEntry::Outcome o);

struct RunStats {
    std::size_t events = 0;
    std::size_t instance_nodes = 0;
    std::size_t instance_edges = 0;
    std::size_t pattern_comparisons = 0;
};

struct AdaptationTrace {
    std::vector<TraceEntry> entries;
    /// Activities in the order they executed.
    std::vector<std::string> execution_order;
    ActivityChain final_chain;
    std::vector<std::string> warnings;
    RunStats stats;
    LogicalTime started = 0;
    LogicalTime finished = 0;

    std::size_t count(TraceEntry::Outcome o) const;
};

/// Depth beyond which fragment insertions are refused.
inline constexpr int kMaxInsertionDepth = 3;

/// Walks the chain from the start event. Each activity's contextual event is
/// evaluated once, when the activity is first reached; timed values defer
/// every action except reorder until the delay has elapsed.
/// Throws Error("invalid-scenario") and module errors prefixed with the activity.
AdaptationTrace run_instance(const CBPMNModel& model, const Scenario& scenario);

/// One line per trace entry followed by the execution order.
std::string render_log(const AdaptationTrace& trace);

} // namespace cbpmn
