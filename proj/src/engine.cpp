#include "cbpmn/engine.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cbpmn {

std::string_view to_string(TraceEntry::Outcome o) {
    switch (o) {
    case TraceEntry::Outcome::Applied:
        return "applied";
    case TraceEntry::Outcome::Deferred:
        return "deferred";
    case TraceEntry::Outcome::Expired:
        return "expired";
    case TraceEntry::Outcome::Skipped:
        return "skipped";
    case TraceEntry::Outcome::NoChange:
        return "no-change";
    }
    return "?";
}

std::size_t AdaptationTrace::count(TraceEntry::Outcome o) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [&](const TraceEntry& e) { return e.outcome == o; }));
}

ValidationReport validate_scenario(const Scenario& scenario) {
    ValidationReport report;
    for (std::size_t i = 0; i < scenario.snapshots.size(); ++i) {
        const auto& snap = scenario.snapshots[i];
        if (i > 0 && snap.timestamp() <= scenario.snapshots[i - 1].timestamp()) {
            report.findings.push_back({"non-monotone-scenario", "snapshot " + std::to_string(i + 1) + " at " +
                                                                    format_clock(snap.timestamp()) +
                                                                    " does not follow its predecessor"});
        }
        for (const auto& c : snap.contexts()) {
            try {
                c.validate();
            } catch (const Error& e) {
                report.findings.push_back({e.code(), "snapshot " + std::to_string(i + 1) + ": " + e.message()});
            }
        }
    }
    return report;
}

ValidationReport validate_model(const CBPMNModel& model) {
    ValidationReport report = validate_graph(model.graph);
    auto add = [&](std::string code, std::string message) {
        report.findings.push_back({std::move(code), std::move(message)});
    };

    if (model.chain.empty()) add("empty-chain", "the model has no activities");
    if (!model.chain.well_formed()) add("malformed-chain", "activity links are inconsistent");

    for (const auto& [id, scope] : model.scopes) {
        if (!model.chain.contains(id)) add("unknown-activity", "scope for undeclared activity '" + id + "'");
        if (scope.activity_id != id) add("scope-mismatch", "scope of '" + id + "' names '" + scope.activity_id + "'");
    }
    for (const auto& [id, state] : model.state_of) {
        if (!model.chain.contains(id)) add("unknown-activity", "state node for undeclared activity '" + id + "'");
        if (!model.graph.find_state(state)) add("unknown-state", "activity '" + id + "' maps to missing state '" + state + "'");
        if (!model.scopes.count(id)) add("missing-scope", "activity '" + id + "' has a state node but no scope");
        if (model.chain.contains(id) && !model.repository.section(model.chain.node(id).sub_goal)) {
            add("unknown-subgoal", "no repository section for sub-goal '" + model.chain.node(id).sub_goal + "' of '" +
                                       id + "'");
        }
    }

    for (const auto& [code, message] : check_rules(model.rules)) add(code, message);
    for (const auto& r : model.rules) {
        if (r.fragment_pattern && !model.repository.find_fragment(*r.fragment_pattern)) {
            add("unknown-fragment", "rule '" + r.id + "' expects undefined fragment '" + *r.fragment_pattern + "'");
        }
        if (r.activity && !model.chain.contains(*r.activity)) {
            add("unknown-activity", "rule '" + r.id + "' is bound to undeclared activity '" + *r.activity + "'");
        }
        for (const auto& a : r.actions) {
            if (a.fragment && !model.repository.find_fragment(*a.fragment)) {
                add("unknown-fragment", "rule '" + r.id + "' inserts undefined fragment '" + *a.fragment + "'");
            }
        }
    }

    if (report.ok() && model.ideal_state) {
        try {
            AdaptationTrace t = run_instance(model, Scenario{{*model.ideal_state}});
            std::size_t fired = t.count(TraceEntry::Outcome::Applied) + t.count(TraceEntry::Outcome::Deferred);
            if (fired > 0) add("ideal-state-adapts", std::to_string(fired) + " actions fire under the ideal state");
        } catch (const Error& e) {
            add("ideal-state-error", e.what());
        }
    }
    return report;
}

namespace {

struct Pending {
    LogicalTime due = 0;
    TraceEntry entry;
    const ProcessFragment* fragment = nullptr;
};

class Runner {
public:
    Runner(const CBPMNModel& model, const Scenario& scenario) : model_(model), scenario_(scenario) {
        chain_ = model.chain;
        clock_ = scenario.snapshots.empty() ? 0 : scenario.snapshots.front().timestamp();
        trace_.started = clock_;
    }

    AdaptationTrace run() {
        const std::size_t guard = 64 * (chain_.size() + 1) * (kMaxInsertionDepth + 1) + 1024;
        for (std::size_t step = 0;; ++step) {
            if (step > guard) throw Error("runaway-instance", "the chain kept growing without terminating");
            apply_due();
            auto next = executed_.empty() ? chain_.head() : chain_.node(executed_.back()).next;
            if (!next) break;
            if (evaluated_.insert(*next).second) {
                fire_event(*next);
                continue;
            }
            executed_.push_back(*next);
            clock_ += chain_.node(*next).duration;
        }
        for (auto& p : pending_) {
            p.entry.time = clock_;
            p.entry.outcome = TraceEntry::Outcome::Expired;
            p.entry.note = "instance ended before " + format_clock(p.due);
            trace_.entries.push_back(std::move(p.entry));
        }
        pending_.clear();
        trace_.execution_order = executed_;
        trace_.final_chain = chain_;
        trace_.finished = clock_;
        return std::move(trace_);
    }

private:
    const ContextVector& current_vector() const {
        static const ContextVector none;
        const ContextVector* cur = &none;
        for (const auto& s : scenario_.snapshots) {
            if (s.timestamp() <= clock_) cur = &s;
        }
        return *cur;
    }

    std::map<std::string, TimedValue> observations(const ContextVector& v) const {
        std::map<std::string, TimedValue> out;
        for (const auto& c : v.contexts()) {
            if (c.temporality == Temporality::Static) continue;
            const GreenLink* g = model_.graph.green_link(c.qualified_attribute());
            out.emplace(c.qualified_attribute(), TimedValue{c.value, g ? g->delay : 0});
        }
        return out;
    }

    bool is_executed(const std::string& id) const {
        return std::find(executed_.begin(), executed_.end(), id) != executed_.end();
    }

    void fire_event(const std::string& id) {
        auto scope = model_.scopes.find(id);
        if (scope == model_.scopes.end()) return;
        try {
            evaluate(id, scope->second);
        } catch (const Error& e) {
            throw Error(e.code(), "activity '" + id + "': " + e.message());
        }
    }

    void evaluate(const std::string& id, const ScopeFilter& scope) {
        const ContextVector& vec = current_vector();
        ContextState old = states_.count(id) ? states_.at(id) : ContextState::initial(id);
        ContextState state = catch_context(situation_of(vec), old, scope);
        states_[id] = state;
        if (state == old || !state.has_changes()) return;

        auto mapped = model_.state_of.find(id);
        SubgraphInstance inst = mapped == model_.state_of.end() ? instantiate(model_.graph, state)
                                                                : instantiate(model_.graph, state, mapped->second);
        if (inst.activated_state.empty()) return;
        const StateNodeDef* node = model_.graph.find_state(inst.activated_state);
        auto obs = observations(vec);
        inst = assign_values(std::move(inst), obs);
        inst = carry_forward(std::move(inst), *node, obs);
        inst = apply_dependencies(std::move(inst), model_.graph.dependency_rules);
        CompositeValue value = compose_value(inst, *node);
        ++trace_.stats.events;
        trace_.stats.instance_nodes += inst.stats.nodes;
        trace_.stats.instance_edges += inst.stats.edges;

        const ActivityNode& activity = chain_.node(id);
        ThrowResult thrown;
        thrown.value = value;
        if (model_.repository.section(activity.sub_goal)) {
            thrown = model_.repository.throw_activity(activity.sub_goal, value);
        }
        trace_.stats.pattern_comparisons += thrown.comparisons;

        TraceEntry base;
        base.time = clock_;
        base.activity = id;
        base.state = node->id;
        base.value = value.render();
        if (thrown.fragment) base.fragment = thrown.fragment->id;

        const AdaptationRule* rule = select_rule(model_.rules, value, thrown.fragment, id);
        if (!rule) {
            trace_.warnings.push_back("no rule matches " + base.value + " at '" + id + "'");
            base.target = id;
            base.note = "no matching rule";
            trace_.entries.push_back(std::move(base));
            return;
        }
        base.rule = rule->id;

        const std::optional<std::string> l2 = activity.prev;
        const std::optional<std::string> l3 = activity.next;
        for (const auto& action : rule->actions) {
            TraceEntry e = base;
            e.action = action;
            std::optional<std::string> target = resolve(action.target, id, l2, l3);
            const ProcessFragment* fragment = thrown.fragment;
            if (action.fragment) fragment = model_.repository.find_fragment(*action.fragment);
            if (!target) {
                e.outcome = TraceEntry::Outcome::Skipped;
                e.note = "no activity at " + action.target.value_or("L1");
                trace_.entries.push_back(std::move(e));
                continue;
            }
            e.target = *target;
            if (action.needs_fragment() && !fragment) {
                e.outcome = TraceEntry::Outcome::Skipped;
                e.note = "no fragment selected";
                trace_.entries.push_back(std::move(e));
                continue;
            }
            if (value.timed() && action.kind != Action::Kind::Reorder) {
                e.outcome = TraceEntry::Outcome::Deferred;
                e.deferred_until = clock_ + value.max_delay();
                pending_.push_back({*e.deferred_until, e, fragment});
                trace_.entries.push_back(std::move(e));
                continue;
            }
            apply(e, fragment);
            trace_.entries.push_back(std::move(e));
        }
    }

    std::optional<std::string> resolve(const std::optional<std::string>& symbol, const std::string& l1,
                                       const std::optional<std::string>& l2,
                                       const std::optional<std::string>& l3) const {
        if (!symbol || *symbol == "L1") return l1;
        if (*symbol == "L2") return l2;
        if (*symbol == "L3") return l3;
        if (!chain_.contains(*symbol)) throw Error("unknown-activity", "action target '" + *symbol + "' is not in the chain");
        return symbol;
    }

    void apply(TraceEntry& e, const ProcessFragment* fragment) {
        const Action& a = *e.action;
        const ActivityNode& target = chain_.node(e.target);
        if (a.needs_fragment() && target.depth >= kMaxInsertionDepth) {
            e.outcome = TraceEntry::Outcome::Skipped;
            e.note = "insertion depth limit reached";
            return;
        }
        ActivityChain next = chain_;
        switch (a.kind) {
        case Action::Kind::AddBefore:
            next.add_fragment(e.target, InsertPosition::Before, *fragment);
            e.fragment = fragment->id;
            break;
        case Action::Kind::AddAfter:
            next.add_fragment(e.target, InsertPosition::After, *fragment);
            e.fragment = fragment->id;
            break;
        case Action::Kind::ReplaceByFragment:
            next.replace_activity(e.target, *fragment);
            e.fragment = fragment->id;
            break;
        case Action::Kind::ReplaceRole:
            next.replace_attribute(e.target, ActivityAttribute::Role, a.value);
            break;
        case Action::Kind::ReplaceMedium:
            next.replace_attribute(e.target, ActivityAttribute::Medium, a.value);
            break;
        case Action::Kind::Bypass:
            next.bypass(e.target);
            break;
        case Action::Kind::DataLevelChange:
            next.data_level_change(e.target, a.delta);
            break;
        case Action::Kind::Reorder: {
            std::vector<std::string> window;
            std::vector<std::string> symbols;
            if (target.prev) {
                window.push_back(*target.prev);
                symbols.push_back("L2");
            }
            window.push_back(target.id);
            symbols.push_back("L1");
            if (target.next) {
                window.push_back(*target.next);
                symbols.push_back("L3");
            }
            if (window.size() < 2) {
                e.outcome = TraceEntry::Outcome::Skipped;
                e.note = "nothing to reorder around a lone activity";
                return;
            }
            std::vector<std::string> order;
            for (const auto& s : a.permutation) {
                auto it = std::find(symbols.begin(), symbols.end(), s);
                if (it != symbols.end()) order.push_back(window[static_cast<std::size_t>(it - symbols.begin())]);
            }
            bool identity = a.permutation == std::vector<std::string>{"L2", "L1", "L3"};
            if (window.size() == 2 && order == window && !identity) std::swap(order[0], order[1]);
            e.note = "window " + join(window, ", ");
            next.reorder(window, order);
            break;
        }
        }
        if (!preserves_prefix(next)) {
            e.outcome = TraceEntry::Outcome::Skipped;
            e.note = "would alter an executed activity";
            return;
        }
        chain_ = std::move(next);
        e.outcome = TraceEntry::Outcome::Applied;
    }

    bool preserves_prefix(const ActivityChain& next) const {
        auto order = next.order();
        if (order.size() < executed_.size()) return false;
        for (std::size_t i = 0; i < executed_.size(); ++i) {
            if (order[i] != executed_[i]) return false;
            const ActivityNode& a = chain_.node(executed_[i]);
            const ActivityNode& b = next.node(executed_[i]);
            if (a.role != b.role || a.medium != b.medium || a.output_data != b.output_data) return false;
        }
        return true;
    }

    void apply_due() {
        std::stable_sort(pending_.begin(), pending_.end(),
                         [](const Pending& a, const Pending& b) { return a.due < b.due; });
        while (!pending_.empty() && pending_.front().due <= clock_) {
            Pending p = std::move(pending_.front());
            pending_.erase(pending_.begin());
            TraceEntry e = std::move(p.entry);
            e.time = clock_;
            if (!chain_.contains(e.target) || is_executed(e.target)) {
                e.outcome = TraceEntry::Outcome::Expired;
                e.note = "target already executed or removed";
            } else {
                try {
                    apply(e, p.fragment);
                } catch (const Error& err) {
                    throw Error(err.code(), "activity '" + e.activity + "': " + err.message());
                }
            }
            trace_.entries.push_back(std::move(e));
        }
    }

    const CBPMNModel& model_;
    const Scenario& scenario_;
    ActivityChain chain_;
    LogicalTime clock_ = 0;
    std::vector<std::string> executed_;
    std::set<std::string> evaluated_;
    std::map<std::string, ContextState> states_;
    std::vector<Pending> pending_;
    AdaptationTrace trace_;
};

} // namespace

AdaptationTrace run_instance(const CBPMNModel& model, const Scenario& scenario) {
    ValidationReport r = validate_scenario(scenario);
    if (!r.ok()) throw Error("invalid-scenario", r.findings.front().code + ": " + r.findings.front().message);
    return Runner(model, scenario).run();
}

std::string render_log(const AdaptationTrace& trace) {
    std::ostringstream out;
    for (const auto& e : trace.entries) {
        out << format_clock(e.time) << " | " << e.activity << " | " << to_string(e.outcome);
        if (e.action) out << " | " << e.action->render() << " -> " << e.target;
        out << " | value " << e.value << " | fragment " << e.fragment.value_or("NULL");
        if (e.rule) out << " | rule " << *e.rule;
        if (e.deferred_until) out << " | until " << format_clock(*e.deferred_until);
        if (!e.note.empty()) out << " | " << e.note;
        out << "\n";
    }
    out << "order: " << join(trace.execution_order, " -> ") << "\n";
    return out.str();
}

} // namespace cbpmn
