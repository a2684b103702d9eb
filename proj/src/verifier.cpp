#include "cbpmn/verifier.hpp"

#include "cbpmn/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cbpmn {

namespace {

struct StateUse {
    std::string id;
    std::vector<std::string> attributes;
    std::vector<std::string> entities;
    std::set<std::string> activities;
};

std::vector<std::string> used_attributes(const ContextGraph& g, const StateNodeDef& s) {
    std::vector<std::string> out;
    auto add = [&](const std::string& a) {
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    };
    for (const auto& b : g.blue_links) {
        if (b.state == s.id) add(b.attribute_node);
    }
    for (const auto& a : s.composition.attributes()) add(a);
    return out;
}

} // namespace

Net translate(const CBPMNModel& model) { return translate(model, model.chain); }

Net translate(const CBPMNModel& model, const ActivityChain& chain) {
    ValidationReport graph = validate_graph(model.graph);
    if (!graph.ok()) {
        throw Error("invalid-model", graph.findings.front().code + ": " + graph.findings.front().message);
    }
    if (chain.empty() || !chain.well_formed()) throw Error("invalid-model", "activity chain is empty or malformed");
    const ContextGraph& g = model.graph;
    const auto nodes = chain.ordered_nodes();
    const std::size_t n = nodes.size();

    // State node of each activity, 1-based like the net names.
    std::vector<const StateNodeDef*> state_of(n + 1, nullptr);
    std::vector<StateUse> uses;
    for (std::size_t i = 1; i <= n; ++i) {
        const auto& a = nodes[i - 1];
        auto it = model.state_of.find(a.id);
        if (it == model.state_of.end() || !model.scopes.count(a.id)) continue;
        const StateNodeDef* s = g.find_state(it->second);
        if (!s) throw Error("invalid-model", "activity '" + a.id + "' maps to missing state '" + it->second + "'");
        state_of[i] = s;
        auto u = std::find_if(uses.begin(), uses.end(), [&](const StateUse& x) { return x.id == s->id; });
        if (u == uses.end()) {
            StateUse use;
            use.id = s->id;
            use.attributes = used_attributes(g, *s);
            for (const auto& q : use.attributes) {
                const AttributeNode* attr = g.find_attribute(q);
                if (!attr) throw Error("invalid-model", "state " + s->id + " uses unknown attribute " + q);
                if (std::find(use.entities.begin(), use.entities.end(), attr->entity) == use.entities.end()) {
                    use.entities.push_back(attr->entity);
                }
            }
            uses.push_back(std::move(use));
            u = uses.end() - 1;
        }
        u->activities.insert(std::to_string(i));
    }

    Net net;
    std::vector<std::string> cs_colors;
    std::vector<std::string> act_colors;
    for (std::size_t i = 1; i <= n; ++i) {
        cs_colors.push_back("cs" + std::to_string(i));
        act_colors.push_back(std::to_string(i));
    }
    net.add_color_set("CASE", {"case"});
    net.add_color_set("CS", cs_colors);
    net.add_color_set("EVENT", {"state", "value"});
    net.add_color_set("UNIT", {"unit"});
    net.add_color_set("ACT", act_colors);

    const auto C = ArcExpr::constant;
    const auto X = ArcExpr::variable("x");

    // Layer 2.
    std::size_t start = net.add_place("Start", "CASE");
    std::size_t situation = net.add_place("ContextualSituation", "CS");
    std::vector<std::size_t> info(n + 1);
    info[0] = start;
    for (std::size_t i = 1; i < n; ++i) info[i] = net.add_place("INFO_" + std::to_string(i), "CASE");
    info[n] = net.add_place("End", "CASE");
    std::vector<std::size_t> event(n + 1);
    std::vector<std::size_t> returned(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        event[i] = net.add_place("ContextualEvent_" + std::to_string(i), "EVENT");
        returned[i] = net.add_place("Returned_" + std::to_string(i), "UNIT");
    }

    // Layer 1 places, shared by every activity that uses the same state node.
    std::map<std::string, std::size_t> state_place;
    std::map<std::string, std::size_t> value_place_of_state;
    std::map<std::string, std::size_t> entity_place;
    std::map<std::string, std::size_t> attr_place;
    std::map<std::string, std::size_t> value_place;
    std::vector<std::string> entity_order;
    std::vector<std::string> attr_order;
    std::map<std::string, std::set<std::string>> acts_of_attr;
    for (const auto& u : uses) {
        state_place[u.id] = net.add_place("State_" + u.id, "ACT", 1);
        for (const auto& e : u.entities) {
            if (!entity_place.count(e)) {
                entity_place[e] = net.add_place("Entity_" + e, "ACT", 1);
                entity_order.push_back(e);
            }
        }
        for (const auto& a : u.attributes) {
            if (!attr_place.count(a)) {
                attr_place[a] = net.add_place("A_" + a, "ACT", 1);
                value_place[a] = net.add_place("value_" + a, "ACT", 1);
                attr_order.push_back(a);
            }
            acts_of_attr[a].insert(u.activities.begin(), u.activities.end());
        }
        value_place_of_state[u.id] = net.add_place("VALUE_" + u.id, "ACT", 1);
    }

    for (std::size_t i = 1; i <= n; ++i) {
        const std::string idx = std::to_string(i);
        std::size_t catch_t = net.add_transition("catchContext_" + idx);
        net.add_input(situation, catch_t, C("cs" + idx));
        net.add_output(catch_t, event[i], C("state"));

        std::size_t throw_t = net.add_transition("throwActivity_" + idx);
        if (const StateNodeDef* s = state_of[i]) {
            std::size_t prop = net.add_transition("PropagateState_" + idx);
            net.add_input(event[i], prop, C("state"));
            net.add_output(prop, state_place.at(s->id), C(idx));
            std::size_t back = net.add_transition("PropagateV_" + idx);
            net.add_input(value_place_of_state.at(s->id), back, C(idx));
            net.add_output(back, event[i], C("value"));
            net.add_input(event[i], throw_t, C("value"));
        } else {
            net.add_input(event[i], throw_t, C("state"));
        }
        net.add_output(throw_t, returned[i], C("unit"));
        if (i < n) net.add_output(throw_t, situation, C("cs" + std::to_string(i + 1)));

        const ActivityNode& a = nodes[i - 1];
        std::vector<std::string> tasks = a.tasks;
        if (tasks.empty()) tasks = {"Receive", "Perform", "Complete"};
        std::vector<std::size_t> group;
        std::size_t from = info[i - 1];
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            std::size_t t = net.add_transition("Activity_" + idx + "." + tasks[k]);
            group.push_back(t);
            net.add_input(from, t, C("case"));
            if (k == 0) net.add_input(returned[i], t, C("unit"));
            std::size_t to = k + 1 == tasks.size()
                                 ? info[i]
                                 : net.add_place("Activity_" + idx + ".p" + std::to_string(k + 1), "CASE");
            net.add_output(t, to, C("case"));
            from = to;
        }
        net.add_substitution("Activity_" + idx, std::move(group));
    }

    // Layer 1 transitions.
    for (const auto& u : uses) {
        std::size_t map_t = net.add_transition("Mapping_" + u.id, 1);
        net.add_input(state_place.at(u.id), map_t, X);
        for (const auto& e : u.entities) net.add_output(map_t, entity_place.at(e), X);
    }
    for (const auto& e : entity_order) {
        std::size_t t = net.add_transition("Attributes_" + e, 1);
        net.add_input(entity_place.at(e), t, X);
        for (const auto& a : attr_order) {
            if (g.find_attribute(a)->entity == e) {
                net.add_output(t, attr_place.at(a), ArcExpr::variable_if_in("x", acts_of_attr.at(a)));
            }
        }
    }
    for (const auto& a : attr_order) {
        std::size_t t = net.add_transition("Grab_value_" + a, 1);
        net.add_input(attr_place.at(a), t, X);
        net.add_output(t, value_place.at(a), X);
    }
    for (const auto& r : g.dependency_rules) {
        std::vector<std::string> involved;
        for (const auto& p : r.antecedent) {
            if (std::find(involved.begin(), involved.end(), p.attribute) == involved.end()) {
                involved.push_back(p.attribute);
            }
        }
        if (std::find(involved.begin(), involved.end(), r.target) == involved.end()) involved.push_back(r.target);
        std::set<std::string> acts;
        for (const auto& u : uses) {
            bool all = std::all_of(involved.begin(), involved.end(), [&](const std::string& a) {
                return std::find(u.attributes.begin(), u.attributes.end(), a) != u.attributes.end();
            });
            if (all) acts.insert(u.activities.begin(), u.activities.end());
        }
        if (acts.empty()) continue;
        std::size_t t = net.add_transition("Dependency_" + r.id, 1);
        for (const auto& a : involved) {
            net.add_input(value_place.at(a), t, ArcExpr::variable_if_in("x", acts));
            net.add_output(t, value_place.at(a), X);
        }
    }
    for (const auto& u : uses) {
        std::size_t t = net.add_transition("Composition_" + u.id, 1);
        for (const auto& a : u.attributes) net.add_input(value_place.at(a), t, X);
        net.add_output(t, value_place_of_state.at(u.id), X);
    }

    net.initial = net.empty_marking();
    net.initial.add(start, "case");
    net.initial.add(situation, "cs1");
    return net;
}

bool is_goal(const Net& net, const Marking& m) {
    auto end = net.find_place("End");
    return end && m.total(*end) == 1 && m.total() == 1;
}

bool VerificationReport::ok() const {
    return one_safe() && dead_transitions.empty() && dead_markings.size() == 1 && dead_marking_is_goal &&
           goal_reachable && goal_is_home;
}

VerificationReport verify(const Net& net, std::size_t limit, unsigned workers) {
    VerificationReport r;
    r.places = net.places().size();
    r.transitions = net.transitions().size();
    r.net_arcs = net.arcs().size();
    r.substitutions = net.substitutions().size();
    StateSpace space = explore(net, net.initial, limit, workers);
    r.markings = space.markings.size();
    r.space_arcs = space.arcs.size();
    r.partial = space.partial;
    BoundsReport bounds = check_bounded(space, net.places().size());
    r.bound = bounds.bound();
    for (std::size_t p = 0; p < net.places().size(); ++p) {
        r.place_bounds.emplace_back(net.places()[p].name, bounds.max_tokens[p]);
    }
    ReachResult reach = check_reachable(space, [&](const Marking& m) { return is_goal(net, m); });
    r.goal_reachable = reach.reachable;
    r.witness_length = reach.witness.size();
    auto counts = occurrence_counts(net, space);
    for (std::size_t t = 0; t < counts.size(); ++t) r.occurrences.emplace_back(net.transitions()[t].name, counts[t]);
    if (!space.partial) {
        LivenessReport live = check_liveness(net, space);
        r.dead_transitions = live.dead_transitions;
        r.dead_markings = live.dead_markings;
        r.dead_marking_is_goal =
            r.dead_markings.size() == 1 && is_goal(net, space.markings[r.dead_markings.front()]);
        if (reach.reachable) r.goal_is_home = check_home(space, reach.marking);
    }
    return r;
}

} // namespace cbpmn
