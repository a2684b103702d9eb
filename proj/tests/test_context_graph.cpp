#include "cbpmn/context_graph.hpp"
#include "cbpmn/error.hpp"
#include "cbpmn/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace cbpmn;
using cbpmn::test::ctx;

namespace {

ContextGraph kiosk_graph() { return load_graph(read_json(cbpmn::test::fixture("kiosk/graph.json"))); }

ContextState state_for(const std::string& activity, std::vector<AtomicContext> contexts, LogicalTime t = 840) {
    return diff(situation_of(ContextVector(std::move(contexts), t)), ContextState::initial(activity));
}

template <typename F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

DependencyRule rule(std::string id, std::vector<std::string> antecedent, std::string target, Value value,
                    DependencyRule::Kind kind = DependencyRule::Kind::Partial) {
    DependencyRule r;
    r.id = std::move(id);
    r.kind = kind;
    for (const auto& a : antecedent) r.antecedent.push_back(ContextPattern::parse(a));
    r.target = std::move(target);
    r.value = std::move(value);
    return r;
}

// Fires one rule at a time in the given order until nothing changes.
std::map<std::string, TimedValue> sequential_fixpoint(std::map<std::string, TimedValue> bound,
                                                      const std::vector<const DependencyRule*>& order) {
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto* r : order) {
            bool fires = true;
            LogicalTime delay = 0;
            for (const auto& p : r->antecedent) {
                auto it = bound.find(p.attribute);
                fires = fires && it != bound.end() && p.matches(it->second.value);
                if (fires) delay = std::max(delay, it->second.delay);
            }
            if (!fires) continue;
            TimedValue w{r->value, delay};
            auto it = bound.find(r->target);
            if (it == bound.end() || !(it->second == w)) {
                bound[r->target] = w;
                changed = true;
            }
        }
    }
    return bound;
}

struct RuleCase {
    std::vector<DependencyRule> rules;
    std::map<std::string, TimedValue> bound;
};

std::vector<RuleCase> rule_cases() {
    std::vector<RuleCase> cases;
    ContextGraph g = kiosk_graph();
    cases.push_back({g.dependency_rules, {{"Weather.Status", {"Rainy", 0}}, {"Network.Status", {"Available", 0}}}});
    cases.push_back({{rule("AB", {"A.x = 1"}, "B.x", 2), rule("BC", {"B.x = 2"}, "C.x", 3)},
                     {{"A.x", {1, 30}}, {"B.x", {0, 0}}}});
    cases.push_back({{rule("H", {"Weather.Status = heavy rain"}, "Network.Status", "not_available"),
                      rule("T", {"Hospital_Bed.Availability = yes"}, "Patient_Admission.Status", "admitted",
                           DependencyRule::Kind::Total),
                      rule("N", {"Network.Status = not_available"}, "Online_Payment.Status", "Not_Possible")},
                     {{"Weather.Status", {"heavy rain", 0}},
                      {"Network.Status", {"available", 0}},
                      {"Hospital_Bed.Availability", {"yes", 0}}}});
    cases.push_back({{rule("R1", {"A.x = 1"}, "B.x", 1), rule("R2", {"B.x = 1"}, "C.x", 1),
                      rule("R3", {"C.x = 1", "A.x = 1"}, "D.x", 1), rule("R4", {"D.x = 1"}, "E.x", 1),
                      rule("R5", {"E.x = 1"}, "F.x", 1)},
                     {{"A.x", {1, 0}}, {"E.x", {0, 5}}}});
    return cases;
}

} // namespace

TEST(ValidateGraph, EmptyGraphIsValid) { EXPECT_TRUE(validate_graph(ContextGraph{}).ok()); }

TEST(ValidateGraph, KioskGraphIsValid) {
    auto r = validate_graph(kiosk_graph());
    EXPECT_TRUE(r.ok()) << (r.findings.empty() ? "" : r.findings[0].message);
}

TEST(ValidateGraph, CompositeCountMismatch) {
    ContextGraph g = kiosk_graph();
    g.composite_slots.pop_back();
    EXPECT_TRUE(validate_graph(g).has("composite-count"));
}

TEST(ValidateGraph, TotalRuleOnDirectAttribute) {
    ContextGraph g = kiosk_graph();
    g.dependency_rules.push_back(
        rule("T", {"Weather.Status = Rainy"}, "Network.Status", "Unavailable", DependencyRule::Kind::Total));
    EXPECT_TRUE(validate_graph(g).has("total-rule-target"));
}

TEST(Instantiate, EmptyStateGivesEmptyInstance) {
    SubgraphInstance inst = instantiate(kiosk_graph(), ContextState::initial("A"));
    EXPECT_TRUE(inst.activated_entities.empty());
    EXPECT_EQ(inst.stats.nodes, 0u);
    EXPECT_EQ(inst.stats.edges, 0u);
}

TEST(Instantiate, StorageInCloudState) {
    ContextGraph g = kiosk_graph();
    auto s = state_for("Storage in Cloud", {ctx("Weather", "Status", "Rainy"), ctx("Network", "Status", "Unavailable")});
    SubgraphInstance inst = instantiate(g, s, "S4");
    EXPECT_EQ(inst.activated_state, "S4");
    EXPECT_EQ(inst.activated_entities, (std::set<std::string>{"Network", "Weather"}));
    EXPECT_EQ(inst.activated_attributes, (std::set<std::string>{"Network.Status", "Weather.Status"}));
}

TEST(Instantiate, OverlappingStatesShareNetwork) {
    ContextGraph g = kiosk_graph();
    auto s4 = state_for("Storage in Cloud", {ctx("Weather", "Status", "Rainy"), ctx("Network", "Status", "Unavailable")});
    auto s5 = state_for("Bill Payment",
                        {ctx("Network", "Status", "Unavailable"), ctx("Online_Payment", "Status", "Not_Possible")});
    EXPECT_TRUE(instantiate(g, s4, "S4").activated_entities.count("Network"));
    EXPECT_TRUE(instantiate(g, s5, "S5").activated_entities.count("Network"));
}

TEST(Instantiate, UnmappedContext) {
    auto s = state_for("A", {ctx("Moon", "Phase", "Full")});
    EXPECT_EQ(error_code([&] { instantiate(kiosk_graph(), s); }), "unknown-context");
}

TEST(InstantiateProperty, LinkImageAndMonotoneStats) {
    ContextGraph g = kiosk_graph();
    std::mt19937 rng(11);
    for (const auto& node : g.state_nodes) {
        std::vector<AtomicContext> all;
        for (const auto& a : node.attributes) {
            auto dot = a.find('.');
            all.push_back(ctx(a.substr(0, dot), a.substr(dot + 1), "v"));
        }
        const unsigned subsets = 1u << all.size();
        for (unsigned mask = 1; mask < subsets; ++mask) {
            std::vector<AtomicContext> part;
            for (std::size_t i = 0; i < all.size(); ++i) {
                if (mask & (1u << i)) part.push_back(all[i]);
            }
            auto s = state_for("A", part);
            SubgraphInstance inst = instantiate(g, s, node.id);
            std::set<std::string> entities, attrs;
            for (const auto& l : g.red_links) {
                for (const auto& c : part) {
                    if (l.state == node.id && l.parameter == c.parameter) entities.insert(l.entity);
                }
            }
            for (const auto& l : g.blue_links) {
                for (const auto& c : part) {
                    if (l.state == node.id && l.attribute == c.qualified_attribute()) attrs.insert(l.attribute_node);
                }
            }
            EXPECT_EQ(inst.activated_entities, entities);
            EXPECT_EQ(inst.activated_attributes, attrs);
            for (unsigned sup = mask; sup < subsets; ++sup) {
                if ((sup & mask) != mask) continue;
                std::vector<AtomicContext> bigger;
                for (std::size_t i = 0; i < all.size(); ++i) {
                    if (sup & (1u << i)) bigger.push_back(all[i]);
                }
                SubgraphInstance more = instantiate(g, state_for("A", bigger), node.id);
                EXPECT_GE(more.stats.nodes, inst.stats.nodes);
                EXPECT_GE(more.stats.edges, inst.stats.edges);
            }
        }
    }
}

TEST(AssignValues, UntimedAndTimedBindings) {
    ContextGraph g = kiosk_graph();
    auto s = state_for("Storage in Cloud", {ctx("Weather", "Status", "Rainy")});
    auto inst = assign_values(instantiate(g, s, "S4"), {{"Weather.Status", {"Rainy", 0}}});
    EXPECT_FALSE(inst.bound_values.at("Weather.Status").timed());

    SubgraphInstance manual;
    manual.activated_attributes = {"Receptionist.Availability"};
    manual = assign_values(manual, {{"Receptionist.Availability", {"Present", 30}}});
    EXPECT_EQ(manual.bound_values.at("Receptionist.Availability").delay, 30);
}

TEST(AssignValues, EmptyInstanceUnchanged) {
    SubgraphInstance inst = assign_values(SubgraphInstance{}, {});
    EXPECT_TRUE(inst.bound_values.empty());
}

TEST(AssignValues, MissingObservation) {
    SubgraphInstance inst;
    inst.activated_attributes = {"Weather.Status"};
    EXPECT_EQ(error_code([&] { assign_values(inst, {}); }), "unobserved-attribute");
}

TEST(Dependencies, PartialRuleForcesNetworkDown) {
    SubgraphInstance inst;
    inst.bound_values = {{"Weather.Status", {"heavy rain", 0}}, {"Network.Status", {"available", 0}}};
    inst = apply_dependencies(inst, {rule("D", {"Weather.Status = heavy rain"}, "Network.Status", "not_available")});
    EXPECT_EQ(inst.bound_values.at("Network.Status").value, Value("not_available"));
}

TEST(Dependencies, TotalRuleBindsDerivedAttribute) {
    SubgraphInstance inst;
    inst.bound_values = {{"Hospital_Bed.Availability", {"yes", 0}}};
    inst = apply_dependencies(inst, {rule("T", {"Hospital_Bed.Availability = yes"}, "Patient_Admission.Status",
                                          "admitted", DependencyRule::Kind::Total)});
    EXPECT_EQ(inst.bound_values.at("Patient_Admission.Status").value, Value("admitted"));
}

TEST(Dependencies, ConflictAndCycle) {
    SubgraphInstance inst;
    inst.bound_values = {{"A.x", {1, 0}}};
    EXPECT_EQ(error_code([&] {
                  apply_dependencies(inst, {rule("P", {"A.x = 1"}, "B.x", 1), rule("Q", {"A.x = 1"}, "B.x", 2)});
              }),
              "dependency-conflict");
    EXPECT_EQ(error_code([&] {
                  apply_dependencies(inst, {rule("F", {"A.x = 1"}, "A.x", 2), rule("G", {"A.x = 2"}, "A.x", 1)});
              }),
              "dependency-cycle");
}

TEST(DependencyProperty, FixpointIndependentOfFiringOrder) {
    for (const auto& c : rule_cases()) {
        ASSERT_LE(c.rules.size(), 5u);
        SubgraphInstance inst;
        inst.bound_values = c.bound;
        auto fixpoint = apply_dependencies(inst, c.rules).bound_values;
        std::vector<const DependencyRule*> order;
        for (const auto& r : c.rules) order.push_back(&r);
        std::sort(order.begin(), order.end());
        do {
            EXPECT_EQ(sequential_fixpoint(c.bound, order), fixpoint);
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST(ComposeValue, RegistrationValue) {
    ContextGraph g = kiosk_graph();
    SubgraphInstance inst;
    inst.bound_values = {{"Receptionist.Status", {"Absent", 0}}, {"Healthcare_Assistant.Status", {"Present", 0}}};
    CompositeValue v = compose_value(inst, *g.find_state("S1"));
    EXPECT_EQ(v.render(), "[(Receptionist.Status, Absent) AND (Healthcare_Assistant.Status, Present)]");
    EXPECT_EQ(v.max_delay(), 0);
}

TEST(ComposeValue, SingletonAndTimedConstituent) {
    ContextGraph g = kiosk_graph();
    SubgraphInstance inst;
    inst.bound_values = {{"Patient.Condition", {"Serious", 0}}};
    EXPECT_EQ(compose_value(inst, *g.find_state("S2")).render(), "[(Patient.Condition, Serious)]");

    inst.bound_values = {{"Weather.Status", {"Rainy", 0}}, {"Network.Status", {"Unavailable", 30}}};
    CompositeValue v = compose_value(inst, *g.find_state("S4"));
    EXPECT_EQ(v.max_delay(), 30);
    EXPECT_TRUE(v.timed());
}

TEST(ComposeValue, IncompleteBinding) {
    ContextGraph g = kiosk_graph();
    SubgraphInstance inst;
    inst.bound_values = {{"Weather.Status", {"Rainy", 0}}};
    EXPECT_EQ(error_code([&] { compose_value(inst, *g.find_state("S4")); }), "incomplete-binding");
}

TEST(ComposeProperty, MaxDelayZeroIffUntimed) {
    ContextGraph g = kiosk_graph();
    const StateNodeDef& s4 = *g.find_state("S4");
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> delay(0, 2);
    for (int i = 0; i < 200; ++i) {
        SubgraphInstance inst;
        LogicalTime a = delay(rng) * 15, b = delay(rng) * 15;
        inst.bound_values = {{"Weather.Status", {"Rainy", a}}, {"Network.Status", {"Unavailable", b}}};
        CompositeValue v = compose_value(inst, s4);
        EXPECT_EQ(v.max_delay(), std::max(a, b));
        EXPECT_EQ(v.max_delay() == 0, a == 0 && b == 0);
    }
}

TEST(CompositeValue, NormalizedEquality) {
    auto a = CompositeValue::parse("[(Weather.Status, Rainy) AND (Network.Status, Unavailable)]");
    auto b = CompositeValue::parse("(network.status, unavailable) AND (weather.status, RAINY)");
    EXPECT_EQ(a, b);
    EXPECT_NE(a, CompositeValue::parse("(Weather.Status, Rainy) OR (Network.Status, Unavailable)"));
    EXPECT_EQ(error_code([] { CompositeValue::parse("(Weather.Status Rainy"); }), "parse-error");
}
