#pragma once

// Three-level context model: state nodes (plane of context states),
// entity/attribute nodes (plane of entity-attribute-relationship) and value
// slots (plane of observation), joined by red, blue and green links.

#include "cbpmn/composite.hpp"
#include "cbpmn/context.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cbpmn {

struct EntityNode {
    std::string name;
    Category category = Category::External;
};

struct AttributeNode {
    std::string entity;
    std::string name;
    /// Steady or dynamic; static contexts never reach the graph.
    Temporality temporality = Temporality::Dynamic;
    /// Derived attributes take no value from the context provider.
    bool derived = false;

    std::string qualified() const { return entity + "." + name; }
};

enum class Cardinality { OneToOne, OneToMany, ManyToOne, ManyToMany };

Cardinality parse_cardinality(std::string_view text);
std::string_view to_string(Cardinality c);

/// Structural relationship between two entities. Stored and validated only.
struct EntityRelation {
    std::string from;
    std::string to;
    Cardinality cardinality = Cardinality::OneToOne;
    std::string label;
};

/// Antecedent clause "Weather.Status = heavy rain".
struct ContextPattern {
    std::string attribute;
    Connector connector = Connector::Eq;
    Value value;

    /// "Weather.Status = Rainy"
    static ContextPattern parse(std::string_view text);
    bool matches(const Value& observed) const { return compare(observed, connector, value); }
    std::string render() const;
};

/// IF C_a THEN C_b between attributes. Partial rules override an existing
/// binding; total rules produce the only binding of a derived attribute.
struct DependencyRule {
    enum class Kind { Partial, Total };
    std::string id;
    Kind kind = Kind::Partial;
    std::vector<ContextPattern> antecedent;
    std::string target;
    Value value;
};

struct StateNodeDef {
    std::string id;
    std::vector<std::string> parameters;
    std::vector<std::string> attributes;
    CompositionExpr composition;
};

struct RedLink {
    std::string state;
    std::string parameter;
    std::string entity;
};

struct BlueLink {
    std::string state;
    std::string attribute;
    std::string attribute_node;
};

struct GreenLink {
    std::string attribute;
    std::string value_slot;
    /// Activation delay in minutes; 0 is an untimed link.
    LogicalTime delay = 0;
};

/// G_c = (N_c, E_c, F_c). Immutable once loaded.
struct ContextGraph {
    std::vector<StateNodeDef> state_nodes;
    std::vector<EntityNode> entities;
    std::vector<AttributeNode> attributes;
    std::vector<std::string> composite_slots;
    std::vector<EntityRelation> relations;
    std::vector<DependencyRule> dependency_rules;
    std::vector<RedLink> red_links;
    std::vector<BlueLink> blue_links;
    std::vector<GreenLink> green_links;

    const StateNodeDef* find_state(std::string_view id) const;
    const EntityNode* find_entity(std::string_view name) const;
    const AttributeNode* find_attribute(std::string_view qualified) const;
    const GreenLink* green_link(std::string_view qualified) const;

    /// Fills in identity red/blue links, one green link per attribute, and one
    /// composite slot per state node where the document left them implicit.
    void complete_defaults(const std::map<std::string, LogicalTime>& delays = {});
};

struct Finding {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
    bool has(std::string_view code) const;
};

ValidationReport validate_graph(const ContextGraph& g);

struct TimedValue {
    Value value;
    LogicalTime delay = 0;

    bool timed() const { return delay > 0; }
    friend bool operator==(const TimedValue&, const TimedValue&) = default;
};

struct InstanceStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
};

/// Run-time instantiation of the part of G_c a context state touches.
struct SubgraphInstance {
    std::string activated_state;
    std::set<std::string> activated_entities;
    std::set<std::string> activated_attributes;
    std::set<std::string> derived_attributes;
    std::map<std::string, TimedValue> bound_values;
    InstanceStats stats;
};

/// Activates the red/blue image of `s` under the state node whose links cover
/// it (first in declaration order). Throws Error("unknown-context").
SubgraphInstance instantiate(const ContextGraph& g, const ContextState& s);

/// Same, under an explicitly chosen state node.
SubgraphInstance instantiate(const ContextGraph& g, const ContextState& s, std::string_view state_node);

/// Val(a) <- (v, d) for every activated direct attribute.
/// Throws Error("unobserved-attribute").
SubgraphInstance assign_values(SubgraphInstance inst, const std::map<std::string, TimedValue>& observations);

/// Binds composition attributes of `node` that are not activated but have a
/// current observation; the instance's activated sets and stats are untouched.
SubgraphInstance carry_forward(SubgraphInstance inst, const StateNodeDef& node,
                               const std::map<std::string, TimedValue>& observations);

/// Fires rules to a fixpoint. Throws Error("dependency-conflict") when one
/// pass writes two different values to an attribute, Error("dependency-cycle")
/// after |rules| * |attributes| + 1 passes without stabilizing.
SubgraphInstance apply_dependencies(SubgraphInstance inst, const std::vector<DependencyRule>& rules);

/// Throws Error("incomplete-binding") when a composition attribute is unbound.
CompositeValue compose_value(const SubgraphInstance& inst, const StateNodeDef& node);

} // namespace cbpmn
