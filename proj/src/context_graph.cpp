#include "cbpmn/context_graph.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>

namespace cbpmn {

Cardinality parse_cardinality(std::string_view text) {
    std::string t = lower(trim(text));
    if (t == "one-one" || t == "one-to-one" || t == "1:1") return Cardinality::OneToOne;
    if (t == "one-many" || t == "one-to-many" || t == "1:n") return Cardinality::OneToMany;
    if (t == "many-one" || t == "many-to-one" || t == "n:1") return Cardinality::ManyToOne;
    if (t == "many-many" || t == "many-to-many" || t == "n:m") return Cardinality::ManyToMany;
    throw Error("invalid-cardinality", "unknown cardinality '" + std::string(text) + "'");
}

std::string_view to_string(Cardinality c) {
    switch (c) {
    case Cardinality::OneToOne: return "one-one";
    case Cardinality::OneToMany: return "one-many";
    case Cardinality::ManyToOne: return "many-one";
    case Cardinality::ManyToMany: return "many-many";
    }
    return "?";
}

ContextPattern ContextPattern::parse(std::string_view text) {
    std::string s = trim(text);
    // The attribute is the first whitespace- or operator-delimited token.
    std::size_t end = s.find_first_of(" \t=<>!≥≤≠");
    if (end == std::string::npos || end == 0) {
        throw Error("parse-error", "expected '<attribute> <connector> <value>' in '" + s + "'");
    }
    ContextPattern p;
    p.attribute = s.substr(0, end);
    std::string rest = trim(std::string_view(s).substr(end));
    std::size_t op_end = 0;
    if (starts_with(rest, ">=") || starts_with(rest, "<=") || starts_with(rest, "!=") || starts_with(rest, "==")) {
        op_end = 2;
    } else if (!rest.empty() && (rest[0] == '=' || rest[0] == '<' || rest[0] == '>')) {
        op_end = 1;
    } else if (starts_with(rest, "≥") || starts_with(rest, "≤") || starts_with(rest, "≠")) {
        op_end = std::string_view("≥").size();
    } else {
        op_end = rest.find_first_of(" \t");
        if (op_end == std::string::npos) {
            throw Error("parse-error", "missing value in '" + s + "'");
        }
    }
    p.connector = parse_connector(rest.substr(0, op_end));
    std::string value = trim(std::string_view(rest).substr(op_end));
    if (value.empty()) {
        throw Error("parse-error", "missing value in '" + s + "'");
    }
    p.value = Value::parse(value);
    return p;
}

std::string ContextPattern::render() const {
    return attribute + " " + std::string(to_string(connector)) + " " + value.to_string();
}

const StateNodeDef* ContextGraph::find_state(std::string_view id) const {
    for (const auto& s : state_nodes) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

const EntityNode* ContextGraph::find_entity(std::string_view name) const {
    for (const auto& e : entities) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

const AttributeNode* ContextGraph::find_attribute(std::string_view qualified) const {
    for (const auto& a : attributes) {
        if (a.qualified() == qualified) return &a;
    }
    return nullptr;
}

const GreenLink* ContextGraph::green_link(std::string_view qualified) const {
    for (const auto& l : green_links) {
        if (l.attribute == qualified) return &l;
    }
    return nullptr;
}

void ContextGraph::complete_defaults(const std::map<std::string, LogicalTime>& delays) {
    for (auto& s : state_nodes) {
        if (s.composition.empty()) {
            s.composition = CompositionExpr::conjunction(s.attributes);
        }
        for (const auto& p : s.parameters) {
            bool linked = std::any_of(red_links.begin(), red_links.end(),
                                      [&](const RedLink& l) { return l.state == s.id && l.parameter == p; });
            if (!linked) red_links.push_back({s.id, p, p});
        }
        for (const auto& a : s.attributes) {
            bool linked = std::any_of(blue_links.begin(), blue_links.end(),
                                      [&](const BlueLink& l) { return l.state == s.id && l.attribute == a; });
            if (!linked) blue_links.push_back({s.id, a, a});
        }
    }
    for (const auto& a : attributes) {
        std::string q = a.qualified();
        if (!green_link(q)) {
            auto it = delays.find(q);
            green_links.push_back({q, "value:" + q, it == delays.end() ? 0 : it->second});
        }
    }
    if (composite_slots.empty()) {
        for (const auto& s : state_nodes) composite_slots.push_back("VALUE:" + s.id);
    }
}

bool ValidationReport::has(std::string_view code) const {
    return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
}

ValidationReport validate_graph(const ContextGraph& g) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message) {
        report.findings.push_back({std::move(code), std::move(message)});
    };

    if (g.composite_slots.size() != g.state_nodes.size()) {
        add("composite-count", std::to_string(g.composite_slots.size()) + " composite value slots for " +
                                   std::to_string(g.state_nodes.size()) + " state nodes");
    }

    // Node sets must be pairwise disjoint and internally unique.
    std::map<std::string, std::string> owner;
    auto claim = [&](const std::string& name, const std::string& set) {
        auto [it, inserted] = owner.emplace(name, set);
        if (!inserted) {
            add(it->second == set ? "duplicate-node" : "node-overlap",
                "'" + name + "' appears in " + it->second + " and " + set);
        }
    };
    for (const auto& s : g.state_nodes) claim(s.id, "state nodes");
    for (const auto& e : g.entities) claim(e.name, "entity nodes");
    for (const auto& a : g.attributes) claim(a.qualified(), "attribute nodes");
    for (const auto& l : g.green_links) claim(l.value_slot, "atomic value slots");
    for (const auto& c : g.composite_slots) claim(c, "composite value slots");

    for (const auto& a : g.attributes) {
        if (!g.find_entity(a.entity)) add("unknown-entity", "attribute " + a.qualified() + " has no entity node");
        if (a.temporality == Temporality::Static) {
            add("static-attribute", "attribute " + a.qualified() + " is static");
        }
    }
    for (const auto& r : g.relations) {
        if (!g.find_entity(r.from) || !g.find_entity(r.to)) {
            add("unknown-entity", "relation " + r.from + " -> " + r.to + " references an unknown entity");
        }
    }

    for (const auto& a : g.attributes) {
        std::size_t links = std::count_if(g.green_links.begin(), g.green_links.end(),
                                          [&](const GreenLink& l) { return l.attribute == a.qualified(); });
        if (links == 0) add("green-link-missing", "attribute " + a.qualified() + " has no green link");
        if (links > 1) add("green-link-duplicate", "attribute " + a.qualified() + " has several green links");
    }
    std::set<std::string> slots;
    for (const auto& l : g.green_links) {
        if (!g.find_attribute(l.attribute)) add("unknown-attribute", "green link from unknown " + l.attribute);
        if (!slots.insert(l.value_slot).second) add("green-slot-shared", "value slot " + l.value_slot + " is shared");
        if (l.delay < 0) add("negative-delay", "green link of " + l.attribute + " has a negative delay");
    }

    for (const auto& s : g.state_nodes) {
        std::set<std::string> entity_image;
        std::set<std::string> mapped_params;
        for (const auto& l : g.red_links) {
            if (l.state != s.id) continue;
            if (std::find(s.parameters.begin(), s.parameters.end(), l.parameter) == s.parameters.end()) {
                add("red-link-domain", "red link of " + s.id + " from undeclared parameter " + l.parameter);
            }
            if (!g.find_entity(l.entity)) add("unknown-entity", "red link of " + s.id + " to unknown " + l.entity);
            if (!entity_image.insert(l.entity).second) {
                add("red-link-not-injective", "state " + s.id + " maps two parameters onto " + l.entity);
            }
            mapped_params.insert(l.parameter);
        }
        for (const auto& p : s.parameters) {
            if (!mapped_params.count(p)) add("red-link-missing", "parameter " + p + " of " + s.id + " has no red link");
        }
        std::set<std::string> attribute_image;
        std::set<std::string> mapped_attrs;
        for (const auto& l : g.blue_links) {
            if (l.state != s.id) continue;
            if (std::find(s.attributes.begin(), s.attributes.end(), l.attribute) == s.attributes.end()) {
                add("blue-link-domain", "blue link of " + s.id + " from undeclared attribute " + l.attribute);
            }
            const AttributeNode* node = g.find_attribute(l.attribute_node);
            if (!node) {
                add("unknown-attribute", "blue link of " + s.id + " to unknown " + l.attribute_node);
            } else if (!entity_image.count(node->entity)) {
                add("detached-attribute", "attribute " + l.attribute_node + " of " + s.id +
                                              " belongs to an entity outside the state's red image");
            }
            if (!attribute_image.insert(l.attribute_node).second) {
                add("blue-link-not-injective", "state " + s.id + " maps two attributes onto " + l.attribute_node);
            }
            mapped_attrs.insert(l.attribute);
        }
        for (const auto& a : s.attributes) {
            if (!mapped_attrs.count(a)) add("blue-link-missing", "attribute " + a + " of " + s.id + " has no blue link");
        }
        if (s.composition.empty()) {
            add("composition-empty", "state " + s.id + " has no composition");
        }
        for (const auto& a : s.composition.attributes()) {
            if (!mapped_attrs.count(a)) {
                add("composition-reference", "composition of " + s.id + " references unreachable " + a);
            }
        }
    }

    for (const auto& r : g.dependency_rules) {
        const AttributeNode* target = g.find_attribute(r.target);
        if (!target) {
            add("unknown-attribute", "dependency " + r.id + " targets unknown " + r.target);
        } else if (r.kind == DependencyRule::Kind::Total && !target->derived) {
            add("total-rule-target", "total dependency " + r.id + " targets direct attribute " + r.target);
        }
        if (r.antecedent.empty()) add("empty-antecedent", "dependency " + r.id + " has no antecedent");
        for (const auto& p : r.antecedent) {
            if (!g.find_attribute(p.attribute)) {
                add("unknown-attribute", "dependency " + r.id + " reads unknown " + p.attribute);
            }
        }
    }
    return report;
}

namespace {

bool covers(const ContextGraph& g, const StateNodeDef& node, const std::vector<std::string>& params,
            const std::vector<std::string>& attrs) {
    for (const auto& p : params) {
        if (std::none_of(g.red_links.begin(), g.red_links.end(),
                         [&](const RedLink& l) { return l.state == node.id && l.parameter == p; })) {
            return false;
        }
    }
    for (const auto& a : attrs) {
        if (std::none_of(g.blue_links.begin(), g.blue_links.end(),
                         [&](const BlueLink& l) { return l.state == node.id && l.attribute == a; })) {
            return false;
        }
    }
    return true;
}

} // namespace

SubgraphInstance instantiate(const ContextGraph& g, const ContextState& s) {
    auto params = s.touched_parameters();
    auto attrs = s.touched_attributes();
    if (params.empty() && attrs.empty()) {
        return {};
    }
    for (const auto& node : g.state_nodes) {
        if (covers(g, node, params, attrs)) {
            return instantiate(g, s, node.id);
        }
    }
    throw Error("unknown-context", "no state node maps the context state of '" + s.activity_id + "'");
}

SubgraphInstance instantiate(const ContextGraph& g, const ContextState& s, std::string_view state_node) {
    SubgraphInstance inst;
    auto params = s.touched_parameters();
    auto attrs = s.touched_attributes();
    if (params.empty() && attrs.empty()) {
        return inst;
    }
    const StateNodeDef* node = g.find_state(state_node);
    if (!node) {
        throw Error("unknown-context", "state node '" + std::string(state_node) + "' does not exist");
    }
    inst.activated_state = node->id;
    for (const auto& p : params) {
        auto it = std::find_if(g.red_links.begin(), g.red_links.end(),
                               [&](const RedLink& l) { return l.state == node->id && l.parameter == p; });
        if (it == g.red_links.end()) {
            throw Error("unknown-context", "parameter " + p + " is not linked from state node " + node->id);
        }
        inst.activated_entities.insert(it->entity);
    }
    for (const auto& a : attrs) {
        auto it = std::find_if(g.blue_links.begin(), g.blue_links.end(),
                               [&](const BlueLink& l) { return l.state == node->id && l.attribute == a; });
        if (it == g.blue_links.end()) {
            throw Error("unknown-context", "attribute " + a + " is not linked from state node " + node->id);
        }
        inst.activated_attributes.insert(it->attribute_node);
        const AttributeNode* attr = g.find_attribute(it->attribute_node);
        if (attr && attr->derived) {
            inst.derived_attributes.insert(attr->qualified());
        }
    }

    // state node + entities + attributes + their atomic value slots + composite slot
    inst.stats.nodes = 2 + inst.activated_entities.size() + 2 * inst.activated_attributes.size();
    // red + blue + green links, plus relations and dependencies wholly inside the instance
    inst.stats.edges = inst.activated_entities.size() + 2 * inst.activated_attributes.size();
    for (const auto& r : g.relations) {
        if (inst.activated_entities.count(r.from) && inst.activated_entities.count(r.to)) ++inst.stats.edges;
    }
    for (const auto& r : g.dependency_rules) {
        bool inside = inst.activated_attributes.count(r.target) > 0;
        for (const auto& p : r.antecedent) inside = inside && inst.activated_attributes.count(p.attribute) > 0;
        if (inside) ++inst.stats.edges;
    }
    return inst;
}

SubgraphInstance assign_values(SubgraphInstance inst, const std::map<std::string, TimedValue>& observations) {
    for (const auto& a : inst.activated_attributes) {
        if (inst.derived_attributes.count(a)) continue;
        auto it = observations.find(a);
        if (it == observations.end()) {
            throw Error("unobserved-attribute", "no observation for direct attribute " + a);
        }
        if (it->second.delay < 0) throw Error("invalid-delay", "negative delay for " + a);
        inst.bound_values[a] = it->second;
    }
    return inst;
}

SubgraphInstance carry_forward(SubgraphInstance inst, const StateNodeDef& node,
                               const std::map<std::string, TimedValue>& observations) {
    for (const auto& a : node.composition.attributes()) {
        if (inst.bound_values.count(a) || inst.derived_attributes.count(a)) continue;
        auto it = observations.find(a);
        if (it != observations.end()) inst.bound_values[a] = it->second;
    }
    return inst;
}

SubgraphInstance apply_dependencies(SubgraphInstance inst, const std::vector<DependencyRule>& rules) {
    if (rules.empty()) return inst;
    std::set<std::string> universe;
    for (const auto& [a, _] : inst.bound_values) universe.insert(a);
    for (const auto& r : rules) {
        universe.insert(r.target);
        for (const auto& p : r.antecedent) universe.insert(p.attribute);
    }
    const std::size_t cap = rules.size() * universe.size() + 1;

    for (std::size_t pass = 0; pass < cap; ++pass) {
        std::map<std::string, std::pair<TimedValue, const DependencyRule*>> writes;
        for (const auto& r : rules) {
            LogicalTime delay = 0;
            bool fires = !r.antecedent.empty();
            for (const auto& p : r.antecedent) {
                auto it = inst.bound_values.find(p.attribute);
                if (it == inst.bound_values.end() || !p.matches(it->second.value)) {
                    fires = false;
                    break;
                }
                delay = std::max(delay, it->second.delay);
            }
            if (!fires) continue;
            TimedValue w{r.value, delay};
            auto [it, inserted] = writes.emplace(r.target, std::make_pair(w, &r));
            if (!inserted && !(it->second.first.value == w.value)) {
                throw Error("dependency-conflict", "rules " + it->second.second->id + " and " + r.id +
                                                       " write different values to " + r.target);
            }
        }
        bool changed = false;
        for (const auto& [target, write] : writes) {
            auto it = inst.bound_values.find(target);
            if (it == inst.bound_values.end() || !(it->second == write.first)) {
                inst.bound_values[target] = write.first;
                changed = true;
            }
        }
        if (!changed) return inst;
    }
    throw Error("dependency-cycle", "dependency rules did not reach a fixpoint within " + std::to_string(cap) +
                                        " passes");
}

namespace {

CompositeTerm compose_term(const CompositionExpr& e, const SubgraphInstance& inst, LogicalTime& max_delay) {
    CompositeTerm t;
    if (e.kind == CompositionExpr::Kind::Attribute) {
        auto it = inst.bound_values.find(e.attribute);
        if (it == inst.bound_values.end()) {
            throw Error("incomplete-binding", "attribute " + e.attribute + " is unbound");
        }
        t.kind = CompositeTerm::Kind::Pair;
        t.attribute = e.attribute;
        t.value = it->second.value;
        max_delay = std::max(max_delay, it->second.delay);
        return t;
    }
    t.kind = e.kind == CompositionExpr::Kind::And ? CompositeTerm::Kind::And : CompositeTerm::Kind::Or;
    for (const auto& c : e.children) t.children.push_back(compose_term(c, inst, max_delay));
    return t;
}

} // namespace

CompositeValue compose_value(const SubgraphInstance& inst, const StateNodeDef& node) {
    LogicalTime max_delay = 0;
    CompositeTerm t = compose_term(node.composition, inst, max_delay);
    return CompositeValue(std::move(t), max_delay);
}

} // namespace cbpmn
