#pragma once

// Boolean (AND/OR) combinations of attribute references and of
// (attribute, value) pairs: the composition rule of a state node and the
// composite value it yields.

#include "cbpmn/context.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cbpmn {

enum class BoolOp { And, Or };

/// Composition rule of a state node: AND/OR tree over qualified attributes.
struct CompositionExpr {
    enum class Kind { Attribute, And, Or };
    Kind kind = Kind::And;
    std::string attribute;
    std::vector<CompositionExpr> children;

    static CompositionExpr leaf(std::string attribute);
    static CompositionExpr conjunction(const std::vector<std::string>& attributes);
    /// "Weather.Status AND (Network.Status OR Network.Latency)"
    static CompositionExpr parse(std::string_view text);

    std::vector<std::string> attributes() const;
    std::string render() const;
    bool empty() const { return kind != Kind::Attribute && children.empty(); }

    friend bool operator==(const CompositionExpr&, const CompositionExpr&) = default;
};

/// One node of a composite value: a leaf (attribute, value) pair or an AND/OR group.
struct CompositeTerm {
    enum class Kind { Pair, And, Or };
    Kind kind = Kind::And;
    std::string attribute;
    Value value;
    std::vector<CompositeTerm> children;

    friend bool operator==(const CompositeTerm&, const CompositeTerm&) = default;
};

/// Observed value of a composite context, e.g.
/// [(Receptionist.Status, Absent) AND (Healthcare_Assistant.Status, Present)].
///
/// Equality compares normalized forms: nested groups flattened, children
/// sorted, text case-folded. `max_delay` does not take part in equality.
class CompositeValue {
public:
    CompositeValue() = default;
    explicit CompositeValue(CompositeTerm term, LogicalTime max_delay = 0);

    static CompositeValue pair(std::string attribute, Value value, LogicalTime delay = 0);
    /// Accepts "(A.x, v) AND (B.y, w)" with optional surrounding brackets;
    /// "[...]" or "{...}" groups nest. Throws Error("parse-error").
    static CompositeValue parse(std::string_view text);

    const CompositeTerm& term() const { return term_; }
    LogicalTime max_delay() const { return max_delay_; }
    bool empty() const;
    bool timed() const { return max_delay_ > 0; }

    std::vector<std::pair<std::string, Value>> pairs() const;
    std::string render() const;
    const std::string& normalized_key() const { return key_; }

    friend bool operator==(const CompositeValue& a, const CompositeValue& b) { return a.key_ == b.key_; }

private:
    CompositeTerm term_;
    LogicalTime max_delay_ = 0;
    std::string key_;
};

} // namespace cbpmn
