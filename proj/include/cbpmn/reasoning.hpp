#pragma once

// Context predicate algebra: a small query language over the predicates of
// a contextual situation.
//
// Grammar (keywords are case-insensitive):
//
//   query      := and_query | or_query | not_query | arith_query | predicate
//   and_query  := "AND" category "WHERE" selector                 -- AndByParameter
//               | "AND" category "WHERE" condition                -- AndConditional
//               | "AND" "CHAIN" [ "FROM" category ]               -- AndCrossCategory
//   or_query   := "OR" category "SAME" "INSTANCE_ATTRIBUTE" [ "WHERE" condition ]
//               | "OR" category "SAME" "ATTRIBUTE_VALUE" [ "WHERE" condition ]
//   not_query  := "NOT" ( not_query | predicate )
//   arith_query:= "ARITH" predicate ( "+" | "-" ) predicate
//   predicate  := name "(" subject "," attribute [ "," connector "," value ] ")"
//   selector   := "parameter" ( "INSTANCE_OF" | "=" ) name
//   condition  := cterm { ( "AND" | "OR" ) cterm }                -- one operator per group
//   cterm      := "(" condition ")" | leaf
//   leaf       := "attr" name [ connector value ]
//               | "parameter" ( "INSTANCE_OF" | "=" ) name
//               | "value" connector value
//   category   := name | "*"
//
// Values are numbers, true/false, "quoted text" or bare words; inside
// parentheses bare multi-word values ("Very Poor") are allowed.
//
// Semantics over a contextual situation, results in declaration order:
//   AndByParameter    AND of the category's predicates whose parameter
//                     (INSTANCE_OF) or subject (=) matches.
//   AndConditional    predicates are grouped by subject; for every subject
//                     whose predicates satisfy the condition, the predicates
//                     matching at least one leaf are AND-joined.
//   AndCrossCategory  AND of predicates linked by "value of one equals the
//                     subject or parameter of a predicate of another
//                     category". With FROM, only chains starting in that
//                     category. Chains longer than two links are experimental.
//   OrSameInstance    OR of predicates sharing subject and attribute with
//                     differing values.
//   OrSameValue       OR of predicates sharing attribute and value across
//                     different subjects.
//   NOT               negates a literal predicate; double negation cancels.
//   ARITH             adds or subtracts the numeric values of two predicates
//                     of one category and subject found in the situation;
//                     the result keeps the first operand's attribute.
// Any selection that matches nothing yields NULL.

#include "cbpmn/context.hpp"
#include "cbpmn/error.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbpmn {

/// Category(subject, attribute, connector, value).
struct ContextPredicate {
    std::string category;
    std::string subject;
    /// Parameter the subject instantiates; equals `subject` when there is no instance.
    std::string parameter;
    std::string attribute;
    Connector connector = Connector::Eq;
    Value value;

    static ContextPredicate from_context(const AtomicContext& c);
    std::string render() const;

    friend bool operator==(const ContextPredicate&, const ContextPredicate&) = default;
};

std::vector<ContextPredicate> predicates_of(const ContextualSituation& cs);

struct PredicateExpr {
    enum class Kind { Atom, Not, And, Or };
    Kind kind = Kind::Atom;
    ContextPredicate atom;
    std::vector<PredicateExpr> children;

    static PredicateExpr of(ContextPredicate p);
    static PredicateExpr negate(PredicateExpr e);
    /// Joins one or more predicates; a single predicate stays an atom.
    static PredicateExpr join(Kind op, const std::vector<ContextPredicate>& preds);

    std::string render() const;
    friend bool operator==(const PredicateExpr&, const PredicateExpr&) = default;
};

/// std::nullopt is NULL.
using QueryResult = std::optional<PredicateExpr>;

std::string render(const QueryResult& r);

struct ConditionLeaf {
    enum class Field { Attribute, ParameterInstanceOf, ParameterEquals, Value };
    Field field = Field::Attribute;
    std::string name;
    std::optional<Connector> connector;
    std::optional<Value> value;

    bool matches(const ContextPredicate& p) const;
    friend bool operator==(const ConditionLeaf&, const ConditionLeaf&) = default;
};

struct Condition {
    enum class Kind { Leaf, And, Or };
    Kind kind = Kind::Leaf;
    ConditionLeaf leaf;
    std::vector<Condition> children;

    /// Existential reading over a predicate group.
    bool holds(const std::vector<ContextPredicate>& group) const;
    /// True when some leaf matches `p`.
    bool touches(const ContextPredicate& p) const;
    friend bool operator==(const Condition&, const Condition&) = default;
};

/// Predicate as written in a query; connector/value are optional for lookups.
struct PredicateRef {
    std::string category;
    std::string subject;
    std::string attribute;
    std::optional<Connector> connector;
    std::optional<Value> value;

    bool resolves_to(const ContextPredicate& p) const;
    friend bool operator==(const PredicateRef&, const PredicateRef&) = default;
};

struct Query {
    enum class Kind {
        AndByParameter,
        AndCrossCategory,
        AndConditional,
        OrSameInstance,
        OrSameValue,
        Not,
        Arith,
        Literal,
    };
    enum class Arithmetic { Add, Subtract };

    Kind kind = Kind::Literal;
    /// "*" matches every category.
    std::string category = "*";
    /// AndByParameter selector, stored as a single leaf.
    ConditionLeaf selector;
    /// AndConditional condition; optional filter for the OR kinds.
    std::optional<Condition> condition;
    /// AndCrossCategory start category.
    std::optional<std::string> chain_from;
    /// Literal predicate, or the two Arith operands.
    std::vector<PredicateRef> predicates;
    Arithmetic arithmetic = Arithmetic::Add;
    /// Not operand.
    std::vector<Query> operand;

    friend bool operator==(const Query&, const Query&) = default;
};

/// Parse failure with the byte offset and what the parser expected there.
class ParseError : public Error {
public:
    ParseError(std::size_t position, std::string expected, const std::string& text)
        : Error("parse-error", "expected " + expected + " at position " + std::to_string(position) + " in '" +
                                   text + "'"),
          position_(position), expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

Query parse_query(std::string_view text);

/// Canonical text; parse_query(print_query(q)) == q.
std::string print_query(const Query& q);

/// Throws Error("incompatible-operands") or Error("missing-operand") for ARITH.
QueryResult evaluate(const Query& q, const ContextualSituation& cs);
QueryResult evaluate(const Query& q, const std::vector<ContextPredicate>& predicates);

} // namespace cbpmn
