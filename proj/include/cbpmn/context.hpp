#pragma once

// Context algebra: atomic contexts, context vectors, contextual situations,
// per-activity context states and the change-detecting difference that
// backs catchContext.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace cbpmn {

/// Minutes since scenario start (00:00).
using LogicalTime = std::int64_t;

inline constexpr LogicalTime kNeverObserved = std::numeric_limits<LogicalTime>::min();

/// Accepts "14:00", "2:00 pm", "2.00 pm", "11.00 am".
LogicalTime parse_clock(std::string_view text);

/// Renders as "11.00 am" / "2.00 pm".
std::string format_clock(LogicalTime t);

enum class Connector { Eq, Gt, Lt, Ge, Le, Ne, In, At, Near, From };
enum class Category { Organization, Role, External };
enum class Temporality { Static, Steady, Dynamic };

Connector parse_connector(std::string_view text);
std::string_view to_string(Connector c);
Category parse_category(std::string_view text);
std::string_view to_string(Category c);
Temporality parse_temporality(std::string_view text);
std::string_view to_string(Temporality t);

struct ClockValue {
    LogicalTime minutes = 0;
    friend bool operator==(const ClockValue&, const ClockValue&) = default;
};

/// Tagged scalar carried by a context: text, number, boolean or logical time.
class Value {
public:
    using Storage = std::variant<std::string, double, bool, ClockValue>;

    Value() : v_(std::string{}) {}
    Value(std::string text) : v_(std::move(text)) {}
    Value(const char* text) : v_(std::string(text)) {}
    Value(double number) : v_(number) {}
    Value(int number) : v_(static_cast<double>(number)) {}
    Value(bool flag) : v_(flag) {}
    Value(ClockValue time) : v_(time) {}

    /// Reads a bare token: number, true/false, otherwise text.
    static Value parse(std::string_view token);

    const Storage& storage() const { return v_; }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_clock() const { return std::holds_alternative<ClockValue>(v_); }
    bool is_ordered() const { return is_number() || is_clock(); }

    const std::string& text() const { return std::get<std::string>(v_); }
    double number() const { return std::get<double>(v_); }
    /// Number or clock minutes, for ordered comparisons.
    double ordinal() const;

    std::string to_string() const;
    /// Case-folded text; other kinds render as to_string().
    std::string normalized() const;

    /// Structural equality after normalization (case-insensitive text, exact numbers).
    friend bool operator==(const Value& a, const Value& b);

private:
    Storage v_;
};

/// Evaluates `observed <connector> expected`. Prepositions compare as equality.
bool compare(const Value& observed, Connector c, const Value& expected);

struct ContextKey {
    std::string parameter;
    std::string instance;
    std::string attribute;

    friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

/// One environmental fact <parameter, attribute, connector, value>.
struct AtomicContext {
    std::string parameter;
    std::optional<std::string> instance;
    std::string attribute;
    Connector connector = Connector::Eq;
    Value value;
    Category category = Category::External;
    Temporality temporality = Temporality::Dynamic;
    /// Predicate name used by the reasoning layer ("Resource", "Caregiver").
    /// Empty means the parameter name is used.
    std::string predicate;

    ContextKey key() const { return {parameter, instance.value_or(""), attribute}; }
    std::string qualified_attribute() const { return parameter + "." + attribute; }
    std::string subject() const { return instance.value_or(parameter); }
    /// Connector and value equal under normalization.
    bool same_payload(const AtomicContext& other) const {
        return connector == other.connector && value == other.value;
    }
    /// Throws Error("invalid-context") when a required field is empty.
    void validate() const;

    friend bool operator==(const AtomicContext&, const AtomicContext&) = default;
};

/// CON(t): the effecting contexts at one instant.
class ContextVector {
public:
    ContextVector() = default;
    /// Throws Error("duplicate-context") on a repeated (parameter, instance, attribute) key.
    ContextVector(std::vector<AtomicContext> contexts, LogicalTime timestamp);

    const std::vector<AtomicContext>& contexts() const { return contexts_; }
    LogicalTime timestamp() const { return timestamp_; }

private:
    std::vector<AtomicContext> contexts_;
    LogicalTime timestamp_ = 0;
};

/// <P_c, A_c, t_c> plus the bound values observed at t_c.
///
/// `bindings` holds every non-static context observed at `timestamp` (the
/// full vector, in declaration order); P_c and A_c classify which of those
/// changed. P_c lists parameters absent from the previous observation;
/// A_c lists "parameter.attribute" entries of previously known parameters
/// that were added or whose payload changed. Parameters that disappeared are
/// recorded in `removed_parameters` and never enter P_c.
struct ContextualSituation {
    std::vector<std::string> changed_parameters;
    std::vector<std::string> changed_attributes;
    std::vector<std::string> removed_parameters;
    LogicalTime timestamp = kNeverObserved;
    std::vector<AtomicContext> bindings;

    bool has_changes() const { return !changed_parameters.empty() || !changed_attributes.empty(); }

    /// Parameters named by the change set: P_c plus owners of A_c entries.
    std::vector<std::string> touched_parameters() const;
    /// Attributes named by the change set: A_c plus the bound attributes of P_c members.
    std::vector<std::string> touched_attributes() const;
    /// Bindings behind touched_attributes(), in declaration order.
    std::vector<AtomicContext> changed_bindings() const;
    const AtomicContext* find(std::string_view qualified_attribute) const;

    /// "[<Weather, Watch><Weather.Status, Watch.Time><11.00 am>]"
    std::string render() const;
    /// Same, with the changed values in the last slot instead of the timestamp.
    std::string render_values() const;

    friend bool operator==(const ContextualSituation&, const ContextualSituation&) = default;
};

/// The restriction of a contextual situation to one activity.
struct ContextState : ContextualSituation {
    std::string activity_id;

    /// The never-observed state an activity starts from.
    static ContextState initial(std::string activity_id);

    friend bool operator==(const ContextState&, const ContextState&) = default;
};

/// Contexts a business administrator declared relevant to one activity.
struct ScopeFilter {
    std::string activity_id;
    std::vector<std::string> relevant_parameters;
    /// Qualified "parameter.attribute"; when none is listed for a parameter,
    /// all of its attributes are in scope.
    std::vector<std::string> relevant_attributes;

    bool empty() const { return relevant_parameters.empty(); }
    bool admits(const AtomicContext& c) const;
};

/// Classifies `now` against `previous`. Static contexts are dropped.
ContextualSituation situation_between(const ContextVector& previous, const ContextVector& now);

/// Situation for a vector observed with no prior history.
ContextualSituation situation_of(const ContextVector& now);

/// CS ~ S_a. Returns `old` unchanged when `now` is not newer or nothing changed.
ContextState diff(const ContextualSituation& now, const ContextState& old);

/// Restricts `cs` to `scope`, diffs it against `state`, and returns the state
/// to store. Throws Error("scope-mismatch") when the scope belongs to another activity.
ContextState catch_context(const ContextualSituation& cs, const ContextState& state,
                           const ScopeFilter& scope);

} // namespace cbpmn
