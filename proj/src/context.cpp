#include "cbpmn/context.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace cbpmn {

LogicalTime parse_clock(std::string_view text) {
    std::string s = lower(trim(text));
    bool pm = false;
    bool am = false;
    if (ends_with(s, "pm")) {
        pm = true;
        s = trim(s.substr(0, s.size() - 2));
    } else if (ends_with(s, "am")) {
        am = true;
        s = trim(s.substr(0, s.size() - 2));
    }
    auto sep = s.find_first_of(":.");
    std::string_view hh = std::string_view(s).substr(0, sep);
    std::string_view mm = sep == std::string::npos ? std::string_view("0") : std::string_view(s).substr(sep + 1);
    int hours = 0;
    int minutes = 0;
    auto r1 = std::from_chars(hh.data(), hh.data() + hh.size(), hours);
    auto r2 = std::from_chars(mm.data(), mm.data() + mm.size(), minutes);
    if (hh.empty() || r1.ec != std::errc{} || r1.ptr != hh.data() + hh.size() || r2.ec != std::errc{} ||
        r2.ptr != mm.data() + mm.size() || minutes < 0 || minutes > 59 || hours < 0) {
        throw Error("invalid-time", "cannot read clock value '" + std::string(text) + "'");
    }
    if (pm || am) {
        if (hours < 1 || hours > 12) {
            throw Error("invalid-time", "12-hour clock out of range in '" + std::string(text) + "'");
        }
        hours %= 12;
        if (pm) {
            hours += 12;
        }
    }
    return static_cast<LogicalTime>(hours) * 60 + minutes;
}

std::string format_clock(LogicalTime t) {
    if (t == kNeverObserved) {
        return "never";
    }
    LogicalTime day_minutes = ((t % 1440) + 1440) % 1440;
    LogicalTime hours = day_minutes / 60;
    LogicalTime minutes = day_minutes % 60;
    const char* suffix = hours < 12 ? "am" : "pm";
    LogicalTime h12 = hours % 12 == 0 ? 12 : hours % 12;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld %s", static_cast<long long>(h12),
                  static_cast<long long>(minutes), suffix);
    std::string out = buf;
    if (t >= 1440 || t < 0) {
        out += " (day " + std::to_string(t >= 0 ? t / 1440 : -((-t + 1439) / 1440)) + ")";
    }
    return out;
}

namespace {

struct ConnectorName {
    Connector c;
    std::string_view name;
};

constexpr ConnectorName kConnectors[] = {
    {Connector::Ge, ">="}, {Connector::Le, "<="}, {Connector::Ne, "!="}, {Connector::Eq, "="},
    {Connector::Gt, ">"},  {Connector::Lt, "<"},  {Connector::In, "In"}, {Connector::At, "At"},
    {Connector::Near, "near"}, {Connector::From, "from"},
};

} // namespace

Connector parse_connector(std::string_view text) {
    std::string t = trim(text);
    if (t == "≥") return Connector::Ge;
    if (t == "≤") return Connector::Le;
    if (t == "≠" || t == "<>") return Connector::Ne;
    if (t == "==") return Connector::Eq;
    for (const auto& entry : kConnectors) {
        if (iequals(entry.name, t)) {
            return entry.c;
        }
    }
    throw Error("invalid-connector", "unknown connector '" + t + "'");
}

std::string_view to_string(Connector c) {
    for (const auto& entry : kConnectors) {
        if (entry.c == c) {
            return entry.name;
        }
    }
    return "?";
}

Category parse_category(std::string_view text) {
    std::string t = lower(trim(text));
    if (t == "organization" || t == "organisation") return Category::Organization;
    if (t == "role") return Category::Role;
    if (t == "external") return Category::External;
    throw Error("invalid-category", "unknown category '" + std::string(text) + "'");
}

std::string_view to_string(Category c) {
    switch (c) {
    case Category::Organization: return "organization";
    case Category::Role: return "role";
    case Category::External: return "external";
    }
    return "?";
}

Temporality parse_temporality(std::string_view text) {
    std::string t = lower(trim(text));
    if (t == "static") return Temporality::Static;
    if (t == "steady") return Temporality::Steady;
    if (t == "dynamic") return Temporality::Dynamic;
    throw Error("invalid-temporality", "unknown temporality '" + std::string(text) + "'");
}

std::string_view to_string(Temporality t) {
    switch (t) {
    case Temporality::Static: return "static";
    case Temporality::Steady: return "steady";
    case Temporality::Dynamic: return "dynamic";
    }
    return "?";
}

Value Value::parse(std::string_view token) {
    std::string t = trim(token);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        return Value(t.substr(1, t.size() - 2));
    }
    if (iequals(t, "true")) return Value(true);
    if (iequals(t, "false")) return Value(false);
    if (auto n = parse_number(t)) {
        return Value(*n);
    }
    return Value(std::move(t));
}

double Value::ordinal() const {
    if (is_number()) return number();
    if (is_clock()) return static_cast<double>(std::get<ClockValue>(v_).minutes);
    throw Error("incompatible-operands", "value '" + to_string() + "' is not ordered");
}

std::string Value::to_string() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return format_clock(v.minutes);
            }
        },
        v_);
}

std::string Value::normalized() const {
    return is_text() ? lower(text()) : to_string();
}

bool operator==(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index()) {
        return false;
    }
    if (a.is_text()) {
        return iequals(a.text(), b.text());
    }
    return a.v_ == b.v_;
}

bool compare(const Value& observed, Connector c, const Value& expected) {
    switch (c) {
    case Connector::Ne:
        return !(observed == expected);
    case Connector::Gt:
    case Connector::Lt:
    case Connector::Ge:
    case Connector::Le: {
        if (!observed.is_ordered() || !expected.is_ordered() ||
            observed.is_number() != expected.is_number()) {
            return false;
        }
        double x = observed.ordinal();
        double y = expected.ordinal();
        if (c == Connector::Gt) return x > y;
        if (c == Connector::Lt) return x < y;
        if (c == Connector::Ge) return x >= y;
        return x <= y;
    }
    default:
        return observed == expected;
    }
}

void AtomicContext::validate() const {
    if (parameter.empty() || attribute.empty()) {
        throw Error("invalid-context", "context needs a parameter and an attribute");
    }
}

ContextVector::ContextVector(std::vector<AtomicContext> contexts, LogicalTime timestamp)
    : contexts_(std::move(contexts)), timestamp_(timestamp) {
    std::set<ContextKey> seen;
    for (const auto& c : contexts_) {
        c.validate();
        if (!seen.insert(c.key()).second) {
            throw Error("duplicate-context", "context " + c.subject() + "." + c.attribute + " appears twice");
        }
    }
}

namespace {

void push_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) {
        v.push_back(s);
    }
}

bool contains(const std::vector<std::string>& v, std::string_view s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join_angle(const std::vector<std::string>& items) {
    return "⟨" + join(items, ", ") + "⟩";
}

// Shared classification behind situation_between() and diff().
ContextualSituation classify(const std::vector<AtomicContext>& previous, const std::vector<AtomicContext>& now,
                             LogicalTime timestamp) {
    ContextualSituation cs;
    cs.timestamp = timestamp;
    std::set<std::string> old_parameters;
    std::map<ContextKey, const AtomicContext*> old_by_key;
    for (const auto& c : previous) {
        if (c.temporality == Temporality::Static) continue;
        old_parameters.insert(c.parameter);
        old_by_key.emplace(c.key(), &c);
    }
    std::set<std::string> new_parameters;
    for (const auto& c : now) {
        if (c.temporality == Temporality::Static) continue;
        cs.bindings.push_back(c);
        new_parameters.insert(c.parameter);
        if (!old_parameters.count(c.parameter)) {
            push_unique(cs.changed_parameters, c.parameter);
            continue;
        }
        auto it = old_by_key.find(c.key());
        if (it == old_by_key.end() || !it->second->same_payload(c)) {
            push_unique(cs.changed_attributes, c.qualified_attribute());
        }
    }
    for (const auto& c : previous) {
        if (c.temporality == Temporality::Static) continue;
        if (!new_parameters.count(c.parameter)) {
            push_unique(cs.removed_parameters, c.parameter);
        }
    }
    return cs;
}

} // namespace

std::vector<std::string> ContextualSituation::touched_parameters() const {
    std::vector<std::string> out;
    for (const auto& c : bindings) {
        if (contains(changed_parameters, c.parameter) || contains(changed_attributes, c.qualified_attribute())) {
            push_unique(out, c.parameter);
        }
    }
    return out;
}

std::vector<std::string> ContextualSituation::touched_attributes() const {
    std::vector<std::string> out;
    for (const auto& c : changed_bindings()) {
        push_unique(out, c.qualified_attribute());
    }
    return out;
}

std::vector<AtomicContext> ContextualSituation::changed_bindings() const {
    std::vector<AtomicContext> out;
    for (const auto& c : bindings) {
        if (contains(changed_parameters, c.parameter) || contains(changed_attributes, c.qualified_attribute())) {
            out.push_back(c);
        }
    }
    return out;
}

const AtomicContext* ContextualSituation::find(std::string_view qualified_attribute) const {
    for (const auto& c : bindings) {
        if (c.qualified_attribute() == qualified_attribute) {
            return &c;
        }
    }
    return nullptr;
}

std::string ContextualSituation::render() const {
    return "[" + join_angle(touched_parameters()) + join_angle(touched_attributes()) +
           join_angle({format_clock(timestamp)}) + "]";
}

std::string ContextualSituation::render_values() const {
    std::vector<std::string> values;
    for (const auto& c : changed_bindings()) {
        values.push_back(c.value.to_string());
    }
    return "[" + join_angle(touched_parameters()) + join_angle(touched_attributes()) + join_angle(values) + "]";
}

ContextState ContextState::initial(std::string activity_id) {
    ContextState s;
    s.activity_id = std::move(activity_id);
    return s;
}

bool ScopeFilter::admits(const AtomicContext& c) const {
    if (!contains(relevant_parameters, c.parameter)) {
        return false;
    }
    std::string prefix = c.parameter + ".";
    bool any_listed = std::any_of(relevant_attributes.begin(), relevant_attributes.end(),
                                  [&](const std::string& a) { return starts_with(a, prefix); });
    return !any_listed || contains(relevant_attributes, c.qualified_attribute());
}

ContextualSituation situation_between(const ContextVector& previous, const ContextVector& now) {
    return classify(previous.contexts(), now.contexts(), now.timestamp());
}

ContextualSituation situation_of(const ContextVector& now) {
    return classify({}, now.contexts(), now.timestamp());
}

ContextState diff(const ContextualSituation& now, const ContextState& old) {
    if (now.timestamp <= old.timestamp) {
        return old;
    }
    ContextualSituation changes = classify(old.bindings, now.bindings, now.timestamp);
    if (!changes.has_changes()) {
        return old;
    }
    ContextState out;
    static_cast<ContextualSituation&>(out) = std::move(changes);
    out.activity_id = old.activity_id;
    return out;
}

ContextState catch_context(const ContextualSituation& cs, const ContextState& state, const ScopeFilter& scope) {
    if (scope.activity_id != state.activity_id) {
        throw Error("scope-mismatch",
                    "scope of '" + scope.activity_id + "' applied to state of '" + state.activity_id + "'");
    }
    ContextualSituation restricted;
    restricted.timestamp = cs.timestamp;
    for (const auto& c : cs.bindings) {
        if (scope.admits(c)) {
            restricted.bindings.push_back(c);
        }
    }
    return diff(restricted, state);
}

} // namespace cbpmn
