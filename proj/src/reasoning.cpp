#include "cbpmn/reasoning.hpp"

#include "cbpmn/text.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cbpmn {

ContextPredicate ContextPredicate::from_context(const AtomicContext& c) {
    ContextPredicate p;
    p.category = c.predicate.empty() ? c.parameter : c.predicate;
    p.subject = c.subject();
    p.parameter = c.parameter;
    p.attribute = c.attribute;
    p.connector = c.connector;
    p.value = c.value;
    return p;
}

std::string ContextPredicate::render() const {
    return category + "(" + subject + ", " + attribute + ", " + std::string(to_string(connector)) + ", " +
           value.to_string() + ")";
}

std::vector<ContextPredicate> predicates_of(const ContextualSituation& cs) {
    std::vector<ContextPredicate> out;
    out.reserve(cs.bindings.size());
    for (const auto& c : cs.bindings) out.push_back(ContextPredicate::from_context(c));
    return out;
}

PredicateExpr PredicateExpr::of(ContextPredicate p) {
    PredicateExpr e;
    e.kind = Kind::Atom;
    e.atom = std::move(p);
    return e;
}

PredicateExpr PredicateExpr::negate(PredicateExpr e) {
    if (e.kind == Kind::Not) {
        return std::move(e.children.front());
    }
    PredicateExpr n;
    n.kind = Kind::Not;
    n.children.push_back(std::move(e));
    return n;
}

PredicateExpr PredicateExpr::join(Kind op, const std::vector<ContextPredicate>& preds) {
    if (preds.size() == 1) return of(preds.front());
    PredicateExpr e;
    e.kind = op;
    for (const auto& p : preds) e.children.push_back(of(p));
    return e;
}

std::string PredicateExpr::render() const {
    switch (kind) {
    case Kind::Atom:
        return atom.render();
    case Kind::Not: {
        const auto& c = children.front();
        std::string inner = c.render();
        return c.kind == Kind::Atom || c.kind == Kind::Not ? "NOT " + inner : "NOT (" + inner + ")";
    }
    case Kind::And:
    case Kind::Or: {
        std::vector<std::string> parts;
        for (const auto& c : children) {
            bool group = c.kind == Kind::And || c.kind == Kind::Or;
            parts.push_back(group ? "(" + c.render() + ")" : c.render());
        }
        return cbpmn::join(parts, kind == Kind::And ? " AND " : " OR ");
    }
    }
    return {};
}

std::string render(const QueryResult& r) { return r ? r->render() : "NULL"; }

bool ConditionLeaf::matches(const ContextPredicate& p) const {
    switch (field) {
    case Field::Attribute:
        if (!iequals(p.attribute, name)) return false;
        return !connector || compare(p.value, *connector, *value);
    case Field::ParameterInstanceOf:
        return iequals(p.parameter, name);
    case Field::ParameterEquals:
        return iequals(p.subject, name);
    case Field::Value:
        return compare(p.value, *connector, *value);
    }
    return false;
}

bool Condition::holds(const std::vector<ContextPredicate>& group) const {
    switch (kind) {
    case Kind::Leaf:
        return std::any_of(group.begin(), group.end(), [&](const ContextPredicate& p) { return leaf.matches(p); });
    case Kind::And:
        return std::all_of(children.begin(), children.end(), [&](const Condition& c) { return c.holds(group); });
    case Kind::Or:
        return std::any_of(children.begin(), children.end(), [&](const Condition& c) { return c.holds(group); });
    }
    return false;
}

bool Condition::touches(const ContextPredicate& p) const {
    if (kind == Kind::Leaf) return leaf.matches(p);
    return std::any_of(children.begin(), children.end(), [&](const Condition& c) { return c.touches(p); });
}

bool PredicateRef::resolves_to(const ContextPredicate& p) const {
    if (category != "*" && !iequals(category, p.category)) return false;
    if (!iequals(subject, p.subject) || !iequals(attribute, p.attribute)) return false;
    if (connector && *connector != p.connector) return false;
    return !value || *value == p.value;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_word_char(char c) {
    auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) return false;
    return std::string_view("(),\"=<>!").find(c) == std::string_view::npos;
}

class QueryParser {
public:
    explicit QueryParser(std::string_view text) : text_(text) {}

    Query parse() {
        skip();
        if (done()) fail("query");
        Query q = parse_query_body();
        skip();
        if (!done()) fail("end of query");
        return q;
    }

private:
    Query parse_query_body() {
        if (keyword("AND")) return parse_and();
        if (keyword("OR")) return parse_or();
        if (keyword("NOT")) {
            Query q;
            q.kind = Query::Kind::Not;
            skip();
            if (peek_keyword("NOT")) {
                keyword("NOT");
                Query inner;
                inner.kind = Query::Kind::Not;
                inner.operand.push_back(parse_not_tail());
                q.operand.push_back(std::move(inner));
            } else {
                q.operand.push_back(literal(parse_predicate()));
            }
            return q;
        }
        if (keyword("ARITH")) {
            Query q;
            q.kind = Query::Kind::Arith;
            q.predicates.push_back(parse_predicate());
            skip();
            if (consume('+')) {
                q.arithmetic = Query::Arithmetic::Add;
            } else if (consume('-')) {
                q.arithmetic = Query::Arithmetic::Subtract;
            } else {
                fail("'+' or '-'");
            }
            q.predicates.push_back(parse_predicate());
            return q;
        }
        return literal(parse_predicate());
    }

    Query parse_not_tail() {
        skip();
        if (keyword("NOT")) {
            Query inner;
            inner.kind = Query::Kind::Not;
            inner.operand.push_back(parse_not_tail());
            return inner;
        }
        return literal(parse_predicate());
    }

    static Query literal(PredicateRef p) {
        Query q;
        q.kind = Query::Kind::Literal;
        q.predicates.push_back(std::move(p));
        return q;
    }

    Query parse_and() {
        Query q;
        if (keyword("CHAIN")) {
            q.kind = Query::Kind::AndCrossCategory;
            if (keyword("FROM")) q.chain_from = category();
            return q;
        }
        q.category = category();
        expect_keyword("WHERE");
        std::size_t save = pos_;
        if (auto leaf = try_parameter_leaf()) {
            skip();
            if (done()) {
                q.kind = Query::Kind::AndByParameter;
                q.selector = *leaf;
                return q;
            }
        }
        pos_ = save;
        q.kind = Query::Kind::AndConditional;
        q.condition = parse_condition(false);
        return q;
    }

    Query parse_or() {
        Query q;
        q.category = category();
        expect_keyword("SAME");
        if (keyword("INSTANCE_ATTRIBUTE")) {
            q.kind = Query::Kind::OrSameInstance;
        } else if (keyword("ATTRIBUTE_VALUE")) {
            q.kind = Query::Kind::OrSameValue;
        } else {
            fail("INSTANCE_ATTRIBUTE or ATTRIBUTE_VALUE");
        }
        if (keyword("WHERE")) q.condition = parse_condition(false);
        return q;
    }

    Condition parse_condition(bool in_parens) {
        std::vector<Condition> items;
        items.push_back(parse_cterm(in_parens));
        std::optional<Condition::Kind> op;
        while (true) {
            skip();
            if (done() || peek() == ')') break;
            Condition::Kind next;
            if (keyword("AND")) {
                next = Condition::Kind::And;
            } else if (keyword("OR")) {
                next = Condition::Kind::Or;
            } else {
                fail("AND, OR or ')'");
            }
            if (op && *op != next) fail("parenthesized group (AND and OR cannot mix)");
            op = next;
            items.push_back(parse_cterm(in_parens));
        }
        if (items.size() == 1) return std::move(items.front());
        Condition c;
        c.kind = *op;
        c.children = std::move(items);
        return c;
    }

    Condition parse_cterm(bool in_parens) {
        skip();
        if (consume('(')) {
            Condition inner = parse_condition(true);
            skip();
            if (!consume(')')) fail("')'");
            return inner;
        }
        Condition c;
        c.kind = Condition::Kind::Leaf;
        c.leaf = parse_leaf(in_parens);
        return c;
    }

    std::optional<ConditionLeaf> try_parameter_leaf() {
        if (!keyword("parameter")) return std::nullopt;
        ConditionLeaf leaf;
        if (keyword("INSTANCE_OF")) {
            leaf.field = ConditionLeaf::Field::ParameterInstanceOf;
        } else {
            skip();
            if (!consume('=')) fail("INSTANCE_OF or '='");
            leaf.field = ConditionLeaf::Field::ParameterEquals;
        }
        leaf.name = word("parameter name");
        return leaf;
    }

    ConditionLeaf parse_leaf(bool in_parens) {
        skip();
        if (auto p = try_parameter_leaf()) return *p;
        ConditionLeaf leaf;
        if (keyword("attr")) {
            leaf.field = ConditionLeaf::Field::Attribute;
            leaf.name = word("attribute name");
            if (auto c = try_connector()) {
                leaf.connector = c;
                leaf.value = value(in_parens);
            }
            return leaf;
        }
        if (keyword("value")) {
            leaf.field = ConditionLeaf::Field::Value;
            auto c = try_connector();
            if (!c) fail("connector");
            leaf.connector = c;
            leaf.value = value(in_parens);
            return leaf;
        }
        fail("'attr', 'parameter', 'value' or '('");
    }

    PredicateRef parse_predicate() {
        PredicateRef p;
        skip();
        p.category = word("predicate name");
        skip();
        if (!consume('(')) fail("'('");
        std::vector<std::string> args;
        while (true) {
            args.push_back(raw_arg());
            skip();
            if (consume(')')) break;
            if (!consume(',')) fail("',' or ')'");
        }
        if (args.size() != 2 && args.size() != 4) {
            fail("2 or 4 predicate arguments");
        }
        for (const auto& a : args) {
            if (a.empty()) fail("predicate argument");
        }
        p.subject = args[0];
        p.attribute = args[1];
        if (args.size() == 4) {
            try {
                p.connector = parse_connector(args[2]);
            } catch (const Error&) {
                fail("connector");
            }
            p.value = Value::parse(args[3]);
        }
        return p;
    }

    std::string raw_arg() {
        skip();
        if (peek() == '"') return "\"" + quoted() + "\"";
        std::size_t start = pos_;
        while (!done() && peek_raw() != ',' && peek_raw() != ')') ++pos_;
        return trim(text_.substr(start, pos_ - start));
    }

    std::string category() {
        skip();
        if (consume('*')) return "*";
        return word("category");
    }

    std::optional<Connector> try_connector() {
        skip();
        static constexpr std::string_view symbols[] = {">=", "<=", "!=", "==", "≥", "≤", "≠", "=", ">", "<"};
        for (auto s : symbols) {
            if (text_.substr(pos_, s.size()) == s) {
                pos_ += s.size();
                return parse_connector(s);
            }
        }
        for (auto kw : {"In", "At", "near", "from"}) {
            if (keyword(kw)) return parse_connector(kw);
        }
        return std::nullopt;
    }

    Value value(bool multiword) {
        skip();
        if (peek() == '"') return Value(quoted());
        std::vector<std::string> words;
        words.push_back(word("value"));
        if (multiword) {
            while (true) {
                skip();
                if (done() || peek() == ')' || peek() == ',' || peek_exact_word("AND") || peek_exact_word("OR")) break;
                words.push_back(word("value"));
            }
        }
        return Value::parse(join(words, " "));
    }

    std::string quoted() {
        std::size_t start = pos_;
        if (!consume('"')) fail("'\"'");
        std::string out;
        while (!done() && peek_raw() != '"') {
            out += text_[pos_++];
        }
        if (done()) {
            pos_ = start;
            fail("closing '\"'");
        }
        ++pos_;
        return out;
    }

    std::string word(const char* what) {
        skip();
        std::size_t start = pos_;
        while (!done() && is_word_char(text_[pos_])) ++pos_;
        if (start == pos_) fail(what);
        return std::string(text_.substr(start, pos_ - start));
    }

    bool peek_keyword(std::string_view kw) {
        skip();
        if (text_.size() - pos_ < kw.size()) return false;
        if (!iequals(text_.substr(pos_, kw.size()), kw)) return false;
        return pos_ + kw.size() == text_.size() || !is_word_char(text_[pos_ + kw.size()]);
    }

    bool peek_exact_word(std::string_view kw) {
        if (text_.substr(pos_, kw.size()) != kw) return false;
        return pos_ + kw.size() == text_.size() || !is_word_char(text_[pos_ + kw.size()]);
    }

    bool keyword(std::string_view kw) {
        if (!peek_keyword(kw)) return false;
        pos_ += kw.size();
        return true;
    }

    void expect_keyword(std::string_view kw) {
        if (!keyword(kw)) fail(std::string(kw));
    }

    bool consume(char c) {
        if (!done() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip() {
        while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip();
        return done() ? '\0' : text_[pos_];
    }
    char peek_raw() const { return text_[pos_]; }
    bool done() const { return pos_ >= text_.size(); }

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError(pos_, expected, std::string(text_));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

bool needs_quotes(const Value& v) {
    if (!v.is_text()) return false;
    const std::string& t = v.text();
    if (t.empty()) return true;
    if (!(Value::parse(t) == v) || !Value::parse(t).is_text()) return true;
    for (char c : t) {
        if (!is_word_char(c)) return true;
    }
    return t == "AND" || t == "OR";
}

std::string print_value(const Value& v) {
    return needs_quotes(v) ? "\"" + v.to_string() + "\"" : v.to_string();
}

std::string print_arg(const std::string& raw) {
    if (raw.find_first_of(",)") != std::string::npos) return "\"" + raw + "\"";
    return raw;
}

std::string print_predicate(const PredicateRef& p) {
    std::string out = p.category + "(" + print_arg(p.subject) + ", " + print_arg(p.attribute);
    if (p.connector) {
        std::string v = p.value->to_string();
        bool quote = v.find_first_of(",)") != std::string::npos || !(Value::parse(v) == *p.value) ||
                     (p.value->is_text() && !Value::parse(v).is_text());
        out += ", " + std::string(to_string(*p.connector)) + ", " + (quote ? "\"" + v + "\"" : v);
    }
    return out + ")";
}

std::string print_leaf(const ConditionLeaf& l) {
    switch (l.field) {
    case ConditionLeaf::Field::Attribute: {
        std::string out = "attr " + l.name;
        if (l.connector) out += " " + std::string(to_string(*l.connector)) + " " + print_value(*l.value);
        return out;
    }
    case ConditionLeaf::Field::ParameterInstanceOf:
        return "parameter INSTANCE_OF " + l.name;
    case ConditionLeaf::Field::ParameterEquals:
        return "parameter = " + l.name;
    case ConditionLeaf::Field::Value:
        return "value " + std::string(to_string(*l.connector)) + " " + print_value(*l.value);
    }
    return {};
}

std::string print_condition(const Condition& c) {
    if (c.kind == Condition::Kind::Leaf) return "(" + print_leaf(c.leaf) + ")";
    std::vector<std::string> parts;
    for (const auto& child : c.children) {
        parts.push_back(child.kind == Condition::Kind::Leaf ? print_condition(child)
                                                            : "(" + print_condition(child) + ")");
    }
    return join(parts, c.kind == Condition::Kind::And ? " AND " : " OR ");
}

} // namespace

Query parse_query(std::string_view text) { return QueryParser(text).parse(); }

std::string print_query(const Query& q) {
    switch (q.kind) {
    case Query::Kind::AndByParameter:
        return "AND " + q.category + " WHERE " + print_leaf(q.selector);
    case Query::Kind::AndConditional:
        return "AND " + q.category + " WHERE " + print_condition(*q.condition);
    case Query::Kind::AndCrossCategory:
        return q.chain_from ? "AND CHAIN FROM " + *q.chain_from : "AND CHAIN";
    case Query::Kind::OrSameInstance:
    case Query::Kind::OrSameValue: {
        std::string out = "OR " + q.category + " SAME " +
                          (q.kind == Query::Kind::OrSameInstance ? "INSTANCE_ATTRIBUTE" : "ATTRIBUTE_VALUE");
        if (q.condition) out += " WHERE " + print_condition(*q.condition);
        return out;
    }
    case Query::Kind::Not:
        return "NOT " + print_query(q.operand.front());
    case Query::Kind::Arith:
        return "ARITH " + print_predicate(q.predicates[0]) +
               (q.arithmetic == Query::Arithmetic::Add ? " + " : " - ") + print_predicate(q.predicates[1]);
    case Query::Kind::Literal:
        return print_predicate(q.predicates.front());
    }
    return {};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool in_category(const std::string& category, const ContextPredicate& p) {
    return category == "*" || iequals(category, p.category);
}

QueryResult joined(PredicateExpr::Kind op, const std::vector<ContextPredicate>& preds) {
    if (preds.empty()) return std::nullopt;
    return PredicateExpr::join(op, preds);
}

std::string group_key(const std::string& category, const ContextPredicate& p) {
    return (category == "*" ? lower(p.category) : std::string()) + "\x1f" + lower(p.subject);
}

QueryResult and_conditional(const Query& q, const std::vector<ContextPredicate>& preds) {
    std::map<std::string, std::vector<ContextPredicate>> groups;
    for (const auto& p : preds) {
        if (in_category(q.category, p)) groups[group_key(q.category, p)].push_back(p);
    }
    std::set<std::string> satisfied;
    for (const auto& [key, group] : groups) {
        if (q.condition->holds(group)) satisfied.insert(key);
    }
    std::vector<ContextPredicate> out;
    for (const auto& p : preds) {
        if (in_category(q.category, p) && satisfied.count(group_key(q.category, p)) && q.condition->touches(p)) {
            out.push_back(p);
        }
    }
    return joined(PredicateExpr::Kind::And, out);
}

bool links(const ContextPredicate& a, const ContextPredicate& b) {
    if (iequals(a.category, b.category) || !a.value.is_text()) return false;
    return iequals(a.value.text(), b.subject) || iequals(a.value.text(), b.parameter);
}

QueryResult and_cross_category(const Query& q, const std::vector<ContextPredicate>& preds) {
    const std::size_t n = preds.size();
    std::vector<bool> keep(n, false);
    if (!q.chain_from) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && links(preds[i], preds[j])) keep[i] = keep[j] = true;
            }
        }
    } else {
        std::vector<std::size_t> frontier;
        for (std::size_t i = 0; i < n; ++i) {
            if (!iequals(preds[i].category, *q.chain_from)) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && links(preds[i], preds[j])) {
                    keep[i] = true;
                    frontier.push_back(i);
                    break;
                }
            }
        }
        while (!frontier.empty()) {
            std::size_t i = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (!keep[j] && links(preds[i], preds[j])) {
                    keep[j] = true;
                    frontier.push_back(j);
                }
            }
        }
    }
    std::vector<ContextPredicate> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) out.push_back(preds[i]);
    }
    return joined(PredicateExpr::Kind::And, out);
}

QueryResult or_grouped(const Query& q, const std::vector<ContextPredicate>& preds) {
    const bool same_instance = q.kind == Query::Kind::OrSameInstance;
    std::vector<ContextPredicate> candidates;
    for (const auto& p : preds) {
        if (!in_category(q.category, p)) continue;
        if (q.condition && !q.condition->holds({p})) continue;
        candidates.push_back(p);
    }
    auto key = [&](const ContextPredicate& p) {
        std::string k = q.category == "*" ? lower(p.category) + "\x1f" : std::string();
        k += lower(p.attribute) + "\x1f";
        k += same_instance ? lower(p.subject) : p.value.normalized();
        return k;
    };
    auto varying = [&](const ContextPredicate& p) { return same_instance ? p.value.normalized() : lower(p.subject); };
    std::map<std::string, std::set<std::string>> spread;
    for (const auto& p : candidates) spread[key(p)].insert(varying(p));
    std::vector<ContextPredicate> out;
    for (const auto& p : candidates) {
        if (spread[key(p)].size() >= 2) out.push_back(p);
    }
    return joined(PredicateExpr::Kind::Or, out);
}

const ContextPredicate& resolve(const PredicateRef& ref, const std::vector<ContextPredicate>& preds) {
    for (const auto& p : preds) {
        if (ref.resolves_to(p)) return p;
    }
    throw Error("missing-operand", "no predicate " + ref.category + "(" + ref.subject + ", " + ref.attribute +
                                       ") in the contextual situation");
}

QueryResult arith(const Query& q, const std::vector<ContextPredicate>& preds) {
    const ContextPredicate& a = resolve(q.predicates[0], preds);
    const ContextPredicate& b = resolve(q.predicates[1], preds);
    if (!a.value.is_number() || !b.value.is_number()) {
        throw Error("incompatible-operands", "arithmetic needs numeric values: " + a.render() + ", " + b.render());
    }
    if (!iequals(a.category, b.category) || !iequals(a.subject, b.subject)) {
        throw Error("incompatible-operands", "operands describe different contexts: " + a.render() + ", " +
                                                 b.render());
    }
    ContextPredicate r = a;
    r.value = q.arithmetic == Query::Arithmetic::Add ? a.value.number() + b.value.number()
                                                     : a.value.number() - b.value.number();
    return PredicateExpr::of(std::move(r));
}

QueryResult literal(const PredicateRef& ref, const std::vector<ContextPredicate>& preds) {
    if (ref.connector) {
        ContextPredicate p;
        p.category = ref.category;
        p.subject = ref.subject;
        p.parameter = ref.subject;
        p.attribute = ref.attribute;
        p.connector = *ref.connector;
        p.value = *ref.value;
        // Prefer the situation's copy so the parameter of an instance is known.
        for (const auto& c : preds) {
            if (ref.resolves_to(c)) return PredicateExpr::of(c);
        }
        return PredicateExpr::of(std::move(p));
    }
    for (const auto& c : preds) {
        if (ref.resolves_to(c)) return PredicateExpr::of(c);
    }
    return std::nullopt;
}

} // namespace

QueryResult evaluate(const Query& q, const ContextualSituation& cs) { return evaluate(q, predicates_of(cs)); }

QueryResult evaluate(const Query& q, const std::vector<ContextPredicate>& preds) {
    switch (q.kind) {
    case Query::Kind::AndByParameter: {
        std::vector<ContextPredicate> out;
        for (const auto& p : preds) {
            if (in_category(q.category, p) && q.selector.matches(p)) out.push_back(p);
        }
        return joined(PredicateExpr::Kind::And, out);
    }
    case Query::Kind::AndConditional:
        return and_conditional(q, preds);
    case Query::Kind::AndCrossCategory:
        return and_cross_category(q, preds);
    case Query::Kind::OrSameInstance:
    case Query::Kind::OrSameValue:
        return or_grouped(q, preds);
    case Query::Kind::Not: {
        QueryResult inner = evaluate(q.operand.front(), preds);
        if (!inner) return std::nullopt;
        return PredicateExpr::negate(std::move(*inner));
    }
    case Query::Kind::Arith:
        return arith(q, preds);
    case Query::Kind::Literal:
        return literal(q.predicates.front(), preds);
    }
    return std::nullopt;
}

} // namespace cbpmn
