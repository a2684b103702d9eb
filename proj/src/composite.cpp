#include "cbpmn/composite.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>

namespace cbpmn {

namespace {

// Hand-rolled recursive descent over the tiny boolean grammar shared by
// composition rules and composite values:
//   expr  := term { ("AND" | "OR") term }      (one operator per group)
//   term  := "(" body ")" | "[" expr "]" | "{" expr "}" | word
class BoolParser {
public:
    explicit BoolParser(std::string_view text) : text_(text) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::optional<BoolOp> keyword() {
        skip_space();
        auto rest = text_.substr(pos_);
        auto is_kw = [&](std::string_view kw) {
            return rest.size() >= kw.size() && iequals(rest.substr(0, kw.size()), kw) &&
                   (rest.size() == kw.size() || !std::isalnum(static_cast<unsigned char>(rest[kw.size()])));
        };
        if (is_kw("AND")) {
            pos_ += 3;
            return BoolOp::And;
        }
        if (is_kw("OR")) {
            pos_ += 2;
            return BoolOp::Or;
        }
        if (rest.substr(0, 2) == "&&") {
            pos_ += 2;
            return BoolOp::And;
        }
        if (rest.substr(0, 2) == "||") {
            pos_ += 2;
            return BoolOp::Or;
        }
        return std::nullopt;
    }

    std::string raw_until(std::string_view stops) {
        skip_space();
        std::size_t start = pos_;
        int depth = 0;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (depth == 0 && stops.find(c) != std::string_view::npos) break;
            if (c == '(') ++depth;
            if (c == ')') --depth;
            ++pos_;
        }
        return trim(text_.substr(start, pos_ - start));
    }

    void expect(char c) {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error("parse-error", what + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
    }

    std::size_t pos() const { return pos_; }
    std::string_view text() const { return text_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

template <typename Node, typename LeafFn>
Node parse_expr(BoolParser& p, LeafFn&& leaf, typename Node::Kind and_kind, typename Node::Kind or_kind,
                char close);

template <typename Node, typename LeafFn>
Node parse_term(BoolParser& p, LeafFn&& leaf, typename Node::Kind and_kind, typename Node::Kind or_kind) {
    char c = p.peek();
    if (c == '[' || c == '{') {
        p.expect(c);
        char close = c == '[' ? ']' : '}';
        Node inner = parse_expr<Node>(p, leaf, and_kind, or_kind, close);
        p.expect(close);
        return inner;
    }
    return leaf(p);
}

template <typename Node, typename LeafFn>
Node parse_expr(BoolParser& p, LeafFn&& leaf, typename Node::Kind and_kind, typename Node::Kind or_kind,
                char close) {
    std::vector<Node> items;
    items.push_back(parse_term<Node>(p, leaf, and_kind, or_kind));
    std::optional<BoolOp> op;
    while (!p.at_end() && p.peek() != close) {
        auto next = p.keyword();
        if (!next) {
            p.fail("expected AND or OR");
        }
        if (op && *op != *next) {
            p.fail("mixed AND/OR without grouping");
        }
        op = next;
        items.push_back(parse_term<Node>(p, leaf, and_kind, or_kind));
    }
    if (items.size() == 1) {
        return std::move(items.front());
    }
    Node group;
    group.kind = (op == BoolOp::Or) ? or_kind : and_kind;
    group.children = std::move(items);
    return group;
}

void collect_attributes(const CompositionExpr& e, std::vector<std::string>& out) {
    if (e.kind == CompositionExpr::Kind::Attribute) {
        if (std::find(out.begin(), out.end(), e.attribute) == out.end()) out.push_back(e.attribute);
        return;
    }
    for (const auto& c : e.children) collect_attributes(c, out);
}

std::string render_composition(const CompositionExpr& e, bool nested) {
    if (e.kind == CompositionExpr::Kind::Attribute) return e.attribute;
    std::vector<std::string> parts;
    for (const auto& c : e.children) parts.push_back(render_composition(c, true));
    std::string body = join(parts, e.kind == CompositionExpr::Kind::And ? " AND " : " OR ");
    return nested && e.children.size() > 1 ? "[" + body + "]" : body;
}

std::string render_term(const CompositeTerm& t, bool nested) {
    if (t.kind == CompositeTerm::Kind::Pair) {
        return "(" + t.attribute + ", " + t.value.to_string() + ")";
    }
    std::vector<std::string> parts;
    for (const auto& c : t.children) parts.push_back(render_term(c, true));
    std::string body = join(parts, t.kind == CompositeTerm::Kind::And ? " AND " : " OR ");
    return nested && t.children.size() > 1 ? "[" + body + "]" : body;
}

// Flattens same-operator nesting, drops singleton groups, sorts children.
std::string normalize_term(const CompositeTerm& t) {
    if (t.kind == CompositeTerm::Kind::Pair) {
        return "(" + lower(t.attribute) + "," + t.value.normalized() + ")";
    }
    std::vector<std::string> parts;
    auto gather = [&](auto&& self, const CompositeTerm& node) -> void {
        for (const auto& c : node.children) {
            if (c.kind == node.kind && c.kind != CompositeTerm::Kind::Pair) {
                self(self, c);
            } else {
                parts.push_back(normalize_term(c));
            }
        }
    };
    gather(gather, t);
    if (parts.size() == 1) return parts.front();
    std::sort(parts.begin(), parts.end());
    return (t.kind == CompositeTerm::Kind::And ? "AND{" : "OR{") + join(parts, ";") + "}";
}

void collect_pairs(const CompositeTerm& t, std::vector<std::pair<std::string, Value>>& out) {
    if (t.kind == CompositeTerm::Kind::Pair) {
        out.emplace_back(t.attribute, t.value);
        return;
    }
    for (const auto& c : t.children) collect_pairs(c, out);
}

} // namespace

CompositionExpr CompositionExpr::leaf(std::string attribute) {
    CompositionExpr e;
    e.kind = Kind::Attribute;
    e.attribute = std::move(attribute);
    return e;
}

CompositionExpr CompositionExpr::conjunction(const std::vector<std::string>& attributes) {
    if (attributes.size() == 1) return leaf(attributes.front());
    CompositionExpr e;
    e.kind = Kind::And;
    for (const auto& a : attributes) e.children.push_back(leaf(a));
    return e;
}

CompositionExpr CompositionExpr::parse(std::string_view text) {
    BoolParser p(text);
    if (p.at_end()) p.fail("empty composition");
    auto leaf_fn = [](BoolParser& bp) {
        if (bp.peek() == '(') {
            bp.expect('(');
            std::string name = bp.raw_until(")");
            bp.expect(')');
            if (name.empty()) bp.fail("empty attribute");
            return CompositionExpr::leaf(name);
        }
        std::string name = bp.raw_until(" \t\n[]{}");
        if (name.empty()) bp.fail("expected attribute");
        return CompositionExpr::leaf(name);
    };
    CompositionExpr e = parse_expr<CompositionExpr>(p, leaf_fn, Kind::And, Kind::Or, '\0');
    if (!p.at_end()) p.fail("trailing input");
    return e;
}

std::vector<std::string> CompositionExpr::attributes() const {
    std::vector<std::string> out;
    collect_attributes(*this, out);
    return out;
}

std::string CompositionExpr::render() const { return render_composition(*this, false); }

CompositeValue::CompositeValue(CompositeTerm term, LogicalTime max_delay)
    : term_(std::move(term)), max_delay_(max_delay), key_(normalize_term(term_)) {
    if (max_delay_ < 0) throw Error("invalid-delay", "negative delay");
}

CompositeValue CompositeValue::pair(std::string attribute, Value value, LogicalTime delay) {
    CompositeTerm t;
    t.kind = CompositeTerm::Kind::Pair;
    t.attribute = std::move(attribute);
    t.value = std::move(value);
    return CompositeValue(std::move(t), delay);
}

CompositeValue CompositeValue::parse(std::string_view text) {
    BoolParser p(text);
    if (p.at_end()) p.fail("empty composite value");
    auto leaf_fn = [](BoolParser& bp) {
        bp.expect('(');
        std::string attribute = bp.raw_until(",)");
        bp.expect(',');
        std::string value = bp.raw_until(")");
        bp.expect(')');
        if (attribute.empty()) bp.fail("empty attribute");
        CompositeTerm t;
        t.kind = CompositeTerm::Kind::Pair;
        t.attribute = attribute;
        t.value = Value::parse(value);
        return t;
    };
    CompositeTerm t = parse_expr<CompositeTerm>(p, leaf_fn, CompositeTerm::Kind::And, CompositeTerm::Kind::Or, '\0');
    if (!p.at_end()) p.fail("trailing input");
    return CompositeValue(std::move(t));
}

bool CompositeValue::empty() const {
    return term_.kind != CompositeTerm::Kind::Pair && term_.children.empty();
}

std::vector<std::pair<std::string, Value>> CompositeValue::pairs() const {
    std::vector<std::pair<std::string, Value>> out;
    collect_pairs(term_, out);
    return out;
}

std::string CompositeValue::render() const {
    if (empty()) return "[]";
    return "[" + render_term(term_, false) + "]";
}

} // namespace cbpmn
