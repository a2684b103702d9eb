#include "cbpmn/process_chain.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>

namespace cbpmn {

DataDelta DataDelta::then(const DataDelta& later) const {
    DataDelta out;
    for (const auto& a : add) {
        if (!later.remove.count(a)) out.add.insert(a);
    }
    out.add.insert(later.add.begin(), later.add.end());
    for (const auto& r : remove) {
        if (!later.add.count(r)) out.remove.insert(r);
    }
    for (const auto& r : later.remove) {
        if (!later.add.count(r)) out.remove.insert(r);
    }
    return out;
}

std::string DataDelta::render() const {
    std::vector<std::string> parts;
    for (const auto& a : add) parts.push_back("+" + a);
    for (const auto& r : remove) parts.push_back("-" + r);
    return "{" + join(parts, ", ") + "}";
}

ActivityChain::ActivityChain(std::vector<ActivityNode> ordered) {
    std::vector<std::string> ids;
    for (auto& n : ordered) {
        ids.push_back(n.id);
        std::string id = n.id;
        if (!nodes_.emplace(id, std::move(n)).second) {
            throw Error("duplicate-activity", "activity '" + id + "' appears twice");
        }
    }
    relink(ids);
}

bool ActivityChain::contains(std::string_view id) const { return nodes_.find(id) != nodes_.end(); }

const ActivityNode& ActivityChain::node(std::string_view id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown-activity", "no activity '" + std::string(id) + "'");
    return it->second;
}

ActivityNode& ActivityChain::mut(std::string_view id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown-activity", "no activity '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> ActivityChain::order() const {
    std::vector<std::string> out;
    std::optional<std::string> cur = head_;
    while (cur && out.size() <= nodes_.size()) {
        out.push_back(*cur);
        cur = node(*cur).next;
    }
    return out;
}

std::vector<ActivityNode> ActivityChain::ordered_nodes() const {
    std::vector<ActivityNode> out;
    for (const auto& id : order()) out.push_back(node(id));
    return out;
}

bool ActivityChain::well_formed() const {
    if (nodes_.empty()) return !head_ && !tail_;
    if (!head_ || !tail_) return false;
    std::size_t no_prev = 0;
    std::size_t no_next = 0;
    for (const auto& [id, n] : nodes_) {
        if (!n.prev) ++no_prev;
        if (!n.next) ++no_next;
        if (n.next) {
            auto it = nodes_.find(*n.next);
            if (it == nodes_.end() || it->second.prev != id) return false;
        }
        if (n.prev) {
            auto it = nodes_.find(*n.prev);
            if (it == nodes_.end() || it->second.next != id) return false;
        }
    }
    if (no_prev != 1 || no_next != 1) return false;
    if (nodes_.find(*head_)->second.prev || nodes_.find(*tail_)->second.next) return false;
    auto ids = order();
    return ids.size() == nodes_.size() && ids.back() == *tail_;
}

void ActivityChain::check() const {
    if (!well_formed()) throw Error("malformed-chain", "activity chain lost its start/end links");
}

void ActivityChain::relink(const std::vector<std::string>& ids) {
    head_.reset();
    tail_.reset();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ActivityNode& n = mut(ids[i]);
        n.prev = i == 0 ? std::nullopt : std::optional<std::string>(ids[i - 1]);
        n.next = i + 1 == ids.size() ? std::nullopt : std::optional<std::string>(ids[i + 1]);
    }
    if (!ids.empty()) {
        head_ = ids.front();
        tail_ = ids.back();
    }
}

std::string ActivityChain::fresh_id(const std::string& name) const {
    if (!contains(name)) return name;
    for (int k = 2;; ++k) {
        std::string id = name + "#" + std::to_string(k);
        if (!contains(id)) return id;
    }
}

std::vector<ActivityNode> ActivityChain::make_nodes(const ProcessFragment& fragment, int depth) const {
    if (fragment.activities.empty()) throw Error("empty-fragment", "fragment '" + fragment.id + "' has no activities");
    std::vector<ActivityNode> out;
    std::set<std::string> taken;
    for (const auto& a : fragment.activities) {
        std::string id = fresh_id(a.name);
        for (int k = 2; taken.count(id); ++k) id = fresh_id(a.name + "#" + std::to_string(k));
        taken.insert(id);
        ActivityNode n;
        n.id = id;
        n.name = a.name;
        n.sub_goal = a.sub_goal;
        n.role = a.role;
        n.medium = a.medium;
        n.tasks = a.tasks;
        n.depth = depth;
        n.origin = fragment.id;
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<std::string> ActivityChain::add_fragment(std::string_view target, InsertPosition position,
                                                     const ProcessFragment& fragment) {
    const ActivityNode& t = node(target);
    auto fresh = make_nodes(fragment, t.depth + 1);
    std::vector<std::string> inserted;
    for (const auto& n : fresh) inserted.push_back(n.id);

    // Splice A1..Ak between the neighbours, then fix the four boundary links.
    std::optional<std::string> before = position == InsertPosition::Before ? t.prev : std::optional(t.id);
    std::optional<std::string> after = position == InsertPosition::Before ? std::optional(t.id) : t.next;
    for (auto& n : fresh) nodes_.emplace(n.id, std::move(n));
    for (std::size_t i = 0; i < inserted.size(); ++i) {
        ActivityNode& n = mut(inserted[i]);
        n.prev = i == 0 ? before : std::optional(inserted[i - 1]);
        n.next = i + 1 == inserted.size() ? after : std::optional(inserted[i + 1]);
    }
    if (before) {
        mut(*before).next = inserted.front();
    } else {
        head_ = inserted.front();
    }
    if (after) {
        mut(*after).prev = inserted.back();
    } else {
        tail_ = inserted.back();
    }
    check();
    return inserted;
}

std::vector<std::string> ActivityChain::replace_activity(std::string_view target, const ProcessFragment& fragment) {
    const ActivityNode old = node(target);
    auto fresh = make_nodes(fragment, old.depth + 1);
    std::vector<std::string> ids = order();
    auto pos = std::find(ids.begin(), ids.end(), old.id);
    std::vector<std::string> inserted;
    nodes_.erase(nodes_.find(old.id));
    for (auto& n : fresh) {
        if (n.id != n.name && !contains(n.name)) n.id = n.name;
        inserted.push_back(n.id);
        nodes_.emplace(n.id, std::move(n));
    }
    pos = ids.erase(pos);
    ids.insert(pos, inserted.begin(), inserted.end());
    relink(ids);
    check();
    return inserted;
}

void ActivityChain::replace_attribute(std::string_view target, ActivityAttribute which, const std::string& value) {
    ActivityNode& n = mut(target);
    (which == ActivityAttribute::Role ? n.role : n.medium) = value;
}

void ActivityChain::bypass(std::string_view target) {
    const ActivityNode t = node(target);
    if (nodes_.size() == 1) throw Error("empty-chain", "cannot bypass the only activity '" + t.id + "'");
    if (t.prev) {
        mut(*t.prev).next = t.next;
    } else {
        head_ = t.next;
    }
    if (t.next) {
        mut(*t.next).prev = t.prev;
    } else {
        tail_ = t.prev;
    }
    nodes_.erase(nodes_.find(t.id));
    check();
}

void ActivityChain::reorder(const std::vector<std::string>& window, const std::vector<std::string>& new_order) {
    auto invalid = [](const std::string& why) { throw Error("invalid-window", why); };
    if (window.size() < 2 || window.size() > 3) invalid("reorder window must hold 2 or 3 activities");
    for (const auto& id : window) node(id);
    for (std::size_t i = 0; i + 1 < window.size(); ++i) {
        if (node(window[i]).next != window[i + 1]) invalid("window activities are not contiguous");
    }
    if (window.size() == 2 && node(window.front()).prev && node(window.back()).next) {
        invalid("a 2-activity window must touch the start or end event");
    }
    if (!std::is_permutation(window.begin(), window.end(), new_order.begin(), new_order.end())) {
        invalid("new order is not a permutation of the window");
    }
    std::vector<std::string> ids = order();
    auto pos = std::find(ids.begin(), ids.end(), window.front());
    std::copy(new_order.begin(), new_order.end(), pos);
    relink(ids);
    check();
}

void ActivityChain::data_level_change(std::string_view target, const DataDelta& delta) {
    ActivityNode& n = mut(target);
    for (const auto& r : delta.remove) n.output_data.erase(r);
    n.output_data.insert(delta.add.begin(), delta.add.end());
}

namespace {

constexpr std::pair<Action::Kind, std::string_view> kActionNames[] = {
    {Action::Kind::AddBefore, "add_before"},
    {Action::Kind::AddAfter, "add_after"},
    {Action::Kind::ReplaceByFragment, "replace_by_fragment"},
    {Action::Kind::ReplaceRole, "replace_role"},
    {Action::Kind::ReplaceMedium, "replace_medium"},
    {Action::Kind::Bypass, "bypass"},
    {Action::Kind::Reorder, "reorder"},
    {Action::Kind::DataLevelChange, "data_level_change"},
};

} // namespace

Action::Kind parse_action_kind(std::string_view text) {
    for (const auto& [k, name] : kActionNames) {
        if (iequals(text, name)) return k;
    }
    throw Error("unknown-action", "unknown action '" + std::string(text) + "'");
}

std::string_view to_string(Action::Kind k) {
    for (const auto& [kind, name] : kActionNames) {
        if (kind == k) return name;
    }
    return "?";
}

bool Action::needs_fragment() const {
    return kind == Kind::AddBefore || kind == Kind::AddAfter || kind == Kind::ReplaceByFragment;
}

std::string Action::render() const {
    std::string out(to_string(kind));
    std::vector<std::string> args;
    if (fragment) args.push_back(*fragment);
    switch (kind) {
    case Kind::ReplaceRole:
    case Kind::ReplaceMedium:
        args.push_back(value);
        break;
    case Kind::Reorder:
        args.push_back(join(permutation, "->"));
        break;
    case Kind::DataLevelChange:
        args.push_back(delta.render());
        break;
    default:
        break;
    }
    if (target) args.push_back("@" + *target);
    return out + "(" + join(args, ", ") + ")";
}

std::vector<std::pair<std::string, std::string>> check_rules(const std::vector<AdaptationRule>& rules) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> ids;
    for (const auto& r : rules) {
        if (!ids.insert(r.id).second) out.emplace_back("duplicate-rule", "rule '" + r.id + "' declared twice");
        if (r.value_pattern.empty()) {
            out.emplace_back("empty-value-pattern", "rule '" + r.id + "' has an empty VAL field");
        }
        if (r.actions.empty()) out.emplace_back("no-action", "rule '" + r.id + "' has no action");
        if (r.actions.size() == 1) {
            const Action& a = r.actions.front();
            if (a.needs_fragment() && !r.fragment_pattern) {
                out.emplace_back("fragment-required", "rule '" + r.id + "': " + std::string(to_string(a.kind)) +
                                                          " needs a selected fragment");
            }
            if (!a.needs_fragment() && r.fragment_pattern) {
                out.emplace_back("fragment-forbidden", "rule '" + r.id + "': " + std::string(to_string(a.kind)) +
                                                           " applies only when no fragment is selected");
            }
        } else {
            for (const auto& a : r.actions) {
                if (a.needs_fragment() && !a.fragment && !r.fragment_pattern) {
                    out.emplace_back("fragment-required", "rule '" + r.id + "': " +
                                                              std::string(to_string(a.kind)) + " names no fragment");
                }
            }
        }
        for (const auto& a : r.actions) {
            if (a.kind == Action::Kind::Reorder) {
                std::vector<std::string> sorted = a.permutation;
                std::sort(sorted.begin(), sorted.end());
                if (sorted != std::vector<std::string>{"L1", "L2", "L3"}) {
                    out.emplace_back("invalid-permutation",
                                     "rule '" + r.id + "': reorder needs a permutation of L2, L1, L3");
                }
            }
        }
    }
    return out;
}

const AdaptationRule* select_rule(const std::vector<AdaptationRule>& rules, const CompositeValue& value,
                                  const ProcessFragment* fragment, std::string_view activity) {
    for (const auto& r : rules) {
        if (r.activity && !activity.empty() && *r.activity != activity) continue;
        if (!(r.value_pattern == value)) continue;
        if (r.fragment_pattern.has_value() != (fragment != nullptr)) continue;
        if (fragment && *r.fragment_pattern != fragment->id) continue;
        return &r;
    }
    return nullptr;
}

} // namespace cbpmn
