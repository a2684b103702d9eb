#pragma once

// Doubly linked chain of upper-level activities between the start and end
// events, the rewrites that adapt it, and the adaptation rule table.

#include "cbpmn/composite.hpp"
#include "cbpmn/fragment_repo.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cbpmn {

struct ActivityNode {
    std::string id;
    std::string name;
    std::string sub_goal;
    std::string role;
    std::string medium;
    std::set<std::string> output_data;
    std::vector<std::string> tasks;
    /// Minutes of logical time the activity takes.
    LogicalTime duration = 0;
    /// 0 for declared activities, parent depth + 1 for fragment insertions.
    int depth = 0;
    /// Fragment the node was inserted from, empty for declared activities.
    std::string origin;
    std::optional<std::string> prev;
    std::optional<std::string> next;

    friend bool operator==(const ActivityNode&, const ActivityNode&) = default;
};

/// Items added to and removed from an activity's output data.
struct DataDelta {
    std::set<std::string> add;
    std::set<std::string> remove;

    bool empty() const { return add.empty() && remove.empty(); }
    /// Delta equivalent to applying `*this` and then `later`.
    DataDelta then(const DataDelta& later) const;
    std::string render() const;

    friend bool operator==(const DataDelta&, const DataDelta&) = default;
};

enum class InsertPosition { Before, After };
enum class ActivityAttribute { Role, Medium };

class ActivityChain {
public:
    ActivityChain() = default;
    /// Links the nodes in the given order; prev/next of the inputs are ignored.
    /// Throws Error("duplicate-activity").
    explicit ActivityChain(std::vector<ActivityNode> ordered);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const std::optional<std::string>& head() const { return head_; }
    const std::optional<std::string>& tail() const { return tail_; }
    bool contains(std::string_view id) const;
    /// Throws Error("unknown-activity").
    const ActivityNode& node(std::string_view id) const;
    std::vector<std::string> order() const;
    std::vector<ActivityNode> ordered_nodes() const;

    /// One NULL prev, one NULL next, mutual prev/next links, no cycles, every
    /// node reachable from the head.
    bool well_formed() const;

    /// Returns the ids given to the inserted activities.
    std::vector<std::string> add_fragment(std::string_view target, InsertPosition position,
                                          const ProcessFragment& fragment);
    std::vector<std::string> replace_activity(std::string_view target, const ProcessFragment& fragment);
    void replace_attribute(std::string_view target, ActivityAttribute which, const std::string& value);
    /// Throws Error("empty-chain") when `target` is the only activity.
    void bypass(std::string_view target);
    /// `window` lists 2 or 3 activities contiguous in chain order (2 only when
    /// the window touches the start or end event); `new_order` is a
    /// permutation of it. Throws Error("invalid-window").
    void reorder(const std::vector<std::string>& window, const std::vector<std::string>& new_order);
    void data_level_change(std::string_view target, const DataDelta& delta);

    friend bool operator==(const ActivityChain&, const ActivityChain&) = default;

private:
    ActivityNode& mut(std::string_view id);
    std::string fresh_id(const std::string& name) const;
    std::vector<ActivityNode> make_nodes(const ProcessFragment& fragment, int depth) const;
    void relink(const std::vector<std::string>& ids);
    void check() const;

    std::map<std::string, ActivityNode, std::less<>> nodes_;
    std::optional<std::string> head_;
    std::optional<std::string> tail_;
};

struct Action {
    enum class Kind {
        AddBefore,
        AddAfter,
        ReplaceByFragment,
        ReplaceRole,
        ReplaceMedium,
        Bypass,
        Reorder,
        DataLevelChange,
    };
    Kind kind = Kind::Bypass;
    /// Activity id, or "L1"/"L2"/"L3" relative to the firing activity L1 and
    /// its neighbours L2 (before) and L3 (after). Defaults to L1.
    std::optional<std::string> target;
    /// Fragment to insert; defaults to the fragment selected for the event.
    std::optional<std::string> fragment;
    /// New role or medium.
    std::string value;
    /// Reorder: new order of the L2, L1, L3 window written with those symbols.
    std::vector<std::string> permutation;
    DataDelta delta;

    bool needs_fragment() const;
    std::string render() const;
};

Action::Kind parse_action_kind(std::string_view text);
std::string_view to_string(Action::Kind k);

/// IF VAL == value_pattern AND Sel_Frag == fragment_pattern THEN actions.
struct AdaptationRule {
    std::string id;
    CompositeValue value_pattern;
    /// nullopt is the NULL pattern: matches only when no fragment was selected.
    std::optional<std::string> fragment_pattern;
    std::vector<Action> actions;
    /// Restricts the rule to one activity's contextual event.
    std::optional<std::string> activity;
};

/// Empty when the rule table is consistent. Codes: "empty-value-pattern",
/// "no-action", "fragment-required", "fragment-forbidden", "duplicate-rule".
std::vector<std::pair<std::string, std::string>> check_rules(const std::vector<AdaptationRule>& rules);

/// First rule in declaration order whose value pattern equals `value` and
/// whose fragment pattern matches `fragment`; nullptr is NoChange.
const AdaptationRule* select_rule(const std::vector<AdaptationRule>& rules, const CompositeValue& value,
                                  const ProcessFragment* fragment, std::string_view activity = {});

} // namespace cbpmn
