#pragma once

// Process-fragment repository: sub-goal sections, each mapping composite
// context values to the fragment that serves the sub-goal under them.

#include "cbpmn/composite.hpp"

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbpmn {

struct FragmentActivity {
    std::string name;
    std::string sub_goal;
    std::string role;
    std::string medium;
    /// Optional task list used when the activity is expanded in the net.
    std::vector<std::string> tasks;

    friend bool operator==(const FragmentActivity&, const FragmentActivity&) = default;
};

struct ProcessFragment {
    std::string id;
    std::vector<FragmentActivity> activities;

    friend bool operator==(const ProcessFragment&, const ProcessFragment&) = default;
};

struct RepositoryEntry {
    CompositeValue pattern;
    std::string fragment_id;
};

struct SubGoalSection {
    std::string id;
    std::vector<RepositoryEntry> entries;
};

struct ThrowResult {
    CompositeValue value;
    /// nullptr when no fragment serves the value.
    const ProcessFragment* fragment = nullptr;
    /// Pattern comparisons made; never more than the section's entry count.
    std::size_t comparisons = 0;
};

class FragmentRepository {
public:
    FragmentRepository() = default;
    /// Throws Error with code "ambiguous-entry", "unknown-fragment",
    /// "duplicate-subgoal", "duplicate-fragment" or "empty-fragment".
    FragmentRepository(std::vector<SubGoalSection> sections, std::vector<ProcessFragment> fragments);

    const std::vector<SubGoalSection>& sections() const { return sections_; }
    const std::vector<ProcessFragment>& fragments() const { return fragments_; }

    /// 1-based position of the sub-goal, 0 when absent.
    std::size_t index_of(std::string_view sub_goal) const;
    const SubGoalSection* section(std::string_view sub_goal) const;
    const ProcessFragment* find_fragment(std::string_view id) const;
    bool empty() const { return sections_.empty() && fragments_.empty(); }

    /// Throws Error("unknown-subgoal").
    ThrowResult throw_activity(std::string_view sub_goal, const CompositeValue& value) const;

private:
    std::vector<SubGoalSection> sections_;
    std::vector<ProcessFragment> fragments_;
    std::unordered_map<std::string, std::size_t> section_index_;
    std::unordered_map<std::string, std::size_t> fragment_index_;
};

} // namespace cbpmn
