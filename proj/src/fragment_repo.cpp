#include "cbpmn/fragment_repo.hpp"

#include "cbpmn/error.hpp"

#include <set>

namespace cbpmn {

FragmentRepository::FragmentRepository(std::vector<SubGoalSection> sections, std::vector<ProcessFragment> fragments)
    : sections_(std::move(sections)), fragments_(std::move(fragments)) {
    for (std::size_t i = 0; i < fragments_.size(); ++i) {
        const auto& f = fragments_[i];
        if (f.activities.empty()) throw Error("empty-fragment", "fragment '" + f.id + "' has no activities");
        if (!fragment_index_.emplace(f.id, i).second) {
            throw Error("duplicate-fragment", "fragment '" + f.id + "' defined twice");
        }
    }
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const auto& s = sections_[i];
        if (!section_index_.emplace(s.id, i).second) {
            throw Error("duplicate-subgoal", "sub-goal '" + s.id + "' listed twice");
        }
        std::set<std::string> seen;
        for (const auto& e : s.entries) {
            if (!seen.insert(e.pattern.normalized_key()).second) {
                throw Error("ambiguous-entry",
                            "sub-goal '" + s.id + "' lists " + e.pattern.render() + " more than once");
            }
            if (!fragment_index_.count(e.fragment_id)) {
                throw Error("unknown-fragment", "sub-goal '" + s.id + "' refers to undefined fragment '" +
                                                    e.fragment_id + "'");
            }
        }
    }
}

std::size_t FragmentRepository::index_of(std::string_view sub_goal) const {
    auto it = section_index_.find(std::string(sub_goal));
    return it == section_index_.end() ? 0 : it->second + 1;
}

const SubGoalSection* FragmentRepository::section(std::string_view sub_goal) const {
    std::size_t i = index_of(sub_goal);
    return i == 0 ? nullptr : &sections_[i - 1];
}

const ProcessFragment* FragmentRepository::find_fragment(std::string_view id) const {
    auto it = fragment_index_.find(std::string(id));
    return it == fragment_index_.end() ? nullptr : &fragments_[it->second];
}

ThrowResult FragmentRepository::throw_activity(std::string_view sub_goal, const CompositeValue& value) const {
    const SubGoalSection* s = section(sub_goal);
    if (!s) throw Error("unknown-subgoal", "no repository section for sub-goal '" + std::string(sub_goal) + "'");
    ThrowResult r;
    r.value = value;
    for (const auto& e : s->entries) {
        ++r.comparisons;
        if (e.pattern == value) {
            r.fragment = find_fragment(e.fragment_id);
            break;
        }
    }
    return r;
}

} // namespace cbpmn
