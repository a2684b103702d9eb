#pragma once

// Colored token net with typed places, constant/variable arc inscriptions,
// the token game, breadth-first state-space exploration and the standard
// behavioural checks over the explored space.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cbpmn {

struct ColorSet {
    std::string name;
    std::vector<std::string> values;

    bool contains(std::string_view c) const;
};

struct ArcExpr {
    enum class Kind { Constant, Variable, VariableIfIn };
    Kind kind = Kind::Constant;
    /// Color for Constant, variable name otherwise.
    std::string text;
    /// VariableIfIn: the arc carries the token only for these colors.
    std::set<std::string> filter;

    static ArcExpr constant(std::string color);
    static ArcExpr variable(std::string name);
    static ArcExpr variable_if_in(std::string name, std::set<std::string> colors);
    std::string render() const;
};

struct Place {
    std::string name;
    std::size_t color_set = 0;
    int layer = 2;
};

struct Transition {
    std::string name;
    int layer = 2;
    /// Kept for completeness; the translator never sets one.
    std::string guard;
};

struct NetArc {
    std::size_t place = 0;
    std::size_t transition = 0;
    bool input = true;
    ArcExpr expr;
};

/// Substitution transition expanded into the listed task transitions.
struct Substitution {
    std::string name;
    std::vector<std::size_t> transitions;
};

using Binding = std::map<std::string, std::string>;

struct BindingElement {
    std::size_t transition = 0;
    Binding binding;

    std::string render() const;
    friend bool operator==(const BindingElement&, const BindingElement&) = default;
};

/// Token multisets per place, indexed like Net::places().
class Marking {
public:
    Marking() = default;
    explicit Marking(std::size_t places) : tokens_(places) {}

    void add(std::size_t place, const std::string& color, std::uint32_t n = 1);
    /// Returns false, leaving the marking untouched, when too few tokens are present.
    bool remove(std::size_t place, const std::string& color, std::uint32_t n = 1);
    std::uint32_t count(std::size_t place, const std::string& color) const;
    std::uint32_t total(std::size_t place) const;
    std::uint32_t total() const;
    const std::map<std::string, std::uint32_t>& at(std::size_t place) const { return tokens_.at(place); }
    std::size_t places() const { return tokens_.size(); }

    /// Canonical form: "place=color*n,..." over nonempty places in index order.
    std::string key() const;

    friend bool operator==(const Marking&, const Marking&) = default;

private:
    std::vector<std::map<std::string, std::uint32_t>> tokens_;
};

class Net {
public:
    std::size_t add_color_set(std::string name, std::vector<std::string> values);
    std::size_t add_place(std::string name, std::string_view color_set, int layer = 2);
    std::size_t add_transition(std::string name, int layer = 2);
    void add_input(std::size_t place, std::size_t transition, ArcExpr expr);
    void add_output(std::size_t transition, std::size_t place, ArcExpr expr);
    void add_substitution(std::string name, std::vector<std::size_t> transitions);

    const std::vector<ColorSet>& color_sets() const { return color_sets_; }
    const std::vector<Place>& places() const { return places_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<NetArc>& arcs() const { return arcs_; }
    const std::vector<Substitution>& substitutions() const { return substitutions_; }

    std::optional<std::size_t> find_place(std::string_view name) const;
    std::optional<std::size_t> find_transition(std::string_view name) const;
    /// Throws Error("unknown-place").
    std::size_t place(std::string_view name) const;
    std::size_t transition(std::string_view name) const;

    Marking empty_marking() const { return Marking(places_.size()); }
    Marking initial;

    /// Structural problems: name clashes, transitions without input or output
    /// arcs, arcs with colors outside the place's color set.
    std::vector<std::string> structural_problems() const;

    /// Every enabled binding element, ordered by transition then binding.
    std::vector<BindingElement> enabled(const Marking& m) const;
    /// Throws Error("not-enabled").
    Marking fire(const Marking& m, const BindingElement& b) const;
    /// Throws Error("ill-typed-marking") when a token lies outside its place's color set.
    void check_types(const Marking& m) const;

private:
    const std::vector<std::size_t>& inputs_of(std::size_t t) const;
    const std::vector<std::size_t>& outputs_of(std::size_t t) const;

    std::vector<ColorSet> color_sets_;
    std::vector<Place> places_;
    std::vector<Transition> transitions_;
    std::vector<NetArc> arcs_;
    std::vector<Substitution> substitutions_;
    std::vector<std::vector<std::size_t>> in_index_;
    std::vector<std::vector<std::size_t>> out_index_;
};

struct SpaceArc {
    std::size_t from = 0;
    std::size_t to = 0;
    BindingElement element;
};

struct StateSpace {
    std::vector<Marking> markings;
    std::vector<SpaceArc> arcs;
    /// Arc through which each marking was first discovered; none for the initial one.
    std::vector<std::optional<std::size_t>> parent;
    std::vector<std::vector<std::size_t>> successors;
    bool partial = false;

    std::optional<std::size_t> find(const Marking& m) const;
    std::map<std::string, std::size_t> index;
};

/// Breadth-first exploration up to `limit` markings. With `workers` > 1 each
/// level is expanded in parallel and merged in frontier order, so the result
/// is identical to the single-worker run.
StateSpace explore(const Net& net, const Marking& m0, std::size_t limit, unsigned workers = 1);

struct BoundsReport {
    std::vector<std::uint32_t> max_tokens;
    std::uint32_t bound() const;
};

struct LivenessReport {
    std::vector<std::string> dead_transitions;
    std::vector<std::size_t> dead_markings;
};

struct ReachResult {
    bool reachable = false;
    std::size_t marking = 0;
    /// Space arcs from the initial marking, shortest first-found path.
    std::vector<std::size_t> witness;
};

BoundsReport check_bounded(const StateSpace& space, std::size_t places);
/// Throws Error("partial-space").
LivenessReport check_liveness(const Net& net, const StateSpace& space);
ReachResult check_reachable(const StateSpace& space, const std::function<bool(const Marking&)>& goal);
/// Throws Error("partial-space").
bool check_home(const StateSpace& space, std::size_t marking);
/// Occurrences of each transition over all arcs of the space.
std::vector<std::size_t> occurrence_counts(const Net& net, const StateSpace& space);

/// Edge list: "# cbpmn-state-space v1", then "nodes N arcs M partial P",
/// one "n <id> <marking>" line per marking and one "a <from> <to> <element>"
/// line per arc.
std::string write_edge_list(const Net& net, const StateSpace& space);

} // namespace cbpmn
