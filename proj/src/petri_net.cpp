#include "cbpmn/petri_net.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <thread>

namespace cbpmn {

bool ColorSet::contains(std::string_view c) const {
    return std::find(values.begin(), values.end(), c) != values.end();
}

ArcExpr ArcExpr::constant(std::string color) { return {Kind::Constant, std::move(color), {}}; }
ArcExpr ArcExpr::variable(std::string name) { return {Kind::Variable, std::move(name), {}}; }
ArcExpr ArcExpr::variable_if_in(std::string name, std::set<std::string> colors) {
    return {Kind::VariableIfIn, std::move(name), std::move(colors)};
}

std::string ArcExpr::render() const {
    switch (kind) {
    case Kind::Constant:
        return "1`" + text;
    case Kind::Variable:
        return "1`" + text;
    case Kind::VariableIfIn:
        return "if " + text + " in {" + join(std::vector<std::string>(filter.begin(), filter.end()), ",") +
               "} then 1`" + text + " else empty";
    }
    return {};
}

std::string BindingElement::render() const {
    std::vector<std::string> parts;
    for (const auto& [k, v] : binding) parts.push_back(k + "=" + v);
    return std::to_string(transition) + "<" + join(parts, ",") + ">";
}

void Marking::add(std::size_t place, const std::string& color, std::uint32_t n) { tokens_.at(place)[color] += n; }

bool Marking::remove(std::size_t place, const std::string& color, std::uint32_t n) {
    auto& ms = tokens_.at(place);
    auto it = ms.find(color);
    if (it == ms.end() || it->second < n) return false;
    it->second -= n;
    if (it->second == 0) ms.erase(it);
    return true;
}

std::uint32_t Marking::count(std::size_t place, const std::string& color) const {
    const auto& ms = tokens_.at(place);
    auto it = ms.find(color);
    return it == ms.end() ? 0 : it->second;
}

std::uint32_t Marking::total(std::size_t place) const {
    std::uint32_t n = 0;
    for (const auto& [c, k] : tokens_.at(place)) n += k;
    return n;
}

std::uint32_t Marking::total() const {
    std::uint32_t n = 0;
    for (std::size_t p = 0; p < tokens_.size(); ++p) n += total(p);
    return n;
}

std::string Marking::key() const {
    std::string out;
    for (std::size_t p = 0; p < tokens_.size(); ++p) {
        if (tokens_[p].empty()) continue;
        if (!out.empty()) out += ';';
        out += std::to_string(p) + "=";
        bool first = true;
        for (const auto& [c, n] : tokens_[p]) {
            if (!first) out += ',';
            first = false;
            out += c + "*" + std::to_string(n);
        }
    }
    return out;
}

std::size_t Net::add_color_set(std::string name, std::vector<std::string> values) {
    color_sets_.push_back({std::move(name), std::move(values)});
    return color_sets_.size() - 1;
}

std::size_t Net::add_place(std::string name, std::string_view color_set, int layer) {
    auto it = std::find_if(color_sets_.begin(), color_sets_.end(),
                           [&](const ColorSet& c) { return c.name == color_set; });
    if (it == color_sets_.end()) throw Error("unknown-color-set", "no color set '" + std::string(color_set) + "'");
    places_.push_back({std::move(name), static_cast<std::size_t>(it - color_sets_.begin()), layer});
    initial = Marking(places_.size());
    return places_.size() - 1;
}

std::size_t Net::add_transition(std::string name, int layer) {
    transitions_.push_back({std::move(name), layer, {}});
    in_index_.emplace_back();
    out_index_.emplace_back();
    return transitions_.size() - 1;
}

void Net::add_input(std::size_t place, std::size_t transition, ArcExpr expr) {
    in_index_.at(transition).push_back(arcs_.size());
    arcs_.push_back({place, transition, true, std::move(expr)});
}

void Net::add_output(std::size_t transition, std::size_t place, ArcExpr expr) {
    out_index_.at(transition).push_back(arcs_.size());
    arcs_.push_back({place, transition, false, std::move(expr)});
}

void Net::add_substitution(std::string name, std::vector<std::size_t> transitions) {
    substitutions_.push_back({std::move(name), std::move(transitions)});
}

std::optional<std::size_t> Net::find_place(std::string_view name) const {
    for (std::size_t i = 0; i < places_.size(); ++i) {
        if (places_[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Net::find_transition(std::string_view name) const {
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        if (transitions_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t Net::place(std::string_view name) const {
    auto p = find_place(name);
    if (!p) throw Error("unknown-place", "no place '" + std::string(name) + "'");
    return *p;
}

std::size_t Net::transition(std::string_view name) const {
    auto t = find_transition(name);
    if (!t) throw Error("unknown-transition", "no transition '" + std::string(name) + "'");
    return *t;
}

const std::vector<std::size_t>& Net::inputs_of(std::size_t t) const {
    return in_index_.at(t);
}

const std::vector<std::size_t>& Net::outputs_of(std::size_t t) const {
    return out_index_.at(t);
}

std::vector<std::string> Net::structural_problems() const {
    std::vector<std::string> out;
    std::set<std::string> names;
    for (const auto& p : places_) {
        if (!names.insert(p.name).second) out.push_back("duplicate node name " + p.name);
    }
    for (const auto& t : transitions_) {
        if (!names.insert(t.name).second) out.push_back("duplicate node name " + t.name);
    }
    for (std::size_t t = 0; t < transitions_.size(); ++t) {
        if (inputs_of(t).empty()) out.push_back("transition " + transitions_[t].name + " has no input arc");
        if (outputs_of(t).empty()) out.push_back("transition " + transitions_[t].name + " has no output arc");
    }
    for (const auto& a : arcs_) {
        const ColorSet& cs = color_sets_[places_[a.place].color_set];
        if (a.expr.kind == ArcExpr::Kind::Constant && !cs.contains(a.expr.text)) {
            out.push_back("arc constant " + a.expr.text + " is not in color set " + cs.name + " of " +
                          places_[a.place].name);
        }
    }
    return out;
}

void Net::check_types(const Marking& m) const {
    for (std::size_t p = 0; p < places_.size(); ++p) {
        const ColorSet& cs = color_sets_[places_[p].color_set];
        for (const auto& [c, n] : m.at(p)) {
            if (!cs.contains(c)) {
                throw Error("ill-typed-marking", "token " + c + " in " + places_[p].name + " is not of " + cs.name);
            }
        }
    }
}

namespace {

const std::string* color_for(const ArcExpr& e, const Binding& b) {
    if (e.kind == ArcExpr::Kind::Constant) return &e.text;
    auto it = b.find(e.text);
    return it == b.end() ? nullptr : &it->second;
}

} // namespace

std::vector<BindingElement> Net::enabled(const Marking& m) const {
    std::vector<BindingElement> out;
    for (std::size_t t = 0; t < transitions_.size(); ++t) {
        const auto& ins = inputs_of(t);
        if (ins.empty()) continue;
        if (std::any_of(ins.begin(), ins.end(), [&](std::size_t i) { return m.at(arcs_[i].place).empty(); })) {
            continue;
        }
        std::set<Binding> found;
        Marking work = m;
        Binding binding;
        auto search = [&](auto&& self, std::size_t i) -> void {
            if (i == ins.size()) {
                found.insert(binding);
                return;
            }
            const NetArc& a = arcs_[ins[i]];
            if (const std::string* c = color_for(a.expr, binding)) {
                if (a.expr.kind == ArcExpr::Kind::VariableIfIn && !a.expr.filter.count(*c)) return;
                if (!work.remove(a.place, *c)) return;
                self(self, i + 1);
                work.add(a.place, *c);
                return;
            }
            std::vector<std::string> colors;
            for (const auto& [c, n] : work.at(a.place)) colors.push_back(c);
            for (const auto& c : colors) {
                if (a.expr.kind == ArcExpr::Kind::VariableIfIn && !a.expr.filter.count(c)) continue;
                binding[a.expr.text] = c;
                work.remove(a.place, c);
                self(self, i + 1);
                work.add(a.place, c);
                binding.erase(a.expr.text);
            }
        };
        search(search, 0);
        for (const auto& b : found) out.push_back({t, b});
    }
    return out;
}

Marking Net::fire(const Marking& m, const BindingElement& b) const {
    if (b.transition >= transitions_.size()) throw Error("not-enabled", "no such transition");
    Marking next = m;
    const std::string& name = transitions_[b.transition].name;
    for (std::size_t i : inputs_of(b.transition)) {
        const NetArc& a = arcs_[i];
        const std::string* c = color_for(a.expr, b.binding);
        if (!c) throw Error("not-enabled", name + ": variable " + a.expr.text + " is unbound");
        if (a.expr.kind == ArcExpr::Kind::VariableIfIn && !a.expr.filter.count(*c)) {
            throw Error("not-enabled", name + ": " + *c + " fails the arc filter");
        }
        if (!next.remove(a.place, *c)) {
            throw Error("not-enabled", name + " lacks token " + *c + " in " + places_[a.place].name);
        }
    }
    for (std::size_t i : outputs_of(b.transition)) {
        const NetArc& a = arcs_[i];
        const std::string* c = color_for(a.expr, b.binding);
        if (!c) throw Error("not-enabled", name + ": output variable " + a.expr.text + " is unbound");
        if (a.expr.kind == ArcExpr::Kind::VariableIfIn && !a.expr.filter.count(*c)) continue;
        next.add(a.place, *c);
    }
    return next;
}

std::optional<std::size_t> StateSpace::find(const Marking& m) const {
    auto it = index.find(m.key());
    if (it == index.end()) return std::nullopt;
    return it->second;
}

StateSpace explore(const Net& net, const Marking& m0, std::size_t limit, unsigned workers) {
    if (limit == 0) throw Error("invalid-limit", "exploration limit must be positive");
    StateSpace s;
    s.markings.push_back(m0);
    s.parent.push_back(std::nullopt);
    s.successors.emplace_back();
    s.index.emplace(m0.key(), 0);

    using Successors = std::vector<std::pair<BindingElement, Marking>>;
    auto expand = [&](std::size_t id) {
        Successors out;
        const Marking& m = s.markings[id];
        for (auto& b : net.enabled(m)) {
            Marking next = net.fire(m, b);
            out.emplace_back(std::move(b), std::move(next));
        }
        return out;
    };

    std::vector<std::size_t> frontier{0};
    while (!frontier.empty()) {
        std::vector<Successors> results(frontier.size());
        unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(frontier.size())));
        if (n == 1) {
            for (std::size_t i = 0; i < frontier.size(); ++i) results[i] = expand(frontier[i]);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < n; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < frontier.size(); i += n) results[i] = expand(frontier[i]);
                });
            }
            for (auto& t : pool) t.join();
        }
        std::vector<std::size_t> next_frontier;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            for (auto& [b, m] : results[i]) {
                std::string key = m.key();
                auto it = s.index.find(key);
                std::size_t to;
                if (it != s.index.end()) {
                    to = it->second;
                } else {
                    if (s.markings.size() >= limit) {
                        s.partial = true;
                        continue;
                    }
                    to = s.markings.size();
                    s.index.emplace(std::move(key), to);
                    s.markings.push_back(std::move(m));
                    s.parent.push_back(s.arcs.size());
                    s.successors.emplace_back();
                    next_frontier.push_back(to);
                }
                s.successors[frontier[i]].push_back(s.arcs.size());
                s.arcs.push_back({frontier[i], to, std::move(b)});
            }
        }
        frontier = std::move(next_frontier);
    }
    return s;
}

std::uint32_t BoundsReport::bound() const {
    return max_tokens.empty() ? 0 : *std::max_element(max_tokens.begin(), max_tokens.end());
}

BoundsReport check_bounded(const StateSpace& space, std::size_t places) {
    BoundsReport r;
    r.max_tokens.assign(places, 0);
    for (const auto& m : space.markings) {
        for (std::size_t p = 0; p < places; ++p) r.max_tokens[p] = std::max(r.max_tokens[p], m.total(p));
    }
    return r;
}

LivenessReport check_liveness(const Net& net, const StateSpace& space) {
    if (space.partial) throw Error("partial-space", "liveness needs the complete state space");
    LivenessReport r;
    std::vector<bool> fired(net.transitions().size(), false);
    for (const auto& a : space.arcs) fired[a.element.transition] = true;
    for (std::size_t t = 0; t < fired.size(); ++t) {
        if (!fired[t]) r.dead_transitions.push_back(net.transitions()[t].name);
    }
    for (std::size_t i = 0; i < space.markings.size(); ++i) {
        if (space.successors[i].empty()) r.dead_markings.push_back(i);
    }
    return r;
}

ReachResult check_reachable(const StateSpace& space, const std::function<bool(const Marking&)>& goal) {
    ReachResult r;
    // Markings are stored in BFS discovery order, so the first hit is a closest one.
    for (std::size_t i = 0; i < space.markings.size(); ++i) {
        if (!goal(space.markings[i])) continue;
        r.reachable = true;
        r.marking = i;
        for (std::size_t cur = i; space.parent[cur]; cur = space.arcs[*space.parent[cur]].from) {
            r.witness.push_back(*space.parent[cur]);
        }
        std::reverse(r.witness.begin(), r.witness.end());
        break;
    }
    return r;
}

bool check_home(const StateSpace& space, std::size_t marking) {
    if (space.partial) throw Error("partial-space", "the home property needs the complete state space");
    std::vector<std::vector<std::size_t>> reverse(space.markings.size());
    for (const auto& a : space.arcs) reverse[a.to].push_back(a.from);
    std::vector<bool> seen(space.markings.size(), false);
    std::deque<std::size_t> queue{marking};
    seen[marking] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
        std::size_t cur = queue.front();
        queue.pop_front();
        for (std::size_t p : reverse[cur]) {
            if (!seen[p]) {
                seen[p] = true;
                ++reached;
                queue.push_back(p);
            }
        }
    }
    return reached == space.markings.size();
}

std::vector<std::size_t> occurrence_counts(const Net& net, const StateSpace& space) {
    std::vector<std::size_t> out(net.transitions().size(), 0);
    for (const auto& a : space.arcs) ++out[a.element.transition];
    return out;
}

std::string write_edge_list(const Net& net, const StateSpace& space) {
    std::ostringstream out;
    out << "# cbpmn-state-space v1\n";
    out << "nodes " << space.markings.size() << " arcs " << space.arcs.size() << " partial "
        << (space.partial ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < space.markings.size(); ++i) {
        std::vector<std::string> parts;
        const Marking& m = space.markings[i];
        for (std::size_t p = 0; p < m.places(); ++p) {
            for (const auto& [c, n] : m.at(p)) {
                parts.push_back(net.places()[p].name + ":" + c + (n > 1 ? "*" + std::to_string(n) : ""));
            }
        }
        out << "n " << i << " " << join(parts, ",") << "\n";
    }
    for (const auto& a : space.arcs) {
        std::vector<std::string> parts;
        for (const auto& [k, v] : a.element.binding) parts.push_back(k + "=" + v);
        out << "a " << a.from << " " << a.to << " " << net.transitions()[a.element.transition].name;
        if (!parts.empty()) out << " " << join(parts, ",");
        out << "\n";
    }
    return out.str();
}

} // namespace cbpmn
