#include "cbpmn/io.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/text.hpp"

#include <fstream>
#include <sstream>

namespace cbpmn {

namespace fs = std::filesystem;

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("format-error", path.string() + ": " + e.what());
    }
}

void check_header(const Json& doc, std::string_view kind) {
    const std::string expected = "cbpmn-" + std::string(kind);
    if (!doc.is_object() || !doc.contains("format") || doc["format"] != expected) {
        throw Error("format-error", "expected a " + expected + " document");
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"] != kFormatVersion) {
        throw Error("unsupported-version", expected + " version " +
                                               (doc.contains("version") ? doc["version"].dump() : "missing") +
                                               " is not supported");
    }
}

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<T>();
}

std::string need_string(const Json& j, const char* key, std::string_view what) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw Error("format-error", std::string(what) + " needs a string field '" + key + "'");
    }
    return j[key].get<std::string>();
}

std::vector<std::string> strings(const Json& j, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& s : j[key]) out.push_back(s.get<std::string>());
    return out;
}

template <typename F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error("format-error", std::string(what) + ": " + e.what());
    }
}

} // namespace

Value value_from_json(const Json& j) {
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number()) return Value(j.get<double>());
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_object() && j.contains("clock")) return Value(ClockValue{time_from_json(j["clock"])});
    throw Error("format-error", "unsupported value " + j.dump());
}

Json to_json(const Value& v) {
    if (v.is_number()) {
        double d = v.number();
        if (d == static_cast<double>(static_cast<long long>(d))) return Json(static_cast<long long>(d));
        return Json(d);
    }
    if (v.is_clock()) return Json{{"clock", v.to_string()}};
    if (v.is_text()) return Json(v.text());
    return Json(v.to_string() == "true");
}

LogicalTime time_from_json(const Json& j) {
    if (j.is_number_integer()) return j.get<LogicalTime>();
    if (j.is_string()) return parse_clock(j.get<std::string>());
    throw Error("format-error", "time must be minutes or a clock string, got " + j.dump());
}

AtomicContext context_from_json(const Json& j) {
    return guarded("context", [&] {
        AtomicContext c;
        c.parameter = need_string(j, "parameter", "context");
        if (j.contains("instance") && !j["instance"].is_null()) c.instance = j["instance"].get<std::string>();
        c.attribute = need_string(j, "attribute", "context");
        c.connector = parse_connector(get_or<std::string>(j, "connector", "="));
        if (!j.contains("value")) throw Error("format-error", "context " + c.qualified_attribute() + " has no value");
        c.value = value_from_json(j["value"]);
        c.category = parse_category(get_or<std::string>(j, "category", "external"));
        c.temporality = parse_temporality(get_or<std::string>(j, "temporality", "dynamic"));
        c.predicate = get_or<std::string>(j, "predicate", "");
        c.validate();
        return c;
    });
}

Json to_json(const AtomicContext& c) {
    Json j;
    j["parameter"] = c.parameter;
    if (c.instance) j["instance"] = *c.instance;
    j["attribute"] = c.attribute;
    j["connector"] = std::string(to_string(c.connector));
    j["value"] = to_json(c.value);
    j["category"] = std::string(to_string(c.category));
    j["temporality"] = std::string(to_string(c.temporality));
    if (!c.predicate.empty()) j["predicate"] = c.predicate;
    return j;
}

ContextVector vector_from_json(const Json& j) {
    return guarded("snapshot", [&] {
        std::vector<AtomicContext> contexts;
        for (const auto& c : j.at("contexts")) contexts.push_back(context_from_json(c));
        return ContextVector(std::move(contexts), time_from_json(j.at("time")));
    });
}

Json to_json(const ContextVector& v) {
    Json j;
    j["time"] = format_clock(v.timestamp());
    j["contexts"] = Json::array();
    for (const auto& c : v.contexts()) j["contexts"].push_back(to_json(c));
    return j;
}

ContextGraph load_graph(const Json& doc) {
    check_header(doc, "context-graph");
    return guarded("context graph", [&] {
        ContextGraph g;
        std::map<std::string, LogicalTime> delays;
        for (const auto& e : doc.value("entities", Json::array())) {
            g.entities.push_back({need_string(e, "name", "entity"),
                                  parse_category(get_or<std::string>(e, "category", "external"))});
        }
        for (const auto& a : doc.value("attributes", Json::array())) {
            AttributeNode n;
            n.entity = need_string(a, "entity", "attribute");
            n.name = need_string(a, "name", "attribute");
            n.temporality = parse_temporality(get_or<std::string>(a, "temporality", "dynamic"));
            n.derived = get_or<bool>(a, "derived", false);
            if (a.contains("delay")) delays[n.qualified()] = a["delay"].get<LogicalTime>();
            g.attributes.push_back(std::move(n));
        }
        for (const auto& r : doc.value("relations", Json::array())) {
            g.relations.push_back({need_string(r, "from", "relation"), need_string(r, "to", "relation"),
                                   parse_cardinality(get_or<std::string>(r, "cardinality", "one-one")),
                                   get_or<std::string>(r, "label", "")});
        }
        for (const auto& s : doc.value("states", Json::array())) {
            StateNodeDef n;
            n.id = need_string(s, "id", "state");
            n.parameters = strings(s, "parameters");
            n.attributes = strings(s, "attributes");
            if (s.contains("composition")) n.composition = CompositionExpr::parse(s["composition"].get<std::string>());
            g.state_nodes.push_back(std::move(n));
        }
        for (const auto& d : doc.value("dependencies", Json::array())) {
            DependencyRule r;
            r.id = need_string(d, "id", "dependency");
            r.kind = get_or<std::string>(d, "kind", "partial") == "total" ? DependencyRule::Kind::Total
                                                                         : DependencyRule::Kind::Partial;
            for (const auto& p : d.at("if")) r.antecedent.push_back(ContextPattern::parse(p.get<std::string>()));
            r.target = need_string(d, "then", "dependency");
            r.value = value_from_json(d.at("value"));
            g.dependency_rules.push_back(std::move(r));
        }
        for (const auto& l : doc.value("red_links", Json::array())) {
            g.red_links.push_back({need_string(l, "state", "red link"), need_string(l, "parameter", "red link"),
                                   need_string(l, "entity", "red link")});
        }
        for (const auto& l : doc.value("blue_links", Json::array())) {
            g.blue_links.push_back({need_string(l, "state", "blue link"), need_string(l, "attribute", "blue link"),
                                    need_string(l, "node", "blue link")});
        }
        for (const auto& l : doc.value("green_links", Json::array())) {
            g.green_links.push_back({need_string(l, "attribute", "green link"), need_string(l, "slot", "green link"),
                                     get_or<LogicalTime>(l, "delay", 0)});
        }
        g.composite_slots = strings(doc, "composite_slots");
        g.complete_defaults(delays);
        return g;
    });
}

FragmentRepository load_repository(const Json& doc) {
    check_header(doc, "repository");
    return guarded("repository", [&] {
        std::vector<ProcessFragment> fragments;
        for (const auto& f : doc.value("fragments", Json::array())) {
            ProcessFragment p;
            p.id = need_string(f, "id", "fragment");
            for (const auto& a : f.at("activities")) {
                FragmentActivity act;
                act.name = need_string(a, "name", "fragment activity");
                act.sub_goal = get_or<std::string>(a, "sub_goal", "");
                act.role = get_or<std::string>(a, "role", "");
                act.medium = get_or<std::string>(a, "medium", "");
                act.tasks = strings(a, "tasks");
                p.activities.push_back(std::move(act));
            }
            fragments.push_back(std::move(p));
        }
        std::vector<SubGoalSection> sections;
        for (const auto& s : doc.value("sub_goals", Json::array())) {
            SubGoalSection sec;
            sec.id = need_string(s, "id", "sub-goal");
            for (const auto& e : s.value("entries", Json::array())) {
                sec.entries.push_back(
                    {CompositeValue::parse(need_string(e, "value", "entry")), need_string(e, "fragment", "entry")});
            }
            sections.push_back(std::move(sec));
        }
        return FragmentRepository(std::move(sections), std::move(fragments));
    });
}

Json store_repository(const FragmentRepository& repo) {
    Json doc;
    doc["format"] = "cbpmn-repository";
    doc["version"] = kFormatVersion;
    doc["sub_goals"] = Json::array();
    for (const auto& s : repo.sections()) {
        Json sec;
        sec["id"] = s.id;
        sec["entries"] = Json::array();
        for (const auto& e : s.entries) sec["entries"].push_back({{"value", e.pattern.render()}, {"fragment", e.fragment_id}});
        doc["sub_goals"].push_back(std::move(sec));
    }
    doc["fragments"] = Json::array();
    for (const auto& f : repo.fragments()) {
        Json fj;
        fj["id"] = f.id;
        fj["activities"] = Json::array();
        for (const auto& a : f.activities) {
            Json aj{{"name", a.name}, {"sub_goal", a.sub_goal}, {"role", a.role}, {"medium", a.medium}};
            if (!a.tasks.empty()) aj["tasks"] = a.tasks;
            fj["activities"].push_back(std::move(aj));
        }
        doc["fragments"].push_back(std::move(fj));
    }
    return doc;
}

namespace {

Action action_from_json(const Json& j) {
    Action a;
    a.kind = parse_action_kind(need_string(j, "kind", "action"));
    if (j.contains("target") && !j["target"].is_null()) a.target = j["target"].get<std::string>();
    if (j.contains("fragment") && !j["fragment"].is_null()) a.fragment = j["fragment"].get<std::string>();
    a.value = get_or<std::string>(j, "value", "");
    a.permutation = strings(j, "permutation");
    for (const auto& s : strings(j, "add")) a.delta.add.insert(s);
    for (const auto& s : strings(j, "remove")) a.delta.remove.insert(s);
    if ((a.kind == Action::Kind::ReplaceRole || a.kind == Action::Kind::ReplaceMedium) && a.value.empty()) {
        throw Error("format-error", std::string(to_string(a.kind)) + " needs a value");
    }
    return a;
}

Json action_to_json(const Action& a) {
    Json j;
    j["kind"] = std::string(to_string(a.kind));
    if (a.target) j["target"] = *a.target;
    if (a.fragment) j["fragment"] = *a.fragment;
    if (!a.value.empty()) j["value"] = a.value;
    if (!a.permutation.empty()) j["permutation"] = a.permutation;
    if (!a.delta.add.empty()) j["add"] = a.delta.add;
    if (!a.delta.remove.empty()) j["remove"] = a.delta.remove;
    return j;
}

} // namespace

std::vector<AdaptationRule> load_rules(const Json& doc) {
    check_header(doc, "rules");
    return guarded("rules", [&] {
        std::vector<AdaptationRule> rules;
        for (const auto& r : doc.value("rules", Json::array())) {
            AdaptationRule rule;
            rule.id = need_string(r, "id", "rule");
            std::string value = get_or<std::string>(r, "value", "");
            if (!trim(value).empty()) rule.value_pattern = CompositeValue::parse(value);
            if (r.contains("fragment") && !r["fragment"].is_null()) rule.fragment_pattern = r["fragment"].get<std::string>();
            if (r.contains("activity") && !r["activity"].is_null()) rule.activity = r["activity"].get<std::string>();
            for (const auto& a : r.value("actions", Json::array())) rule.actions.push_back(action_from_json(a));
            rules.push_back(std::move(rule));
        }
        return rules;
    });
}

Json store_rules(const std::vector<AdaptationRule>& rules) {
    Json doc;
    doc["format"] = "cbpmn-rules";
    doc["version"] = kFormatVersion;
    doc["rules"] = Json::array();
    for (const auto& r : rules) {
        Json j;
        j["id"] = r.id;
        if (r.activity) j["activity"] = *r.activity;
        j["value"] = r.value_pattern.render();
        j["fragment"] = r.fragment_pattern ? Json(*r.fragment_pattern) : Json(nullptr);
        j["actions"] = Json::array();
        for (const auto& a : r.actions) j["actions"].push_back(action_to_json(a));
        doc["rules"].push_back(std::move(j));
    }
    return doc;
}

Scenario load_scenario(const Json& doc) {
    check_header(doc, "scenario");
    Scenario s;
    for (const auto& snap : doc.value("snapshots", Json::array())) s.snapshots.push_back(vector_from_json(snap));
    return s;
}

ContextualSituation load_situation(const Json& doc) {
    check_header(doc, "situation");
    return situation_of(vector_from_json(doc));
}

void load_model_into(const Json& doc, CBPMNModel& model) {
    check_header(doc, "model");
    guarded("model", [&] {
        model.name = get_or<std::string>(doc, "name", "");
        std::vector<ActivityNode> nodes;
        for (const auto& a : doc.at("activities")) {
            ActivityNode n;
            n.id = need_string(a, "id", "activity");
            n.name = get_or<std::string>(a, "name", n.id);
            n.sub_goal = get_or<std::string>(a, "sub_goal", "");
            n.role = get_or<std::string>(a, "role", "");
            n.medium = get_or<std::string>(a, "medium", "");
            for (const auto& d : strings(a, "output")) n.output_data.insert(d);
            n.tasks = strings(a, "tasks");
            n.duration = get_or<LogicalTime>(a, "duration", 0);
            if (n.duration < 0) throw Error("format-error", "activity '" + n.id + "' has a negative duration");
            if (a.contains("scope")) {
                ScopeFilter f;
                f.activity_id = n.id;
                f.relevant_parameters = strings(a["scope"], "parameters");
                f.relevant_attributes = strings(a["scope"], "attributes");
                model.scopes[n.id] = std::move(f);
            }
            if (a.contains("state") && !a["state"].is_null()) model.state_of[n.id] = a["state"].get<std::string>();
            nodes.push_back(std::move(n));
        }
        model.chain = ActivityChain(std::move(nodes));
        if (doc.contains("ideal_state")) model.ideal_state = vector_from_json(doc["ideal_state"]);
        Baseline& b = model.baseline;
        const Json base = doc.value("baseline", Json::object());
        b.activities = get_or<std::size_t>(base, "activities", model.chain.size());
        b.gateways = get_or<std::size_t>(base, "gateways", 0);
        b.split_branches = get_or<std::size_t>(base, "split_branches", 0);
        b.unique_flow_elements = get_or<std::size_t>(base, "unique_flow_elements", 0);
        b.unique_data_objects = get_or<std::size_t>(base, "unique_data_objects", 0);
        b.total_flow_elements = get_or<std::size_t>(base, "total_flow_elements", 0);
        b.total_data_objects = get_or<std::size_t>(base, "total_data_objects", 0);
        return 0;
    });
}

std::optional<Bundle> load_bundle(const fs::path& path, ValidationReport& report) {
    auto fail = [&](const std::string& code, const std::string& message) {
        report.findings.push_back({code, message});
    };
    Bundle b;
    b.root = path.parent_path();
    Json doc;
    try {
        doc = read_json(path);
        check_header(doc, "bundle");
    } catch (const Error& e) {
        fail(e.code(), e.message());
        return std::nullopt;
    }
    auto part = [&](const char* key, bool required) -> std::optional<Json> {
        if (!doc.contains(key) || !doc[key].is_string()) {
            if (required) fail("missing-file", std::string("bundle names no ") + key + " file");
            return std::nullopt;
        }
        fs::path p = b.root / doc[key].get<std::string>();
        if (!fs::exists(p)) {
            fail("missing-file", std::string(key) + " file " + p.string() + " does not exist");
            return std::nullopt;
        }
        try {
            return read_json(p);
        } catch (const Error& e) {
            fail(e.code(), e.message());
            return std::nullopt;
        }
    };
    auto attempt = [&](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            fail(e.code(), e.message());
        }
    };
    auto model = part("model", true);
    auto graph = part("graph", true);
    auto repo = part("repository", true);
    auto rules = part("rules", true);
    auto scenario = part("scenario", true);
    auto ideal = part("ideal_scenario", false);
    const std::size_t before = report.findings.size();
    if (graph) attempt([&] { b.model.graph = load_graph(*graph); });
    if (repo) attempt([&] { b.model.repository = load_repository(*repo); });
    if (rules) attempt([&] { b.model.rules = load_rules(*rules); });
    if (model) attempt([&] { load_model_into(*model, b.model); });
    if (scenario) attempt([&] { b.scenario = load_scenario(*scenario); });
    if (ideal) attempt([&] { b.ideal_scenario = load_scenario(*ideal); });
    if (!report.ok() || report.findings.size() != before) return std::nullopt;
    return b;
}

Bundle load_bundle(const fs::path& path) {
    ValidationReport report;
    auto b = load_bundle(path, report);
    if (!b) throw Error(report.findings.front().code, report.findings.front().message);
    return std::move(*b);
}

Json run_summary(const CBPMNModel& model, const AdaptationTrace& trace) {
    Json doc;
    doc["format"] = "cbpmn-run-summary";
    doc["version"] = kFormatVersion;
    doc["model"] = model.name;
    doc["started"] = format_clock(trace.started);
    doc["finished"] = format_clock(trace.finished);
    doc["decisions"] = Json::array();
    for (const auto& e : trace.entries) {
        Json j;
        j["time"] = format_clock(e.time);
        j["activity"] = e.activity;
        j["state"] = e.state;
        j["value"] = e.value;
        j["fragment"] = e.fragment ? Json(*e.fragment) : Json(nullptr);
        j["rule"] = e.rule ? Json(*e.rule) : Json(nullptr);
        j["action"] = e.action ? Json(e.action->render()) : Json(nullptr);
        j["target"] = e.target;
        j["outcome"] = std::string(to_string(e.outcome));
        j["deferred_until"] = e.deferred_until ? Json(format_clock(*e.deferred_until)) : Json(nullptr);
        if (!e.note.empty()) j["note"] = e.note;
        doc["decisions"].push_back(std::move(j));
    }
    doc["adaptations"] = trace.count(TraceEntry::Outcome::Applied);
    doc["execution_order"] = trace.execution_order;
    doc["activities"] = Json::array();
    for (const auto& n : trace.final_chain.ordered_nodes()) {
        Json a{{"id", n.id}, {"sub_goal", n.sub_goal}, {"role", n.role}, {"medium", n.medium}};
        a["output"] = n.output_data;
        if (!n.origin.empty()) a["fragment"] = n.origin;
        doc["activities"].push_back(std::move(a));
    }
    doc["warnings"] = trace.warnings;
    doc["stats"] = {{"events", trace.stats.events},
                    {"instance_nodes", trace.stats.instance_nodes},
                    {"instance_edges", trace.stats.instance_edges},
                    {"pattern_comparisons", trace.stats.pattern_comparisons}};
    return doc;
}

Json verification_json(const VerificationReport& r) {
    Json doc;
    doc["format"] = "cbpmn-verification";
    doc["version"] = kFormatVersion;
    doc["net"] = {{"places", r.places}, {"transitions", r.transitions}, {"arcs", r.net_arcs},
                  {"substitution_transitions", r.substitutions}};
    doc["state_space"] = {{"markings", r.markings}, {"arcs", r.space_arcs}, {"partial", r.partial}};
    doc["bound"] = r.bound;
    doc["one_safe"] = r.one_safe();
    Json bounds = Json::object();
    for (const auto& [p, k] : r.place_bounds) bounds[p] = k;
    doc["place_bounds"] = std::move(bounds);
    doc["dead_transitions"] = r.dead_transitions;
    doc["dead_markings"] = r.dead_markings;
    doc["dead_marking_is_goal"] = r.dead_marking_is_goal;
    doc["goal_reachable"] = r.goal_reachable;
    doc["witness_length"] = r.witness_length;
    doc["goal_is_home"] = r.goal_is_home;
    Json occ = Json::object();
    for (const auto& [t, n] : r.occurrences) occ[t] = n;
    doc["occurrences"] = std::move(occ);
    doc["verdict"] = r.ok() ? "pass" : "fail";
    return doc;
}

Json metrics_json(const CBPMNModel& model, const AdaptationTrace* trace, const CostParams& costs) {
    Json doc;
    doc["format"] = "cbpmn-metrics";
    doc["version"] = kFormatVersion;
    const ActivityChain& chain = trace ? trace->final_chain : model.chain;
    doc["execution_time"] = {{"formula", "n * (t_a + t_p + t_cm + t_th + C_ct)"},
                             {"n", costs.n},
                             {"t_a", costs.t_a},
                             {"t_p", costs.t_p},
                             {"t_cm", costs.t_cm},
                             {"t_th", costs.t_th},
                             {"C_ct", costs.c_ct},
                             {"value", execution_time(costs)}};
    if (trace) {
        doc["execution_time"]["observed_t_cm"] = trace->stats.instance_nodes + trace->stats.instance_edges;
    }
    StructuralMetrics s = structural_metrics(model, chain);
    doc["structure"] = {{"noa_extra", s.noa_extra},
                        {"noac_extra", s.noac_extra},
                        {"mcc_extra", s.mcc_extra},
                        {"mcc_formula", "E' - N' + 2"},
                        {"cfc", s.cfc}};
    HalsteadCounts c = halstead_counts(model);
    HalsteadMetrics h = halstead(c);
    doc["halstead"] = {{"n1", c.n1},
                       {"n2", c.n2},
                       {"N1", c.N1},
                       {"N2", c.N2},
                       {"length", h.length},
                       {"length_formula", "n1*log2(n1) + n2*log2(n2)"},
                       {"volume", h.volume},
                       {"volume_formula", "(N1+N2)*log2(n1+n2)"},
                       {"difficulty", h.difficulty},
                       {"difficulty_formula", "(n1/2)*(N2/n2)"}};
    return doc;
}

Json findings_json(const ValidationReport& r) {
    Json doc;
    doc["format"] = "cbpmn-findings";
    doc["version"] = kFormatVersion;
    doc["ok"] = r.ok();
    doc["findings"] = Json::array();
    for (const auto& f : r.findings) doc["findings"].push_back({{"code", f.code}, {"message", f.message}});
    return doc;
}

} // namespace cbpmn
