#include "cbpmn/cli.hpp"

#include "cbpmn/error.hpp"
#include "cbpmn/io.hpp"
#include "cbpmn/reasoning.hpp"

#include <fstream>
#include <ostream>

namespace cbpmn {

namespace fs = std::filesystem;

namespace {

void print_findings(const ValidationReport& r, std::ostream& os) {
    for (const auto& f : r.findings) os << f.code << ": " << f.message << "\n";
}

/// Loads and fully validates a bundle; prints findings to `err` on failure.
std::optional<Bundle> checked_bundle(const fs::path& path, std::ostream& err, ValidationReport* all = nullptr) {
    ValidationReport report;
    auto bundle = load_bundle(path, report);
    if (bundle) {
        ValidationReport m = validate_model(bundle->model);
        report.findings.insert(report.findings.end(), m.findings.begin(), m.findings.end());
        ValidationReport s = validate_scenario(bundle->scenario);
        report.findings.insert(report.findings.end(), s.findings.begin(), s.findings.end());
        if (bundle->ideal_scenario) {
            ValidationReport i = validate_scenario(*bundle->ideal_scenario);
            report.findings.insert(report.findings.end(), i.findings.begin(), i.findings.end());
        }
    }
    if (all) *all = report;
    if (!report.ok()) {
        if (!all) print_findings(report, err);
        return std::nullopt;
    }
    return bundle;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io-error", "cannot write " + path.string());
    f << text;
}

Scenario scenario_for(const Bundle& b, bool ideal) {
    if (!ideal) return b.scenario;
    if (b.ideal_scenario) return *b.ideal_scenario;
    if (b.model.ideal_state) return Scenario{{*b.model.ideal_state}};
    throw Error("no-ideal-state", "the bundle defines no ideal scenario");
}

template <typename F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int cmd_validate(const fs::path& bundle, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ValidationReport report;
        checked_bundle(bundle, err, &report);
        out << findings_json(report).dump(2) << "\n";
        return report.ok() ? kExitOk : kExitInvalid;
    });
}

int cmd_run(const fs::path& bundle, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto b = checked_bundle(bundle, err);
        if (!b) return kExitInvalid;
        AdaptationTrace trace = run_instance(b->model, scenario_for(*b, opts.ideal));
        std::string summary = run_summary(b->model, trace).dump(2) + "\n";
        if (opts.out_dir) {
            fs::create_directories(*opts.out_dir);
            write_file(*opts.out_dir / "summary.json", summary);
            write_file(*opts.out_dir / "trace.log", render_log(trace));
            out << render_log(trace);
        } else {
            out << summary;
        }
        for (const auto& w : trace.warnings) err << "warning: " << w << "\n";
        return kExitOk;
    });
}

int cmd_verify(const fs::path& bundle, const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto b = checked_bundle(bundle, err);
        if (!b) return kExitInvalid;
        ActivityChain chain = b->model.chain;
        if (!opts.declared) chain = run_instance(b->model, b->scenario).final_chain;
        Net net = translate(b->model, chain);
        VerificationReport r = verify(net, opts.limit, opts.workers);
        if (opts.state_space) {
            write_file(*opts.state_space, write_edge_list(net, explore(net, net.initial, opts.limit, opts.workers)));
        }
        out << verification_json(r).dump(2) << "\n";
        err << (r.one_safe() ? "1-safe: yes" : "1-safe: no") << "; dead transitions: " << r.dead_transitions.size()
            << "; dead markings: " << r.dead_markings.size() << (r.dead_marking_is_goal ? " (goal)" : "") << "\n";
        return r.ok() ? kExitOk : kExitProperty;
    });
}

int cmd_metrics(const fs::path& bundle, const MetricsOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto b = checked_bundle(bundle, err);
        if (!b) return kExitInvalid;
        AdaptationTrace trace = run_instance(b->model, b->scenario);
        CostParams costs = opts.costs;
        costs.n = opts.n.value_or(static_cast<double>(trace.final_chain.size()));
        out << metrics_json(b->model, &trace, costs).dump(2) << "\n";
        return kExitOk;
    });
}

int cmd_query(const fs::path& situation, const std::string& query, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ContextualSituation cs = load_situation(read_json(situation));
        Query q;
        try {
            q = parse_query(query);
        } catch (const ParseError& e) {
            err << e.what() << "\n";
            return kExitInvalid;
        }
        out << render(evaluate(q, cs)) << "\n";
        return kExitOk;
    });
}

} // namespace cbpmn
