#include "cbpmn/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Context-aware BPMN engine"};
    app.require_subcommand(1);

    std::string bundle;
    std::string out_dir;
    bool ideal = false;
    cbpmn::VerifyOptions verify;
    std::string state_space;
    cbpmn::MetricsOptions metrics;
    double n = -1;
    std::string situation;
    std::string query;

    auto* validate = app.add_subcommand("validate", "Check every document of a bundle");
    validate->add_option("bundle", bundle, "bundle.json")->required();

    auto* run = app.add_subcommand("run", "Run the scenario and print the adaptation summary");
    run->add_option("bundle", bundle, "bundle.json")->required();
    run->add_option("-o,--out", out_dir, "Write summary.json and trace.log here");
    run->add_flag("--ideal", ideal, "Run the ideal scenario");

    auto* ver = app.add_subcommand("verify", "Explore the state space of the generated net");
    ver->add_option("bundle", bundle, "bundle.json")->required();
    ver->add_option("--limit", verify.limit, "Marking cap")->check(CLI::PositiveNumber);
    ver->add_option("--workers", verify.workers, "Exploration threads")->check(CLI::PositiveNumber);
    ver->add_flag("--declared", verify.declared, "Verify the declared chain, not the adapted one");
    ver->add_option("--state-space", state_space, "Write the state space as an edge list");

    auto* met = app.add_subcommand("metrics", "Execution-time and complexity figures");
    met->add_option("bundle", bundle, "bundle.json")->required();
    met->add_option("--n", n, "Activity count (default: adapted chain length)");
    met->add_option("--ta", metrics.costs.t_a, "Per-activity time");
    met->add_option("--tp", metrics.costs.t_p, "Fragment time");
    met->add_option("--tcm", metrics.costs.t_cm, "Context-model time");
    met->add_option("--tth", metrics.costs.t_th, "throwActivity time");
    met->add_option("--cct", metrics.costs.c_ct, "catchContext constant");

    auto* qry = app.add_subcommand("query", "Evaluate a predicate query over a contextual situation");
    qry->add_option("situation", situation, "situation.json")->required();
    qry->add_option("query", query, "Query text")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cbpmn::cmd_validate(bundle, std::cout, std::cerr);
    if (run->parsed()) {
        cbpmn::RunOptions opts;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        opts.ideal = ideal;
        return cbpmn::cmd_run(bundle, opts, std::cout, std::cerr);
    }
    if (ver->parsed()) {
        if (!state_space.empty()) verify.state_space = state_space;
        return cbpmn::cmd_verify(bundle, verify, std::cout, std::cerr);
    }
    if (met->parsed()) {
        if (n >= 0) metrics.n = n;
        return cbpmn::cmd_metrics(bundle, metrics, std::cout, std::cerr);
    }
    return cbpmn::cmd_query(situation, query, std::cout, std::cerr);
}
