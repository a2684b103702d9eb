#pragma once

// JSON documents. Every document carries "format": "cbpmn-<kind>" and
// "version": 1; loaders reject other kinds and versions.

#include "cbpmn/engine.hpp"
#include "cbpmn/metrics.hpp"
#include "cbpmn/verifier.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace cbpmn {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Throws Error("io-error") naming the path, Error("format-error") on bad JSON.
Json read_json(const std::filesystem::path& path);
/// Throws Error("format-error") or Error("unsupported-version").
void check_header(const Json& doc, std::string_view kind);

AtomicContext context_from_json(const Json& j);
Json to_json(const AtomicContext& c);
Value value_from_json(const Json& j);
Json to_json(const Value& v);
LogicalTime time_from_json(const Json& j);
ContextVector vector_from_json(const Json& j);
Json to_json(const ContextVector& v);

ContextGraph load_graph(const Json& doc);
FragmentRepository load_repository(const Json& doc);
Json store_repository(const FragmentRepository& repo);
std::vector<AdaptationRule> load_rules(const Json& doc);
Json store_rules(const std::vector<AdaptationRule>& rules);
Scenario load_scenario(const Json& doc);
ContextualSituation load_situation(const Json& doc);

/// Fills chain, scopes, state mapping, ideal state and baseline of `model`.
void load_model_into(const Json& doc, CBPMNModel& model);

struct Bundle {
    std::filesystem::path root;
    CBPMNModel model;
    Scenario scenario;
    std::optional<Scenario> ideal_scenario;
};

/// Paths inside the bundle document are relative to its directory.
/// Unreadable or malformed parts become findings instead of exceptions.
std::optional<Bundle> load_bundle(const std::filesystem::path& path, ValidationReport& report);
/// Throws Error with the first finding.
Bundle load_bundle(const std::filesystem::path& path);

Json run_summary(const CBPMNModel& model, const AdaptationTrace& trace);
Json verification_json(const VerificationReport& r);
Json metrics_json(const CBPMNModel& model, const AdaptationTrace* trace, const CostParams& costs);
Json findings_json(const ValidationReport& r);

} // namespace cbpmn
