#include "cbpmn/engine.hpp"
#include "cbpmn/error.hpp"
#include "cbpmn/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cbpmn;
using cbpmn::test::ctx;
using cbpmn::test::fixture;

namespace {

using Ids = std::vector<std::string>;
using Outcome = TraceEntry::Outcome;

std::vector<const TraceEntry*> applied(const AdaptationTrace& t) {
    std::vector<const TraceEntry*> out;
    for (const auto& e : t.entries) {
        if (e.outcome == Outcome::Applied) out.push_back(&e);
    }
    return out;
}

template <typename F>
std::string error_message(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(RunInstance, KioskGoldenRun) {
    Bundle b = cbpmn::test::kiosk();
    AdaptationTrace t = run_instance(b.model, b.scenario);
    auto hits = applied(t);
    ASSERT_EQ(hits.size(), 5u);

    EXPECT_EQ(hits[0]->target, "Patient Registration");
    EXPECT_EQ(hits[0]->action->kind, Action::Kind::ReplaceRole);
    EXPECT_EQ(hits[0]->value, "[(Receptionist.Status, Absent) AND (Healthcare_Assistant.Status, Present)]");
    EXPECT_EQ(hits[1]->target, "Patient Medical Info Collection");
    EXPECT_EQ(hits[1]->action->kind, Action::Kind::DataLevelChange);
    EXPECT_EQ(hits[2]->target, "Treatment");
    EXPECT_EQ(hits[2]->action->kind, Action::Kind::AddAfter);
    EXPECT_EQ(hits[2]->fragment, "transfer-to-hospital");
    EXPECT_EQ(hits[3]->target, "Storage in Cloud");
    EXPECT_EQ(hits[3]->action->kind, Action::Kind::Reorder);
    EXPECT_EQ(hits[3]->value, "[(Weather.Status, Rainy) AND (Network.Status, Unavailable)]");
    EXPECT_EQ(hits[4]->target, "Bill Payment");
    EXPECT_EQ(hits[4]->action->kind, Action::Kind::ReplaceMedium);

    EXPECT_EQ(t.execution_order,
              (Ids{"Patient Registration", "Patient Medical Info Collection", "Treatment",
                   "Appointment Fixing with Specialist Physician at nearby Hospital", "Arrangement of Ambulance",
                   "Transfer Patient at Hospital", "Bill Payment", "Storage in Cloud"}));
    const ActivityChain& c = t.final_chain;
    EXPECT_EQ(c.node("Patient Registration").role, "Z");
    EXPECT_TRUE(c.node("Patient Medical Info Collection").output_data.count("patient_condition=serious"));
    EXPECT_EQ(c.node("Bill Payment").medium, "Cash");
    EXPECT_EQ(c.node("Arrangement of Ambulance").depth, 1);
    EXPECT_TRUE(c.well_formed());
    for (std::size_t i = 1; i < t.entries.size(); ++i) EXPECT_LE(t.entries[i - 1].time, t.entries[i].time);
}

TEST(RunInstance, IdealStateFiresNoRules) {
    Bundle b = cbpmn::test::kiosk();
    ASSERT_TRUE(b.model.ideal_state);
    AdaptationTrace t = run_instance(b.model, Scenario{{*b.model.ideal_state}});
    EXPECT_EQ(t.count(Outcome::Applied), 0u);
    EXPECT_EQ(t.count(Outcome::Deferred), 0u);
    EXPECT_EQ(t.execution_order, b.model.chain.order());
    EXPECT_EQ(t.final_chain, b.model.chain);
    EXPECT_EQ(t.warnings.size(), 5u);
}

TEST(RunInstance, NestedStrategies) {
    Bundle b = load_bundle(fixture("nested/bundle.json"));
    AdaptationTrace t = run_instance(b.model, b.scenario);
    EXPECT_EQ(t.count(Outcome::Applied), 3u);
    EXPECT_EQ(t.execution_order, (Ids{"P1", "Admit", "P2", "Discharge"}));
}

TEST(RunInstance, TimedActionsWaitForTheirDelay) {
    Bundle b = load_bundle(fixture("timed/bundle.json"));
    AdaptationTrace t = run_instance(b.model, b.scenario);
    ASSERT_EQ(t.count(Outcome::Deferred), 2u);
    EXPECT_EQ(t.count(Outcome::Expired), 1u);
    EXPECT_EQ(t.count(Outcome::Applied), 1u);
    for (const auto& e : t.entries) {
        if (e.outcome == Outcome::Deferred) EXPECT_EQ(e.deferred_until, parse_clock("11:30"));
        if (e.outcome == Outcome::Applied) {
            ASSERT_TRUE(e.deferred_until);
            EXPECT_GE(e.time, *e.deferred_until);
            EXPECT_EQ(e.target, "C");
        }
        if (e.outcome == Outcome::Expired) EXPECT_EQ(e.target, "B");
    }
    EXPECT_EQ(t.final_chain.node("B").role, "Receptionist");
    EXPECT_EQ(t.final_chain.node("C").role, "Assistant");
    EXPECT_EQ(t.finished, parse_clock("12:00"));
}

TEST(RunInstance, TimedActionAppliesOnceDue) {
    Bundle b = load_bundle(fixture("timed/bundle.json"));
    ActivityChain c = b.model.chain;
    std::vector<ActivityNode> nodes = c.ordered_nodes();
    nodes[0].duration = 40;
    b.model.chain = ActivityChain(nodes);
    AdaptationTrace t = run_instance(b.model, b.scenario);
    EXPECT_EQ(t.count(Outcome::Applied), 2u);
    EXPECT_EQ(t.final_chain.node("B").role, "Assistant");
}

TEST(ValidateModel, KioskBundleIsClean) {
    Bundle b = cbpmn::test::kiosk();
    EXPECT_TRUE(validate_model(b.model).ok());
    EXPECT_TRUE(validate_scenario(b.scenario).ok());
}

TEST(ValidateModel, DanglingFragmentInRule) {
    Bundle b = cbpmn::test::kiosk();
    b.model.rules[2].fragment_pattern = "teleport";
    EXPECT_TRUE(validate_model(b.model).has("unknown-fragment"));
}

TEST(ValidateModel, ScopeAndStateProblems) {
    Bundle b = cbpmn::test::kiosk();
    b.model.state_of["Treatment"] = "S9";
    EXPECT_TRUE(validate_model(b.model).has("unknown-state"));

    b = cbpmn::test::kiosk();
    b.model.scopes.erase("Treatment");
    EXPECT_TRUE(validate_model(b.model).has("missing-scope"));
}

TEST(ValidateModel, IdealStateMustNotAdapt) {
    Bundle b = cbpmn::test::kiosk();
    b.model.ideal_state = b.scenario.snapshots[0];
    EXPECT_TRUE(validate_model(b.model).has("ideal-state-adapts"));
}

TEST(ValidateScenario, NonMonotoneTimestamps) {
    Scenario s{{ContextVector({ctx("Weather", "Status", "Rainy")}, 100),
                ContextVector({ctx("Weather", "Status", "Sunny")}, 50)}};
    EXPECT_TRUE(validate_scenario(s).has("non-monotone-scenario"));
}

TEST(RunInstance, ModuleErrorsNameTheActivity) {
    Bundle b = cbpmn::test::kiosk();
    b.model.graph.state_nodes[1].composition = CompositionExpr::conjunction({"Patient.Condition", "Patient.Pulse"});
    std::string msg = error_message([&] { run_instance(b.model, b.scenario); });
    EXPECT_NE(msg.find("activity 'Patient Medical Info Collection'"), std::string::npos) << msg;
}

TEST(RenderLog, ListsDecisionsAndOrder) {
    Bundle b = cbpmn::test::kiosk();
    std::string log = render_log(run_instance(b.model, b.scenario));
    EXPECT_NE(log.find("2.00 pm | Bill Payment | applied | replace_medium(Cash)"), std::string::npos);
    EXPECT_NE(log.find("order: Patient Registration -> "), std::string::npos);
    EXPECT_EQ(log.back(), '\n');
}
