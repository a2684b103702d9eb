#include "cbpmn/error.hpp"
#include "cbpmn/fragment_repo.hpp"
#include "cbpmn/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cbpmn;

namespace {

Json kiosk_repo_doc() { return read_json(cbpmn::test::fixture("kiosk/repository.json")); }

template <typename F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

} // namespace

TEST(ThrowActivity, TreatmentSelectsTransferFragment) {
    FragmentRepository repo = load_repository(kiosk_repo_doc());
    auto v3 = CompositeValue::parse("[(Caregiver.Expertise, Childcare) AND (Patient_Bed.Availability, Not_Available)]");
    ThrowResult r = repo.throw_activity("treat-patient", v3);
    ASSERT_NE(r.fragment, nullptr);
    EXPECT_EQ(r.fragment->id, "transfer-to-hospital");
    ASSERT_EQ(r.fragment->activities.size(), 3u);
    EXPECT_EQ(r.fragment->activities[0].name, "Appointment Fixing with Specialist Physician at nearby Hospital");
    EXPECT_EQ(r.fragment->activities[1].name, "Arrangement of Ambulance");
    EXPECT_EQ(r.fragment->activities[2].name, "Transfer Patient at Hospital");
    EXPECT_EQ(r.value, v3);
}

TEST(ThrowActivity, RegistrationHasNoFragment) {
    FragmentRepository repo = load_repository(kiosk_repo_doc());
    auto v1 = CompositeValue::parse("[(Receptionist.Status, Absent) AND (Healthcare_Assistant.Status, Present)]");
    ThrowResult r = repo.throw_activity("register-patient", v1);
    EXPECT_EQ(r.fragment, nullptr);
    EXPECT_EQ(r.value, v1);
    EXPECT_EQ(r.comparisons, 0u);
}

TEST(ThrowActivity, SingleEntryExactMatch) {
    FragmentActivity a{"Call Doctor", "call", "Nurse", "Phone", {}};
    FragmentRepository repo({{"sg", {{CompositeValue::parse("(A.x, 1)"), "f"}}}}, {{"f", {a}}});
    EXPECT_EQ(repo.index_of("sg"), 1u);
    ThrowResult r = repo.throw_activity("sg", CompositeValue::parse("(A.x, 1)"));
    ASSERT_NE(r.fragment, nullptr);
    EXPECT_EQ(r.fragment->id, "f");
    EXPECT_EQ(r.comparisons, 1u);
}

TEST(ThrowActivity, UnknownSubgoal) {
    FragmentRepository repo;
    EXPECT_EQ(error_code([&] { repo.throw_activity("nowhere", CompositeValue::parse("(A.x, 1)")); }), "unknown-subgoal");
}

TEST(ThrowActivityProperty, LinearCostDeterministicAndNormalized) {
    FragmentRepository repo = load_repository(kiosk_repo_doc());
    const std::vector<std::string> probes{
        "(Caregiver.Expertise, Childcare) AND (Patient_Bed.Availability, Not_Available)",
        "(patient_bed.availability, NOT_AVAILABLE) AND (caregiver.expertise, childcare)",
        "(Caregiver.Expertise, General_Medicine) AND (Patient_Bed.Availability, Not_Available)",
        "(Caregiver.Expertise, Cardiology)",
    };
    const std::size_t k = repo.section("treat-patient")->entries.size();
    for (const auto& text : probes) {
        auto v = CompositeValue::parse(text);
        ThrowResult a = repo.throw_activity("treat-patient", v);
        ThrowResult b = repo.throw_activity("treat-patient", v);
        EXPECT_LE(a.comparisons, k);
        EXPECT_EQ(a.fragment, b.fragment);
        EXPECT_EQ(a.comparisons, b.comparisons);
    }
    EXPECT_EQ(repo.throw_activity("treat-patient", CompositeValue::parse(probes[0])).fragment,
              repo.throw_activity("treat-patient", CompositeValue::parse(probes[1])).fragment);
}

TEST(Repository, RoundTrip) {
    Json doc = kiosk_repo_doc();
    Json stored = store_repository(load_repository(doc));
    EXPECT_EQ(store_repository(load_repository(stored)), stored);
    EXPECT_EQ(stored["sub_goals"].size(), doc["sub_goals"].size());
    EXPECT_EQ(stored["fragments"], doc["fragments"]);
}

TEST(Repository, EmptyDocument) {
    Json doc = Json::parse(R"({"format": "cbpmn-repository", "version": 1})");
    FragmentRepository repo = load_repository(doc);
    EXPECT_TRUE(repo.empty());
}

TEST(Repository, AmbiguousEntry) {
    Json doc = kiosk_repo_doc();
    auto& entries = doc["sub_goals"][2]["entries"];
    Json dup = entries[0];
    dup["fragment"] = "refer-to-hospital";
    entries.push_back(dup);
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "ambiguous-entry");
}

TEST(Repository, UnknownFragmentAndDuplicates) {
    Json doc = kiosk_repo_doc();
    doc["sub_goals"][2]["entries"][0]["fragment"] = "teleport";
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "unknown-fragment");

    doc = kiosk_repo_doc();
    doc["sub_goals"].push_back(doc["sub_goals"][0]);
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "duplicate-subgoal");

    doc = kiosk_repo_doc();
    doc["fragments"][1]["activities"] = Json::array();
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "empty-fragment");
}

TEST(Repository, VersionChecked) {
    Json doc = kiosk_repo_doc();
    doc["version"] = 2;
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "unsupported-version");
    doc = kiosk_repo_doc();
    doc["format"] = "cbpmn-rules";
    EXPECT_EQ(error_code([&] { load_repository(doc); }), "format-error");
}
