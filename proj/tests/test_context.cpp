#include "cbpmn/context.hpp"
#include "cbpmn/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace cbpmn;
using cbpmn::test::ctx;

namespace {

ContextState observed(const std::string& activity, const ContextVector& v) {
    return diff(situation_of(v), ContextState::initial(activity));
}

struct Classified {
    std::set<std::string> parameters;
    std::set<std::string> attributes;
    std::set<std::string> removed;
};

// Pairwise scan over every (old, new) context without keyed lookups.
Classified naive_classify(const std::vector<AtomicContext>& old, const std::vector<AtomicContext>& now) {
    Classified out;
    for (const auto& n : now) {
        bool parameter_known = false;
        bool same = false;
        for (const auto& o : old) {
            if (o.parameter != n.parameter) continue;
            parameter_known = true;
            if (o.instance == n.instance && o.attribute == n.attribute && o.connector == n.connector &&
                o.value.normalized() == n.value.normalized() && o.value.storage().index() == n.value.storage().index()) {
                same = true;
            }
        }
        if (!parameter_known) {
            out.parameters.insert(n.parameter);
        } else if (!same) {
            out.attributes.insert(n.parameter + "." + n.attribute);
        }
    }
    for (const auto& o : old) {
        bool present = false;
        for (const auto& n : now) present = present || n.parameter == o.parameter;
        if (!present) out.removed.insert(o.parameter);
    }
    return out;
}

std::vector<AtomicContext> random_contexts(std::mt19937& rng) {
    static const std::vector<std::string> params{"Weather", "Network", "Patient"};
    static const std::vector<std::string> attrs{"Status", "Level"};
    static const std::vector<std::string> values{"Low", "High", "low"};
    std::uniform_int_distribution<int> count(0, 6), pick(0, 2), coin(0, 1);
    std::vector<AtomicContext> out;
    std::set<std::string> keys;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        auto c = ctx(params[pick(rng)], attrs[coin(rng)], Value(values[pick(rng)]));
        if (coin(rng)) c.value = Value(pick(rng));
        if (!keys.insert(c.parameter + "." + c.attribute).second) continue;
        out.push_back(c);
    }
    return out;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST(Value, ClockParsingAndRendering) {
    EXPECT_EQ(parse_clock("14:00"), 840);
    EXPECT_EQ(parse_clock("2.00 pm"), 840);
    EXPECT_EQ(parse_clock("11.00 am"), 660);
    EXPECT_EQ(parse_clock("12:30 am"), 30);
    EXPECT_EQ(format_clock(660), "11.00 am");
    EXPECT_EQ(format_clock(840), "2.00 pm");
}

TEST(Value, NormalizedEquality) {
    EXPECT_EQ(Value("Rainy"), Value("rainy"));
    EXPECT_NE(Value("1"), Value(1));
    EXPECT_EQ(Value(6), Value(6.0));
    EXPECT_TRUE(compare(Value(12), Connector::Ge, Value(10)));
    EXPECT_TRUE(compare(Value("Arthritis"), Connector::In, Value("arthritis")));
}

TEST(ContextVector, RejectsDuplicateKeys) {
    try {
        ContextVector({ctx("Weather", "Status", "Rainy"), ctx("Weather", "Status", "Sunny")}, 0);
        FAIL() << "expected duplicate-context";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "duplicate-context");
    }
    EXPECT_NO_THROW(ContextVector({ctx("Network", "Status", "Up", "BSNL"), ctx("Network", "Status", "Up", "Jio")}, 0));
}

TEST(Diff, UnchangedContextsKeepOldState) {
    ContextVector v1({ctx("Ca", "x", "1"), ctx("Cb", "y", "2"), ctx("Cc", "z", "3")}, 100);
    ContextVector v2({ctx("Ca", "x", "1"), ctx("Cb", "y", "2"), ctx("Cc", "z", "3")}, 130);
    ContextState old = observed("A", v1);
    EXPECT_EQ(diff(situation_of(v2), old), old);
}

TEST(Diff, WeatherChangeBetweenTenThirtyAndEleven) {
    ContextVector before({ctx("Weather", "Status", "Sunny"), ctx("Watch", "Time", ClockValue{630})}, parse_clock("10:30"));
    ContextVector after({ctx("Weather", "Status", "Rainy"), ctx("Watch", "Time", ClockValue{660})}, parse_clock("11:00"));
    ContextState old = observed("A", before);
    ContextState s = diff(situation_of(after), old);
    EXPECT_TRUE(s.changed_parameters.empty());
    EXPECT_EQ(s.changed_attributes, (std::vector<std::string>{"Weather.Status", "Watch.Time"}));
    EXPECT_EQ(s.timestamp, 660);
    EXPECT_EQ(s.render(), "[⟨Weather, Watch⟩⟨Weather.Status, Watch.Time⟩⟨11.00 am⟩]");
    EXPECT_EQ(s.render_values(), "[⟨Weather, Watch⟩⟨Weather.Status, Watch.Time⟩⟨Rainy, 11.00 am⟩]");
}

TEST(Diff, SameTimestampIsIdentity) {
    ContextVector v({ctx("Weather", "Status", "Rainy")}, 60);
    ContextState s = observed("A", v);
    EXPECT_EQ(diff(situation_of(v), s), s);
}

TEST(Diff, RemovedParametersAreAnnotatedOnly) {
    ContextVector v1({ctx("Weather", "Status", "Rainy"), ctx("Network", "Status", "Up")}, 0);
    ContextVector v2({ctx("Weather", "Status", "Sunny")}, 10);
    ContextState s = diff(situation_of(v2), observed("A", v1));
    EXPECT_EQ(s.removed_parameters, std::vector<std::string>{"Network"});
    EXPECT_TRUE(s.changed_parameters.empty());
    EXPECT_EQ(s.changed_attributes, std::vector<std::string>{"Weather.Status"});
}

TEST(Diff, StaticContextsNeverEnterTheState) {
    auto age = ctx("Patient", "Age", 45);
    age.temporality = Temporality::Static;
    ContextState s = observed("A", ContextVector({age}, 0));
    EXPECT_FALSE(s.has_changes());
    EXPECT_TRUE(s.bindings.empty());
}

TEST(CatchContext, KioskRegistrationState) {
    ScopeFilter scope{"Patient Registration",
                      {"Receptionist", "Healthcare_Assistant"},
                      {"Receptionist.Status", "Healthcare_Assistant.Status"}};
    ContextVector at2({ctx("Receptionist", "Status", "Absent"), ctx("Healthcare_Assistant", "Status", "Present"),
                       ctx("Weather", "Status", "Rainy")},
                      parse_clock("2.00 pm"));
    ContextState s = catch_context(situation_of(at2), ContextState::initial(scope.activity_id), scope);
    EXPECT_EQ(s.render(), "[⟨Receptionist, Healthcare_Assistant⟩⟨Receptionist.Status, Healthcare_Assistant.Status⟩⟨2.00 pm⟩]");
}

TEST(CatchContext, WeatherOnlyChangeLeavesRegistrationUntouched) {
    ScopeFilter scope{"Patient Registration", {"Receptionist"}, {}};
    ContextVector v1({ctx("Receptionist", "Status", "Present"), ctx("Weather", "Status", "Sunny")}, 630);
    ContextVector v2({ctx("Receptionist", "Status", "Present"), ctx("Weather", "Status", "Rainy")}, 660);
    ContextState s = catch_context(situation_of(v1), ContextState::initial(scope.activity_id), scope);
    EXPECT_EQ(catch_context(situation_between(v1, v2), s, scope), s);
}

TEST(CatchContext, EmptySituationKeepsState) {
    ScopeFilter scope{"A", {"Weather"}, {}};
    ContextState s = observed("A", ContextVector({ctx("Weather", "Status", "Sunny")}, 0));
    ContextualSituation empty;
    empty.timestamp = 10;
    EXPECT_EQ(catch_context(empty, s, scope), s);
}

TEST(CatchContext, ScopeMismatch) {
    try {
        catch_context(ContextualSituation{}, ContextState::initial("A"), ScopeFilter{"B", {"X"}, {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "scope-mismatch");
    }
}

TEST(DiffProperty, MatchesNaiveClassificationOracle) {
    std::mt19937 rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        auto old_contexts = random_contexts(rng);
        auto new_contexts = random_contexts(rng);
        ContextState old = observed("A", ContextVector(old_contexts, 10));
        ContextState s = diff(situation_of(ContextVector(new_contexts, 20)), old);
        Classified want = naive_classify(old.bindings, new_contexts);
        if (want.parameters.empty() && want.attributes.empty()) {
            EXPECT_EQ(s, old);
            continue;
        }
        EXPECT_EQ(as_set(s.changed_parameters), want.parameters);
        EXPECT_EQ(as_set(s.changed_attributes), want.attributes);
        EXPECT_EQ(as_set(s.removed_parameters), want.removed);
        EXPECT_EQ(s.timestamp, 20);
    }
}

TEST(DiffProperty, IdempotentOlderInputAndDisjointness) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> scope_pick(0, 7);
    const std::vector<std::string> params{"Weather", "Network", "Patient"};
    for (int i = 0; i < 500; ++i) {
        ContextState base = observed("A", ContextVector(random_contexts(rng), 10));
        ContextualSituation cs = situation_of(ContextVector(random_contexts(rng), 20));
        ContextState once = diff(cs, base);
        EXPECT_EQ(diff(cs, once), once);

        ContextualSituation stale = situation_of(ContextVector(random_contexts(rng), 5));
        if (base.timestamp == 10) EXPECT_EQ(diff(stale, base), base);

        for (const auto& a : once.changed_attributes) {
            std::string owner = a.substr(0, a.find('.'));
            EXPECT_EQ(std::count(once.changed_parameters.begin(), once.changed_parameters.end(), owner), 0);
        }

        ScopeFilter scope{"A", {}, {}};
        int mask = scope_pick(rng);
        for (int b = 0; b < 3; ++b) {
            if (mask & (1 << b)) scope.relevant_parameters.push_back(params[b]);
        }
        ContextState caught = catch_context(cs, ContextState::initial("A"), scope);
        for (const auto& c : caught.bindings) EXPECT_TRUE(scope.admits(c));
        for (const auto& p : caught.touched_parameters()) {
            EXPECT_NE(std::find(scope.relevant_parameters.begin(), scope.relevant_parameters.end(), p),
                      scope.relevant_parameters.end());
        }
    }
}
