#include "cbpmn/error.hpp"
#include "cbpmn/io.hpp"
#include "cbpmn/reasoning.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

using namespace cbpmn;

namespace {

ContextualSituation clinic() { return load_situation(read_json(cbpmn::test::fixture("reasoning/clinic_situation.json"))); }

std::string run(const std::string& query, const ContextualSituation& cs) { return render(evaluate(parse_query(query), cs)); }

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

ContextPredicate pred(std::string category, std::string subject, std::string parameter, std::string attribute,
                      Value value) {
    ContextPredicate p;
    p.category = std::move(category);
    p.subject = std::move(subject);
    p.parameter = std::move(parameter);
    p.attribute = std::move(attribute);
    p.value = std::move(value);
    return p;
}

std::vector<ContextPredicate> random_predicates(std::mt19937& rng) {
    static const std::vector<std::string> categories{"Resource", "Caregiver"};
    static const std::vector<std::pair<std::string, std::string>> subjects{
        {"Z1", "Caregiver"}, {"Z2", "Caregiver"}, {"BSNL", "Network"}};
    static const std::vector<std::string> attributes{"Status", "Expertise"};
    static const std::vector<std::string> values{"Present", "Absent", "Arthritis"};
    std::uniform_int_distribution<int> n(0, 8), two(0, 1), three(0, 2);
    std::vector<ContextPredicate> out;
    int count = n(rng);
    for (int i = 0; i < count; ++i) {
        const auto& s = subjects[three(rng)];
        auto p = pred(categories[two(rng)], s.first, s.second, attributes[two(rng)], values[three(rng)]);
        bool clash = std::any_of(out.begin(), out.end(), [&](const ContextPredicate& q) {
            return q.category == p.category && q.subject == p.subject && q.attribute == p.attribute;
        });
        if (!clash) out.push_back(p);
    }
    return out;
}

struct Leaf {
    std::string attribute;
    std::string value;
    bool matches(const ContextPredicate& p) const {
        return lower(p.attribute) == lower(attribute) && p.value.normalized() == lower(value);
    }
};

// Union of every valid subset, in declaration order, joined with `op`.
std::string subset_oracle(const std::vector<ContextPredicate>& preds,
                          const std::function<bool(const std::vector<ContextPredicate>&)>& valid, const char* op) {
    const std::size_t n = preds.size();
    std::vector<bool> keep(n, false);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<ContextPredicate> subset;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) subset.push_back(preds[i]);
        }
        if (!valid(subset)) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) keep[i] = true;
        }
    }
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        if (!out.empty()) out += std::string(" ") + op + " ";
        out += preds[i].render();
    }
    return out.empty() ? "NULL" : out;
}

bool in_category(const std::string& category, const ContextPredicate& p) {
    return category == "*" || lower(category) == lower(p.category);
}

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

TEST(ParseQuery, Kinds) {
    Query q = parse_query("AND Resource WHERE parameter INSTANCE_OF Network");
    EXPECT_EQ(q.kind, Query::Kind::AndByParameter);
    EXPECT_EQ(q.category, "Resource");
    EXPECT_EQ(q.selector.field, ConditionLeaf::Field::ParameterInstanceOf);
    EXPECT_EQ(q.selector.name, "Network");

    q = parse_query("AND Caregiver WHERE (attr Status = Present) AND (attr Expertise = Arthritis)");
    EXPECT_EQ(q.kind, Query::Kind::AndConditional);
    ASSERT_TRUE(q.condition);
    EXPECT_EQ(q.condition->kind, Condition::Kind::And);
    EXPECT_EQ(q.condition->children.size(), 2u);

    EXPECT_EQ(parse_query("AND CHAIN FROM Season").kind, Query::Kind::AndCrossCategory);
    EXPECT_EQ(parse_query("OR Resource SAME INSTANCE_ATTRIBUTE").kind, Query::Kind::OrSameInstance);
    EXPECT_EQ(parse_query("OR * SAME ATTRIBUTE_VALUE WHERE value = Poor").kind, Query::Kind::OrSameValue);
    EXPECT_EQ(parse_query("NOT Patient(X, Suffering, from, Malaria)").kind, Query::Kind::Not);
    EXPECT_EQ(parse_query("ARITH Manpower(H, Count) - Manpower(H, Leave)").arithmetic, Query::Arithmetic::Subtract);
}

TEST(ParseQuery, ErrorsCarryPosition) {
    try {
        parse_query("");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 0u);
        EXPECT_EQ(e.code(), "parse-error");
    }
    try {
        parse_query("AND Resource WHERE");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 18u);
    }
    EXPECT_THROW(parse_query("NOT Patient(X, Suffering, from)"), ParseError);
    EXPECT_THROW(parse_query("OR Resource SAME COLOUR"), ParseError);
}

TEST(ParseQuery, PrintRoundTrip) {
    const std::vector<std::string> queries{
        "AND Resource WHERE parameter INSTANCE_OF Network",
        "AND Resource WHERE parameter = BSNL_Network",
        "AND Caregiver WHERE (attr Status = Present) AND (attr Expertise = Arthritis)",
        "AND * WHERE (attr Status = Present) OR ((attr Expertise In Childcare) AND (value = \"Very Poor\"))",
        "AND Resource WHERE attr Connectivity = \"Very Poor\"",
        "AND CHAIN",
        "AND CHAIN FROM Season",
        "OR Resource SAME ATTRIBUTE_VALUE",
        "OR Caregiver SAME INSTANCE_ATTRIBUTE WHERE attr Status",
        "NOT NOT Patient(X, Suffering, from, Malaria)",
        "ARITH Manpower(Healthcare_Assistant, Count) + Manpower(Healthcare_Assistant, Recruitment)",
        "Resource(BSNL_Network, Connectivity, =, Very Poor)",
        "Manpower(Healthcare_Assistant, Count, >=, 10)",
    };
    for (const auto& text : queries) {
        Query q = parse_query(text);
        std::string printed = print_query(q);
        EXPECT_EQ(parse_query(printed), q) << text << " printed as " << printed;
        EXPECT_EQ(print_query(parse_query(printed)), printed);
    }
}

TEST(Evaluate, NetworkConnectivityConjunction) {
    EXPECT_EQ(run("AND Resource WHERE parameter INSTANCE_OF Network", clinic()),
              "Resource(BSNL_Network, Connectivity, =, Very Poor) AND Resource(Reliance_Network, Connectivity, =, "
              "Average)");
}

TEST(Evaluate, PresentArthritisCaregiverIsNull) {
    EXPECT_EQ(run("AND Caregiver WHERE (attr Status = Present) AND (attr Expertise = Arthritis)", clinic()), "NULL");
    EXPECT_EQ(run("AND Caregiver WHERE (attr Status = Present) AND (attr Expertise = Childcare)", clinic()),
              "Caregiver(Z1, Expertise, In, Childcare) AND Caregiver(Z1, Status, =, Present)");
}

TEST(Evaluate, ManpowerAddition) {
    EXPECT_EQ(run("ARITH Manpower(Healthcare_Assistant, Count) + Manpower(Healthcare_Assistant, Recruitment)", clinic()),
              "Manpower(Healthcare_Assistant, Count, =, 16)");
}

TEST(Evaluate, MalariaNegation) {
    ContextualSituation cs = clinic();
    EXPECT_EQ(run("NOT Patient(X, Suffering, from, Malaria)", cs), "NOT Patient(X, Suffering, from, Malaria)");
    QueryResult twice = evaluate(parse_query("NOT NOT Patient(X, Suffering, from, Malaria)"), cs);
    QueryResult plain = evaluate(parse_query("Patient(X, Suffering, from, Malaria)"), cs);
    ASSERT_TRUE(twice && plain);
    EXPECT_EQ(*twice, *plain);
}

TEST(Evaluate, PoorConnectivityDisjunction) {
    std::vector<ContextPredicate> preds{
        pred("Resource", "BSNL_Network", "Network", "Connectivity", "Very Poor"),
        pred("Resource", "Reliance_Network", "Network", "Connectivity", "Very Poor"),
    };
    EXPECT_EQ(render(evaluate(parse_query("OR Resource SAME ATTRIBUTE_VALUE"), preds)),
              "Resource(BSNL_Network, Connectivity, =, Very Poor) OR Resource(Reliance_Network, Connectivity, =, "
              "Very Poor)");
}

TEST(Evaluate, CrossCategoryChain) {
    std::vector<ContextPredicate> preds{
        pred("Season", "Weather", "Weather", "Affects", "BSNL_Network"),
        pred("Resource", "BSNL_Network", "Network", "Connectivity", "Very Poor"),
        pred("Caregiver", "Z1", "Caregiver", "Status", "Present"),
    };
    EXPECT_EQ(render(evaluate(parse_query("AND CHAIN FROM Season"), preds)),
              "Season(Weather, Affects, =, BSNL_Network) AND Resource(BSNL_Network, Connectivity, =, Very Poor)");
    EXPECT_EQ(render(evaluate(parse_query("AND CHAIN FROM Caregiver"), preds)), "NULL");
}

TEST(Evaluate, ArithmeticErrors) {
    ContextualSituation cs = clinic();
    EXPECT_EQ(error_code([&] { run("ARITH Manpower(Healthcare_Assistant, Count) + Manpower(Nobody, Count)", cs); }),
              "missing-operand");
    EXPECT_EQ(error_code([&] { run("ARITH Caregiver(Z1, Status) + Caregiver(Z1, Expertise)", cs); }),
              "incompatible-operands");
    EXPECT_EQ(error_code([&] { run("ARITH Manpower(Healthcare_Assistant, Count) + Healthcare_Assistant(Y, Status)", cs); }),
              "incompatible-operands");
}

TEST(EvaluateProperty, EmptySituation) {
    const std::vector<std::string> selections{
        "AND Resource WHERE parameter INSTANCE_OF Network", "AND * WHERE attr Status", "AND CHAIN",
        "OR * SAME ATTRIBUTE_VALUE", "OR * SAME INSTANCE_ATTRIBUTE"};
    ContextualSituation empty;
    for (const auto& q : selections) EXPECT_EQ(run(q, empty), "NULL") << q;
    EXPECT_EQ(error_code([&] { run("ARITH M(H, Count) + M(H, Recruitment)", empty); }), "missing-operand");
}

TEST(EvaluateProperty, AdditionCommutes) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> v(-50, 50);
    for (int i = 0; i < 100; ++i) {
        std::vector<ContextPredicate> preds{pred("Manpower", "H", "H", "Count", v(rng)),
                                            pred("Manpower", "H", "H", "Recruitment", v(rng))};
        auto ab = evaluate(parse_query("ARITH Manpower(H, Count) + Manpower(H, Recruitment)"), preds);
        auto ba = evaluate(parse_query("ARITH Manpower(H, Recruitment) + Manpower(H, Count)"), preds);
        ASSERT_TRUE(ab && ba);
        EXPECT_EQ(ab->atom.value, ba->atom.value);
    }
}

TEST(EvaluateProperty, DoubleNegationCancels) {
    ContextualSituation cs = clinic();
    for (const auto& p : predicates_of(cs)) {
        std::string literal = p.category + "(" + p.subject + ", " + p.attribute + ", " +
                              std::string(to_string(p.connector)) + ", \"" + p.value.to_string() + "\")";
        auto once = evaluate(parse_query(literal), cs);
        auto twice = evaluate(parse_query("NOT NOT " + literal), cs);
        ASSERT_TRUE(once && twice) << literal;
        EXPECT_EQ(*twice, *once);
    }
}

TEST(EvaluateProperty, MatchesSubsetEnumerationOracle) {
    std::mt19937 rng(424242);
    std::uniform_int_distribution<int> pick(0, 2), coin(0, 1);
    const std::vector<std::string> categories{"Resource", "Caregiver", "*"};
    const std::vector<std::string> attributes{"Status", "Expertise"};
    const std::vector<std::string> values{"Present", "Absent", "Arthritis"};
    for (int round = 0; round < 600; ++round) {
        auto preds = random_predicates(rng);
        const std::string cat = categories[pick(rng)];

        const std::string parameter = coin(rng) ? "Caregiver" : "Network";
        auto by_param = [&](const std::vector<ContextPredicate>& s) {
            return std::all_of(s.begin(), s.end(), [&](const ContextPredicate& p) {
                return in_category(cat, p) && lower(p.parameter) == lower(parameter);
            });
        };
        EXPECT_EQ(render(evaluate(parse_query("AND " + cat + " WHERE parameter INSTANCE_OF " + parameter), preds)),
                  subset_oracle(preds, by_param, "AND"));

        Leaf a{attributes[coin(rng)], values[pick(rng)]};
        Leaf b{attributes[coin(rng)], values[pick(rng)]};
        const bool conj = coin(rng);
        const std::string text = "AND " + cat + " WHERE (attr " + a.attribute + " = " + a.value + ") " +
                                 (conj ? "AND" : "OR") + " (attr " + b.attribute + " = " + b.value + ")";
        auto conditional = [&](const std::vector<ContextPredicate>& s) {
            for (const auto& p : s) {
                if (!in_category(cat, p) || (!a.matches(p) && !b.matches(p))) return false;
                if (lower(p.category) + "/" + lower(p.subject) !=
                    lower(s.front().category) + "/" + lower(s.front().subject)) {
                    return false;
                }
            }
            bool has_a = std::any_of(s.begin(), s.end(), [&](const ContextPredicate& p) { return a.matches(p); });
            bool has_b = std::any_of(s.begin(), s.end(), [&](const ContextPredicate& p) { return b.matches(p); });
            return conj ? has_a && has_b : has_a || has_b;
        };
        EXPECT_EQ(render(evaluate(parse_query(text), preds)), subset_oracle(preds, conditional, "AND")) << text;

        auto same_value = [&](const std::vector<ContextPredicate>& s) {
            for (const auto& p : s) {
                if (!in_category(cat, p)) return false;
                bool partner = std::any_of(s.begin(), s.end(), [&](const ContextPredicate& q) {
                    return (cat != "*" || lower(q.category) == lower(p.category)) &&
                           lower(q.attribute) == lower(p.attribute) && q.value == p.value &&
                           lower(q.subject) != lower(p.subject);
                });
                if (!partner) return false;
            }
            return true;
        };
        EXPECT_EQ(render(evaluate(parse_query("OR " + cat + " SAME ATTRIBUTE_VALUE"), preds)),
                  subset_oracle(preds, same_value, "OR"));

        auto same_instance = [&](const std::vector<ContextPredicate>& s) {
            for (const auto& p : s) {
                if (!in_category(cat, p)) return false;
                bool partner = std::any_of(s.begin(), s.end(), [&](const ContextPredicate& q) {
                    return (cat != "*" || lower(q.category) == lower(p.category)) &&
                           lower(q.attribute) == lower(p.attribute) && lower(q.subject) == lower(p.subject) &&
                           !(q.value == p.value);
                });
                if (!partner) return false;
            }
            return true;
        };
        EXPECT_EQ(render(evaluate(parse_query("OR " + cat + " SAME INSTANCE_ATTRIBUTE"), preds)),
                  subset_oracle(preds, same_instance, "OR"));
    }
}
