#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

#include "plsq/error.hpp"
#include "plsq/llm_client.hpp"

#include <cmath>
#include <numeric>

using namespace plsq;
using namespace plsq::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::bad_request;
}

double weight_sum(const SessionState& s) { return std::accumulate(s.weights().begin(), s.weights().end(), 0.0); }

const DecisionVariable* find_var(const std::vector<DecisionVariable>& vars, const std::string& id) {
    for (const auto& v : vars) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

DecisionVariable singleton(const std::string& feature) {
    DecisionVariable v;
    v.group = {*parse_feature_id(feature)};
    v.id = variable_id(v.group_set());
    return v;
}

EngineConfig exact_config() {
    EngineConfig cfg;
    cfg.comparator = Comparator(ComparatorKind::exact);
    return cfg;
}

}  // namespace

TEST_CASE("init_session weights") {
    std::vector<Candidate> four;
    for (int i = 0; i < 4; ++i) four.push_back(synthetic(i, {"FROM t"}, i));
    const auto s = init_session("u", four);
    CHECK(s.weights() == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(s.turn() == 0);
    CHECK(s.meanings().size() == 4);
    CHECK(s.layout().size() == 4);

    CHECK(code_of([] { init_session("u", {}); }) == ErrorCode::no_valid_candidates);
}

TEST_CASE("sampling multiplicity becomes the prior") {
    const auto db = film_db();
    std::vector<std::string> samples;
    for (int i = 0; i < 10; ++i) samples.push_back("SELECT name FROM films");
    for (int i = 0; i < 40; ++i) samples.push_back("SELECT name FROM films WHERE id = " + std::to_string(i));
    const auto v = validate_samples(samples, db);
    const auto s = init_session("u", v.candidates);
    CHECK(s.weight_of(0).value() == doctest::Approx(0.2));
    CHECK(s.size() == 41);
}

TEST_CASE("equivalence classes") {
    const auto db = film_db();
    const auto v = validate_samples({"SELECT product FROM sales", "SELECT s.product FROM sales s"}, db);
    CHECK(v.candidates.size() == 1);  // merged at canonicalization
    // alias variants that differ syntactically still share one meaning
    const auto w = validate_samples({"SELECT product FROM sales", "SELECT s.product FROM sales s WHERE 1 = 1"}, db);
    REQUIRE(w.candidates.size() == 2);
    const auto s = init_session("u", w.candidates);
    CHECK(s.meanings().size() == 1);
    CHECK(is_terminal(s));
    CHECK(rank_variables(s).empty());

    std::vector<Candidate> pairs{synthetic(0, {"FROM t"}, 1), synthetic(1, {"FROM t", "WHERE a"}, 1),
                                 synthetic(2, {"FROM t"}, 2), synthetic(3, {"FROM t", "WHERE b"}, 2)};
    const auto p = init_session("u", pairs);
    REQUIRE(p.meanings().size() == 2);
    CHECK(p.meanings()[0].mass == doctest::Approx(0.5));
    CHECK(p.meanings()[1].mass == doctest::Approx(0.5));
    CHECK(p.meanings()[0].member_ids == std::vector<int>{0, 1});
    CHECK(equivalence_classes(p).size() == 2);
}

TEST_CASE("characteristic group lift of a three-member cluster") {
    std::vector<Candidate> cands;
    for (int i = 0; i < 3; ++i) cands.push_back(synthetic(i, {"FROM t", "WHERE g"}, 100));
    for (int i = 3; i < 12; ++i) cands.push_back(synthetic(i, {"FROM t", "SELECT c" + std::to_string(i % 3)}, i));
    const auto s = init_session("u", cands, exact_config());
    const auto vars = characteristic_groups(s);
    const auto* g = find_var(vars, "WHERE g");
    REQUIRE(g != nullptr);
    CHECK(g->source_cluster == std::optional<std::size_t>(0));
    CHECK(g->lift == doctest::Approx(4.0));
    CHECK(lift_of(s, g->group_set(), 0).p_in == 1.0);
    CHECK(lift_of(s, g->group_set(), 0).p_all == 0.25);
    // FROM t is in every candidate: degenerate
    CHECK(find_var(vars, "FROM t") == nullptr);
    for (const auto& v : vars) CHECK(v.group_set().count(*parse_feature_id("FROM t")) == 0);
}

TEST_CASE("implicitly included features") {
    std::vector<Candidate> cands{synthetic(0, {"SELECT review", "JOIN film", "FROM r"}, 0),
                                 synthetic(1, {"SELECT review", "JOIN film", "FROM r", "WHERE x"}, 1),
                                 synthetic(2, {"SELECT title", "JOIN film", "FROM r"}, 2),
                                 synthetic(3, {"SELECT title", "FROM r"}, 3)};
    const auto s = init_session("u", cands);
    const auto vars = characteristic_groups(s);
    const auto* v = find_var(vars, "SELECT review");
    REQUIRE(v != nullptr);
    bool found = false;
    for (const auto& f : v->implicit_features) {
        CHECK(v->group_set().count(f.feature) == 0);
        if (f.feature.id() == "JOIN film") {
            found = true;
            CHECK(f.probability == 1.0);
        }
        CHECK(f.feature.id() != "WHERE x");
    }
    CHECK(found);
    CHECK(v->example_candidate_id == 0);
}

TEST_CASE("information gain examples") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE a", "WHERE b"}, 0),
                                 synthetic(1, {"FROM t", "WHERE a"}, 1), synthetic(2, {"FROM t"}, 2),
                                 synthetic(3, {"FROM t"}, 3)};
    const auto s = init_session("u", cands);
    CHECK(information_gain(s, singleton("WHERE a")) == doctest::Approx(1.0));
    CHECK(information_gain(s, singleton("FROM t")) == 0.0);
    CHECK(information_gain(s, singleton("WHERE b")) == doctest::Approx(2.0 - 0.75 * std::log2(3.0)));
    CHECK(information_gain(s, singleton("WHERE b")) == doctest::Approx(0.8113).epsilon(1e-4));
}

TEST_CASE("ranking order and tie-break") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE half", "WHERE b", "WHERE c"}, 0),
                                 synthetic(1, {"FROM t", "WHERE half"}, 1), synthetic(2, {"FROM t"}, 2),
                                 synthetic(3, {"FROM t"}, 3)};
    const auto s = init_session("u", cands);
    const auto r = rank_variables(s);
    REQUIRE(!r.empty());
    CHECK(r[0].id == "WHERE half");
    CHECK(r[0].ig_bits == doctest::Approx(1.0));
    // WHERE b and WHERE c split identically: the cluster group {b, c} ranks
    // first on size, then the singletons by id
    std::vector<std::string> tail;
    for (std::size_t i = 1; i < r.size(); ++i) tail.push_back(r[i].id);
    const std::vector<std::string> expected{"WHERE b & WHERE c & WHERE half", "WHERE b", "WHERE c"};
    CHECK(tail == expected);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].ig_bits >= r[i].ig_bits - 1e-12);
    CHECK(rank_variables(s).size() == r.size());
    CHECK(s.ranking().size() == r.size());
}

TEST_CASE("apply_decision yes, no and an emptying answer") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE g"}, 0), synthetic(1, {"FROM t", "WHERE g"}, 1),
                                 synthetic(2, {"FROM t"}, 2)};
    const auto s = init_session("u", cands);
    const auto yes = apply_decision(s, singleton("WHERE g"), Choice::yes);
    CHECK(yes.ids() == std::vector<int>{0, 1});
    CHECK(yes.weights() == std::vector<double>{0.5, 0.5});
    CHECK(yes.turn() == 1);
    const auto no = apply_decision(s, singleton("WHERE g"), Choice::no);
    CHECK(no.ids() == std::vector<int>{2});
    CHECK(no.weights() == std::vector<double>{1.0});
    CHECK(is_terminal(no));

    const auto all = apply_decision(s, singleton("FROM t"), Choice::yes);
    CHECK(all.ids() == s.ids());
    CHECK(all.weights() == s.weights());
    CHECK(code_of([&] { apply_decision(s, singleton("FROM t"), Choice::no); }) == ErrorCode::empty_result_set);
    CHECK(code_of([&] { apply_decision(s, "nothing at all", Choice::yes); }) == ErrorCode::unknown_variable);
    // Ids outside the ranking are explicit groups.
    CHECK(code_of([&] { apply_decision(s, "WHERE nothing", Choice::yes); }) == ErrorCode::empty_result_set);
    CHECK(apply_decision(s, "WHERE nothing", Choice::no).ids() == s.ids());
    const auto both = parse_variable_id("FROM t & WHERE g");
    REQUIRE(both);
    CHECK(variable_id(*both) == "FROM t & WHERE g");
    CHECK_FALSE(parse_variable_id("FROM t & bogus"));
    CHECK(apply_decision(s, "WHERE g", Choice::yes).ids() == yes.ids());
}

TEST_CASE("apply_selection") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE a"}, 0), synthetic(1, {"FROM t", "WHERE a"}, 0),
                                 synthetic(2, {"FROM t"}, 5), synthetic(3, {"FROM t", "WHERE c"}, 6)};
    const auto s = init_session("u", cands, exact_config());
    CHECK(apply_selection(s, s.ids()).ids() == s.ids());
    const auto one = apply_selection(s, {3});
    CHECK(is_terminal(one));
    CHECK(one.weights() == std::vector<double>{1.0});
    // members of cluster 0
    std::vector<int> members;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.clusters().labels[k] == 0) members.push_back(s.ids()[k]);
    }
    CHECK(members == std::vector<int>{0, 1});
    CHECK(apply_selection(s, members).ids() == members);
    CHECK(code_of([&] { apply_selection(s, {}); }) == ErrorCode::invalid_selection);
    CHECK(code_of([&] { apply_selection(s, {0, 99}); }) == ErrorCode::invalid_selection);
    CHECK(code_of([&] { apply_selection(one, {0}); }) == ErrorCode::invalid_selection);
}

TEST_CASE("undo restores the exact prior state") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE a"}, 0, 3), synthetic(1, {"FROM t", "WHERE a"}, 1),
                                 synthetic(2, {"FROM t", "WHERE b"}, 2), synthetic(3, {"FROM t"}, 3, 2)};
    const auto s0 = init_session("u", cands);
    const auto s1 = apply_decision(s0, singleton("WHERE a"), Choice::no);
    const auto s2 = apply_decision(s1, singleton("WHERE b"), Choice::no);
    const auto back1 = undo(s2);
    CHECK(back1.ids() == s1.ids());
    CHECK(back1.weights() == s1.weights());
    CHECK(back1.turn() == 1);
    const auto back0 = undo(back1);
    CHECK(back0.ids() == s0.ids());
    CHECK(back0.weights() == s0.weights());
    CHECK(back0.turn() == 0);
    CHECK(code_of([&] { undo(s0); }) == ErrorCode::undo_at_root);
}

TEST_CASE("predicted features") {
    std::vector<Candidate> cands{synthetic(0, {"FROM t", "WHERE a"}, 0), synthetic(1, {"FROM t", "WHERE a"}, 1),
                                 synthetic(2, {"FROM t"}, 2), synthetic(3, {"FROM t", "WHERE z"}, 3)};
    const auto s = init_session("u", cands);
    const auto p = predicted_features(s);
    REQUIRE(p.size() == 3);
    CHECK(p[0].feature.id() == "FROM t");
    CHECK(p[0].probability == 1.0);
    CHECK(p[0].determined);
    CHECK(p[1].feature.id() == "WHERE a");
    CHECK(p[1].probability == doctest::Approx(0.5));
    CHECK_FALSE(p[1].determined);
    const auto filtered = apply_decision(s, singleton("WHERE z"), Choice::no);
    for (const auto& f : predicted_features(filtered)) CHECK(f.feature.id() != "WHERE z");
}

TEST_CASE("is_terminal") {
    CHECK(is_terminal(init_session("u", {synthetic(0, {"FROM t"}, 0)})));
    CHECK_FALSE(is_terminal(init_session("u", {synthetic(0, {"FROM t"}, 0), synthetic(1, {"FROM t"}, 1)})));
}

TEST_CASE("action log JSON") {
    Action a;
    a.kind = ActionKind::decision;
    a.turn = 2;
    a.variable_id = "WHERE a";
    a.choice = Choice::no;
    CHECK(to_json(a).dump() == R"({"action":"decision","choice":"no","turn":2,"variable_id":"WHERE a"})");
    const Action back = action_from_json(to_json(a));
    CHECK(back.variable_id == "WHERE a");
    CHECK(back.choice == Choice::no);
    Action sel;
    sel.kind = ActionKind::selection;
    sel.candidate_ids = {1, 4};
    CHECK(to_json(sel).dump() == R"({"action":"selection","candidate_ids":[1,4],"turn":0})");
    Action u;
    u.kind = ActionKind::undo;
    CHECK(action_from_json(to_json(u)).kind == ActionKind::undo);
}

TEST_CASE("property: information gain matches the enumeration oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = random_instance(rng);
        const auto s = init_session("u", inst.candidates);
        const double h = entropy_bits([&] {
            std::vector<double> m;
            for (const auto& x : s.meanings()) m.push_back(x.mass);
            return m;
        }());
        for (const auto& v : characteristic_groups(s)) {
            const double ig = information_gain(s, v);
            CHECK(std::abs(ig - oracle_information_gain(oracle_view(s), v.group_set())) < 1e-9);
            CHECK(ig >= 0.0);
            CHECK(ig <= h + 1e-12);
        }
    }
}

TEST_CASE("IG of a variable separating a two-meaning state equals the entropy") {
    const auto s = init_session("u", {synthetic(0, {"FROM t", "WHERE a"}, 0, 3), synthetic(1, {"FROM t"}, 1, 1)});
    const double h = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
    CHECK(information_gain(s, singleton("WHERE a")) == h);
}

TEST_CASE("property: random walks conserve weight and replay exactly") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const auto inst = random_instance(rng);
        SessionState s = init_session("u", inst.candidates);
        const SessionState initial = s;
        std::vector<Action> log;
        for (int step = 0; step < 8; ++step) {
            const auto r = rng() % 4;
            try {
                if (r == 0 && s.turn() > 0) {
                    s = undo(s);
                    Action a;
                    a.kind = ActionKind::undo;
                    log.push_back(a);
                } else if (r == 1 && s.size() > 1) {
                    std::vector<int> pick;
                    for (int id : s.ids()) {
                        if (rng() % 2) pick.push_back(id);
                    }
                    if (pick.empty()) pick.push_back(s.ids().front());
                    s = apply_selection(s, pick);
                    log.push_back(s.history().back().action);
                } else if (!s.ranking().empty()) {
                    const auto& v = s.ranking()[rng() % s.ranking().size()];
                    s = apply_decision(s, v.id, rng() % 2 ? Choice::yes : Choice::no);
                    log.push_back(s.history().back().action);
                }
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::empty_result_set);
            }
            CHECK(std::abs(weight_sum(s) - 1.0) < 1e-9);
            CHECK(s.turn() == s.history().size());
            CHECK(!s.ids().empty());
        }
        const auto replayed = replay(initial, log);
        CHECK(replayed.ids() == s.ids());
        CHECK(replayed.weights() == s.weights());
        const auto from_stack = replay(initial, history_actions(s));
        CHECK(from_stack.ids() == s.ids());
        CHECK(from_stack.weights() == s.weights());
    }
}
