#include "doctest.h"
#include "mock_server.hpp"
#include "test_support.hpp"

#include "plsq/error.hpp"
#include "plsq/service.hpp"

#include <atomic>
#include <thread>

using namespace plsq;
using namespace plsq::testing;
using nlohmann::json;

namespace {

const std::filesystem::path fixtures{PLSQ_FIXTURES_DIR};

SessionService fixture_service(SessionService::Options options = {}) {
    return SessionService(load_corpus(fixtures / "corpus.json"), load_cache_directory(fixtures / "caches"),
                          std::move(options));
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::bad_request;
}

}  // namespace

TEST_CASE("create_session from a fixture task") {
    auto service = fixture_service();
    const json view = service.create({{"task_id", "scope_gym_classes"}});
    CHECK(view["version"] == 0);
    CHECK(view["turn"] == 0);
    CHECK(view["terminal"] == false);
    CHECK(view["utterance"] == "Which class does each gym offer?");
    REQUIRE(view["candidates"].is_array());
    CHECK(view["candidates"].size() <= 50);
    CHECK(view["candidates"].size() >= 2);
    double total = 0.0;
    for (const auto& c : view["candidates"]) {
        CHECK(c.contains("sql"));
        CHECK(c["glyph"]["rows"].is_number_unsigned());
        CHECK(c["glyph"]["cols"].is_number_unsigned());
        CHECK(c["x"].is_number());
        CHECK(c["cluster"].is_number());
        total += c["weight"].get<double>();
    }
    CHECK(total == doctest::Approx(1.0));
    REQUIRE_FALSE(view["variables"].empty());
    const auto& v = view["variables"][0];
    CHECK(v["ig_bits"].get<double>() > 0.0);
    CHECK(v["features"].is_array());
    CHECK(v["implicit_features"].is_array());
    CHECK(view["predicted_output"]["columns"].is_array());
    const auto& predicted = view["predicted_features"];
    REQUIRE_FALSE(predicted.empty());
    for (std::size_t i = 1; i < predicted.size(); ++i) {
        CHECK(predicted[i - 1]["probability"].get<double>() >= predicted[i]["probability"].get<double>());
    }
}

TEST_CASE("create_session error cases") {
    auto service = fixture_service();
    CHECK(code_of([&] { service.create({{"task_id", "no_such_task"}}); }) == ErrorCode::not_found);
    CHECK(code_of([&] {
              service.create({{"task_id", "scope_gym_classes"}, {"samples", {"SELEC x", "SELECT nope FROM gyms"}}});
          }) == ErrorCode::no_valid_candidates);
    CHECK(code_of([&] { service.create(json::array()); }) == ErrorCode::bad_request);
    CHECK(code_of([&] { service.create({{"utterance", "q"}}); }) == ErrorCode::bad_request);
    CHECK(code_of([&] { service.create({{"task_id", "scope_gym_classes"}, {"generate", true}}); }) ==
          ErrorCode::bad_request);
}

TEST_CASE("create_session from an inline database and samples") {
    auto service = fixture_service();
    const json view = service.create({{"utterance", "films"},
                                      {"db", to_json(film_db())},
                                      {"samples", {"SELECT name FROM films", "SELECT name FROM films WHERE duration > 100",
                                                   "SELECT name FROM films"}}});
    REQUIRE(view["candidates"].size() == 2);
    CHECK(view["candidates"][0]["weight"] == doctest::Approx(2.0 / 3.0));
    CHECK(service.tasks()["tasks"].size() == 8);
}

TEST_CASE("mutations follow the version contract") {
    auto service = fixture_service();
    const json v0 = service.create({{"task_id", "attach_venues_rooftop"}});
    const std::string id = v0["session_id"];
    const std::string var = v0["variables"][0]["id"];

    const json v1 = service.decision(id, {{"version", 0}, {"variable_id", var}, {"choice", "yes"}});
    CHECK(v1["version"] == 1);
    CHECK(v1["turn"] == 1);

    const json before = service.get(id);
    CHECK(code_of([&] { service.decision(id, {{"version", 0}, {"variable_id", var}, {"choice", "no"}}); }) ==
          ErrorCode::version_conflict);
    CHECK(service.get(id) == before);

    // A group no survivor has cannot be answered "yes".
    CHECK(code_of([&] { service.decision(id, {{"version", 1}, {"variable_id", "WHERE 1=0"}, {"choice", "yes"}}); }) ==
          ErrorCode::empty_result_set);
    CHECK(code_of([&] { service.decision(id, {{"version", 1}, {"variable_id", "??"}, {"choice", "yes"}}); }) ==
          ErrorCode::unknown_variable);
    CHECK(code_of([&] { service.decision(id, {{"version", 1}, {"variable_id", var}, {"choice", "maybe"}}); }) ==
          ErrorCode::bad_request);
    CHECK(code_of([&] { service.undo(id, json::object()); }) == ErrorCode::bad_request);
    CHECK(service.get(id) == before);

    const json v2 = service.undo(id, {{"version", 1}});
    CHECK(v2["version"] == 2);
    CHECK(v2["turn"] == 0);
    CHECK(v2["candidates"] == v0["candidates"]);
    CHECK(code_of([&] { service.undo(id, {{"version", 2}}); }) == ErrorCode::undo_at_root);

    const int first = v2["candidates"][0]["id"];
    const json v3 = service.select(id, {{"version", 2}, {"candidate_ids", {first}}});
    CHECK(v3["version"] == 3);
    CHECK(v3["terminal"] == true);
    CHECK(v3["variables"].empty());
    CHECK(code_of([&] { service.select(id, {{"version", 3}, {"candidate_ids", {9999}}}); }) ==
          ErrorCode::invalid_selection);

    const json log = service.export_log(id);
    REQUIRE(log["log"].size() == 3);
    CHECK(log["log"][0]["action"] == "decision");
    CHECK(log["log"][0]["turn"] == 0);
    CHECK(log["log"][1]["action"] == "undo");
    CHECK(log["log"][1]["turn"] == 1);
    CHECK(log["log"][2]["candidate_ids"] == json::array({first}));
    CHECK(code_of([&] { service.get("s999"); }) == ErrorCode::not_found);
}

TEST_CASE("an exported log replays to the served state") {
    auto service = fixture_service();
    json view = service.create({{"task_id", "vague_store_location"}});
    const std::string id = view["session_id"];
    for (int i = 0; i < 2 && !view["terminal"].get<bool>(); ++i) {
        view = service.decision(id, {{"version", view["version"]}, {"variable_id", view["variables"][0]["id"]},
                                     {"choice", i == 0 ? "no" : "yes"}});
    }
    const json exported = service.export_log(id);
    std::vector<Action> log;
    for (const auto& a : exported["log"]) log.push_back(action_from_json(a));
    const Corpus corpus = load_corpus(fixtures / "corpus.json");
    const Task& task = *corpus.find("vague_store_location");
    const auto initial =
        init_session(task.utterance, validate_candidates(load_candidate_cache(fixtures / "caches/vague_store_location.json"), task.db));
    const auto replayed = replay(initial, log);
    CHECK(json(replayed.ids()) == exported["candidate_ids"]);
    CHECK(state_view(id, view["version"], replayed) == service.get(id));
}

TEST_CASE("sessions write through to a snapshot directory") {
    const auto dir = std::filesystem::temp_directory_path() / "plsq_snapshots_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    SessionService::Options options;
    options.snapshot_dir = dir;
    auto service = fixture_service(options);
    const json v0 = service.create({{"task_id", "scope_pizza_toppings"}});
    const std::string id = v0["session_id"];
    service.decision(id, {{"version", 0}, {"variable_id", v0["variables"][0]["id"]}, {"choice", "yes"}});
    std::ifstream f(dir / (id + ".json"));
    const json snap = json::parse(f);
    CHECK(snap["version"] == 1);
    CHECK(snap["log"].size() == 1);
    CHECK(snap["state"] == service.get(id));
    std::filesystem::remove_all(dir);
}

TEST_CASE("racing mutations at one version: exactly one succeeds") {
    auto service = fixture_service();
    for (int round = 0; round < 25; ++round) {
        const json v0 = service.create({{"task_id", "scope_school_subjects"}});
        const std::string id = v0["session_id"];
        const std::string var = v0["variables"][0]["id"];
        std::atomic<int> ok{0}, conflict{0};
        std::atomic<bool> go{false};
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&, t] {
                while (!go.load()) std::this_thread::yield();
                try {
                    if (t % 2 == 0) {
                        service.decision(id, {{"version", 0}, {"variable_id", var}, {"choice", t == 0 ? "yes" : "no"}});
                    } else {
                        service.select(id, {{"version", 0}, {"candidate_ids", {v0["candidates"][0]["id"]}}});
                    }
                    ++ok;
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::version_conflict) ++conflict;
                }
            });
        }
        go = true;
        for (auto& th : threads) th.join();
        CHECK(ok == 1);
        CHECK(conflict == 3);
        CHECK(service.get(id)["version"] == 1);
    }
}

TEST_CASE("HTTP routes") {
    auto service = fixture_service();
    MockServer server;
    install_routes(server.server(), service);
    server.start();
    httplib::Client client("127.0.0.1", server.port());

    auto tasks = client.Get("/tasks");
    REQUIRE(tasks);
    CHECK(tasks->status == 200);
    CHECK(json::parse(tasks->body)["tasks"].size() == 8);

    auto created = client.Post("/sessions", R"({"task_id":"attach_books_before_1950"})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 200);
    const json v0 = json::parse(created->body);
    const std::string base = "/sessions/" + v0["session_id"].get<std::string>();

    auto g1 = client.Get(base);
    auto g2 = client.Get(base);
    REQUIRE(g1);
    REQUIRE(g2);
    CHECK(g1->status == 200);
    CHECK(g1->body == g2->body);
    CHECK(g1->body == created->body);

    const json body{{"version", 0}, {"variable_id", v0["variables"][0]["id"]}, {"choice", "yes"}};
    auto d = client.Post(base + "/decision", body.dump(), "application/json");
    REQUIRE(d);
    CHECK(d->status == 200);
    CHECK(json::parse(d->body)["version"] == 1);

    auto stale = client.Post(base + "/decision", body.dump(), "application/json");
    REQUIRE(stale);
    CHECK(stale->status == 409);
    CHECK(json::parse(stale->body)["code"] == "VERSION_CONFLICT");

    auto u = client.Post(base + "/undo", R"({"version":1})", "application/json");
    REQUIRE(u);
    CHECK(u->status == 200);
    auto root = client.Post(base + "/undo", R"({"version":2})", "application/json");
    REQUIRE(root);
    CHECK(root->status == 422);
    CHECK(json::parse(root->body)["code"] == "UNDO_AT_ROOT");

    auto sel = client.Post(base + "/select", R"({"version":2,"candidate_ids":[]})", "application/json");
    REQUIRE(sel);
    CHECK(sel->status == 422);
    CHECK(json::parse(sel->body)["code"] == "INVALID_SELECTION");

    auto ex = client.Get(base + "/export");
    REQUIRE(ex);
    CHECK(ex->status == 200);
    CHECK(json::parse(ex->body)["log"].size() == 2);

    auto missing = client.Get("/sessions/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["code"] == "NOT_FOUND");

    auto bad = client.Post("/sessions", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body)["code"] == "BAD_REQUEST");

    auto invalid = client.Post("/sessions", R"({"task_id":"vague_laptop_price","samples":["SELECT 1/0"]})",
                               "application/json");
    REQUIRE(invalid);
    CHECK(invalid->status == 422);
    CHECK(json::parse(invalid->body)["code"] == "NO_VALID_CANDIDATES");
}

TEST_CASE("http_status mapping") {
    CHECK(http_status(ErrorCode::not_found) == 404);
    CHECK(http_status(ErrorCode::version_conflict) == 409);
    CHECK(http_status(ErrorCode::empty_result_set) == 422);
    CHECK(http_status(ErrorCode::bad_request) == 400);
    CHECK(http_status(ErrorCode::network_error) == 502);
}
