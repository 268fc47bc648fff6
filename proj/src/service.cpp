#include "plsq/service.hpp"

#include "plsq/error.hpp"

#include "httplib.h"

#include <algorithm>

namespace plsq {

using nlohmann::json;

namespace {

json cell(const Value& v) {
    if (v.is_null()) return nullptr;
    if (v.is_integer()) return v.as_integer();
    if (v.is_real()) return v.as_real();
    return v.as_text();
}

std::vector<std::string> feature_strings(const FeatureSet& fs) {
    std::vector<std::string> out;
    for (const auto& f : fs) out.push_back(f.id());
    return out;
}

long long version_field(const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    auto it = body.find("version");
    if (it == body.end() || !it->is_number_integer()) {
        throw Error(ErrorCode::bad_request, "field 'version' (integer) is required");
    }
    return it->get<long long>();
}

}  // namespace

json to_json(const ResultTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        json row = json::array();
        for (const auto& v : r) row.push_back(cell(v));
        rows.push_back(std::move(row));
    }
    return {{"columns", table.columns}, {"rows", std::move(rows)}, {"ordered", table.ordered}};
}

json state_view(const std::string& session_id, long long version, const SessionState& state) {
    json candidates = json::array();
    for (std::size_t k = 0; k < state.size(); ++k) {
        const Candidate& c = state.candidate(k);
        candidates.push_back({{"id", c.id},
                              {"sql", c.sql},
                              {"features", feature_strings(c.features)},
                              {"glyph", {{"rows", c.result.row_count()}, {"cols", c.result.column_count()}}},
                              {"x", state.layout()[k].x},
                              {"y", state.layout()[k].y},
                              {"cluster", state.clusters().labels[k]},
                              {"meaning", state.meaning_of()[k]},
                              {"weight", state.weights()[k]}});
    }
    json variables = json::array();
    for (const auto& v : state.ranking()) {
        json features = json::array();
        for (const auto& f : v.group) features.push_back(f.id());
        json implicit = json::array();
        for (const auto& f : v.implicit_features) {
            implicit.push_back({{"feature", f.feature.id()}, {"probability", f.probability}});
        }
        variables.push_back({{"id", v.id},
                             {"features", std::move(features)},
                             {"implicit_features", std::move(implicit)},
                             {"example_candidate_id", v.example_candidate_id},
                             {"ig_bits", v.ig_bits},
                             {"lift", v.lift},
                             {"source_cluster", v.source_cluster ? json(*v.source_cluster) : json(nullptr)}});
    }
    json predicted = json::array();
    for (const auto& p : predicted_features(state)) {
        predicted.push_back({{"feature", p.feature.id()}, {"probability", p.probability}, {"determined", p.determined}});
    }
    const Candidate& top = state.candidate(top_candidate(state));
    return {{"session_id", session_id},
            {"version", version},
            {"utterance", state.utterance()},
            {"turn", state.turn()},
            {"terminal", is_terminal(state)},
            {"candidates", std::move(candidates)},
            {"variables", std::move(variables)},
            {"predicted_features", std::move(predicted)},
            {"predicted_sql", top.sql},
            {"predicted_output", to_json(top.result)}};
}

SessionService::SessionService(Corpus corpus, std::vector<CandidateCache> caches, Options options)
    : corpus_(std::move(corpus)), caches_(std::move(caches)), options_(std::move(options)) {}

json SessionService::create(const json& request) {
    if (!request.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    const Task* task = nullptr;
    std::string task_id;
    if (auto it = request.find("task_id"); it != request.end()) {
        if (!it->is_string()) throw Error(ErrorCode::bad_request, "'task_id' must be a string");
        task_id = it->get<std::string>();
        task = corpus_.find(task_id);
        if (!task) throw Error(ErrorCode::not_found, "unknown task '" + task_id + "'");
    }

    DatabaseSpec db;
    std::string utterance;
    if (task) {
        db = task->db;
        utterance = task->utterance;
    }
    if (auto it = request.find("db"); it != request.end()) {
        try {
            db = database_from_json(*it);
            db.validate();
        } catch (const Error& e) {
            throw Error(ErrorCode::bad_request, std::string("invalid 'db': ") + e.what());
        }
    } else if (!task) {
        throw Error(ErrorCode::bad_request, "either 'task_id' or 'db' is required");
    }
    if (auto it = request.find("utterance"); it != request.end()) {
        if (!it->is_string()) throw Error(ErrorCode::bad_request, "'utterance' must be a string");
        utterance = it->get<std::string>();
    }

    std::vector<std::string> samples;
    if (auto it = request.find("samples"); it != request.end()) {
        if (!it->is_array()) throw Error(ErrorCode::bad_request, "'samples' must be a list of SQL strings");
        for (const auto& s : *it) {
            if (!s.is_string()) throw Error(ErrorCode::bad_request, "'samples' must be a list of SQL strings");
            samples.push_back(s.get<std::string>());
        }
    } else if (auto c = request.find("cache"); c != request.end()) {
        try {
            samples = cache_from_json(*c).samples;
        } catch (const Error& e) {
            throw Error(ErrorCode::bad_request, std::string("invalid 'cache': ") + e.what());
        }
    } else if (request.value("generate", false)) {
        if (!options_.sampling) throw Error(ErrorCode::bad_request, "sampling is not configured on this server");
        Task t = task ? *task : Task{};
        t.db = db;
        t.utterance = utterance;
        samples = generate_candidates(t, *options_.sampling).samples;
    } else if (task) {
        auto it = std::find_if(caches_.begin(), caches_.end(), [&](const CandidateCache& c) { return c.task_id == task_id; });
        if (it == caches_.end()) throw Error(ErrorCode::not_found, "no candidate cache for task '" + task_id + "'");
        samples = it->samples;
    } else {
        throw Error(ErrorCode::bad_request, "no candidates: give 'samples', 'cache' or a task with a cache");
    }

    auto candidates = validate_samples(samples, db).candidates;
    auto session = std::make_shared<Session>();
    session->task_id = task_id;
    session->initial = init_session(utterance, std::move(candidates), options_.engine);
    session->state = session->initial;
    {
        std::lock_guard lock(registry_mutex_);
        session->id = "s" + std::to_string(next_id_++);
        sessions_.emplace(session->id, session);
    }
    std::lock_guard lock(session->mutex);
    snapshot(*session);
    return state_view(session->id, session->version, session->state);
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) const {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
    return it->second;
}

json SessionService::get(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mutex);
    return state_view(s->id, s->version, s->state);
}

template <typename F>
json SessionService::mutate(const std::string& id, const json& body, F&& apply) {
    const long long version = version_field(body);
    const auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (version != s->version) {
        throw Error(ErrorCode::version_conflict, "session is at version " + std::to_string(s->version) +
                                                     ", request was for version " + std::to_string(version));
    }
    SessionState next = apply(s->state);
    Action action;
    if (next.turn() > s->state.turn()) {
        action = next.history().back().action;
    } else {
        action.kind = ActionKind::undo;
        action.turn = static_cast<int>(s->state.turn());
    }
    s->state = std::move(next);
    s->log.push_back(std::move(action));
    ++s->version;
    snapshot(*s);
    return state_view(s->id, s->version, s->state);
}

json SessionService::decision(const std::string& id, const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    const auto v = body.find("variable_id");
    const auto c = body.find("choice");
    if (v == body.end() || !v->is_string()) throw Error(ErrorCode::bad_request, "field 'variable_id' is required");
    if (c == body.end() || !c->is_string() || !choice_from_string(c->get<std::string>())) {
        throw Error(ErrorCode::bad_request, "field 'choice' must be \"yes\" or \"no\"");
    }
    const std::string variable = v->get<std::string>();
    const Choice choice = *choice_from_string(c->get<std::string>());
    return mutate(id, body, [&](const SessionState& s) { return apply_decision(s, variable, choice); });
}

json SessionService::select(const std::string& id, const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    const auto ids = body.find("candidate_ids");
    if (ids == body.end() || !ids->is_array()) throw Error(ErrorCode::bad_request, "field 'candidate_ids' is required");
    std::vector<int> wanted;
    for (const auto& x : *ids) {
        if (!x.is_number_integer()) throw Error(ErrorCode::bad_request, "candidate ids must be integers");
        wanted.push_back(x.get<int>());
    }
    return mutate(id, body, [&](const SessionState& s) { return apply_selection(s, wanted); });
}

json SessionService::undo(const std::string& id, const json& body) {
    return mutate(id, body, [](const SessionState& s) { return plsq::undo(s); });
}

json SessionService::export_log(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mutex);
    json log = json::array();
    for (const auto& a : s->log) log.push_back(to_json(a));
    json view{{"session_id", s->id},
              {"version", s->version},
              {"utterance", s->state.utterance()},
              {"initial_candidate_ids", s->initial.ids()},
              {"candidate_ids", s->state.ids()},
              {"log", std::move(log)}};
    if (!s->task_id.empty()) view["task_id"] = s->task_id;
    return view;
}

json SessionService::tasks() const {
    json out = json::array();
    for (const auto& t : corpus_.tasks) {
        const bool cached = std::any_of(caches_.begin(), caches_.end(), [&](const CandidateCache& c) { return c.task_id == t.id; });
        json tables = json::array();
        for (const auto& table : t.db.tables) tables.push_back(table.name);
        out.push_back({{"id", t.id},
                       {"utterance", t.utterance},
                       {"ambiguity_type", t.ambiguity_type ? json(to_string(*t.ambiguity_type)) : json(nullptr)},
                       {"gold_count", t.gold_sqls.size()},
                       {"tables", std::move(tables)},
                       {"has_cache", cached}});
    }
    return {{"tasks", std::move(out)}};
}

void SessionService::snapshot(const Session& s) const {
    if (!options_.snapshot_dir) return;
    json log = json::array();
    for (const auto& a : s.log) log.push_back(to_json(a));
    json doc{{"session_id", s.id},
             {"version", s.version},
             {"task_id", s.task_id},
             {"log", std::move(log)},
             {"state", state_view(s.id, s.version, s.state)}};
    write_json_file(*options_.snapshot_dir / (s.id + ".json"), doc);
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::version_conflict: return 409;
        case ErrorCode::bad_request:
        case ErrorCode::parse_error: return 400;
        case ErrorCode::empty_result_set:
        case ErrorCode::undo_at_root:
        case ErrorCode::unknown_variable:
        case ErrorCode::invalid_selection:
        case ErrorCode::no_valid_candidates:
        case ErrorCode::validation_error:
        case ErrorCode::syntax_error:
        case ErrorCode::resolution_error:
        case ErrorCode::unsupported_construct:
        case ErrorCode::execution_error: return 422;
        case ErrorCode::network_error: return 502;
        case ErrorCode::comparator_unavailable: return 503;
    }
    return 500;
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& handler) {
    try {
        reply(res, 200, handler());
    } catch (const Error& e) {
        reply(res, http_status(e.code()), {{"code", to_string(e.code())}, {"message", e.what()}});
    } catch (const json::exception& e) {
        reply(res, 400, {{"code", "BAD_REQUEST"}, {"message", e.what()}});
    } catch (const std::exception& e) {
        reply(res, 500, {{"code", "INTERNAL"}, {"message", e.what()}});
    }
}

json body_of(const httplib::Request& req) {
    try {
        return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::bad_request, std::string("malformed JSON body: ") + e.what());
    }
}

}  // namespace

void install_routes(httplib::Server& server, SessionService& service) {
    server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.create(body_of(req)); });
    });
    server.Get(R"(/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.get(req.matches[1]); });
    });
    server.Post(R"(/sessions/([^/]+)/decision)", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.decision(req.matches[1], body_of(req)); });
    });
    server.Post(R"(/sessions/([^/]+)/select)", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.select(req.matches[1], body_of(req)); });
    });
    server.Post(R"(/sessions/([^/]+)/undo)", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.undo(req.matches[1], body_of(req)); });
    });
    server.Get(R"(/sessions/([^/]+)/export)", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { return service.export_log(req.matches[1]); });
    });
    server.Get("/tasks", [&](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { return service.tasks(); });
    });
}

}  // namespace plsq
