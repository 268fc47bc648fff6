#pragma once

#include "plsq/corpus.hpp"
#include "plsq/engine.hpp"
#include "plsq/error.hpp"
#include "plsq/llm_client.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace plsq {

nlohmann::json to_json(const ResultTable& table);

/// The client-facing projection of a session state.
nlohmann::json state_view(const std::string& session_id, long long version, const SessionState& state);

class SessionService {
public:
    struct Options {
        std::optional<std::filesystem::path> snapshot_dir;
        EngineConfig engine;
        /// Used only when a create request asks for fresh sampling.
        std::optional<SamplingConfig> sampling;
    };

    SessionService(Corpus corpus, std::vector<CandidateCache> caches, Options options);

    /// Request: {"task_id"} resolves the task and its cache; "samples" (list
    /// of SQL strings) or "cache" (cache object) replace the cache; "db" and
    /// "utterance" allow a task-free session; "generate": true samples
    /// through the configured endpoint.
    nlohmann::json create(const nlohmann::json& request);
    nlohmann::json get(const std::string& id) const;
    nlohmann::json decision(const std::string& id, const nlohmann::json& body);
    nlohmann::json select(const std::string& id, const nlohmann::json& body);
    nlohmann::json undo(const std::string& id, const nlohmann::json& body);
    nlohmann::json export_log(const std::string& id) const;
    nlohmann::json tasks() const;

private:
    struct Session {
        std::string id;
        std::string task_id;
        mutable std::mutex mutex;
        SessionState initial;
        SessionState state;
        long long version{0};
        std::vector<Action> log;
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    template <typename F>
    nlohmann::json mutate(const std::string& id, const nlohmann::json& body, F&& apply);
    void snapshot(const Session& s) const;

    Corpus corpus_;
    std::vector<CandidateCache> caches_;
    Options options_;
    mutable std::mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    long long next_id_{1};
};

/// HTTP status for an error code.
int http_status(ErrorCode code) noexcept;

/// Registers every endpoint on `server`.
void install_routes(httplib::Server& server, SessionService& service);

}  // namespace plsq
