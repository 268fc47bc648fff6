#include "plsq/llm_client.hpp"

#include "plsq/error.hpp"
#include "plsq/executor.hpp"
#include "plsq/http_util.hpp"
#include "plsq/sql/parser.hpp"

#include <atomic>
#include <cstdlib>
#include <map>
#include <optional>
#include <thread>

namespace plsq {

using nlohmann::json;

namespace {

constexpr std::string_view instruction = "Translate the question into a single SQL query for this schema.";

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

void SamplingConfig::apply_environment() {
    if (endpoint.empty()) {
        if (const char* e = std::getenv("PLSQ_LLM_ENDPOINT")) endpoint = e;
    }
    if (api_key.empty()) {
        if (const char* k = std::getenv("PLSQ_LLM_API_KEY")) api_key = k;
    }
}

void SamplingConfig::validate() const {
    if (n < 1) throw Error(ErrorCode::bad_request, "sample count must be at least 1");
    if (!(temperature >= 0.0)) throw Error(ErrorCode::bad_request, "temperature must be non-negative");
    if (endpoint.empty()) throw Error(ErrorCode::bad_request, "no LLM endpoint configured (PLSQ_LLM_ENDPOINT)");
    (void)http::parse_url(endpoint);
}

std::string render_schema(const DatabaseSpec& db) {
    std::string out;
    for (const auto& t : db.tables) {
        out += "CREATE TABLE " + t.name + " (";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            if (i) out += ", ";
            std::string type;
            switch (t.columns[i].type) {
                case ColumnType::text: type = "TEXT"; break;
                case ColumnType::integer: type = "INTEGER"; break;
                case ColumnType::real: type = "REAL"; break;
            }
            out += t.columns[i].name + " " + type;
        }
        out += ");\n";
    }
    return out;
}

json prompt_messages(const Task& task, const SamplingConfig&) {
    return json::array({{{"role", "system"}, {"content", std::string(instruction) + "\n\n" + render_schema(task.db)}},
                        {{"role", "user"}, {"content", task.utterance}}});
}

json chat_request(const Task& task, const SamplingConfig& cfg) {
    return {{"model", cfg.model}, {"temperature", cfg.temperature}, {"messages", prompt_messages(task, cfg)}};
}

std::string extract_sql(std::string_view message) {
    std::string body;
    const auto open = message.find("```");
    if (open != std::string_view::npos) {
        auto start = message.find('\n', open + 3);
        const auto close = message.find("```", open + 3);
        if (close != std::string_view::npos && (start == std::string_view::npos || start > close)) {
            // single-line fence: ```SELECT 1```
            body = std::string(message.substr(open + 3, close - open - 3));
        } else if (start != std::string_view::npos) {
            ++start;
            body = std::string(message.substr(start, close == std::string_view::npos ? std::string_view::npos
                                                                                        : close - start));
        }
    } else {
        body = std::string(message);
    }
    body = trim(body);
    while (!body.empty() && body.back() == ';') body = trim(std::string_view(body).substr(0, body.size() - 1));
    return body;
}

CandidateCache generate_candidates(const Task& task, const SamplingConfig& cfg) {
    cfg.validate();
    const std::string body = chat_request(task, cfg).dump();
    http::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + cfg.api_key);

    std::vector<std::string> samples(cfg.n);
    std::vector<std::optional<std::string>> failures(cfg.n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.n || failed.load()) return;
            try {
                const std::string response = http::post_json(cfg.endpoint, body, cfg.timeout, headers);
                try {
                    const json j = json::parse(response);
                    const auto& content = j.at("choices").at(0).at("message").at("content");
                    samples[i] = content.is_string() ? extract_sql(content.get<std::string>()) : std::string();
                } catch (const json::exception&) {
                    samples[i].clear();
                }
            } catch (const Error& e) {
                failures[i] = e.what();
                failed = true;
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(cfg.max_parallel, 1, cfg.n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (const auto& f : failures) {
        if (f) throw Error(ErrorCode::network_error, *f);
    }
    return CandidateCache{task.id, cfg.model, cfg.temperature, std::move(samples)};
}

ValidationResult validate_samples(const std::vector<std::string>& samples, const DatabaseSpec& db) {
    ValidationResult out;
    std::map<std::string, std::size_t> by_sql;  // canonical text -> candidate slot
    std::vector<std::size_t> multiplicity;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (trim(samples[i]).empty()) {
            out.rejected.push_back({i, "empty sample"});
            continue;
        }
        try {
            const auto ast = sql::parse_sql(samples[i], db);
            std::string canonical = sql::canonical_sql(ast);
            if (auto it = by_sql.find(canonical); it != by_sql.end()) {
                ++out.valid_samples;
                ++multiplicity[it->second];
                continue;
            }
            Candidate c;
            c.id = static_cast<int>(i);
            c.features = extract_features(ast);
            c.result = execute(ast, db);
            c.sql = std::move(canonical);
            ++out.valid_samples;
            by_sql.emplace(c.sql, out.candidates.size());
            multiplicity.push_back(1);
            out.candidates.push_back(std::move(c));
        } catch (const Error& e) {
            out.rejected.push_back({i, std::string(to_string(e.code())) + ": " + e.what()});
        }
    }
    if (out.candidates.empty()) throw Error(ErrorCode::no_valid_candidates, "no sample parsed and executed");
    for (std::size_t k = 0; k < out.candidates.size(); ++k) {
        out.candidates[k].weight = static_cast<double>(multiplicity[k]) / static_cast<double>(out.valid_samples);
    }
    return out;
}

std::vector<Candidate> validate_candidates(const CandidateCache& cache, const DatabaseSpec& db) {
    return validate_samples(cache.samples, db).candidates;
}

}  // namespace plsq
