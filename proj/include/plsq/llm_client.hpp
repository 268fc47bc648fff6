#pragma once

#include "plsq/corpus.hpp"
#include "plsq/engine.hpp"

#include "json.hpp"

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace plsq {

struct SamplingConfig {
    std::string endpoint;  // chat-completions URL
    std::string model{"gpt-4o"};
    std::string api_key;
    std::size_t n{50};
    double temperature{0.7};
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};
    std::size_t max_parallel{4};
    std::string prompt_template{"sql-v1"};

    /// Fills endpoint and api_key from PLSQ_LLM_ENDPOINT / PLSQ_LLM_API_KEY
    /// where they are unset.
    void apply_environment();
    /// Throws Error(bad_request) when n < 1, temperature < 0 or the
    /// endpoint is missing.
    void validate() const;
};

/// CREATE TABLE statements for every table, one per line.
std::string render_schema(const DatabaseSpec& db);

/// Chat messages for one sample: the fixed instruction plus schema as the
/// system message, the utterance as the user message.
nlohmann::json prompt_messages(const Task& task, const SamplingConfig& cfg);
nlohmann::json chat_request(const Task& task, const SamplingConfig& cfg);

/// First fenced code block if any (an optional language tag is dropped),
/// otherwise the whole message; trimmed, trailing semicolons removed.
std::string extract_sql(std::string_view message);

/// Requests cfg.n samples with at most cfg.max_parallel in flight. Samples
/// keep request order. Any transport or HTTP failure aborts the whole run
/// with Error(network_error); responses without usable content become empty
/// placeholders.
CandidateCache generate_candidates(const Task& task, const SamplingConfig& cfg);

struct Rejection {
    std::size_t sample_index{0};
    std::string reason;
};

struct ValidationResult {
    std::vector<Candidate> candidates;  // ordered by id
    std::vector<Rejection> rejected;
    std::size_t valid_samples{0};
};

/// Parses, resolves and executes every sample. Failures are dropped;
/// samples with equal canonical SQL merge into the candidate whose id is the
/// first occurrence index, weighted by multiplicity over the valid samples.
/// Throws Error(no_valid_candidates) when nothing survives.
ValidationResult validate_samples(const std::vector<std::string>& samples, const DatabaseSpec& db);
std::vector<Candidate> validate_candidates(const CandidateCache& cache, const DatabaseSpec& db);

}  // namespace plsq
