#pragma once

#include "plsq/database.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plsq {

enum class AmbiguityType { scope, attachment, vague };

std::string_view to_string(AmbiguityType type) noexcept;
std::optional<AmbiguityType> ambiguity_from_string(std::string_view name) noexcept;

/// One benchmark item: an ambiguous question, its database and the gold
/// interpretations.
struct Task {
    std::string id;
    std::string utterance;
    DatabaseSpec db;
    std::vector<std::string> gold_sqls;
    std::optional<AmbiguityType> ambiguity_type;

    friend bool operator==(const Task&, const Task&) = default;
};

struct Corpus {
    std::vector<Task> tasks;

    [[nodiscard]] const Task* find(std::string_view id) const;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Raw LLM samples for one task, in sampling order. Sample index is the seed
/// of the stable candidate id.
struct CandidateCache {
    std::string task_id;
    std::string model;
    double temperature{0.0};
    std::vector<std::string> samples;

    friend bool operator==(const CandidateCache&, const CandidateCache&) = default;
};

// JSON mapping (the on-disk schema). from_json throws Error(parse_error) on
// missing or mistyped fields.
nlohmann::json to_json(const DatabaseSpec& db);
nlohmann::json to_json(const Task& task);
nlohmann::json to_json(const Corpus& corpus);
nlohmann::json to_json(const CandidateCache& cache);

DatabaseSpec database_from_json(const nlohmann::json& j);
Task task_from_json(const nlohmann::json& j);
CandidateCache cache_from_json(const nlohmann::json& j);

/// Parses and fully validates a corpus: database invariants, unique ids,
/// non-empty gold lists, and every gold SQL parsing and executing against
/// its database. Validation failures throw Error(validation_error) naming
/// the task id and field.
Corpus load_corpus(const std::filesystem::path& path);
Corpus corpus_from_json(const nlohmann::json& j);
void validate_corpus(const Corpus& corpus);

/// Loads a cache verbatim; no filtering and no task resolution.
CandidateCache load_candidate_cache(const std::filesystem::path& path);

/// Loads every *.json cache in a directory, ordered by file name.
std::vector<CandidateCache> load_cache_directory(const std::filesystem::path& dir);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace plsq
