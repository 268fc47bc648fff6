#pragma once

#include "plsq/corpus.hpp"
#include "plsq/engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace plsq {

/// Gold label per pool candidate (indexed like CandidatePool::candidates);
/// nullopt is "unassigned".
struct GoldAssignment {
    std::vector<int> candidate_ids;
    std::vector<std::optional<std::size_t>> labels;
    std::size_t gold_count{0};

    [[nodiscard]] std::optional<std::size_t> label_of(int candidate_id) const;
};

inline constexpr double gold_label_threshold = 0.5;

/// Label = gold with the highest table_jaccard similarity; ties and best
/// scores below 0.5 stay unassigned.
GoldAssignment assign_gold_labels(const std::vector<Candidate>& candidates, const std::vector<ResultTable>& golds);
/// Executes the task's gold SQL first (Error on failure).
GoldAssignment assign_gold_labels(const std::vector<Candidate>& candidates, const Task& task);

/// Entropy in bits of the surviving weight per label, "unassigned" counted
/// as its own label.
double gold_entropy(const SessionState& state, const GoldAssignment& assignment);

/// Mean pairwise similarity of the survivors (1 for a single survivor).
/// Uses the pool's matrix when the comparator matches the session's.
double mean_intra_similarity(const SessionState& state, const Comparator& comparator);

enum class PolicyKind { random, greedy, ig_atomic_nocluster, ig_atomic, ig_grouped };
std::string_view to_string(PolicyKind kind) noexcept;
std::optional<PolicyKind> policy_from_string(std::string_view name) noexcept;
inline constexpr PolicyKind all_policies[] = {PolicyKind::random, PolicyKind::greedy, PolicyKind::ig_atomic_nocluster,
                                              PolicyKind::ig_atomic, PolicyKind::ig_grouped};

struct Policy {
    PolicyKind kind{PolicyKind::ig_grouped};
    std::uint64_t seed{0};  // random only
};

/// Stateful chooser; one per trace.
class PolicyRunner {
public:
    explicit PolicyRunner(Policy policy) : policy_(policy), rng_(policy.seed) {}
    /// Next variable to ask, or nullopt when the policy has nothing to offer.
    std::optional<DecisionVariable> choose(const SessionState& state);

private:
    Policy policy_;
    std::mt19937_64 rng_;
};

/// Highest-weight candidate carrying `label`, ties by lowest id.
std::optional<int> reference_candidate(const SessionState& state, const GoldAssignment& assignment,
                                       std::size_t label);

struct TurnRecord {
    std::size_t turn{0};
    double entropy_bits{0.0};
    double intra_similarity{0.0};
    double intra_exact{0.0};
    std::size_t survivors{0};
    std::string variable_id;  // variable answered to reach this turn; empty at turn 0
    std::optional<Choice> choice;
};

struct TurnTrace {
    std::string task_id;
    PolicyKind policy{PolicyKind::ig_grouped};
    std::uint64_t seed{0};
    std::size_t target_gold{0};
    int reference_id{0};
    std::vector<TurnRecord> turns;
    bool terminal{false};
    bool stalled{false};
    bool reference_survived{true};
    std::vector<int> final_ids;

    /// Number of answered questions.
    [[nodiscard]] std::size_t length() const { return turns.empty() ? 0 : turns.size() - 1; }
};

inline constexpr std::size_t default_turn_cap = 20;

/// Simulated user clarifying toward `target_gold`: every answer is "yes"
/// iff the reference candidate carries the whole group. Throws
/// Error(bad_request) when no candidate carries the target label.
TurnTrace simulate(const SessionState& initial, const GoldAssignment& assignment, const Policy& policy,
                   std::size_t target_gold, std::size_t turn_cap = default_turn_cap,
                   const Comparator& intra = Comparator(ComparatorKind::table_jaccard));

struct SeriesPoint {
    std::string ambiguity_type;
    PolicyKind policy{PolicyKind::ig_grouped};
    std::size_t turn{0};
    double median_entropy_bits{0.0};
    double median_intra_similarity{0.0};
    std::size_t n_tasks{0};
};

struct BenchmarkReport {
    std::vector<SeriesPoint> series;
    std::vector<TurnTrace> traces;
};

struct BenchmarkOptions {
    std::vector<PolicyKind> policies{std::begin(all_policies), std::end(all_policies)};
    std::vector<std::uint64_t> seeds{0};  // one random trace set per seed
    std::size_t turn_cap{default_turn_cap};
    EngineConfig engine;
};

/// Runs every task × assigned gold × policy (× seed for random). Tasks are
/// processed in id order. Throws Error(validation_error) for an empty corpus
/// and Error(not_found) for a task without a cache.
BenchmarkReport run_benchmark(const Corpus& corpus, const std::vector<CandidateCache>& caches,
                              const BenchmarkOptions& options);

double median(std::vector<double> values);

/// `ambiguity_type,policy,turn,median_entropy_bits,median_intra_similarity,n_tasks`
std::string report_csv(const BenchmarkReport& report);
nlohmann::json report_json(const BenchmarkReport& report);
nlohmann::json to_json(const TurnTrace& trace);

}  // namespace plsq
