#pragma once

#include "plsq/cluster.hpp"
#include "plsq/executor.hpp"
#include "plsq/features.hpp"
#include "plsq/similarity.hpp"

#include "json.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace plsq {

/// One distinct executable interpretation. `weight` is the prior (sampling
/// multiplicity share); the current posterior weight lives in the state.
struct Candidate {
    int id{0};
    std::string sql;
    FeatureSet features;
    ResultTable result;
    double weight{1.0};
};

/// A functional-equivalence class of surviving candidates.
struct Meaning {
    std::size_t class_id{0};
    std::vector<int> member_ids;
    double mass{0.0};
    ResultTable representative_result;
};

struct ImplicitFeature {
    AtomicFeature feature;
    double probability{0.0};
};

struct DecisionVariable {
    std::string id;
    std::vector<AtomicFeature> group;  // display order
    std::optional<std::size_t> source_cluster;
    double lift{0.0};
    std::vector<ImplicitFeature> implicit_features;
    int example_candidate_id{0};
    double ig_bits{0.0};

    [[nodiscard]] FeatureSet group_set() const { return {group.begin(), group.end()}; }
};

/// Id of a variable with the given features: sorted feature ids joined by
/// " & ".
std::string variable_id(const FeatureSet& group);
/// Inverse of variable_id; nullopt unless every part is a feature id.
std::optional<FeatureSet> parse_variable_id(std::string_view id);

struct EngineConfig {
    double lift_min{1.5};
    double p_in_min{0.8};
    std::size_t group_cap{3};
    double implicit_min{0.95};
    double cluster_cut{default_cluster_cut};
    Comparator comparator{ComparatorKind::table_jaccard};
};

enum class Choice { yes, no };
std::string_view to_string(Choice choice) noexcept;
std::optional<Choice> choice_from_string(std::string_view text) noexcept;

enum class ActionKind { decision, selection, undo };
std::string_view to_string(ActionKind kind) noexcept;

/// One entry of the exportable action log.
struct Action {
    ActionKind kind{ActionKind::decision};
    int turn{0};  // turn of the state the action was applied to
    std::string variable_id;
    FeatureSet group;
    Choice choice{Choice::yes};
    std::vector<int> candidate_ids;
};

nlohmann::json to_json(const Action& action);
/// Reads the wire form; `group` stays empty (decisions replay by id).
Action action_from_json(const nlohmann::json& j);

/// Everything shared by all states of one session: the initial candidates
/// and their pairwise similarities.
struct CandidatePool {
    std::string utterance;
    EngineConfig config;
    std::vector<Candidate> candidates;  // ordered by id
    std::vector<std::size_t> output_class;  // equal index <=> functionally equal
    SimilarityMatrix similarity;

    [[nodiscard]] const Candidate* find(int id) const;
    [[nodiscard]] std::size_t index_of(int id) const;
};

struct HistoryEntry {
    Action action;
    std::vector<int> prior_ids;
    std::vector<double> prior_weights;
};

/// Immutable belief state. Every operation below returns a new value.
class SessionState {
public:
    [[nodiscard]] const std::string& utterance() const { return pool_->utterance; }
    [[nodiscard]] const CandidatePool& pool() const { return *pool_; }
    [[nodiscard]] const std::shared_ptr<const CandidatePool>& pool_ptr() const { return pool_; }

    /// Surviving candidate ids in ascending order, with matching weights.
    [[nodiscard]] const std::vector<int>& ids() const { return ids_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] const Candidate& candidate(std::size_t k) const { return pool_->candidates[indices_[k]]; }
    [[nodiscard]] std::optional<double> weight_of(int id) const;

    [[nodiscard]] const std::vector<Meaning>& meanings() const { return meanings_; }
    /// Meaning index of each surviving candidate.
    [[nodiscard]] const std::vector<std::size_t>& meaning_of() const { return meaning_of_; }
    [[nodiscard]] const ClusterAssignment& clusters() const { return clusters_; }
    [[nodiscard]] const std::vector<Point>& layout() const { return layout_; }
    [[nodiscard]] const std::vector<DecisionVariable>& ranking() const { return ranking_; }
    [[nodiscard]] const std::vector<HistoryEntry>& history() const { return history_; }
    [[nodiscard]] std::size_t turn() const { return history_.size(); }

    [[nodiscard]] const DecisionVariable* find_variable(std::string_view id) const;

private:
    friend class StateBuilder;
    std::shared_ptr<const CandidatePool> pool_;
    std::vector<int> ids_;
    std::vector<std::size_t> indices_;
    std::vector<double> weights_;
    std::vector<Meaning> meanings_;
    std::vector<std::size_t> meaning_of_;
    ClusterAssignment clusters_;
    std::vector<Point> layout_;
    std::vector<DecisionVariable> ranking_;
    std::vector<HistoryEntry> history_;
};

/// Throws Error(no_valid_candidates) when `candidates` is empty. Ids must be
/// unique; weights are normalized to sum to 1.
SessionState init_session(std::string utterance, std::vector<Candidate> candidates, EngineConfig config = {});

std::vector<Meaning> equivalence_classes(const SessionState& state);

/// Count-based in-cluster and global frequency of a feature set (all
/// features present) and their ratio.
struct Lift {
    double p_in{0.0};
    double p_all{0.0};
    double lift{0.0};
};
Lift lift_of(const SessionState& state, const FeatureSet& group, std::size_t cluster);

/// Unranked variables: one per display cluster with a characteristic group,
/// plus every non-degenerate single feature. Ig fields are zero.
std::vector<DecisionVariable> characteristic_groups(const SessionState& state);

bool contains_all(const FeatureSet& features, const FeatureSet& group);

/// Value of Z for each meaning: weight-majority of group presence over the
/// members, ties count as present.
std::vector<bool> meaning_votes(const SessionState& state, const FeatureSet& group);

double entropy_bits(const std::vector<double>& masses);

/// Expected information gain in bits over the state's meanings.
double information_gain(const SessionState& state, const FeatureSet& group);
double information_gain(const SessionState& state, const DecisionVariable& variable);
/// Same, treating every surviving candidate as its own meaning.
double information_gain_per_candidate(const SessionState& state, const FeatureSet& group);

/// Non-degenerate variables by descending information gain, then larger
/// group, then id. Empty iff the state is terminal.
std::vector<DecisionVariable> rank_variables(const SessionState& state);

/// Yes keeps candidates with every group feature; no keeps the rest.
/// Throws Error(empty_result_set) if nothing would survive.
SessionState apply_decision(const SessionState& state, const DecisionVariable& variable, Choice choice);
/// Looks the variable up in the current ranking, else treats the id as an
/// explicit feature group; Error(unknown_variable) if it is neither.
SessionState apply_decision(const SessionState& state, std::string_view variable_id, Choice choice);
/// Throws Error(invalid_selection) for empty or non-subset selections.
SessionState apply_selection(const SessionState& state, const std::vector<int>& candidate_ids);
/// Throws Error(undo_at_root) at turn 0.
SessionState undo(const SessionState& state);

/// Applies a logged action sequence (undo entries included) to `initial`.
/// Decisions resolve like apply_decision by id, falling back to `group`.
SessionState replay(const SessionState& initial, const std::vector<Action>& log);
/// The state's own history stack as an action sequence.
std::vector<Action> history_actions(const SessionState& state);

struct PredictedFeature {
    AtomicFeature feature;
    double probability{0.0};
    bool determined{false};
};

/// Features carried by at least one survivor, by descending probability then
/// id.
std::vector<PredictedFeature> predicted_features(const SessionState& state);

bool is_terminal(const SessionState& state);

/// Index (into the state) of the highest-weight survivor, ties by lowest id.
std::size_t top_candidate(const SessionState& state);

}  // namespace plsq
