#include "plsq/engine.hpp"

#include "plsq/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace plsq {

using nlohmann::json;

std::string variable_id(const FeatureSet& group) {
    std::string out;
    for (const auto& f : group) {
        if (!out.empty()) out += " & ";
        out += f.id();
    }
    return out;
}

std::optional<FeatureSet> parse_variable_id(std::string_view id) {
    FeatureSet out;
    constexpr std::string_view sep = " & ";
    while (true) {
        const auto pos = id.find(sep);
        auto f = parse_feature_id(id.substr(0, pos));
        if (!f) return std::nullopt;
        out.insert(*f);
        if (pos == std::string_view::npos) break;
        id.remove_prefix(pos + sep.size());
    }
    return out;
}

std::string_view to_string(Choice choice) noexcept { return choice == Choice::yes ? "yes" : "no"; }

std::optional<Choice> choice_from_string(std::string_view text) noexcept {
    if (text == "yes") return Choice::yes;
    if (text == "no") return Choice::no;
    return std::nullopt;
}

std::string_view to_string(ActionKind kind) noexcept {
    switch (kind) {
        case ActionKind::decision: return "decision";
        case ActionKind::selection: return "selection";
        case ActionKind::undo: return "undo";
    }
    return "decision";
}

json to_json(const Action& action) {
    json j{{"turn", action.turn}, {"action", to_string(action.kind)}};
    if (action.kind == ActionKind::decision) {
        j["variable_id"] = action.variable_id;
        j["choice"] = to_string(action.choice);
    } else if (action.kind == ActionKind::selection) {
        j["candidate_ids"] = action.candidate_ids;
    }
    return j;
}

Action action_from_json(const json& j) {
    auto bad = [](const std::string& m) { return Error(ErrorCode::bad_request, m); };
    if (!j.is_object()) throw bad("action must be an object");
    Action a;
    if (auto it = j.find("turn"); it != j.end()) {
        if (!it->is_number_integer()) throw bad("'turn' must be an integer");
        a.turn = it->get<int>();
    }
    const auto kind = j.find("action");
    if (kind == j.end() || !kind->is_string()) throw bad("missing 'action'");
    const auto name = kind->get<std::string>();
    if (name == "decision") {
        a.kind = ActionKind::decision;
        const auto v = j.find("variable_id");
        const auto c = j.find("choice");
        if (v == j.end() || !v->is_string()) throw bad("decision needs 'variable_id'");
        if (c == j.end() || !c->is_string() || !choice_from_string(c->get<std::string>())) {
            throw bad("decision needs 'choice' yes or no");
        }
        a.variable_id = v->get<std::string>();
        a.choice = *choice_from_string(c->get<std::string>());
    } else if (name == "selection") {
        a.kind = ActionKind::selection;
        const auto ids = j.find("candidate_ids");
        if (ids == j.end() || !ids->is_array()) throw bad("selection needs 'candidate_ids'");
        for (const auto& id : *ids) {
            if (!id.is_number_integer()) throw bad("candidate ids must be integers");
            a.candidate_ids.push_back(id.get<int>());
        }
    } else if (name == "undo") {
        a.kind = ActionKind::undo;
    } else {
        throw bad("unknown action '" + name + "'");
    }
    return a;
}

const Candidate* CandidatePool::find(int id) const {
    auto it = std::lower_bound(candidates.begin(), candidates.end(), id,
                               [](const Candidate& c, int v) { return c.id < v; });
    if (it == candidates.end() || it->id != id) return nullptr;
    return &*it;
}

std::size_t CandidatePool::index_of(int id) const {
    const Candidate* c = find(id);
    if (!c) throw Error(ErrorCode::invalid_selection, "unknown candidate id " + std::to_string(id));
    return static_cast<std::size_t>(c - candidates.data());
}

std::optional<double> SessionState::weight_of(int id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return weights_[static_cast<std::size_t>(it - ids_.begin())];
}

const DecisionVariable* SessionState::find_variable(std::string_view id) const {
    for (const auto& v : ranking_) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

bool contains_all(const FeatureSet& features, const FeatureSet& group) {
    return std::includes(features.begin(), features.end(), group.begin(), group.end());
}

class StateBuilder {
public:
    static SessionState build(std::shared_ptr<const CandidatePool> pool, std::vector<int> ids,
                              std::vector<double> weights, std::vector<HistoryEntry> history) {
        SessionState s;
        s.pool_ = std::move(pool);
        s.ids_ = std::move(ids);
        s.weights_ = std::move(weights);
        s.history_ = std::move(history);
        for (int id : s.ids_) s.indices_.push_back(s.pool_->index_of(id));

        std::map<std::size_t, std::size_t> class_index;
        for (std::size_t k = 0; k < s.ids_.size(); ++k) {
            const std::size_t oc = s.pool_->output_class[s.indices_[k]];
            auto [it, fresh] = class_index.emplace(oc, s.meanings_.size());
            if (fresh) {
                Meaning m;
                m.class_id = s.meanings_.size();
                m.representative_result = s.candidate(k).result;
                s.meanings_.push_back(std::move(m));
            }
            Meaning& m = s.meanings_[it->second];
            m.member_ids.push_back(s.ids_[k]);
            m.mass += s.weights_[k];
            s.meaning_of_.push_back(it->second);
        }

        const SimilarityMatrix sub = s.pool_->similarity.submatrix(s.indices_);
        s.clusters_ = cluster(sub, s.pool_->config.cluster_cut);
        s.layout_ = layout2d(sub);
        s.ranking_ = rank_variables(s);
        return s;
    }
};

namespace {

std::vector<double> normalized(std::vector<double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
}

SessionState transition(const SessionState& state, Action action, const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw Error(ErrorCode::empty_result_set, "no candidate would survive this action");
    std::vector<int> ids;
    std::vector<double> weights;
    for (std::size_t k : keep) {
        ids.push_back(state.ids()[k]);
        weights.push_back(state.weights()[k]);
    }
    std::vector<HistoryEntry> history = state.history();
    action.turn = static_cast<int>(state.turn());
    history.push_back({std::move(action), state.ids(), state.weights()});
    return StateBuilder::build(state.pool_ptr(), std::move(ids), normalized(std::move(weights)), std::move(history));
}

}  // namespace

SessionState init_session(std::string utterance, std::vector<Candidate> candidates, EngineConfig config) {
    if (candidates.empty()) throw Error(ErrorCode::no_valid_candidates, "no valid candidates");
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i && candidates[i].id == candidates[i - 1].id) {
            throw Error(ErrorCode::bad_request, "duplicate candidate id " + std::to_string(candidates[i].id));
        }
        if (!(candidates[i].weight > 0.0)) throw Error(ErrorCode::bad_request, "candidate weights must be positive");
    }

    auto pool = std::make_shared<CandidatePool>();
    pool->utterance = std::move(utterance);
    pool->config = std::move(config);
    pool->candidates = std::move(candidates);

    // similarities are computed once per distinct output
    std::map<std::string, std::size_t> classes;
    std::vector<ResultTable> distinct;
    for (const auto& c : pool->candidates) {
        auto [it, fresh] = classes.emplace(serialize_table(c.result), distinct.size());
        if (fresh) distinct.push_back(c.result);
        pool->output_class.push_back(it->second);
    }
    const SimilarityMatrix by_class = similarity_matrix(distinct, pool->config.comparator);
    pool->similarity = by_class.submatrix(pool->output_class);

    std::vector<int> ids;
    std::vector<double> weights;
    for (const auto& c : pool->candidates) {
        ids.push_back(c.id);
        weights.push_back(c.weight);
    }
    return StateBuilder::build(std::move(pool), std::move(ids), normalized(std::move(weights)), {});
}

std::vector<Meaning> equivalence_classes(const SessionState& state) { return state.meanings(); }

Lift lift_of(const SessionState& state, const FeatureSet& group, std::size_t cluster) {
    std::size_t in = 0, in_total = 0, all = 0;
    const auto& labels = state.clusters().labels;
    for (std::size_t k = 0; k < state.size(); ++k) {
        const bool has = contains_all(state.candidate(k).features, group);
        if (has) ++all;
        if (labels[k] == cluster) {
            ++in_total;
            if (has) ++in;
        }
    }
    Lift out;
    if (in_total) out.p_in = static_cast<double>(in) / static_cast<double>(in_total);
    if (state.size()) out.p_all = static_cast<double>(all) / static_cast<double>(state.size());
    out.lift = out.p_all > 0.0 ? out.p_in / out.p_all : 0.0;
    return out;
}

namespace {

void fill_details(const SessionState& state, const EngineConfig& cfg, const FeatureSet& all_features,
                  DecisionVariable& v) {
    const FeatureSet group = v.group_set();
    double carrier_mass = 0.0;
    std::map<AtomicFeature, double> co_mass;
    bool have_example = false;
    double best = 0.0;
    for (std::size_t k = 0; k < state.size(); ++k) {
        const Candidate& c = state.candidate(k);
        if (!contains_all(c.features, group)) continue;
        const double w = state.weights()[k];
        carrier_mass += w;
        for (const auto& f : c.features) {
            if (!group.count(f)) co_mass[f] += w;
        }
        if (!have_example || w > best) {
            have_example = true;
            best = w;
            v.example_candidate_id = c.id;
        }
    }
    for (const auto& f : all_features) {
        auto it = co_mass.find(f);
        if (it == co_mass.end() || carrier_mass <= 0.0) continue;
        const double p = std::min(1.0, it->second / carrier_mass);
        if (p >= cfg.implicit_min) v.implicit_features.push_back({f, p});
    }
    std::stable_sort(v.implicit_features.begin(), v.implicit_features.end(),
                     [](const ImplicitFeature& a, const ImplicitFeature& b) { return a.probability > b.probability; });
}

}  // namespace

std::vector<DecisionVariable> characteristic_groups(const SessionState& state) {
    const EngineConfig& cfg = state.pool().config;
    const std::size_t n = state.size();
    std::map<AtomicFeature, std::size_t> count_all;
    for (std::size_t k = 0; k < n; ++k) {
        for (const auto& f : state.candidate(k).features) ++count_all[f];
    }
    FeatureSet all_features;
    for (const auto& [f, c] : count_all) all_features.insert(f);

    std::vector<DecisionVariable> out;
    std::map<std::string, std::size_t> by_id;
    const auto& labels = state.clusters().labels;

    for (std::size_t c = 0; c < state.clusters().k; ++c) {
        std::size_t size = 0;
        std::map<AtomicFeature, std::size_t> count_in;
        for (std::size_t k = 0; k < n; ++k) {
            if (labels[k] != c) continue;
            ++size;
            for (const auto& f : state.candidate(k).features) ++count_in[f];
        }
        struct Scored {
            AtomicFeature f;
            double lift;
        };
        std::vector<Scored> eligible;
        for (const auto& [f, in] : count_in) {
            const std::size_t total = count_all[f];
            if (total == n) continue;
            const double p_in = static_cast<double>(in) / static_cast<double>(size);
            const double p_all = static_cast<double>(total) / static_cast<double>(n);
            const double lift = p_in / p_all;
            if (lift >= cfg.lift_min && p_in >= cfg.p_in_min) eligible.push_back({f, lift});
        }
        // count_in iterates by id, so a stable sort keeps id order on ties
        std::stable_sort(eligible.begin(), eligible.end(), [](const Scored& a, const Scored& b) { return a.lift > b.lift; });
        if (eligible.size() > cfg.group_cap) eligible.resize(cfg.group_cap);
        if (eligible.empty()) continue;
        DecisionVariable v;
        for (const auto& s : eligible) v.group.push_back(s.f);
        v.id = variable_id(v.group_set());
        if (by_id.count(v.id)) continue;
        v.source_cluster = c;
        v.lift = lift_of(state, v.group_set(), c).lift;
        by_id.emplace(v.id, out.size());
        out.push_back(std::move(v));
    }

    for (const auto& [f, total] : count_all) {
        if (total == n) continue;
        double best_lift = 0.0;
        for (std::size_t c = 0; c < state.clusters().k; ++c) best_lift = std::max(best_lift, lift_of(state, {f}, c).lift);
        const std::string id = variable_id({f});
        if (auto it = by_id.find(id); it != by_id.end()) {
            out[it->second].lift = std::max(out[it->second].lift, best_lift);
            continue;
        }
        DecisionVariable v;
        v.group = {f};
        v.id = id;
        v.lift = best_lift;
        by_id.emplace(id, out.size());
        out.push_back(std::move(v));
    }

    for (auto& v : out) fill_details(state, cfg, all_features, v);
    return out;
}

double entropy_bits(const std::vector<double>& masses) {
    const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double m : masses) {
        if (m <= 0.0) continue;
        const double p = m / total;
        h -= p * std::log2(p);
    }
    return h;
}

std::vector<bool> meaning_votes(const SessionState& state, const FeatureSet& group) {
    std::vector<double> present(state.meanings().size(), 0.0);
    std::vector<double> absent(state.meanings().size(), 0.0);
    for (std::size_t k = 0; k < state.size(); ++k) {
        const std::size_t m = state.meaning_of()[k];
        (contains_all(state.candidate(k).features, group) ? present : absent)[m] += state.weights()[k];
    }
    std::vector<bool> out;
    for (std::size_t m = 0; m < present.size(); ++m) out.push_back(present[m] >= absent[m]);
    return out;
}

namespace {

double split_gain(const std::vector<double>& masses, const std::vector<bool>& z) {
    std::vector<double> yes, no;
    double p_yes = 0.0, p_no = 0.0;
    for (std::size_t m = 0; m < masses.size(); ++m) {
        if (z[m]) {
            yes.push_back(masses[m]);
            p_yes += masses[m];
        } else {
            no.push_back(masses[m]);
            p_no += masses[m];
        }
    }
    const double total = p_yes + p_no;
    if (total <= 0.0) return 0.0;
    const double h = entropy_bits(masses);
    const double ig = h - (p_yes / total) * entropy_bits(yes) - (p_no / total) * entropy_bits(no);
    return std::clamp(ig, 0.0, h);
}

}  // namespace

double information_gain(const SessionState& state, const FeatureSet& group) {
    std::vector<double> masses;
    for (const auto& m : state.meanings()) masses.push_back(m.mass);
    return split_gain(masses, meaning_votes(state, group));
}

double information_gain(const SessionState& state, const DecisionVariable& variable) {
    return information_gain(state, variable.group_set());
}

double information_gain_per_candidate(const SessionState& state, const FeatureSet& group) {
    std::vector<bool> z;
    for (std::size_t k = 0; k < state.size(); ++k) z.push_back(contains_all(state.candidate(k).features, group));
    return split_gain(state.weights(), z);
}

std::vector<DecisionVariable> rank_variables(const SessionState& state) {
    if (is_terminal(state)) return {};
    std::vector<DecisionVariable> vars = characteristic_groups(state);
    for (auto& v : vars) v.ig_bits = information_gain(state, v);
    // gains are compared at 1e-10 resolution so rescaled priors rank alike
    std::sort(vars.begin(), vars.end(), [](const DecisionVariable& a, const DecisionVariable& b) {
        const long long qa = std::llround(a.ig_bits * 1e10);
        const long long qb = std::llround(b.ig_bits * 1e10);
        if (qa != qb) return qa > qb;
        if (a.group.size() != b.group.size()) return a.group.size() > b.group.size();
        return a.id < b.id;
    });
    return vars;
}

SessionState apply_decision(const SessionState& state, const DecisionVariable& variable, Choice choice) {
    const FeatureSet group = variable.group_set();
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < state.size(); ++k) {
        if (contains_all(state.candidate(k).features, group) == (choice == Choice::yes)) keep.push_back(k);
    }
    Action a;
    a.kind = ActionKind::decision;
    a.variable_id = variable.id;
    a.group = group;
    a.choice = choice;
    return transition(state, std::move(a), keep);
}

SessionState apply_decision(const SessionState& state, std::string_view variable_id, Choice choice) {
    if (const DecisionVariable* v = state.find_variable(variable_id)) return apply_decision(state, *v, choice);
    const auto group = parse_variable_id(variable_id);
    if (!group) throw Error(ErrorCode::unknown_variable, "no decision variable '" + std::string(variable_id) + "'");
    DecisionVariable v;
    v.id = plsq::variable_id(*group);
    v.group.assign(group->begin(), group->end());
    return apply_decision(state, v, choice);
}

SessionState apply_selection(const SessionState& state, const std::vector<int>& candidate_ids) {
    if (candidate_ids.empty()) throw Error(ErrorCode::invalid_selection, "empty selection");
    std::vector<int> wanted = candidate_ids;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    std::vector<std::size_t> keep;
    for (int id : wanted) {
        auto it = std::lower_bound(state.ids().begin(), state.ids().end(), id);
        if (it == state.ids().end() || *it != id) {
            throw Error(ErrorCode::invalid_selection, "candidate " + std::to_string(id) + " is not in the surviving set");
        }
        keep.push_back(static_cast<std::size_t>(it - state.ids().begin()));
    }
    Action a;
    a.kind = ActionKind::selection;
    a.candidate_ids = wanted;
    return transition(state, std::move(a), keep);
}

SessionState undo(const SessionState& state) {
    if (state.turn() == 0) throw Error(ErrorCode::undo_at_root, "nothing to undo");
    std::vector<HistoryEntry> history = state.history();
    HistoryEntry last = std::move(history.back());
    history.pop_back();
    return StateBuilder::build(state.pool_ptr(), std::move(last.prior_ids), std::move(last.prior_weights),
                               std::move(history));
}

SessionState replay(const SessionState& initial, const std::vector<Action>& log) {
    SessionState s = initial;
    for (const auto& a : log) {
        switch (a.kind) {
            case ActionKind::decision:
                if (s.find_variable(a.variable_id) || a.group.empty()) {
                    s = apply_decision(s, a.variable_id, a.choice);
                } else {
                    DecisionVariable v2;
                    v2.id = a.variable_id;
                    v2.group.assign(a.group.begin(), a.group.end());
                    s = apply_decision(s, v2, a.choice);
                }
                break;
            case ActionKind::selection: s = apply_selection(s, a.candidate_ids); break;
            case ActionKind::undo: s = undo(s); break;
        }
    }
    return s;
}

std::vector<Action> history_actions(const SessionState& state) {
    std::vector<Action> out;
    for (const auto& h : state.history()) out.push_back(h.action);
    return out;
}

std::vector<PredictedFeature> predicted_features(const SessionState& state) {
    std::map<AtomicFeature, double> mass;
    for (std::size_t k = 0; k < state.size(); ++k) {
        for (const auto& f : state.candidate(k).features) mass[f] += state.weights()[k];
    }
    std::vector<PredictedFeature> out;
    for (const auto& [f, p] : mass) {
        if (p <= 0.0) continue;
        const bool determined = std::abs(p - 1.0) <= 1e-12;
        out.push_back({f, determined ? 1.0 : std::min(p, 1.0), determined});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PredictedFeature& a, const PredictedFeature& b) { return a.probability > b.probability; });
    return out;
}

bool is_terminal(const SessionState& state) { return state.meanings().size() == 1; }

std::size_t top_candidate(const SessionState& state) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < state.size(); ++k) {
        if (state.weights()[k] > state.weights()[best]) best = k;
    }
    return best;
}

}  // namespace plsq
