#include "plsq/evalsim.hpp"

#include "plsq/error.hpp"
#include "plsq/llm_client.hpp"
#include "plsq/sql/parser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace plsq {

using nlohmann::json;

std::optional<std::size_t> GoldAssignment::label_of(int candidate_id) const {
    for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
        if (candidate_ids[i] == candidate_id) return labels[i];
    }
    return std::nullopt;
}

GoldAssignment assign_gold_labels(const std::vector<Candidate>& candidates, const std::vector<ResultTable>& golds) {
    const Comparator jaccard(ComparatorKind::table_jaccard);
    GoldAssignment out;
    out.gold_count = golds.size();
    for (const auto& c : candidates) {
        std::optional<std::size_t> best;
        double best_score = -1.0;
        bool tie = false;
        for (std::size_t g = 0; g < golds.size(); ++g) {
            const double s = table_similarity(c.result, golds[g], jaccard);
            if (s > best_score) {
                best_score = s;
                best = g;
                tie = false;
            } else if (s == best_score) {
                tie = true;
            }
        }
        out.candidate_ids.push_back(c.id);
        out.labels.push_back(tie || best_score < gold_label_threshold ? std::nullopt : best);
    }
    return out;
}

GoldAssignment assign_gold_labels(const std::vector<Candidate>& candidates, const Task& task) {
    std::vector<ResultTable> golds;
    for (const auto& g : task.gold_sqls) golds.push_back(execute(sql::parse_sql(g, task.db), task.db));
    return assign_gold_labels(candidates, golds);
}

double gold_entropy(const SessionState& state, const GoldAssignment& assignment) {
    // slot gold_count holds the unassigned mass
    std::vector<double> mass(assignment.gold_count + 1, 0.0);
    for (std::size_t k = 0; k < state.size(); ++k) {
        const auto label = assignment.label_of(state.ids()[k]);
        mass[label ? *label : assignment.gold_count] += state.weights()[k];
    }
    return entropy_bits(mass);
}

double mean_intra_similarity(const SessionState& state, const Comparator& comparator) {
    const std::size_t n = state.size();
    if (n < 2) return 1.0;
    const CandidatePool& pool = state.pool();
    std::vector<std::size_t> idx;
    for (int id : state.ids()) idx.push_back(pool.index_of(id));
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (comparator.kind() == ComparatorKind::exact) {
                sum += pool.output_class[idx[a]] == pool.output_class[idx[b]] ? 1.0 : 0.0;
            } else if (comparator.kind() == pool.config.comparator.kind()) {
                sum += pool.similarity(idx[a], idx[b]);
            } else {
                sum += comparator(state.candidate(a).result, state.candidate(b).result);
            }
        }
    }
    return sum / static_cast<double>(n * (n - 1) / 2);
}

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
        case PolicyKind::random: return "random";
        case PolicyKind::greedy: return "greedy";
        case PolicyKind::ig_atomic_nocluster: return "ig_atomic_nocluster";
        case PolicyKind::ig_atomic: return "ig_atomic";
        case PolicyKind::ig_grouped: return "ig_grouped";
    }
    return "ig_grouped";
}

std::optional<PolicyKind> policy_from_string(std::string_view name) noexcept {
    for (PolicyKind k : all_policies) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

namespace {

long long quantized(double x) { return std::llround(x * 1e10); }

// Highest score, ties by variable id.
template <typename Score>
std::optional<DecisionVariable> best_singleton(const SessionState& state, Score score) {
    const DecisionVariable* best = nullptr;
    long long best_q = 0;
    for (const auto& v : state.ranking()) {
        if (v.group.size() != 1) continue;
        const auto s = score(v);
        if (!s) continue;
        const long long q = quantized(*s);
        if (!best || q > best_q || (q == best_q && v.id < best->id)) {
            best = &v;
            best_q = q;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

}  // namespace

std::optional<DecisionVariable> PolicyRunner::choose(const SessionState& state) {
    const auto& ranking = state.ranking();
    if (ranking.empty()) return std::nullopt;
    switch (policy_.kind) {
        case PolicyKind::ig_grouped: return ranking.front();
        case PolicyKind::ig_atomic:
            for (const auto& v : ranking) {
                if (v.group.size() == 1) return v;
            }
            return std::nullopt;
        case PolicyKind::ig_atomic_nocluster:
            return best_singleton(state, [&](const DecisionVariable& v) -> std::optional<double> {
                return information_gain_per_candidate(state, v.group_set());
            });
        case PolicyKind::greedy: {
            // prefer variables that split the meanings at all
            auto skew = [&](const DecisionVariable& v, bool require_split) -> std::optional<double> {
                const auto votes = meaning_votes(state, v.group_set());
                double p_yes = 0.0;
                for (std::size_t m = 0; m < votes.size(); ++m) {
                    if (votes[m]) p_yes += state.meanings()[m].mass;
                }
                const bool splits = std::find(votes.begin(), votes.end(), !votes.front()) != votes.end();
                if (require_split && !splits) return std::nullopt;
                return std::max(p_yes, 1.0 - p_yes);
            };
            if (auto v = best_singleton(state, [&](const DecisionVariable& x) { return skew(x, true); })) return v;
            return best_singleton(state, [&](const DecisionVariable& x) { return skew(x, false); });
        }
        case PolicyKind::random: return ranking[rng_() % ranking.size()];
    }
    return std::nullopt;
}

std::optional<int> reference_candidate(const SessionState& state, const GoldAssignment& assignment,
                                       std::size_t label) {
    std::optional<int> best;
    double best_w = 0.0;
    for (std::size_t k = 0; k < state.size(); ++k) {
        if (assignment.label_of(state.ids()[k]) != label) continue;
        if (!best || state.weights()[k] > best_w) {
            best = state.ids()[k];
            best_w = state.weights()[k];
        }
    }
    return best;
}

TurnTrace simulate(const SessionState& initial, const GoldAssignment& assignment, const Policy& policy,
                   std::size_t target_gold, std::size_t turn_cap, const Comparator& intra) {
    const auto ref = reference_candidate(initial, assignment, target_gold);
    if (!ref) throw Error(ErrorCode::bad_request, "no candidate carries gold label " + std::to_string(target_gold));
    const Candidate& reference = *initial.pool().find(*ref);
    const Comparator exact(ComparatorKind::exact);

    TurnTrace trace;
    trace.policy = policy.kind;
    trace.seed = policy.seed;
    trace.target_gold = target_gold;
    trace.reference_id = *ref;

    auto record = [&](const SessionState& s, std::string variable, std::optional<Choice> choice) {
        TurnRecord r;
        r.turn = s.turn();
        r.entropy_bits = gold_entropy(s, assignment);
        r.intra_similarity = mean_intra_similarity(s, intra);
        r.intra_exact = mean_intra_similarity(s, exact);
        r.survivors = s.size();
        r.variable_id = std::move(variable);
        r.choice = choice;
        trace.turns.push_back(std::move(r));
    };

    PolicyRunner runner(policy);
    SessionState state = initial;
    record(state, {}, std::nullopt);
    while (!is_terminal(state) && state.turn() < turn_cap) {
        const auto v = runner.choose(state);
        if (!v) {
            trace.stalled = true;
            break;
        }
        const Choice choice = contains_all(reference.features, v->group_set()) ? Choice::yes : Choice::no;
        state = apply_decision(state, *v, choice);
        record(state, v->id, choice);
    }
    trace.terminal = is_terminal(state);
    trace.reference_survived = state.weight_of(*ref).has_value();
    trace.final_ids = state.ids();
    return trace;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BenchmarkReport run_benchmark(const Corpus& corpus, const std::vector<CandidateCache>& caches,
                              const BenchmarkOptions& options) {
    if (corpus.tasks.empty()) throw Error(ErrorCode::validation_error, "empty corpus");
    std::vector<const Task*> tasks;
    for (const auto& t : corpus.tasks) tasks.push_back(&t);
    std::sort(tasks.begin(), tasks.end(), [](const Task* a, const Task* b) { return a->id < b->id; });

    BenchmarkReport report;
    std::map<std::string, std::string> type_of;  // task id -> ambiguity type
    for (const Task* task : tasks) {
        const CandidateCache* cache = nullptr;
        for (const auto& c : caches) {
            if (c.task_id == task->id) cache = &c;
        }
        if (!cache) throw Error(ErrorCode::not_found, "no candidate cache for task '" + task->id + "'");
        type_of[task->id] = task->ambiguity_type ? std::string(to_string(*task->ambiguity_type)) : "unknown";

        const auto candidates = validate_candidates(*cache, task->db);
        const SessionState initial = init_session(task->utterance, candidates, options.engine);
        const GoldAssignment labels = assign_gold_labels(candidates, *task);
        for (std::size_t g = 0; g < labels.gold_count; ++g) {
            if (!reference_candidate(initial, labels, g)) continue;
            for (PolicyKind kind : options.policies) {
                const std::vector<std::uint64_t> seeds =
                    kind == PolicyKind::random ? options.seeds : std::vector<std::uint64_t>{0};
                for (std::uint64_t seed : seeds) {
                    TurnTrace t = simulate(initial, labels, Policy{kind, seed}, g, options.turn_cap,
                                           options.engine.comparator);
                    t.task_id = task->id;
                    report.traces.push_back(std::move(t));
                }
            }
        }
    }

    std::size_t max_turn = 0;
    for (const auto& t : report.traces) max_turn = std::max(max_turn, t.length());
    std::set<std::string> types;
    for (const auto& [id, type] : type_of) types.insert(type);
    for (const auto& type : types) {
        for (PolicyKind kind : options.policies) {
            std::vector<const TurnTrace*> group;
            std::set<std::string> task_ids;
            for (const auto& t : report.traces) {
                if (t.policy == kind && type_of[t.task_id] == type) {
                    group.push_back(&t);
                    task_ids.insert(t.task_id);
                }
            }
            if (group.empty()) continue;
            for (std::size_t turn = 0; turn <= max_turn; ++turn) {
                std::vector<double> entropy, intra;
                for (const TurnTrace* t : group) {
                    const TurnRecord& r = t->turns[std::min(turn, t->turns.size() - 1)];
                    entropy.push_back(r.entropy_bits);
                    intra.push_back(r.intra_similarity);
                }
                report.series.push_back(
                    {type, kind, turn, median(std::move(entropy)), median(std::move(intra)), task_ids.size()});
            }
        }
    }
    return report;
}

std::string report_csv(const BenchmarkReport& report) {
    std::string out = "ambiguity_type,policy,turn,median_entropy_bits,median_intra_similarity,n_tasks\n";
    char buf[256];
    for (const auto& p : report.series) {
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.6f,%.6f,%zu\n", p.ambiguity_type.c_str(),
                      std::string(to_string(p.policy)).c_str(), p.turn, p.median_entropy_bits,
                      p.median_intra_similarity, p.n_tasks);
        out += buf;
    }
    return out;
}

json to_json(const TurnTrace& trace) {
    json turns = json::array();
    for (const auto& r : trace.turns) {
        json j{{"turn", r.turn},
               {"entropy_bits", r.entropy_bits},
               {"intra_similarity", r.intra_similarity},
               {"intra_similarity_exact", r.intra_exact},
               {"survivors", r.survivors}};
        if (!r.variable_id.empty()) j["variable_id"] = r.variable_id;
        if (r.choice) j["choice"] = to_string(*r.choice);
        turns.push_back(std::move(j));
    }
    return {{"task_id", trace.task_id},
            {"policy", to_string(trace.policy)},
            {"seed", trace.seed},
            {"target_gold", trace.target_gold},
            {"reference_candidate", trace.reference_id},
            {"terminal", trace.terminal},
            {"stalled", trace.stalled},
            {"reference_survived", trace.reference_survived},
            {"final_candidates", trace.final_ids},
            {"turns", std::move(turns)}};
}

json report_json(const BenchmarkReport& report) {
    json series = json::array();
    for (const auto& p : report.series) {
        series.push_back({{"ambiguity_type", p.ambiguity_type},
                          {"policy", to_string(p.policy)},
                          {"turn", p.turn},
                          {"median_entropy_bits", p.median_entropy_bits},
                          {"median_intra_similarity", p.median_intra_similarity},
                          {"n_tasks", p.n_tasks}});
    }
    json traces = json::array();
    for (const auto& t : report.traces) traces.push_back(to_json(t));
    return {{"series", std::move(series)}, {"traces", std::move(traces)}};
}

}  // namespace plsq
