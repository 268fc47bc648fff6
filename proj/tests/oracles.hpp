#pragma once

// Independent reference computations used to check the engine. Nothing
// here calls into the engine's own entropy, vote or lift code.

#include "plsq/engine.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace plsq::testing {

/// A candidate whose output is a one-cell table holding `output`.
inline Candidate synthetic(int id, const std::vector<std::string>& feature_ids, int output, double weight = 1.0) {
    Candidate c;
    c.id = id;
    c.sql = "candidate " + std::to_string(id);
    for (const auto& f : feature_ids) c.features.insert(*parse_feature_id(f));
    c.result.columns = {"v"};
    c.result.rows = {{Value(static_cast<std::int64_t>(output))}};
    c.weight = weight;
    return c;
}

struct OracleCandidate {
    FeatureSet features;
    ResultTable result;
    double weight;
};

inline std::vector<OracleCandidate> oracle_view(const SessionState& s) {
    std::vector<OracleCandidate> out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        out.push_back({s.candidate(k).features, s.candidate(k).result, s.weights()[k]});
    }
    return out;
}

inline bool oracle_has_group(const FeatureSet& fs, const FeatureSet& group) {
    for (const auto& g : group) {
        if (fs.find(g) == fs.end()) return false;
    }
    return true;
}

/// Row-multiset / column-set equality written out longhand.
inline bool oracle_same_output(const ResultTable& a, const ResultTable& b) {
    if (std::set<std::string>(a.columns.begin(), a.columns.end()) !=
        std::set<std::string>(b.columns.begin(), b.columns.end())) {
        return false;
    }
    auto rows = [](const ResultTable& t) {
        std::multiset<std::string> out;
        for (const auto& r : t.rows) {
            std::map<std::string, std::string> cells;
            for (std::size_t i = 0; i < r.size(); ++i) cells[t.columns[i]] = r[i].canonical();
            std::string key;
            for (const auto& [c, v] : cells) key += c + "\x1f" + v + "\x1e";
            out.insert(key);
        }
        return out;
    };
    return rows(a) == rows(b);
}

/// Information gain by enumerating both answers: group candidates into
/// meanings by pairwise comparison, take the weight-majority vote for each
/// meaning, then condition the prior on each answer from scratch.
inline double oracle_information_gain(const std::vector<OracleCandidate>& cands, const FeatureSet& group) {
    std::vector<int> meaning(cands.size(), -1);
    int count = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (meaning[i] >= 0) continue;
        meaning[i] = count;
        for (std::size_t j = i + 1; j < cands.size(); ++j) {
            if (meaning[j] < 0 && oracle_same_output(cands[i].result, cands[j].result)) meaning[j] = count;
        }
        ++count;
    }
    double total = 0.0;
    for (const auto& c : cands) total += c.weight;
    std::vector<double> prior(count, 0.0), yes_mass(count, 0.0), no_mass(count, 0.0);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const double p = cands[i].weight / total;
        prior[meaning[i]] += p;
        (oracle_has_group(cands[i].features, group) ? yes_mass : no_mass)[meaning[i]] += p;
    }
    auto entropy = [](const std::vector<double>& p) {
        double h = 0.0;
        for (double x : p) {
            if (x > 0) h -= x * std::log(x);
        }
        return h / std::log(2.0);
    };
    double expected = 0.0;
    for (int answer = 0; answer < 2; ++answer) {
        std::vector<double> posterior(count, 0.0);
        double p_answer = 0.0;
        for (int m = 0; m < count; ++m) {
            const int z = yes_mass[m] >= no_mass[m] ? 1 : 0;
            if (z == answer) {
                posterior[m] = prior[m];
                p_answer += prior[m];
            }
        }
        if (p_answer <= 0) continue;
        for (double& x : posterior) x /= p_answer;
        expected += p_answer * entropy(posterior);
    }
    return entropy(prior) - expected;
}

/// Random candidate sets: up to `max_candidates` candidates over up to
/// `max_features` features with colliding outputs and integer multiplicities.
struct RandomInstance {
    std::vector<Candidate> candidates;
    std::vector<std::string> feature_pool;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_candidates = 12,
                                      std::size_t max_features = 10) {
    static const char* keywords[] = {"SELECT", "WHERE", "GROUP BY", "ORDER BY", "JOIN"};
    RandomInstance inst;
    const std::size_t nf = 2 + rng() % (max_features - 1);
    for (std::size_t f = 0; f < nf; ++f) {
        inst.feature_pool.push_back(std::string(keywords[f % 5]) + " f" + std::to_string(f));
    }
    const std::size_t n = 2 + rng() % (max_candidates - 1);
    const int outputs = 1 + static_cast<int>(rng() % n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> fs{"FROM t"};
        for (const auto& f : inst.feature_pool) {
            if (rng() % 2) fs.push_back(f);
        }
        inst.candidates.push_back(synthetic(static_cast<int>(i) * 3 + 1, fs, static_cast<int>(rng() % outputs),
                                            static_cast<double>(1 + rng() % 5)));
    }
    return inst;
}

}  // namespace plsq::testing
