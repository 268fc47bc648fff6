#include "plsq/similarity.hpp"

#include "plsq/error.hpp"
#include "plsq/http_util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace plsq {

std::string_view to_string(ComparatorKind kind) noexcept {
    switch (kind) {
        case ComparatorKind::exact: return "exact";
        case ComparatorKind::table_jaccard: return "table_jaccard";
        case ComparatorKind::external_embedding: return "external_embedding";
    }
    return "table_jaccard";
}

std::optional<ComparatorKind> comparator_from_string(std::string_view name) noexcept {
    if (name == "exact") return ComparatorKind::exact;
    if (name == "table_jaccard") return ComparatorKind::table_jaccard;
    if (name == "external_embedding") return ComparatorKind::external_embedding;
    return std::nullopt;
}

TableSignature signature(const ResultTable& table) {
    TableSignature sig;
    sig.columns.insert(table.columns.begin(), table.columns.end());
    sig.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<std::pair<std::string, std::string>> pairs;
        pairs.reserve(row.size());
        for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c) {
            pairs.emplace_back(table.columns[c], row[c].canonical());
        }
        std::sort(pairs.begin(), pairs.end());
        std::string key;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (i) key += "; ";
            key += pairs[i].first + "=" + pairs[i].second;
        }
        sig.rows.push_back(std::move(key));
    }
    std::sort(sig.rows.begin(), sig.rows.end());
    return sig;
}

std::string serialize_table(const ResultTable& table) {
    const TableSignature sig = signature(table);
    std::string out = "columns:";
    bool first = true;
    for (const auto& c : sig.columns) {
        out += first ? " " : ", ";
        out += c;
        first = false;
    }
    for (const auto& r : sig.rows) {
        out += '\n';
        out += r;
    }
    return out;
}

double multiset_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t i = 0, j = 0, inter = 0, uni = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            ++i;
        } else if (i == a.size() || b[j] < a[i]) {
            ++j;
        } else {
            ++inter;
            ++i;
            ++j;
        }
        ++uni;
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double set_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    return multiset_jaccard(std::vector<std::string>(a.begin(), a.end()), std::vector<std::string>(b.begin(), b.end()));
}

}  // namespace

EmbeddingClient::EmbeddingClient(Options options) : options_(std::move(options)) {
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

double EmbeddingClient::similarity(const std::string& a, const std::string& b) const {
    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    struct Release {
        const EmbeddingClient& c;
        ~Release() {
            std::lock_guard lock(c.mutex_);
            --c.in_flight_;
            c.slot_free_.notify_one();
        }
    } release{*this};

    const bool ordered = a <= b;
    nlohmann::json body{{"texts", {ordered ? a : b, ordered ? b : a}}};
    const std::string response = http::post_json(options_.endpoint, body.dump(), options_.timeout, {});
    try {
        const auto parsed = nlohmann::json::parse(response);
        const double s = parsed.at("similarity").get<double>();
        return std::clamp(s, 0.0, 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::network_error, std::string("malformed similarity response: ") + e.what());
    }
}

double Comparator::operator()(const ResultTable& a, const ResultTable& b) const {
    switch (kind_) {
        case ComparatorKind::exact: return functionally_equal(a, b) ? 1.0 : 0.0;
        case ComparatorKind::table_jaccard: {
            const TableSignature x = signature(a);
            const TableSignature y = signature(b);
            return 0.5 * set_jaccard(x.columns, y.columns) + 0.5 * multiset_jaccard(x.rows, y.rows);
        }
        case ComparatorKind::external_embedding:
            if (!client_) {
                throw Error(ErrorCode::comparator_unavailable, "external_embedding comparator has no endpoint");
            }
            if (functionally_equal(a, b)) return 1.0;
            // A score of exactly 1 is reserved for functionally equal tables.
            return std::min(client_->similarity(serialize_table(a), serialize_table(b)),
                            std::nextafter(1.0, 0.0));
    }
    return 0.0;
}

double table_similarity(const ResultTable& a, const ResultTable& b, const Comparator& comparator) {
    return comparator(a, b);
}

bool functionally_equal(const ResultTable& a, const ResultTable& b) { return signature(a) == signature(b); }

}  // namespace plsq
