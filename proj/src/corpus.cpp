#include "plsq/corpus.hpp"

#include "plsq/error.hpp"
#include "plsq/executor.hpp"
#include "plsq/sql/parser.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace plsq {

using nlohmann::json;

std::string_view to_string(AmbiguityType type) noexcept {
    switch (type) {
        case AmbiguityType::scope: return "scope";
        case AmbiguityType::attachment: return "attachment";
        case AmbiguityType::vague: return "vague";
    }
    return "scope";
}

std::optional<AmbiguityType> ambiguity_from_string(std::string_view name) noexcept {
    if (name == "scope") return AmbiguityType::scope;
    if (name == "attachment") return AmbiguityType::attachment;
    if (name == "vague") return AmbiguityType::vague;
    return std::nullopt;
}

const Task* Corpus::find(std::string_view id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

namespace {

[[noreturn]] void parse_fail(const std::string& message) { throw Error(ErrorCode::parse_error, message); }

const json& field(const json& j, const char* name, const std::string& where) {
    if (!j.is_object()) parse_fail(where + ": expected an object");
    auto it = j.find(name);
    if (it == j.end()) parse_fail(where + ": missing required field '" + name + "'");
    return *it;
}

std::string string_field(const json& j, const char* name, const std::string& where) {
    const json& v = field(j, name, where);
    if (!v.is_string()) parse_fail(where + ": field '" + name + "' must be a string");
    return v.get<std::string>();
}

const json& array_field(const json& j, const char* name, const std::string& where) {
    const json& v = field(j, name, where);
    if (!v.is_array()) parse_fail(where + ": field '" + name + "' must be an array");
    return v;
}

json cell_to_json(const Value& v) {
    if (v.is_null()) return nullptr;
    if (v.is_integer()) return v.as_integer();
    if (v.is_real()) return v.as_real();
    return v.as_text();
}

Value cell_from_json(const json& j, ColumnType type, const std::string& where) {
    if (j.is_null()) return Value(Null{});
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_number_integer()) {
        const auto v = j.get<std::int64_t>();
        if (type == ColumnType::real) return Value(static_cast<double>(v));
        return Value(v);
    }
    if (j.is_number_float()) return Value(j.get<double>());
    parse_fail(where + ": cells must be null, numbers or strings");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        parse_fail("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

}  // namespace

json to_json(const DatabaseSpec& db) {
    json tables = json::array();
    for (const auto& t : db.tables) {
        json columns = json::array();
        for (const auto& c : t.columns) columns.push_back({{"name", c.name}, {"type", to_string(c.type)}});
        json rows = json::array();
        for (const auto& r : t.rows) {
            json row = json::array();
            for (const auto& v : r) row.push_back(cell_to_json(v));
            rows.push_back(std::move(row));
        }
        tables.push_back({{"name", t.name}, {"columns", std::move(columns)}, {"rows", std::move(rows)}});
    }
    return {{"tables", std::move(tables)}};
}

json to_json(const Task& task) {
    json j{{"id", task.id}, {"utterance", task.utterance}, {"db", to_json(task.db)}, {"gold_sqls", task.gold_sqls}};
    if (task.ambiguity_type) j["ambiguity_type"] = to_string(*task.ambiguity_type);
    return j;
}

json to_json(const Corpus& corpus) {
    json tasks = json::array();
    for (const auto& t : corpus.tasks) tasks.push_back(to_json(t));
    return {{"tasks", std::move(tasks)}};
}

json to_json(const CandidateCache& cache) {
    return {{"task_id", cache.task_id},
            {"model", cache.model},
            {"temperature", cache.temperature},
            {"samples", cache.samples}};
}

DatabaseSpec database_from_json(const json& j) {
    DatabaseSpec db;
    for (const auto& t : array_field(j, "tables", "db")) {
        TableSpec table;
        table.name = string_field(t, "name", "table");
        const std::string where = "table '" + table.name + "'";
        for (const auto& c : array_field(t, "columns", where)) {
            ColumnSpec col;
            col.name = string_field(c, "name", where + " column");
            const std::string type = string_field(c, "type", where + " column '" + col.name + "'");
            auto parsed = column_type_from_string(type);
            if (!parsed) parse_fail(where + ": column '" + col.name + "' has unknown type '" + type + "'");
            col.type = *parsed;
            table.columns.push_back(std::move(col));
        }
        for (const auto& r : array_field(t, "rows", where)) {
            if (!r.is_array()) parse_fail(where + ": rows must be arrays");
            Row row;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const ColumnType type = i < table.columns.size() ? table.columns[i].type : ColumnType::text;
                row.push_back(cell_from_json(r[i], type, where));
            }
            table.rows.push_back(std::move(row));
        }
        db.tables.push_back(std::move(table));
    }
    return db;
}

Task task_from_json(const json& j) {
    Task task;
    task.id = string_field(j, "id", "task");
    const std::string where = "task '" + task.id + "'";
    task.utterance = string_field(j, "utterance", where);
    task.db = database_from_json(field(j, "db", where));
    for (const auto& g : array_field(j, "gold_sqls", where)) {
        if (!g.is_string()) parse_fail(where + ": gold_sqls entries must be strings");
        task.gold_sqls.push_back(g.get<std::string>());
    }
    if (auto it = j.find("ambiguity_type"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) parse_fail(where + ": ambiguity_type must be a string");
        task.ambiguity_type = ambiguity_from_string(it->get<std::string>());
        if (!task.ambiguity_type) parse_fail(where + ": unknown ambiguity_type '" + it->get<std::string>() + "'");
    }
    return task;
}

CandidateCache cache_from_json(const json& j) {
    CandidateCache cache;
    cache.task_id = string_field(j, "task_id", "cache");
    const std::string where = "cache for '" + cache.task_id + "'";
    cache.model = string_field(j, "model", where);
    const json& temp = field(j, "temperature", where);
    if (!temp.is_number()) parse_fail(where + ": temperature must be a number");
    cache.temperature = temp.get<double>();
    for (const auto& s : array_field(j, "samples", where)) {
        if (!s.is_string()) parse_fail(where + ": samples must be strings");
        cache.samples.push_back(s.get<std::string>());
    }
    return cache;
}

void validate_corpus(const Corpus& corpus) {
    std::set<std::string> ids;
    for (const auto& task : corpus.tasks) {
        auto fail = [&](const std::string& fieldname, const std::string& message) {
            throw Error(ErrorCode::validation_error, "task '" + task.id + "', field '" + fieldname + "': " + message);
        };
        if (task.id.empty()) fail("id", "empty id");
        if (!ids.insert(task.id).second) fail("id", "duplicate task id");
        try {
            task.db.validate();
        } catch (const Error& e) {
            fail("db", e.what());
        }
        if (task.gold_sqls.empty()) fail("gold_sqls", "at least one gold SQL is required");
        for (std::size_t i = 0; i < task.gold_sqls.size(); ++i) {
            try {
                const auto ast = sql::parse_sql(task.gold_sqls[i], task.db);
                (void)execute(ast, task.db);
            } catch (const Error& e) {
                fail("gold_sqls[" + std::to_string(i) + "]", e.what());
            }
        }
    }
}

Corpus corpus_from_json(const json& j) {
    Corpus corpus;
    for (const auto& t : array_field(j, "tasks", "corpus")) corpus.tasks.push_back(task_from_json(t));
    validate_corpus(corpus);
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) { return corpus_from_json(read_json_file(path)); }

CandidateCache load_candidate_cache(const std::filesystem::path& path) { return cache_from_json(read_json_file(path)); }

std::vector<CandidateCache> load_cache_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) parse_fail("not a directory: '" + dir.string() + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<CandidateCache> out;
    for (const auto& f : files) out.push_back(load_candidate_cache(f));
    return out;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorCode::bad_request, "cannot write '" + path.string() + "'");
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace plsq
