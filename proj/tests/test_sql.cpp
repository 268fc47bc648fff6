#include "doctest.h"
#include "test_support.hpp"

#include "plsq/error.hpp"

#include <random>

using namespace plsq;
using namespace plsq::testing;

TEST_CASE("parse_sql accepts a minimal query") {
    const auto db = film_db();
    const auto ast = sql::parse_sql("SELECT opinion FROM reviews", db);
    REQUIRE(ast.root);
    CHECK(ast.root->items.size() == 1);
    CHECK(ast.root->sources.size() == 1);
    CHECK(ast.root->sources[0].canonical == "reviews");
    CHECK(sql::canonical_sql(ast) == "select opinion from reviews");
}

TEST_CASE("parse_sql rejects a malformed keyword as a syntax error") {
    const auto db = film_db();
    try {
        sql::parse_sql("SELEC opinion FROM reviews", db);
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.code() == ErrorCode::syntax_error);
        CHECK(e.position() == 0);
    }
}

TEST_CASE("parse_sql reports unknown columns as resolution errors") {
    DatabaseSpec db;
    db.tables.push_back(table("sales", {{"product", ColumnType::text}}, {}));
    try {
        sql::parse_sql("SELECT prod_label FROM sales", db);
        FAIL("expected a resolution error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::resolution_error);
    }
}

TEST_CASE("parse_sql error paths") {
    const auto db = film_db();
    auto code_of = [&](const char* text) {
        try {
            sql::parse_sql(text, db);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::bad_request;  // sentinel: parsed fine
    };
    CHECK(code_of("SELECT * FROM nowhere") == ErrorCode::resolution_error);
    CHECK(code_of("SELECT id FROM films JOIN reviews ON films.id = reviews.film_id") == ErrorCode::resolution_error);
    CHECK(code_of("SELECT f.name FROM films") == ErrorCode::resolution_error);
    CHECK(code_of("SELECT name FROM films WHERE count(*) > 1") == ErrorCode::resolution_error);
    CHECK(code_of("SELECT max(count(*)) FROM films") == ErrorCode::resolution_error);
    CHECK(code_of("DELETE FROM films") == ErrorCode::unsupported_construct);
    CHECK(code_of("WITH x AS (SELECT 1) SELECT * FROM x") == ErrorCode::unsupported_construct);
    CHECK(code_of("SELECT name FROM films; SELECT 1") == ErrorCode::unsupported_construct);
    CHECK(code_of("SELECT * FROM films RIGHT JOIN reviews ON films.id = reviews.film_id") ==
          ErrorCode::unsupported_construct);
    CHECK(code_of("SELECT * FROM (SELECT 1)") == ErrorCode::unsupported_construct);
    CHECK(code_of("SELECT row_number() OVER () FROM films") == ErrorCode::unsupported_construct);
    CHECK(code_of("SELECT name FROM films WHERE") == ErrorCode::syntax_error);
    CHECK(code_of("SELECT name FROM films WHERE name = 'x") == ErrorCode::syntax_error);
    CHECK(code_of("SELECT name, id FROM films UNION SELECT name FROM films") == ErrorCode::resolution_error);
    CHECK(code_of("SELECT name FROM films;") == ErrorCode::bad_request);
}

TEST_CASE("canonical text strips aliases and orders equality operands") {
    const auto db = film_db();
    CHECK(sql::canonical_sql(sql::parse_sql("SELECT s.product FROM sales s", db)) ==
          sql::canonical_sql(sql::parse_sql("SELECT product FROM sales", db)));
    CHECK(sql::canonical_sql(sql::parse_sql("select NAME from Films where 120 = Duration", db)) ==
          "select name from films where duration=120");
    CHECK(sql::canonical_sql(sql::parse_sql(
              "SELECT r.opinion FROM reviews AS r JOIN films f ON f.id = r.film_id WHERE f.genre != 'drama'", db)) ==
          "select reviews.opinion from reviews join films on reviews.film_id=films.id where films.genre<>'drama'");
    CHECK(sql::canonical_sql(sql::parse_sql("SELECT e1.name FROM films e1 JOIN films e2 ON e1.id = e2.id", db)) ==
          "select films.name from films join films as films_2 on films_2.id=films.id");
}

TEST_CASE("canonical text keeps evaluation structure through precedence") {
    const auto db = film_db();
    auto canon = [&](const char* q) { return sql::canonical_sql(sql::parse_sql(q, db)); };
    CHECK(canon("SELECT (duration - 10) * 2 FROM films") == "select (duration-10)*2 from films");
    CHECK(canon("SELECT duration - (10 - 2) FROM films") == "select duration-(10-2) from films");
    CHECK(canon("SELECT duration - -5 FROM films") == "select duration-(-5) from films");
    CHECK(canon("SELECT name FROM films WHERE (genre = 'drama' OR genre = 'comedy') AND duration > 100") ==
          "select name from films where (genre='drama' or genre='comedy') and duration>100");
    CHECK(canon("SELECT name FROM films WHERE NOT duration IS NULL") == "select name from films where not duration is null");
    CHECK(canon("SELECT genre, COUNT(*) AS n FROM films GROUP BY genre HAVING n > 1 ORDER BY n DESC LIMIT 2") ==
          "select genre, count(*) from films group by genre having count(*)>1 order by count(*) desc limit 2");
    CHECK(canon("SELECT name FROM films ORDER BY 1") == "select name from films order by name asc");
    CHECK(canon("SELECT name FROM films UNION SELECT opinion FROM reviews ORDER BY name") ==
          "select name from films union select opinion from reviews order by 1 asc");
}

TEST_CASE("subqueries resolve correlated references") {
    const auto db = film_db();
    const auto ast = sql::parse_sql(
        "SELECT f.name FROM films f WHERE EXISTS (SELECT 1 FROM reviews r WHERE r.film_id = f.id AND r.score > 7)", db);
    CHECK(sql::canonical_sql(ast) ==
          "select name from films where exists (select 1 from reviews where films.id=film_id and score>7)");
}

namespace {

// Random query generator over film_db, rendered with or without aliases.
struct QueryModel {
    bool join{false};
    bool use_alias{false};
    std::vector<std::string> select_cols;  // qualified as films.x / reviews.x
    std::vector<std::string> where;        // templates with {films} / {reviews}
    bool group{false};
    bool order{false};
    bool desc{false};
    int limit{0};
    bool distinct{false};
};

std::string substitute(std::string text, const std::string& films, const std::string& reviews) {
    auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
        for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
            s.replace(p, from.size(), to);
        }
    };
    replace_all(text, "{films}", films);
    replace_all(text, "{reviews}", reviews);
    return text;
}

QueryModel random_model(std::mt19937_64& rng) {
    auto pick = [&](auto const& v) { return v[rng() % v.size()]; };
    QueryModel m;
    m.join = rng() % 2 == 0;
    const std::vector<std::string> film_cols{"{films}.name", "{films}.duration", "{films}.genre", "{films}.rating"};
    const std::vector<std::string> review_cols{"{reviews}.opinion", "{reviews}.score"};
    const std::size_t n = 1 + rng() % 2;
    for (std::size_t i = 0; i < n; ++i) {
        m.select_cols.push_back(m.join && rng() % 2 ? pick(review_cols) : pick(film_cols));
    }
    const std::vector<std::string> film_preds{"{films}.duration > 100", "{films}.duration = 120",
                                              "120 = {films}.duration", "{films}.genre = 'drama'",
                                              "{films}.rating IS NOT NULL", "{films}.name LIKE '%a%'",
                                              "({films}.genre = 'comedy' OR {films}.duration >= 150)",
                                              "{films}.duration BETWEEN 90 AND 130",
                                              "{films}.genre IN ('drama', 'action')"};
    const std::vector<std::string> review_preds{"{reviews}.score >= 6", "{reviews}.opinion <> 'boring'"};
    const std::size_t w = rng() % 3;
    for (std::size_t i = 0; i < w; ++i) m.where.push_back(m.join && rng() % 3 == 0 ? pick(review_preds) : pick(film_preds));
    m.order = rng() % 2 == 0;
    m.desc = rng() % 2 == 0;
    m.limit = static_cast<int>(rng() % 3);
    m.distinct = rng() % 4 == 0;
    return m;
}

std::string render_model(const QueryModel& m, bool alias, std::mt19937_64& rng) {
    static const std::vector<std::string> names{"f", "x", "t1", "mv", "ff"};
    static const std::vector<std::string> rnames{"r", "y", "t2", "rv"};
    const std::string fa = alias ? names[rng() % names.size()] : "films";
    const std::string ra = alias ? rnames[rng() % rnames.size()] : "reviews";
    std::string q = "SELECT ";
    if (m.distinct) q += "DISTINCT ";
    for (std::size_t i = 0; i < m.select_cols.size(); ++i) {
        if (i) q += ", ";
        q += substitute(m.select_cols[i], fa, ra);
    }
    q += " FROM films";
    if (alias) q += " " + fa;
    if (m.join) {
        q += " JOIN reviews";
        if (alias) q += " AS " + ra;
        q += " ON " + substitute("{films}.id = {reviews}.film_id", fa, ra);
    }
    for (std::size_t i = 0; i < m.where.size(); ++i) {
        q += i ? " AND " : " WHERE ";
        q += substitute(m.where[i], fa, ra);
    }
    if (m.order) q += " ORDER BY " + substitute(m.select_cols[0], fa, ra) + (m.desc ? " DESC" : "");
    if (m.limit) q += " LIMIT " + std::to_string(m.limit);
    return q;
}

}  // namespace

TEST_CASE("property: canonicalization is idempotent and preserves features") {
    const auto db = film_db();
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 300; ++i) {
        const auto model = random_model(rng);
        const std::string q = render_model(model, rng() % 2 == 0, rng);
        CAPTURE(q);
        const auto ast = sql::parse_sql(q, db);
        const std::string c1 = sql::canonical_sql(ast);
        const auto ast2 = sql::parse_sql(c1, db);
        CHECK(sql::canonical_sql(ast2) == c1);
        CHECK(extract_features(ast2) == extract_features(ast));
    }
}

TEST_CASE("property: fresh table aliases leave the feature set unchanged") {
    const auto db = film_db();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const auto model = random_model(rng);
        const std::string plain = render_model(model, false, rng);
        const std::string aliased = render_model(model, true, rng);
        CAPTURE(plain);
        CAPTURE(aliased);
        CHECK(features_of(plain, db) == features_of(aliased, db));
        CHECK(sql::canonical_sql(sql::parse_sql(plain, db)) == sql::canonical_sql(sql::parse_sql(aliased, db)));
    }
}
