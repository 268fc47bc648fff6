#include "doctest.h"

#include "plsq/cli.hpp"
#include "plsq/evalsim.hpp"
#include "plsq/llm_client.hpp"
#include "plsq/repl.hpp"

#include <fstream>
#include <sstream>

using namespace plsq;

namespace {

const std::filesystem::path fixtures{PLSQ_FIXTURES_DIR};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = run_cli(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

const std::string corpus = (fixtures / "corpus.json").string();
const std::string caches = (fixtures / "caches").string();

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"ingest", "--corpus", corpus, "--bogus"}).code == exit_usage);
    CHECK(cli({"ingest"}).code == exit_usage);
    CHECK(cli({"eval", "--corpus", corpus, "--caches", caches, "--out", "/tmp/x", "--policies", "oracle"}).code ==
          exit_usage);
    CHECK(cli({"serve", "--corpus", corpus, "--caches", caches, "--port", "70000"}).code == exit_usage);
    CHECK(cli({"--help"}).code == exit_ok);
}

TEST_CASE("ingest validates and reports") {
    const auto ok = cli({"ingest", "--corpus", corpus});
    CHECK(ok.code == exit_ok);
    CHECK(ok.out.find("8 tasks valid") != std::string::npos);

    const auto bad = std::filesystem::temp_directory_path() / "plsq_bad_corpus.json";
    std::ofstream(bad) << R"({"tasks":[{"id":"t","utterance":"u","db":{"tables":[]},"gold_sqls":["SELECT x FROM nowhere"]}]})";
    const auto r = cli({"ingest", "--corpus", bad.string()});
    CHECK(r.code == exit_failure);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(cli({"ingest", "--corpus", "/nonexistent/corpus.json"}).code == exit_failure);
    std::filesystem::remove(bad);
}

TEST_CASE("eval writes a reproducible report") {
    const auto dir = std::filesystem::temp_directory_path() / "plsq_cli_eval";
    std::filesystem::remove_all(dir);
    const std::vector<std::string> args{"eval",  "--corpus", corpus,       "--caches", caches,
                                        "--policies", "random,greedy,ig_atomic_nocluster,ig_atomic,ig_grouped",
                                        "--seed", "7",       "--out", (dir / "a").string()};
    REQUIRE(cli(args).code == exit_ok);
    auto args2 = args;
    args2.back() = (dir / "b").string();
    REQUIRE(cli(args2).code == exit_ok);
    const std::string csv = slurp(dir / "a/report.csv");
    CHECK(csv.rfind("ambiguity_type,policy,turn,median_entropy_bits,median_intra_similarity,n_tasks\n", 0) == 0);
    CHECK(csv == slurp(dir / "b/report.csv"));
    CHECK(slurp(dir / "a/report.json") == slurp(dir / "b/report.json"));
    for (const char* p : {"random", "greedy", "ig_atomic_nocluster", "ig_atomic", "ig_grouped"}) {
        CHECK(csv.find(std::string(",") + p + ",0,") != std::string::npos);
    }
    CHECK(cli({"eval", "--corpus", corpus, "--caches", "/nonexistent", "--out", (dir / "c").string()}).code ==
          exit_failure);
    std::filesystem::remove_all(dir);
}

TEST_CASE("repl answering like a gold candidate ends on its SQL") {
    const Corpus c = load_corpus(corpus);
    for (const auto& task : c.tasks) {
        const std::string cache = (fixtures / "caches" / (task.id + ".json")).string();
        const auto initial = init_session(task.utterance, validate_candidates(load_candidate_cache(cache), task.db));
        const auto gold = assign_gold_labels(initial.pool().candidates, task);
        for (std::size_t g = 0; g < gold.gold_count; ++g) {
            const auto ref = reference_candidate(initial, gold, g);
            if (!ref) continue;
            const Candidate& target = *initial.pool().find(*ref);
            std::string input;
            auto s = initial;
            while (!is_terminal(s)) {
                const auto& v = s.ranking().front();
                const bool yes = contains_all(target.features, v.group_set());
                input += yes ? "y\n" : "n\n";
                s = apply_decision(s, v, yes ? Choice::yes : Choice::no);
            }
            CAPTURE(task.id);
            const auto r = cli({"repl", "--corpus", corpus, "--cache", cache, "--task", task.id}, input);
            CHECK(r.code == exit_ok);
            CHECK(r.out.find("Final SQL: " + target.sql + "\n") != std::string::npos);
        }
    }
}

TEST_CASE("repl handles skip, back, junk and end of input") {
    const Corpus c = load_corpus(corpus);
    const Task& task = *c.find("scope_gym_classes");
    const auto initial = init_session(
        task.utterance, validate_candidates(load_candidate_cache(fixtures / "caches/scope_gym_classes.json"), task.db));
    std::istringstream in("hello\nb\ns\nY\nback\nSKIP\n");
    std::ostringstream out;
    const auto outcome = run_repl(initial, in, out);
    CHECK(outcome.quit);
    CHECK_FALSE(outcome.terminal);
    CHECK(outcome.state.turn() == 0);
    CHECK(out.str().find("nothing to undo") != std::string::npos);
    CHECK(out.str().find("commands:") != std::string::npos);

    std::istringstream q("q\n");
    std::ostringstream out2;
    CHECK(run_repl(initial, q, out2).quit);
}
