#include "plsq/cli.hpp"

#include "plsq/corpus.hpp"
#include "plsq/error.hpp"
#include "plsq/evalsim.hpp"
#include "plsq/llm_client.hpp"
#include "plsq/repl.hpp"
#include "plsq/service.hpp"

#include "CLI11.hpp"
#include "httplib.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

namespace plsq {

namespace fs = std::filesystem;

namespace {

std::vector<PolicyKind> parse_policies(const std::string& list) {
    std::vector<PolicyKind> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = std::min(list.find(',', start), list.size());
        const std::string name = list.substr(start, end - start);
        if (!name.empty()) {
            if (name == "all") {
                out.assign(std::begin(all_policies), std::end(all_policies));
            } else if (auto p = policy_from_string(name)) {
                if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
            } else {
                throw CLI::ValidationError("--policies", "unknown policy '" + name + "'");
            }
        }
        start = end + 1;
    }
    if (out.empty()) throw CLI::ValidationError("--policies", "no policy given");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::validation_error, "cannot write " + path.string());
    f << text;
}

int cmd_ingest(const std::string& corpus_path, std::ostream& out) {
    const Corpus corpus = load_corpus(corpus_path);
    std::map<std::string, std::size_t> by_type;
    for (const auto& t : corpus.tasks) {
        by_type[t.ambiguity_type ? std::string(to_string(*t.ambiguity_type)) : "unknown"]++;
    }
    out << corpus.tasks.size() << " tasks valid\n";
    for (const auto& [type, n] : by_type) out << "  " << type << ": " << n << "\n";
    for (const auto& t : corpus.tasks) {
        out << "  " << t.id << " (" << t.gold_sqls.size() << " gold, " << t.db.tables.size() << " tables)\n";
    }
    return exit_ok;
}

const Task& require_task(const Corpus& corpus, const std::string& id) {
    const Task* t = corpus.find(id);
    if (!t) throw Error(ErrorCode::not_found, "unknown task '" + id + "'");
    return *t;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interactive disambiguation of ambiguous text-to-SQL questions", "plsq"};
    app.require_subcommand(1);

    std::string corpus_path, caches_dir, cache_path, task_id, out_path, policies = "all";
    std::string endpoint, model = "gpt-4o", snapshot_dir, host = "127.0.0.1";
    int n = 50, port = 8080;
    double temperature = 0.7;
    std::uint64_t seed = 0;
    std::size_t runs = 1, turn_cap = default_turn_cap;

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print a summary");
    ingest->add_option("--corpus", corpus_path, "Corpus JSON file")->required();

    auto* generate = app.add_subcommand("generate", "Sample candidate SQL for one task into a cache file");
    generate->add_option("--corpus", corpus_path)->required();
    generate->add_option("--task", task_id)->required();
    generate->add_option("--out", out_path, "Cache file to write")->required();
    generate->add_option("--n", n)->check(CLI::PositiveNumber);
    generate->add_option("--temperature", temperature)->check(CLI::NonNegativeNumber);
    generate->add_option("--endpoint", endpoint, "Chat-completion URL (default $PLSQ_LLM_ENDPOINT)");
    generate->add_option("--model", model);

    auto* eval = app.add_subcommand("eval", "Run the simulated-user benchmark");
    eval->add_option("--corpus", corpus_path)->required();
    eval->add_option("--caches", caches_dir, "Directory of cache files")->required();
    eval->add_option("--policies", policies, "Comma-separated policy names or 'all'");
    eval->add_option("--seed", seed, "Seed of the first random-policy run");
    eval->add_option("--runs", runs, "Random-policy runs (seeds seed..seed+runs-1)")->check(CLI::PositiveNumber);
    eval->add_option("--turn-cap", turn_cap)->check(CLI::PositiveNumber);
    eval->add_option("--out", out_path, "Output directory")->required();

    auto* repl = app.add_subcommand("repl", "Clarify one task interactively on stdin");
    repl->add_option("--corpus", corpus_path)->required();
    repl->add_option("--cache", cache_path)->required();
    repl->add_option("--task", task_id)->required();

    auto* serve = app.add_subcommand("serve", "Serve the session API");
    serve->add_option("--corpus", corpus_path)->required();
    serve->add_option("--caches", caches_dir)->required();
    serve->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve->add_option("--host", host);
    serve->add_option("--snapshots", snapshot_dir, "Write-through session snapshot directory");
    serve->add_option("--endpoint", endpoint, "Chat-completion URL for sessions that request sampling");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return exit_usage;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(corpus_path, out);

        if (generate->parsed()) {
            const Corpus corpus = load_corpus(corpus_path);
            SamplingConfig cfg;
            cfg.apply_environment();
            if (!endpoint.empty()) cfg.endpoint = endpoint;
            cfg.model = model;
            cfg.n = static_cast<std::size_t>(n);
            cfg.temperature = temperature;
            const CandidateCache cache = generate_candidates(require_task(corpus, task_id), cfg);
            write_json_file(out_path, to_json(cache));
            out << "wrote " << cache.samples.size() << " samples to " << out_path << "\n";
            return exit_ok;
        }

        if (eval->parsed()) {
            BenchmarkOptions options;
            try {
                options.policies = parse_policies(policies);
            } catch (const CLI::ValidationError& e) {
                err << "error: " << e.what() << "\n";
                return exit_usage;
            }
            options.seeds.clear();
            for (std::size_t i = 0; i < runs; ++i) options.seeds.push_back(seed + i);
            options.turn_cap = turn_cap;
            const Corpus corpus = load_corpus(corpus_path);
            const auto caches = load_cache_directory(caches_dir);
            const BenchmarkReport report = run_benchmark(corpus, caches, options);
            fs::create_directories(out_path);
            write_text(fs::path(out_path) / "report.csv", report_csv(report));
            write_json_file(fs::path(out_path) / "report.json", report_json(report));
            out << report.traces.size() << " traces, " << report.series.size() << " series points written to "
                << out_path << "\n";
            return exit_ok;
        }

        if (repl->parsed()) {
            const Corpus corpus = load_corpus(corpus_path);
            const Task& task = require_task(corpus, task_id);
            const CandidateCache cache = load_candidate_cache(cache_path);
            auto state = init_session(task.utterance, validate_candidates(cache, task.db));
            run_repl(std::move(state), in, out);
            return exit_ok;
        }

        if (serve->parsed()) {
            Corpus corpus = load_corpus(corpus_path);
            auto caches = load_cache_directory(caches_dir);
            SessionService::Options options;
            if (!snapshot_dir.empty()) {
                fs::create_directories(snapshot_dir);
                options.snapshot_dir = snapshot_dir;
            }
            SamplingConfig cfg;
            cfg.apply_environment();
            if (!endpoint.empty()) cfg.endpoint = endpoint;
            if (!cfg.endpoint.empty()) options.sampling = cfg;
            SessionService service(std::move(corpus), std::move(caches), std::move(options));
            httplib::Server server;
            install_routes(server, service);
            out << "listening on http://" << host << ":" << port << std::endl;
            if (!server.listen(host, port)) {
                err << "error: cannot listen on " << host << ":" << port << "\n";
                return exit_failure;
            }
            return exit_ok;
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}

}  // namespace plsq
