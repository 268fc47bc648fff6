#include "plsq/repl.hpp"

#include "plsq/error.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace plsq {

namespace {

enum class Command { yes, no, skip, back, quit, unknown };

Command parse_command(std::string line) {
    const auto first = line.find_first_not_of(" \t\r");
    const auto last = line.find_last_not_of(" \t\r");
    line = first == std::string::npos ? "" : fold_case(line.substr(first, last - first + 1));
    if (line == "y" || line == "yes") return Command::yes;
    if (line == "n" || line == "no") return Command::no;
    if (line == "s" || line == "skip") return Command::skip;
    if (line == "b" || line == "back") return Command::back;
    if (line == "q" || line == "quit" || line == "exit") return Command::quit;
    return Command::unknown;
}

const Candidate& candidate_by_id(const SessionState& state, int id) {
    for (std::size_t k = 0; k < state.size(); ++k) {
        if (state.candidate(k).id == id) return state.candidate(k);
    }
    return state.candidate(top_candidate(state));
}

void show_question(const SessionState& state, const DecisionVariable& v, std::size_t index, std::ostream& out) {
    out << "\n[turn " << state.turn() << "] " << state.size() << " candidates, " << state.meanings().size()
        << " distinct outputs\n";
    out << "Question " << index + 1 << "/" << state.ranking().size() << ": should the query contain\n";
    for (const auto& f : v.group) out << "    " << f.id() << "\n";
    out << "  example: " << candidate_by_id(state, v.example_candidate_id).sql << "\n";
    for (const auto& f : v.implicit_features) {
        out << "  implies: " << f.feature.id() << " (" << std::fixed << std::setprecision(0) << f.probability * 100
            << "%)\n";
        out << std::defaultfloat << std::setprecision(6);
    }
    out << "  information gain: " << std::fixed << std::setprecision(3) << v.ig_bits << " bits\n"
        << std::defaultfloat << std::setprecision(6);
    out << "(y)es / (n)o / (s)kip / (b)ack / (q)uit > " << std::flush;
}

}  // namespace

ReplOutcome run_repl(SessionState state, std::istream& in, std::ostream& out) {
    out << "Question: " << state.utterance() << "\n";
    std::size_t cursor = 0;
    std::string line;
    while (!is_terminal(state)) {
        const auto& ranking = state.ranking();
        if (cursor >= ranking.size()) cursor = 0;
        const DecisionVariable variable = ranking[cursor];
        show_question(state, variable, cursor, out);
        if (!std::getline(in, line)) {
            out << "\n";
            return {state, false, true};
        }
        switch (parse_command(line)) {
            case Command::yes:
            case Command::no:
                try {
                    state = apply_decision(state, variable, parse_command(line) == Command::yes ? Choice::yes : Choice::no);
                    cursor = 0;
                } catch (const Error& e) {
                    out << "cannot apply: " << e.what() << "\n";
                }
                break;
            case Command::skip:
                if (++cursor >= ranking.size()) {
                    out << "no more alternatives, back to the first question\n";
                    cursor = 0;
                }
                break;
            case Command::back:
                if (state.turn() == 0) {
                    out << "nothing to undo\n";
                } else {
                    state = undo(state);
                    cursor = 0;
                }
                break;
            case Command::quit:
                return {state, false, true};
            case Command::unknown:
                out << "commands: y, n, s (skip), b (back), q (quit)\n";
                break;
        }
    }
    out << "\nFinal SQL: " << state.candidate(top_candidate(state)).sql << "\n";
    return {state, true, false};
}

}  // namespace plsq
