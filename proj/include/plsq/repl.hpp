#pragma once

#include "plsq/engine.hpp"

#include <iosfwd>

namespace plsq {

struct ReplOutcome {
    SessionState state;
    bool terminal{false};
    bool quit{false};  // explicit quit or end of input before termination
};

/// Text clarification loop. Shows the current ranked variable with its
/// example query and reads one command per line: y/yes, n/no, s/skip,
/// b/back, q/quit. Skip cycles through the ranking without changing the
/// state. Prints the final SQL once the state is terminal.
ReplOutcome run_repl(SessionState state, std::istream& in, std::ostream& out);

}  // namespace plsq
