#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shapfair {

// Caller-supplied input is structurally wrong (bad coalition, bad
// distribution, i in its own predecessor set, ...).
struct invalid_argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The request exceeds a documented size cap (n too large for an exact path
// or a table game).
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A serialised artifact (game table, phi file, config) does not conform to
// its documented schema.
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A subprocess utility misbehaved: died, answered garbage, or timed out.
// Carries the request line that was in flight.
struct external_utility_error : std::runtime_error {
    explicit external_utility_error(const std::string& what, std::string request = {})
        : std::runtime_error(what), request_line(std::move(request)) {}
    std::string request_line;
};

// Not enough samples to compute the requested statistic.
struct insufficient_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A non-finite value reached an online statistic. Carries player and step.
struct numeric_error : std::runtime_error {
    numeric_error(const std::string& what, int player, long step)
        : std::runtime_error(what), player(player), step(step) {}
    int player = -1;
    long step = -1;
};

// The fairness-improvement ratio is undefined (denominator ~ 0).
struct degenerate_bound_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment config failed validation; every offending field is listed.
struct config_error : std::runtime_error {
    explicit config_error(std::vector<std::string> issues_in)
        : std::runtime_error(join(issues_in)), issues(std::move(issues_in)) {}
    std::vector<std::string> issues;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid config:";
        for (const auto& e : v) {
            s += "\n  - ";
            s += e;
        }
        return s;
    }
};

} // namespace shapfair
