#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "exptrack/simplex.hpp"

namespace exptrack {

// A finite game: per-round loss vectors plus optional metadata produced by
// the environment generators (half-ranges, an embedded competitor sequence,
// and the path budget that competitor respects).
struct GameScript {
    int experts = 0;
    std::uint64_t seed = 0;
    std::vector<LossVector> losses;
    std::vector<double> ranges;                     // U_t, one per round
    std::vector<SimplexDistribution> competitor;    // empty when none embedded
    std::optional<double> path_budget;

    long rounds() const { return static_cast<long>(losses.size()); }
};

inline double adaptive_deviation_norm(const GameScript& script) {
    if (script.losses.empty())
        throw std::invalid_argument("adaptive_deviation_norm: empty script");
    if (script.ranges.size() == script.losses.size())
        return deviation_norm(script.ranges);
    std::vector<double> ranges;
    ranges.reserve(script.losses.size());
    for (const LossVector& l : script.losses) ranges.push_back(half_range(l));
    return deviation_norm(ranges);
}

// 0.5 * sum of l1 jumps between successive distributions
inline double sequence_path(const std::vector<SimplexDistribution>& seq) {
    double p = 0.0;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t)
        p += total_variation(seq[t], seq[t + 1]);
    return p;
}

namespace detail {

// shortest decimal digits that round-trip a double exactly
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_row(const std::vector<double>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ' ';
        out += format_double(row[i]);
    }
    return out;
}

inline std::vector<double> parse_row(const std::string& line, int expected, const char* what) {
    std::istringstream iss(line);
    std::vector<double> row;
    double v;
    while (iss >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != expected)
        throw std::invalid_argument(std::string("script: bad ") + what + " row: " + line);
    return row;
}

}  // namespace detail

// Line-oriented text form: a fixed header (T, M, seed, optional P), the loss
// block, and an optional competitor block. Doubles are written with 17
// significant digits so files round-trip bit-exactly.
inline void write_script(const GameScript& script, std::ostream& os) {
    os << "gamescript v1\n";
    os << "T " << script.rounds() << "\n";
    os << "M " << script.experts << "\n";
    os << "seed " << script.seed << "\n";
    if (script.path_budget)
        os << "P " << detail::format_double(*script.path_budget) << "\n";
    os << "losses\n";
    for (const LossVector& l : script.losses) os << detail::format_row(l.values()) << "\n";
    if (!script.competitor.empty()) {
        os << "competitor\n";
        for (const SimplexDistribution& p : script.competitor)
            os << detail::format_row(p.values()) << "\n";
    }
    os << "end\n";
}

inline GameScript read_script(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "gamescript v1")
        throw std::invalid_argument("script: missing 'gamescript v1' header");
    GameScript script;
    long rounds = -1;
    bool have_experts = false, have_seed = false;
    while (std::getline(is, line)) {
        if (line == "losses") break;
        std::istringstream iss(line);
        std::string key;
        iss >> key;
        if (key == "T") iss >> rounds;
        else if (key == "M") { iss >> script.experts; have_experts = true; }
        else if (key == "seed") { iss >> script.seed; have_seed = true; }
        else if (key == "P") { double p; iss >> p; script.path_budget = p; }
        else throw std::invalid_argument("script: unknown header key '" + key + "'");
        if (!iss)
            throw std::invalid_argument("script: bad header line: " + line);
    }
    if (rounds < 0 || !have_experts || !have_seed)
        throw std::invalid_argument("script: incomplete header");
    if (script.experts < 2)
        throw std::invalid_argument("script: M must be at least 2");
    for (long t = 0; t < rounds; ++t) {
        if (!std::getline(is, line))
            throw std::invalid_argument("script: truncated loss block");
        script.losses.emplace_back(detail::parse_row(line, script.experts, "loss"));
        script.ranges.push_back(half_range(script.losses.back()));
    }
    if (!std::getline(is, line))
        throw std::invalid_argument("script: missing 'end'");
    if (line == "competitor") {
        for (long t = 0; t < rounds; ++t) {
            if (!std::getline(is, line))
                throw std::invalid_argument("script: truncated competitor block");
            script.competitor.emplace_back(detail::parse_row(line, script.experts, "competitor"));
        }
        if (!std::getline(is, line))
            throw std::invalid_argument("script: missing 'end'");
    }
    if (line != "end")
        throw std::invalid_argument("script: expected 'end', got '" + line + "'");
    return script;
}

}  // namespace exptrack
