#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "exptrack/game.hpp"
#include "exptrack/oracle.hpp"
#include "exptrack/rng.hpp"
#include "exptrack/simplex.hpp"

namespace exptrack {

namespace detail {

inline std::vector<double> resolve_ranges(long rounds, const std::vector<double>& ranges) {
    if (ranges.empty()) return std::vector<double>(static_cast<std::size_t>(rounds), 1.0);
    if (static_cast<long>(ranges.size()) != rounds)
        throw std::invalid_argument("environment: ranges length must match T");
    for (double u : ranges)
        if (!(u >= 0.0)) throw std::invalid_argument("environment: ranges must be nonnegative");
    return ranges;
}

// contiguous blocks covering [0, total), earlier blocks take the remainder
inline std::vector<long> split_evenly(long total, long parts) {
    std::vector<long> sizes(static_cast<std::size_t>(parts), total / parts);
    for (long i = 0; i < total % parts; ++i) ++sizes[static_cast<std::size_t>(i)];
    return sizes;
}

// Sign-based construction on a block of rounds: one Rademacher draw per
// round, expert losses +-U_t according to each expert's indicator bit for
// the phase active at that round, surplus experts pinned at +U_t. Phases
// split the block evenly, earlier phases longer.
inline void fill_sign_game(GameScript& script, CounterRng& rng, long begin, long end,
                           const std::vector<double>& ranges, int experts) {
    const long span = end - begin;
    int depth = 0;
    while ((2 << depth) <= experts) ++depth;  // largest d with 2^d <= M
    const long phases = std::min<long>(depth, span);
    const std::vector<long> sizes = split_evenly(span, phases);
    long t = begin;
    for (long phase = 0; phase < phases; ++phase) {
        for (long i = 0; i < sizes[static_cast<std::size_t>(phase)]; ++i, ++t) {
            const double coin = rng.next_rademacher();
            const double u = ranges[static_cast<std::size_t>(t)];
            std::vector<double> row(static_cast<std::size_t>(experts));
            for (int m = 0; m < experts; ++m) {
                if (m < (1 << depth)) {
                    const int bit = (m >> phase) & 1;
                    row[static_cast<std::size_t>(m)] = coin * u * (1.0 - 2.0 * bit);
                } else {
                    row[static_cast<std::size_t>(m)] = u;  // dominated surplus expert
                }
            }
            script.losses.emplace_back(std::move(row));
            script.ranges.push_back(u);
        }
    }
}

}  // namespace detail

// Two experts with exactly opposite losses +-B_t U_t driven by fair coins;
// no causal decision rule can beat the realized best of the two by more
// than the Khintchine floor. The embedded competitor is the realized best
// fixed expert.
inline GameScript two_expert_env(long rounds, const std::vector<double>& ranges,
                                 std::uint64_t seed) {
    if (rounds < 1) throw std::invalid_argument("two_expert_env: T must be positive");
    const std::vector<double> u = detail::resolve_ranges(rounds, ranges);
    GameScript script;
    script.experts = 2;
    script.seed = seed;
    script.path_budget = 0.0;
    CounterRng rng(seed);
    for (long t = 0; t < rounds; ++t) {
        const double v = rng.next_rademacher() * u[static_cast<std::size_t>(t)];
        script.losses.emplace_back(std::vector<double>{v, -v});
        script.ranges.push_back(u[static_cast<std::size_t>(t)]);
    }
    script.competitor = best_fixed_expert(script).sequence;
    return script;
}

// Indicator-vector construction over M experts: identifying the best expert
// decomposes into floor(log2 M) two-expert coin games played in phases.
inline GameScript static_env(long rounds, int experts, const std::vector<double>& ranges,
                             std::uint64_t seed) {
    if (rounds < 1) throw std::invalid_argument("static_env: T must be positive");
    if (experts < 2) throw std::invalid_argument("static_env: need at least 2 experts");
    const std::vector<double> u = detail::resolve_ranges(rounds, ranges);
    GameScript script;
    script.experts = experts;
    script.seed = seed;
    script.path_budget = 0.0;
    CounterRng rng(seed);
    detail::fill_sign_game(script, rng, 0, rounds, u, experts);
    script.competitor = best_fixed_expert(script).sequence;
    return script;
}

// Piecewise version: floor(P+1) independent sign games over an evenly split
// horizon, each with its own best fixed expert, so the embedded competitor
// switches at most floor(P) times. When the requested segments cannot each
// carry a full multi-phase game, the segments degrade to two-expert games.
inline GameScript dynamic_env(long rounds, int experts, double path_budget,
                              const std::vector<double>& ranges, std::uint64_t seed) {
    if (rounds < 1) throw std::invalid_argument("dynamic_env: T must be positive");
    if (experts < 2) throw std::invalid_argument("dynamic_env: need at least 2 experts");
    if (!(path_budget >= 0.0)) throw std::invalid_argument("dynamic_env: negative path budget");
    const std::vector<double> u = detail::resolve_ranges(rounds, ranges);

    int depth = 0;
    while ((2 << depth) <= experts) ++depth;
    const long want = static_cast<long>(std::floor(path_budget + 1.0));
    const long segments = std::max<long>(1, std::min(want, rounds));
    const bool two_expert_only = want * depth > rounds;

    GameScript script;
    script.experts = experts;
    script.seed = seed;
    script.path_budget = path_budget;
    CounterRng rng(seed);

    const std::vector<long> sizes = detail::split_evenly(rounds, segments);
    long begin = 0;
    for (long s = 0; s < segments; ++s) {
        const long end = begin + sizes[static_cast<std::size_t>(s)];
        detail::fill_sign_game(script, rng, begin, end, u,
                               two_expert_only ? 2 : experts);
        begin = end;
    }
    if (two_expert_only) {
        // pad surplus experts so the script keeps M columns
        for (LossVector& l : script.losses) {
            if (l.size() == experts) continue;
            std::vector<double> row(l.values());
            const double worst = std::max(row[0], row[1]);
            row.resize(static_cast<std::size_t>(experts), worst);
            l = LossVector(std::move(row));
        }
    }

    // per-segment best fixed expert
    begin = 0;
    for (long s = 0; s < segments; ++s) {
        const long end = begin + sizes[static_cast<std::size_t>(s)];
        GameScript slice;
        slice.experts = experts;
        slice.losses.assign(script.losses.begin() + begin, script.losses.begin() + end);
        const auto cert = best_fixed_expert(slice);
        for (long t = begin; t < end; ++t) script.competitor.push_back(cert.sequence.front());
        begin = end;
    }
    return script;
}

// Benign stochastic benchmark: i.i.d. uniform [0,1] losses with one favored
// expert drawn from half the range; the favored index rotates with the given
// per-round probability. The embedded competitor is the realized best fixed
// expert of each rotation segment.
inline GameScript drift_env(long rounds, int experts, double volatility, std::uint64_t seed) {
    if (rounds < 1) throw std::invalid_argument("drift_env: T must be positive");
    if (experts < 2) throw std::invalid_argument("drift_env: need at least 2 experts");
    if (volatility < 0.0 || volatility > 1.0)
        throw std::invalid_argument("drift_env: volatility outside [0,1]");
    GameScript script;
    script.experts = experts;
    script.seed = seed;
    CounterRng rng(seed);

    int favored = static_cast<int>(rng.next_index(static_cast<std::size_t>(experts)));
    std::vector<long> boundaries{0};
    for (long t = 0; t < rounds; ++t) {
        if (t > 0 && rng.next_double() < volatility) {
            favored = (favored + 1) % experts;
            boundaries.push_back(t);
        }
        std::vector<double> row(static_cast<std::size_t>(experts));
        for (int m = 0; m < experts; ++m) {
            const double v = rng.next_double();
            row[static_cast<std::size_t>(m)] = (m == favored) ? 0.5 * v : v;
        }
        script.losses.emplace_back(std::move(row));
        script.ranges.push_back(half_range(script.losses.back()));
    }
    boundaries.push_back(rounds);

    for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
        const long begin = boundaries[s], end = boundaries[s + 1];
        GameScript slice;
        slice.experts = experts;
        slice.losses.assign(script.losses.begin() + begin, script.losses.begin() + end);
        const auto cert = best_fixed_expert(slice);
        for (long t = begin; t < end; ++t) script.competitor.push_back(cert.sequence.front());
    }
    script.path_budget = sequence_path(script.competitor);
    return script;
}

// Adversarial floor: (1/sqrt(2)) L sqrt(min{floor(P+1) floor(log2 M), T})
inline double lower_bound_value(const GameScript& script, int experts, double path_budget) {
    if (experts < 2) throw std::invalid_argument("lower_bound_value: need at least 2 experts");
    if (!(path_budget >= 0.0))
        throw std::invalid_argument("lower_bound_value: negative path budget");
    const double l = adaptive_deviation_norm(script);
    const double games = std::floor(path_budget + 1.0) * std::floor(std::log2(experts));
    const double effective = std::min<double>(games, static_cast<double>(script.rounds()));
    return l * std::sqrt(effective / 2.0);
}

}  // namespace exptrack
