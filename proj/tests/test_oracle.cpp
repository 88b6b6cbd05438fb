#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "exptrack/adversaries.hpp"
#include "exptrack/oracle.hpp"

using namespace exptrack;
using Catch::Matchers::WithinAbs;

namespace {

// independent reference: the plain three-dimensional table recursion
// cost[s][m] over rounds, no running-minimum shortcuts
double naive_dp_best(const GameScript& script, int max_switches) {
    const int M = script.experts;
    const long T = script.rounds();
    const int S = static_cast<int>(std::min<long>(max_switches, T - 1));
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(S) + 1,
                                          std::vector<double>(static_cast<std::size_t>(M), inf));
    for (int m = 0; m < M; ++m) cost[0][static_cast<std::size_t>(m)] = script.losses[0][static_cast<std::size_t>(m)];
    for (long t = 1; t < T; ++t) {
        auto prev = cost;
        for (int s = 0; s <= S; ++s)
            for (int m = 0; m < M; ++m) {
                double best = prev[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
                if (s > 0)
                    for (int j = 0; j < M; ++j)
                        if (j != m)
                            best = std::min(best,
                                            prev[static_cast<std::size_t>(s) - 1][static_cast<std::size_t>(j)]);
                cost[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)] =
                    best + script.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
            }
    }
    double best = inf;
    for (int s = 0; s <= S; ++s)
        for (int m = 0; m < M; ++m)
            best = std::min(best, cost[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)]);
    return best;
}

// exhaustive reference over all one-hot sequences with a switch budget
double exhaustive_best(const GameScript& script, int max_switches) {
    const int M = script.experts;
    const long T = script.rounds();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> seq(static_cast<std::size_t>(T), 0);
    const long combos = static_cast<long>(std::pow(M, T));
    for (long code = 0; code < combos; ++code) {
        long c = code;
        int switches = 0;
        double loss = 0.0;
        for (long t = 0; t < T; ++t) {
            seq[static_cast<std::size_t>(t)] = static_cast<int>(c % M);
            c /= M;
            if (t > 0 && seq[static_cast<std::size_t>(t)] != seq[static_cast<std::size_t>(t - 1)])
                ++switches;
            loss += script.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(
                seq[static_cast<std::size_t>(t)])];
        }
        if (switches <= max_switches) best = std::min(best, loss);
    }
    return best;
}

SimplexDistribution random_simplex(int experts, CounterRng& rng) {
    std::vector<double> w(static_cast<std::size_t>(experts));
    double sum = 0.0;
    for (double& v : w) {
        v = -std::log(1.0 - rng.next_double());
        sum += v;
    }
    for (double& v : w) v /= sum;
    return SimplexDistribution(std::move(w));
}

}  // namespace

TEST_CASE("best fixed expert") {
    GameScript s;
    s.experts = 2;
    s.losses = {LossVector({0.0, 1.0}), LossVector({0.0, 1.0})};
    const auto cert = best_fixed_expert(s);
    REQUIRE(cert.sequence.front()[0] == 1.0);
    REQUIRE(cert.total_loss == 0.0);
    REQUIRE(cert.switches == 0);

    GameScript tie;
    tie.experts = 3;
    tie.losses = {LossVector({2.0, 2.0, 2.0})};
    REQUIRE(best_fixed_expert(tie).sequence.front()[0] == 1.0);  // lowest index wins ties

    // independent scan agrees on a random script
    const auto script = drift_env(100, 8, 0.02, 3);
    const auto fast = best_fixed_expert(script);
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int m = 0; m < 8; ++m) {
        double total = 0.0;
        for (long t = 0; t < 100; ++t)
            total += script.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
        if (total < best) { best = total; arg = m; }
    }
    REQUIRE(fast.sequence.front()[static_cast<std::size_t>(arg)] == 1.0);
    REQUIRE_THAT(fast.total_loss, WithinAbs(best, 1e-9));
}

TEST_CASE("best switching competitor") {
    SECTION("zero budget equals the best fixed expert") {
        const auto script = drift_env(200, 4, 0.05, 5);
        const auto fixed = best_fixed_expert(script);
        const auto dp = best_switching_competitor(script, 0);
        REQUIRE_THAT(dp.total_loss, WithinAbs(fixed.total_loss, 1e-9));
        REQUIRE(dp.switches == 0);
    }
    SECTION("unconstrained budget hits the per-round minimum") {
        const auto script = drift_env(60, 3, 0.1, 7);
        const auto dp = best_switching_competitor(script, 59);
        double per_round = 0.0;
        for (const auto& l : script.losses)
            per_round += *std::min_element(l.values().begin(), l.values().end());
        REQUIRE_THAT(dp.total_loss, WithinAbs(per_round, 1e-9));
    }
    SECTION("matches exhaustive enumeration on small games") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto script = drift_env(6, 3, 0.3, 900 + seed);
            for (int s = 0; s <= 3; ++s) {
                const auto dp = best_switching_competitor(script, s);
                REQUIRE_THAT(dp.total_loss, WithinAbs(exhaustive_best(script, s), 1e-9));
                REQUIRE(dp.switches <= s);
                // certificate loss matches its own sequence
                double replayed = 0.0;
                for (long t = 0; t < 6; ++t)
                    replayed += dot(dp.sequence[static_cast<std::size_t>(t)].values(),
                                    script.losses[static_cast<std::size_t>(t)].values());
                REQUIRE_THAT(replayed, WithinAbs(dp.total_loss, 1e-9));
            }
        }
    }
    SECTION("loss is nonincreasing in the budget") {
        const auto script = static_env(64, 4, {}, 11);
        double prev = std::numeric_limits<double>::infinity();
        for (int s = 0; s <= 12; ++s) {
            const double cur = best_switching_competitor(script, s).total_loss;
            REQUIRE(cur <= prev + 1e-12);
            prev = cur;
        }
    }
    SECTION("matches the plain table recursion at scale") {
        for (const std::uint64_t seed : {41, 42, 43}) {
            const auto script = drift_env(200, 5, 0.05, seed);
            for (const int s : {0, 2, 6}) {
                const auto dp = best_switching_competitor(script, s);
                REQUIRE_THAT(dp.total_loss, WithinAbs(naive_dp_best(script, s), 1e-9));
            }
        }
    }
}

TEST_CASE("kl step checker") {
    SECTION("constant losses with no mixing leave both sides zero") {
        const auto u = SimplexDistribution::uniform(3);
        const auto r = check_kl_step(u, u, u, LossVector({1.0, 1.0, 1.0}), 0.5, 0.0);
        REQUIRE(r.pass);
        REQUIRE_THAT(r.slack, WithinAbs(0.0, 1e-12));
    }
    SECTION("a traced update passes, a corrupted one fails") {
        UniformMixLearner l(3, 50, 0.0, RateMode::variance_biased);
        l.enable_trace(true);
        CounterRng rng(13);
        SimplexDistribution star = SimplexDistribution::one_hot(3, 1);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> loss(3);
            for (double& v : loss) v = rng.next_uniform(-1.0, 1.0);
            l.step(LossVector(loss));
            const auto& tr = l.last_trace();
            if (!tr.reweighted) continue;
            const auto r = check_kl_step(SimplexDistribution(std::vector<double>(tr.before)),
                                         SimplexDistribution(std::vector<double>(tr.after)), star,
                                         LossVector(std::vector<double>(tr.loss)), tr.eta,
                                         tr.gamma);
            REQUIRE(r.pass);
        }
        // replacing the updated decision with uniform must be detectable
        const SimplexDistribution p({0.9, 0.05, 0.05});
        const auto bad = check_kl_step(p, SimplexDistribution::uniform(3),
                                       SimplexDistribution::one_hot(3, 0),
                                       LossVector({0.0, 1.0, 1.0}), 0.5, 0.0);
        REQUIRE(!bad.pass);
        REQUIRE(bad.slack < 0.0);
    }
    SECTION("precondition on the exponent range is enforced") {
        const auto u = SimplexDistribution::uniform(2);
        REQUIRE_THROWS_AS(check_kl_step(u, u, u, LossVector({0.0, 10.0}), 1.0, 0.0),
                          std::invalid_argument);
    }
}

TEST_CASE("change-of-competitor kl checker") {
    CounterRng rng(17);
    SECTION("identical competitors reduce to equality") {
        const auto star = SimplexDistribution::one_hot(4, 2);
        const auto p = SimplexDistribution::uniform(4);
        const auto r = check_change_kl_step(star, star, p);
        REQUIRE(r.pass);
        REQUIRE_THAT(r.slack, WithinAbs(0.0, 1e-12));
    }
    SECTION("random triples pass") {
        for (int i = 0; i < 3000; ++i) {
            const auto star = random_simplex(4, rng);
            const auto star_next = random_simplex(4, rng);
            const auto p = random_simplex(4, rng);
            REQUIRE(check_change_kl_step(star, star_next, p).pass);
        }
    }
    SECTION("tiny decision floor with a large jump still passes") {
        SimplexDistribution p({1e-6, 0.5 - 5e-7, 0.5 - 5e-7});
        const auto r = check_change_kl_step(SimplexDistribution::one_hot(3, 1),
                                            SimplexDistribution::one_hot(3, 0), p);
        REQUIRE(r.pass);
        // the movement term alone is log(1/1e-6); the divergence change eats
        // most of it and ln 2 is left over
        REQUIRE_THAT(r.slack, WithinAbs(std::log(2.0), 1e-5));
    }
    SECTION("zero entries in the decision are rejected") {
        REQUIRE_THROWS_AS(check_change_kl_step(SimplexDistribution::uniform(2),
                                               SimplexDistribution::uniform(2),
                                               SimplexDistribution({1.0, 0.0})),
                          std::invalid_argument);
    }
}

TEST_CASE("truncation checker") {
    CounterRng rng(19);
    SECTION("inside the box the projection is the identity and slack is zero") {
        const SimplexDistribution q({0.4, 0.35, 0.25});
        const auto pr = truncate_project(q, 0.1, 0.6);
        const auto r = check_truncation_step(SimplexDistribution::uniform(3), q, pr.projected,
                                             0.1, 0.6);
        REQUIRE(r.pass);
        REQUIRE_THAT(r.slack, WithinAbs(0.0, 1e-10));
    }
    SECTION("random projections pass") {
        for (int i = 0; i < 3000; ++i) {
            const auto q = random_simplex(5, rng);
            const auto pr = truncate_project(q, 0.05, 0.5);
            const auto star = truncate_project(random_simplex(5, rng), 0.05, 0.5).projected;
            REQUIRE(check_truncation_step(star, q, pr.projected, 0.05, 0.5).pass);
        }
    }
    SECTION("competitor outside the box is refused") {
        const auto q = SimplexDistribution::uniform(3);
        REQUIRE_THROWS_AS(check_truncation_step(SimplexDistribution::one_hot(3, 0), q, q, 0.1, 0.5),
                          std::invalid_argument);
    }
}

TEST_CASE("replay accounting") {
    SECTION("constant losses give zero regret and all checks pass") {
        GameScript s;
        s.experts = 3;
        for (int t = 0; t < 40; ++t) s.losses.push_back(LossVector({1.0, 1.0, 1.0}));
        for (const auto& l : s.losses) s.ranges.push_back(half_range(l));
        UniformMixLearner l(3, 40, 0.0, RateMode::variance_biased);
        std::vector<SimplexDistribution> comp(40, SimplexDistribution::uniform(3));
        ReplayOptions opt;
        opt.run_checks = true;
        const auto out = replay_with_checks(l, s, comp, opt);
        REQUIRE(out.ledger.rows.size() == 40);
        REQUIRE_THAT(out.ledger.final_regret, WithinAbs(0.0, 1e-12));
        REQUIRE(out.checks.all_passed());
    }
    SECTION("adversarial game stays below the bound at every prefix") {
        const auto script = two_expert_env(512, {}, 23);
        UniformMixLearner l(2, 512, 0.0, RateMode::variance_biased);
        const auto out = replay_with_checks(l, script, script.competitor, {});
        for (const auto& row : out.ledger.rows)
            REQUIRE(row.cumulative_regret <= row.bound + 1e-9);
        REQUIRE(out.ledger.ratio <= 1.0);
        REQUIRE(out.ledger.path == 0.0);
    }
    SECTION("ledger cumulative column is the prefix sum") {
        const auto script = drift_env(100, 4, 0.02, 29);
        DoublingLearner l(4);
        const auto out = replay_with_checks(l, script, script.competitor, {});
        double acc = 0.0;
        for (const auto& row : out.ledger.rows) {
            acc += row.learner_loss - row.competitor_loss;
            REQUIRE_THAT(row.cumulative_regret, WithinAbs(acc, 1e-9));
        }
    }
    SECTION("empty scripts and mismatched competitors are rejected") {
        GameScript empty;
        empty.experts = 2;
        UniformMixLearner l(2, 1, 0.0, RateMode::variance_biased);
        REQUIRE_THROWS_AS(replay_with_checks(l, empty, {}, {}), std::invalid_argument);
    }
}

TEST_CASE("traced replays pass every applicable checker") {
    const auto script = drift_env(300, 4, 0.01, 31);
    const auto comp = best_switching_competitor(script, 3).sequence;
    ReplayOptions opt;
    opt.run_checks = true;

    SECTION("uniform mix, variance mode") {
        UniformMixLearner l(4, 300, 3.0, RateMode::variance_biased);
        const auto out = replay_with_checks(l, script, comp, opt);
        REQUIRE(out.checks.kl_checked > 250);
        REQUIRE(out.checks.change_checked > 250);
        REQUIRE(out.checks.all_passed());
    }
    SECTION("uniform mix, min-biased mode") {
        UniformMixLearner l(4, 300, 3.0, RateMode::min_biased);
        const auto out = replay_with_checks(l, script, comp, opt);
        REQUIRE(out.checks.all_passed());
    }
    SECTION("mapped learner runs the truncation checker in its own space") {
        MappedLearner l(4, 3.0, AlphaMode::star);
        const auto out = replay_with_checks(l, script, comp, opt);
        REQUIRE(out.checks.trunc_checked > 250);
        REQUIRE(out.checks.kl_checked > 250);
        REQUIRE(out.checks.all_passed());
    }
    SECTION("a competitor outside the box skips the projection checker only") {
        TruncatedLearner l(4, 0.1, 0.6, 3.0, RateMode::min_biased);
        const auto out = replay_with_checks(l, script, comp, opt);  // one-hot competitors
        REQUIRE(out.checks.trunc_checked == 0);
        REQUIRE(out.checks.kl_checked > 250);
        REQUIRE(out.checks.change_checked > 250);
        REQUIRE(out.checks.all_passed());
    }
    SECTION("a capped decision traces as one more clipping projection") {
        UniformMixLearner l(4, 300, 3.0, RateMode::variance_biased, 0.5);
        std::vector<SimplexDistribution> boxed;
        for (const auto& star : comp) boxed.push_back(mix_uniform(star, 0.7));  // entries <= 0.475
        const auto out = replay_with_checks(l, script, boxed, opt);
        REQUIRE(out.checks.kl_checked > 250);
        REQUIRE(out.checks.trunc_checked > 250);
        REQUIRE(out.checks.all_passed());
    }
}
