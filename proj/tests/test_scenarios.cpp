#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "exptrack/adversaries.hpp"
#include "exptrack/oracle.hpp"
#include "exptrack/scenarios.hpp"

using namespace exptrack;
using Catch::Matchers::WithinAbs;

TEST_CASE("surrogate losses are per-expert inner products") {
    SECTION("one-hot opinions pass the gradient through") {
        OpinionMatrix om;
        om.gradient = {0.3, -1.2, 4.0};
        for (int m = 0; m < 3; ++m) {
            std::vector<double> x(3, 0.0);
            x[static_cast<std::size_t>(m)] = 1.0;
            om.opinions.push_back(x);
        }
        const auto l = surrogate_losses(om);
        for (int m = 0; m < 3; ++m)
            REQUIRE(l[static_cast<std::size_t>(m)] == om.gradient[static_cast<std::size_t>(m)]);
    }
    SECTION("zero gradient gives zero losses") {
        OpinionMatrix om;
        om.gradient = {0.0, 0.0};
        om.opinions = {{1.0, 2.0}, {3.0, 4.0}};
        const auto l = surrogate_losses(om);
        REQUIRE(l[0] == 0.0);
        REQUIRE(l[1] == 0.0);
    }
    SECTION("hand example") {
        OpinionMatrix om;
        om.gradient = {1.0, 2.0};
        om.opinions = {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
        const auto l = surrogate_losses(om);
        REQUIRE_THAT(l[0], WithinAbs(1.0, 1e-15));
        REQUIRE_THAT(l[1], WithinAbs(2.0, 1e-15));
        REQUIRE_THAT(l[2], WithinAbs(1.5, 1e-15));
    }
    SECTION("linearity: a mixed opinion scores the weighted loss") {
        OpinionMatrix om;
        om.gradient = {0.7, -0.3, 1.1};
        om.opinions = {{1.0, 0.0, 2.0}, {0.0, 1.0, -1.0}};
        const auto l = surrogate_losses(om);
        const std::vector<double> p{0.3, 0.7};
        std::vector<double> mixed(3, 0.0);
        for (std::size_t d = 0; d < 3; ++d)
            mixed[d] = p[0] * om.opinions[0][d] + p[1] * om.opinions[1][d];
        REQUIRE_THAT(dot(om.gradient, mixed), WithinAbs(p[0] * l[0] + p[1] * l[1], 1e-12));
    }
}

TEST_CASE("sample_expert follows the distribution") {
    CounterRng rng(61);
    SECTION("one-hot is deterministic") {
        const auto p = SimplexDistribution::one_hot(4, 2);
        for (int i = 0; i < 100; ++i) REQUIRE(sample_expert(p, rng) == 2);
    }
    SECTION("uniform frequencies within three sigmas") {
        const int draws = 100000, m = 4;
        std::vector<int> counts(m, 0);
        const auto p = SimplexDistribution::uniform(m);
        for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sample_expert(p, rng))];
        const double expect = draws / static_cast<double>(m);
        const double sigma = std::sqrt(draws * (1.0 / m) * (1.0 - 1.0 / m));
        for (int j = 0; j < m; ++j)
            REQUIRE(std::abs(counts[static_cast<std::size_t>(j)] - expect) <= 3.0 * sigma);
    }
    SECTION("skewed frequencies") {
        const int draws = 100000;
        int first = 0;
        const SimplexDistribution p({0.9, 0.1});
        for (int i = 0; i < draws; ++i)
            if (sample_expert(p, rng) == 0) ++first;
        REQUIRE_THAT(first / static_cast<double>(draws), WithinAbs(0.9, 0.01));
    }
}

TEST_CASE("noisy wrapper adds zero-mean noise") {
    const auto base = drift_env(50, 3, 0.0, 71);
    SECTION("zero scale is the identity") {
        const auto same = noisy_wrapper(base, NoiseModel::gaussian, 0.0, 71);
        for (long t = 0; t < 50; ++t)
            for (int m = 0; m < 3; ++m)
                REQUIRE(same.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] ==
                        base.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)]);
    }
    SECTION("per-entry empirical mean approaches the clean loss") {
        const double sigma = 0.3;
        const int reps = 10000;
        double acc = 0.0;
        for (int r = 0; r < reps; ++r) {
            const auto noisy = noisy_wrapper(base, NoiseModel::gaussian, sigma,
                                             1000 + static_cast<std::uint64_t>(r));
            acc += noisy.losses[7][1];
        }
        acc /= reps;
        REQUIRE_THAT(acc, WithinAbs(base.losses[7][1], 3.0 * sigma / std::sqrt(1.0 * reps)));
    }
    SECTION("bounded uniform noise stays inside its width") {
        const auto noisy = noisy_wrapper(base, NoiseModel::bounded_uniform, 0.2, 99);
        for (long t = 0; t < 50; ++t)
            for (int m = 0; m < 3; ++m)
                REQUIRE(std::abs(noisy.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] -
                                 base.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)]) <=
                        0.2);
    }
    SECTION("true-loss regret stays below the noisy-statistics bound on average") {
        double regret = 0.0, bound = 0.0;
        const int seeds = 10;
        for (int s = 0; s < seeds; ++s) {
            const auto clean = drift_env(500, 3, 0.005, 200 + static_cast<std::uint64_t>(s));
            const auto noisy = noisy_wrapper(clean, NoiseModel::gaussian, 0.2,
                                             300 + static_cast<std::uint64_t>(s));
            UniformMixLearner l(3, 500, 0.0, RateMode::variance_biased);
            ReplayOptions opt;
            opt.feedback = &noisy;  // learner sees noise, accounting uses the truth
            const auto out = replay_with_checks(l, clean, best_fixed_expert(clean).sequence, opt);
            regret += out.ledger.final_regret;
            bound += out.ledger.final_bound;
        }
        REQUIRE(regret / seeds <= bound / seeds);
    }
}

TEST_CASE("floor transform") {
    SECTION("zero floor is the identity") {
        const FloorConstraint none(std::vector<double>{0.0, 0.0});
        const SimplexDistribution q({0.3, 0.7});
        const auto p = floor_transform(none, q);
        REQUIRE_THAT(p[0], WithinAbs(0.3, 1e-15));
    }
    SECTION("direct formula") {
        const FloorConstraint f(std::vector<double>{0.2, 0.2});
        const auto p = floor_transform(f, SimplexDistribution({1.0, 0.0}));
        REQUIRE_THAT(p[0], WithinAbs(0.8, 1e-15));
        REQUIRE_THAT(p[1], WithinAbs(0.2, 1e-15));
    }
    SECTION("output dominates the floor and stays a distribution") {
        CounterRng rng(73);
        const FloorConstraint f(std::vector<double>{0.1, 0.25, 0.05});
        for (int i = 0; i < 200; ++i) {
            std::vector<double> w(3);
            double s = 0.0;
            for (double& v : w) { v = -std::log(1.0 - rng.next_double()); s += v; }
            for (double& v : w) v /= s;
            const auto p = floor_transform(f, SimplexDistribution(std::move(w)));
            double sum = 0.0;
            for (int m = 0; m < 3; ++m) {
                REQUIRE(p[static_cast<std::size_t>(m)] >= f.floor[static_cast<std::size_t>(m)] - 1e-15);
                sum += p[static_cast<std::size_t>(m)];
            }
            REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("regret identity: outer regret is the free mass times inner regret") {
        const auto script = drift_env(300, 3, 0.01, 79);
        const FloorConstraint f(std::vector<double>{0.1, 0.25, 0.05});
        const auto inner_comp = best_fixed_expert(script).sequence;

        UniformMixLearner inner_run(3, 300, 0.0, RateMode::variance_biased);
        const auto inner = replay_with_checks(inner_run, script, inner_comp, {});

        UniformMixLearner outer_run(3, 300, 0.0, RateMode::variance_biased);
        ReplayOptions options;
        options.decision_map = [&f](const std::vector<double>& q) {
            return floor_transform(f, SimplexDistribution(std::vector<double>(q))).values();
        };
        std::vector<SimplexDistribution> outer_comp;
        for (const auto& q : inner_comp) outer_comp.push_back(floor_transform(f, q));
        const auto outer = replay_with_checks(outer_run, script, outer_comp, options);

        REQUIRE_THAT(outer.ledger.final_regret,
                     WithinAbs(f.free_mass() * inner.ledger.final_regret, 1e-9));
    }
    REQUIRE_THROWS_AS(FloorConstraint(std::vector<double>{0.6, 0.5}), std::invalid_argument);
}

TEST_CASE("bandit estimates") {
    SECTION("full observation with unit probabilities is the identity") {
        const LossVector l({0.2, 0.4, 0.6});
        const auto est = bandit_estimate(l, {1.0, 1.0, 1.0}, {0, 1, 2});
        for (int m = 0; m < 3; ++m) REQUIRE(est[static_cast<std::size_t>(m)] == l[static_cast<std::size_t>(m)]);
    }
    SECTION("single observation is importance weighted") {
        const auto est = bandit_estimate(LossVector({0.6, 0.9}), {0.5, 0.5}, {0});
        REQUIRE_THAT(est[0], WithinAbs(1.2, 1e-15));
        REQUIRE(est[1] == 0.0);
    }
    SECTION("zero-probability observation is rejected") {
        REQUIRE_THROWS_AS(bandit_estimate(LossVector({1.0, 1.0}), {0.0, 1.0}, {0}),
                          std::invalid_argument);
    }
    SECTION("unbiasedness under the sampling policy") {
        CounterRng rng(83);
        const SimplexDistribution p({0.4, 0.3, 0.2, 0.1});
        const LossVector l({0.9, 0.5, 0.3, 0.7});
        const int draws = 100000;
        std::vector<double> mean(4, 0.0);
        for (int i = 0; i < draws; ++i) {
            const auto b = semi_bandit_policy(p, 1);
            const auto arms = sample_arm_set(b, 1, rng);
            const auto est = bandit_estimate(l, b, arms);
            for (int m = 0; m < 4; ++m) mean[static_cast<std::size_t>(m)] += est[static_cast<std::size_t>(m)];
        }
        for (int m = 0; m < 4; ++m) {
            mean[static_cast<std::size_t>(m)] /= draws;
            const double b = p[static_cast<std::size_t>(m)];
            const double v = l[static_cast<std::size_t>(m)];
            const double se = std::sqrt(v * v * (1.0 - b) / b / draws);
            REQUIRE_THAT(mean[static_cast<std::size_t>(m)], WithinAbs(v, 3.0 * se));
        }
    }
}

TEST_CASE("semi bandit policy") {
    REQUIRE(semi_bandit_policy(SimplexDistribution({0.4, 0.6}), 1) ==
            std::vector<double>{0.4, 0.6});
    REQUIRE(semi_bandit_policy(SimplexDistribution::uniform(3), 3) ==
            std::vector<double>(3, 1.0));
    const auto b = semi_bandit_policy(SimplexDistribution::uniform(4), 2);
    for (double v : b) REQUIRE_THAT(v, WithinAbs(0.5, 1e-15));
    REQUIRE_THROWS_AS(semi_bandit_policy(SimplexDistribution({0.9, 0.1}), 2),
                      std::invalid_argument);
}

TEST_CASE("systematic arm sampling hits exact marginals") {
    CounterRng rng(89);
    const std::vector<double> b{0.9, 0.5, 0.35, 0.25};  // sums to 2
    const int draws = 100000;
    std::vector<int> hits(4, 0);
    for (int i = 0; i < draws; ++i) {
        const auto arms = sample_arm_set(b, 2, rng);
        REQUIRE(arms.size() == 2);
        REQUIRE(arms[0] != arms[1]);
        for (int a : arms) ++hits[static_cast<std::size_t>(a)];
    }
    for (int m = 0; m < 4; ++m) {
        const double freq = hits[static_cast<std::size_t>(m)] / static_cast<double>(draws);
        const double se = std::sqrt(b[static_cast<std::size_t>(m)] *
                                    (1.0 - b[static_cast<std::size_t>(m)]) / draws);
        REQUIRE_THAT(freq, WithinAbs(b[static_cast<std::size_t>(m)], 4.0 * se + 1e-3));
    }
}

TEST_CASE("discount rescaling") {
    const auto base = drift_env(20, 2, 0.0, 97);
    SECTION("alpha 1 is the identity") {
        const auto same = discount_rescale(base, 1.0);
        for (long t = 0; t < 20; ++t)
            REQUIRE(same.losses[static_cast<std::size_t>(t)][0] ==
                    base.losses[static_cast<std::size_t>(t)][0]);
    }
    SECTION("round 3 at alpha = 0.5 scales by 4") {
        const auto out = discount_rescale(base, 0.5);
        REQUIRE_THAT(out.losses[2][0], WithinAbs(4.0 * base.losses[2][0], 1e-12));
        REQUIRE_THAT(out.losses[2][1], WithinAbs(4.0 * base.losses[2][1], 1e-12));
    }
    SECTION("composition multiplies the rates") {
        const auto twice = discount_rescale(discount_rescale(base, 0.9), 0.8);
        const auto once = discount_rescale(base, 0.72);
        for (long t = 0; t < 20; ++t)
            for (int m = 0; m < 2; ++m)
                REQUIRE_THAT(twice.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)],
                             WithinAbs(once.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)],
                                       1e-12 * std::abs(once.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)]) + 1e-15));
    }
}
