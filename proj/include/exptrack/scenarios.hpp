#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "exptrack/game.hpp"
#include "exptrack/rng.hpp"
#include "exptrack/simplex.hpp"

namespace exptrack {

// Expert opinions in a shared vector space together with the gradient of the
// round's convex loss at the played point.
struct OpinionMatrix {
    std::vector<std::vector<double>> opinions;  // one column per expert
    std::vector<double> gradient;
};

// l_m = gradient . opinion_m
inline LossVector surrogate_losses(const OpinionMatrix& om) {
    if (om.opinions.empty())
        throw std::invalid_argument("surrogate_losses: no opinions");
    std::vector<double> l;
    l.reserve(om.opinions.size());
    for (const std::vector<double>& x : om.opinions) {
        if (x.size() != om.gradient.size())
            throw std::invalid_argument("surrogate_losses: opinion dimension mismatch");
        l.push_back(dot(om.gradient, x));
    }
    return LossVector(std::move(l));
}

// categorical draw by inverse CDF
inline int sample_expert(const SimplexDistribution& p, CounterRng& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (int m = 0; m < p.size(); ++m) {
        acc += p[static_cast<std::size_t>(m)];
        if (u < acc) return m;
    }
    return p.size() - 1;
}

enum class NoiseModel { gaussian, bounded_uniform };

// Zero-mean observation noise on every loss entry: gaussian with the given
// standard deviation, or uniform on [-width, width]. The caller keeps the
// original script for regret accounting.
inline GameScript noisy_wrapper(const GameScript& script, NoiseModel model, double scale,
                                std::uint64_t seed) {
    if (!(scale >= 0.0)) throw std::invalid_argument("noisy_wrapper: negative noise scale");
    GameScript noisy = script;
    if (scale == 0.0) return noisy;
    CounterRng rng(seed, 0x6e6f697379ull);  // independent noise stream
    for (LossVector& l : noisy.losses) {
        std::vector<double> row(l.values());
        for (double& v : row) {
            const double eps = (model == NoiseModel::gaussian)
                                   ? scale * rng.next_gaussian()
                                   : rng.next_uniform(-scale, scale);
            v += eps;
        }
        l = LossVector(std::move(row));
    }
    noisy.ranges.clear();
    for (const LossVector& l : noisy.losses) noisy.ranges.push_back(half_range(l));
    return noisy;
}

// Decisions constrained below by a fixed allocation: p = floor + (1-|floor|_1) q.
struct FloorConstraint {
    std::vector<double> floor;

    explicit FloorConstraint(std::vector<double> f) : floor(std::move(f)) {
        double sum = 0.0;
        for (double v : floor) {
            if (!(v >= 0.0)) throw std::invalid_argument("floor: negative entry");
            sum += v;
        }
        if (!(sum < 1.0)) throw std::invalid_argument("floor: total allocation must be below 1");
    }

    double allocated() const {
        double s = 0.0;
        for (double v : floor) s += v;
        return s;
    }
    double free_mass() const { return 1.0 - allocated(); }
};

inline SimplexDistribution floor_transform(const FloorConstraint& constraint,
                                           const SimplexDistribution& inner) {
    if (static_cast<std::size_t>(inner.size()) != constraint.floor.size())
        throw std::invalid_argument("floor_transform: dimension mismatch");
    const double free = constraint.free_mass();
    std::vector<double> p(constraint.floor);
    for (std::size_t m = 0; m < p.size(); ++m)
        p[m] += free * inner[m];
    return SimplexDistribution(std::move(p));
}

// Importance-weighted loss estimate: observed arms are scaled by the inverse
// of their selection probability, unobserved arms report zero.
inline LossVector bandit_estimate(const LossVector& observed_losses,
                                  const std::vector<double>& selection_probs,
                                  const std::vector<int>& observed) {
    if (selection_probs.size() != static_cast<std::size_t>(observed_losses.size()))
        throw std::invalid_argument("bandit_estimate: probability dimension mismatch");
    std::vector<double> est(selection_probs.size(), 0.0);
    for (int m : observed) {
        if (m < 0 || m >= observed_losses.size())
            throw std::invalid_argument("bandit_estimate: observed index out of range");
        const double b = selection_probs[static_cast<std::size_t>(m)];
        if (!(b > 0.0))
            throw std::invalid_argument("bandit_estimate: observed arm has zero probability");
        est[static_cast<std::size_t>(m)] = observed_losses[static_cast<std::size_t>(m)] / b;
    }
    return LossVector(std::move(est));
}

// Selection probabilities b = K p for choosing K of M arms; requires every
// p_m <= 1/K, which the learner guarantees with a decision cap of 1/K.
inline std::vector<double> semi_bandit_policy(const SimplexDistribution& p, int arms) {
    if (arms < 1 || arms > p.size())
        throw std::invalid_argument("semi_bandit_policy: arms outside [1, M]");
    std::vector<double> b(p.values());
    const double k = static_cast<double>(arms);
    for (double& v : b) {
        if (v > 1.0 / k + 1e-12)
            throw std::invalid_argument("semi_bandit_policy: decision exceeds 1/K cap");
        v = std::min(1.0, k * v);
    }
    return b;
}

// Draws K distinct arms whose inclusion marginals equal b (|b|_1 = K) by
// systematic sampling over the cumulative weights.
inline std::vector<int> sample_arm_set(const std::vector<double>& selection_probs, int arms,
                                       CounterRng& rng) {
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(arms));
    const double offset = rng.next_double();
    double acc = 0.0;
    int next = 0;
    for (std::size_t m = 0; m < selection_probs.size() && next < arms; ++m) {
        acc += selection_probs[m];
        while (next < arms && offset + next < acc) {
            chosen.push_back(static_cast<int>(m));
            ++next;
        }
    }
    while (next < arms) {  // round-off at the tail
        chosen.push_back(static_cast<int>(selection_probs.size()) - 1);
        ++next;
    }
    return chosen;
}

// Geometric rescaling: round-t losses multiplied by alpha^{1-t}, so a
// scale-free learner run on the result controls the discounted regret
// sum_t beta_{T-t} l_t^T (p_t - p_t*) with beta_j = beta0 alpha^j.
inline GameScript discount_rescale(const GameScript& script, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("discount_rescale: alpha must be positive");
    GameScript out = script;
    double factor = 1.0;  // alpha^{1-t} at t = 1
    for (long t = 0; t < out.rounds(); ++t) {
        std::vector<double> row(out.losses[static_cast<std::size_t>(t)].values());
        for (double& v : row) v *= factor;
        out.losses[static_cast<std::size_t>(t)] = LossVector(std::move(row));
        factor /= alpha;
    }
    out.ranges.clear();
    for (const LossVector& l : out.losses) out.ranges.push_back(half_range(l));
    return out;
}

// Discounted regret of a recorded decision trajectory.
inline double discounted_regret(const GameScript& script,
                                const std::vector<std::vector<double>>& decisions,
                                const std::vector<SimplexDistribution>& competitor,
                                double alpha, double beta0) {
    const long T = script.rounds();
    if (static_cast<long>(decisions.size()) != T ||
        static_cast<long>(competitor.size()) != T)
        throw std::invalid_argument("discounted_regret: length mismatch");
    double r = 0.0;
    for (long t = 0; t < T; ++t) {
        const double beta = beta0 * std::pow(alpha, static_cast<double>(T - 1 - t));
        const auto& l = script.losses[static_cast<std::size_t>(t)].values();
        r += beta * (dot(decisions[static_cast<std::size_t>(t)], l) -
                     dot(competitor[static_cast<std::size_t>(t)].values(), l));
    }
    return r;
}

}  // namespace exptrack
