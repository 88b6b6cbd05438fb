#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "exptrack/lambertw.hpp"
#include "exptrack/simplex.hpp"

namespace exptrack {

enum class RateMode { variance_biased, min_biased };
enum class AlphaMode { star, hat, fixed };
enum class LearnerKind { uniform_mix, truncated, mapped, doubling, universal };

// Running statistics that drive the adaptive learning rate. V accumulates
// per-round loss variance about the decision-weighted mean, Q the second
// moment about the per-round minimum, E the largest mean deviation seen.
struct RateStats {
    double V = 0.0;
    double Q = 0.0;
    double E = 0.0;
    long round = 0;
};

// One recorded transition, consumed by the per-step inequality checkers.
// `exponential` is the normalized reweighted distribution before mixing or
// projection; `after` is the mixed/projected decision. When a decision cap
// clips the mixed decision further, `capped` carries the final weights and
// the box fields describe the cap.
struct StepTrace {
    std::vector<double> before;
    std::vector<double> exponential;
    std::vector<double> after;
    std::vector<double> capped;
    std::vector<double> loss;
    double eta = 0.0;
    double gamma = 0.0;
    double box_low = 0.0;
    double box_high = 1.0;
    RateMode mode = RateMode::variance_biased;
    bool reweighted = false;  // false while no loss deviation has been seen
};

namespace detail {

struct RoundMoments {
    double mean;       // decision-weighted mean loss
    double min;        // smallest loss this round
    double var_inc;    // weighted squared deviation about the mean
    double minvar_inc; // weighted squared deviation about the minimum
    double range;      // max_m |loss_m - mean|
};

inline RoundMoments round_moments(const std::vector<double>& weights,
                                  const std::vector<double>& loss) {
    RoundMoments m{0.0, loss[0], 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < loss.size(); ++i) {
        m.mean += weights[i] * loss[i];
        m.min = std::min(m.min, loss[i]);
    }
    for (std::size_t i = 0; i < loss.size(); ++i) {
        const double dm = loss[i] - m.mean;
        const double dz = loss[i] - m.min;
        m.var_inc += weights[i] * dm * dm;
        m.minvar_inc += weights[i] * dz * dz;
        m.range = std::max(m.range, std::abs(dm));
    }
    return m;
}

// eta from the current statistics: sqrt(numerator / (2 V)) capped by 1/E in
// variance mode, sqrt(numerator / Q) uncapped in min-biased mode. Returns
// nothing while every deviation seen so far is zero (the exponent would be
// zero for any rate, so the update is deferred).
inline std::optional<double> rate_candidate(RateMode mode, double numerator,
                                            const RateStats& stats, bool* capped) {
    if (capped) *capped = false;
    const double denom = (mode == RateMode::variance_biased) ? 2.0 * stats.V : stats.Q;
    if (denom > 0.0 && std::isfinite(numerator)) {
        double eta = std::sqrt(numerator / denom);
        if (mode == RateMode::variance_biased && stats.E > 0.0 && 1.0 / stats.E < eta) {
            eta = 1.0 / stats.E;
            if (capped) *capped = true;
        }
        return eta;
    }
    if (stats.E > 0.0) {
        if (capped) *capped = true;
        return 1.0 / stats.E;
    }
    return std::nullopt;
}

// w_m <- p_m exp(-eta (l_m - bias)), normalized in place. Zero-weight entries
// stay zero without evaluating the exponential.
inline void reweight(std::vector<double>& weights, const std::vector<double>& loss,
                     double eta, double bias) {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = weights[i] > 0.0 ? weights[i] * std::exp(-eta * (loss[i] - bias)) : 0.0;
        sum += weights[i];
    }
    for (double& w : weights) w /= sum;
}

inline void check_loss(const LossVector& loss, int experts, const char* who) {
    if (loss.size() != experts)
        throw std::invalid_argument(std::string(who) + ": loss dimension mismatch");
}

}  // namespace detail

// Exponential weighting blended with the uniform distribution at rate
// gamma_t = 1/(t+1), which keeps every weight at or above gamma_t / M. The
// learning rate adapts to the realized loss statistics and never increases.
// An optional decision cap projects each decision into [0, cap], which is
// how partial-feedback runs keep selection probabilities below 1/K.
class UniformMixLearner {
public:
    UniformMixLearner(int experts, long horizon, double path_budget, RateMode mode,
                      double decision_cap = 1.0)
        : experts_(experts),
          horizon_(horizon),
          path_budget_(path_budget),
          mode_(mode),
          decision_cap_(decision_cap),
          weights_(SimplexDistribution::uniform(experts).values()) {
        if (experts < 2) throw std::invalid_argument("uniform mix: need at least 2 experts");
        if (horizon < 1) throw std::invalid_argument("uniform mix: horizon must be positive");
        if (path_budget < 0.0) throw std::invalid_argument("uniform mix: negative path budget");
        if (decision_cap < 1.0 / static_cast<double>(experts) || decision_cap > 1.0)
            throw std::invalid_argument("uniform mix: decision cap outside [1/M, 1]");
    }

    void step(const LossVector& loss) {
        detail::check_loss(loss, experts_, "uniform mix");
        const std::vector<double>& l = loss.values();
        const auto m = detail::round_moments(weights_, l);
        stats_.V += m.var_inc;
        stats_.Q += m.minvar_inc;
        stats_.E = std::max(stats_.E, m.range);
        ++stats_.round;

        if (trace_) {
            trace_buf_.before = weights_;
            trace_buf_.loss = l;
            trace_buf_.mode = mode_;
        }

        auto candidate = detail::rate_candidate(mode_, rate_numerator(), stats_, &eta_capped_);
        const double gamma = 1.0 / static_cast<double>(stats_.round + 1);
        gamma_ = gamma;
        if (candidate) {
            eta_ = std::min(*candidate, eta_);
            const double bias = (mode_ == RateMode::variance_biased) ? m.mean : m.min;
            detail::reweight(weights_, l, eta_, bias);
        }
        if (trace_) {
            trace_buf_.exponential = weights_;
            trace_buf_.eta = eta_;
            trace_buf_.gamma = gamma;
            trace_buf_.reweighted = candidate.has_value();
        }

        const double floor = gamma / static_cast<double>(experts_);
        for (double& w : weights_) w = (1.0 - gamma) * w + floor;
        if (trace_) {
            trace_buf_.after = weights_;
            trace_buf_.capped.clear();
            trace_buf_.box_low = 0.0;
            trace_buf_.box_high = decision_cap_;
        }
        if (decision_cap_ < 1.0) {
            detail::truncate_project_raw(weights_, 0.0, decision_cap_);
            if (trace_) trace_buf_.capped = weights_;
        }
    }

    const std::vector<double>& weights() const { return weights_; }
    SimplexDistribution decision() const { return SimplexDistribution(weights_); }
    int experts() const { return experts_; }
    long horizon() const { return horizon_; }
    long round() const { return stats_.round; }
    double path_budget() const { return path_budget_; }
    RateMode rate_mode() const { return mode_; }
    const RateStats& stats() const { return stats_; }
    double eta() const { return eta_; }
    bool eta_cap_applied() const { return eta_capped_; }
    double gamma() const { return gamma_; }
    double rate_numerator() const {
        return std::log(static_cast<double>(experts_) * (static_cast<double>(horizon_) + 1.0)) *
               (2.0 + path_budget_);
    }

    void enable_trace(bool on) { trace_ = on; }
    const StepTrace& last_trace() const { return trace_buf_; }

private:
    int experts_;
    long horizon_;
    double path_budget_;
    RateMode mode_;
    double decision_cap_;
    std::vector<double> weights_;
    RateStats stats_;
    double eta_ = std::numeric_limits<double>::infinity();
    bool eta_capped_ = false;
    double gamma_ = 0.0;
    bool trace_ = false;
    StepTrace trace_buf_;

    friend struct SnapshotAccess;
};

// Exponential weighting followed by the scaled-clipping projection onto
// [a, b]. Horizon-free: the rate numerator is log(M/a) + log(1/a) P. With
// a = 0 that numerator is unbounded, so the rate falls back to the 1/E cap.
class TruncatedLearner {
public:
    TruncatedLearner(int experts, double box_low, double box_high, double path_budget,
                     RateMode mode)
        : experts_(experts),
          box_low_(box_low),
          box_high_(box_high),
          path_budget_(path_budget),
          mode_(mode),
          weights_(SimplexDistribution::uniform(experts).values()) {
        if (experts < 2) throw std::invalid_argument("truncated: need at least 2 experts");
        const double m = static_cast<double>(experts);
        if (box_low < 0.0 || box_low * m > 1.0 + 1e-9 || box_high * m < 1.0 - 1e-9 ||
            box_high > 1.0 + 1e-12)
            throw std::invalid_argument("truncated: box must satisfy a <= 1/M <= b");
        if (path_budget < 0.0) throw std::invalid_argument("truncated: negative path budget");
    }

    void step(const LossVector& loss) {
        detail::check_loss(loss, experts_, "truncated");
        const std::vector<double>& l = loss.values();
        const auto m = detail::round_moments(weights_, l);
        stats_.V += m.var_inc;
        stats_.Q += m.minvar_inc;
        stats_.E = std::max(stats_.E, m.range);
        ++stats_.round;
        last_min_increment_ = m.minvar_inc;

        if (trace_) {
            trace_buf_.before = weights_;
            trace_buf_.loss = l;
            trace_buf_.mode = mode_;
            trace_buf_.box_low = box_low_;
            trace_buf_.box_high = box_high_;
        }

        auto candidate = detail::rate_candidate(mode_, rate_numerator(), stats_, &eta_capped_);
        if (candidate) {
            eta_ = std::min(*candidate, eta_);
            const double bias = (mode_ == RateMode::variance_biased) ? m.mean : m.min;
            detail::reweight(weights_, l, eta_, bias);
        }
        if (trace_) {
            trace_buf_.exponential = weights_;
            trace_buf_.eta = eta_;
            trace_buf_.gamma = 0.0;
            trace_buf_.reweighted = candidate.has_value();
        }
        detail::truncate_project_raw(weights_, box_low_, box_high_);
        if (trace_) trace_buf_.after = weights_;
    }

    // Clears the rate statistics and retargets the path budget; the weight
    // vector carries over. Used by the doubling schedule.
    void reset_rates(double path_budget) {
        stats_ = RateStats{};
        eta_ = std::numeric_limits<double>::infinity();
        eta_capped_ = false;
        path_budget_ = path_budget;
    }

    const std::vector<double>& weights() const { return weights_; }
    SimplexDistribution decision() const { return SimplexDistribution(weights_); }
    int experts() const { return experts_; }
    double box_low() const { return box_low_; }
    double box_high() const { return box_high_; }
    long round() const { return stats_.round; }
    double path_budget() const { return path_budget_; }
    RateMode rate_mode() const { return mode_; }
    const RateStats& stats() const { return stats_; }
    double eta() const { return eta_; }
    bool eta_cap_applied() const { return eta_capped_; }
    double last_min_increment() const { return last_min_increment_; }
    double rate_numerator() const {
        if (box_low_ <= 0.0) return std::numeric_limits<double>::infinity();
        return std::log(static_cast<double>(experts_) / box_low_) +
               std::log(1.0 / box_low_) * path_budget_;
    }

    void enable_trace(bool on) { trace_ = on; }
    const StepTrace& last_trace() const { return trace_buf_; }

private:
    void overwrite_weights(const std::vector<double>& w) { weights_ = w; }

    int experts_;
    double box_low_;
    double box_high_;
    double path_budget_;
    RateMode mode_;
    std::vector<double> weights_;
    RateStats stats_;
    double eta_ = std::numeric_limits<double>::infinity();
    bool eta_capped_ = false;
    double last_min_increment_ = 0.0;
    bool trace_ = false;
    StepTrace trace_buf_;

    friend class MappedLearner;
    friend struct SnapshotAccess;
};

// Truncated learner run through the one-to-one switch d = (1-alpha) p + alpha u.
// The inner learner works on d inside the box [alpha/M, (1-alpha)+alpha/M]
// with losses scaled by 1/(1-alpha) and path budget (1-alpha) P; the reported
// decision is the unmixed p, whose entries span the whole of [0,1].
class MappedLearner {
public:
    MappedLearner(int experts, double path_budget, AlphaMode alpha_mode,
                  RateMode mode = RateMode::min_biased, double fixed_alpha = 0.0)
        : alpha_mode_(alpha_mode),
          alpha_(resolve_alpha(experts, path_budget, alpha_mode, fixed_alpha)),
          raw_path_budget_(path_budget),
          inner_(experts, alpha_ / static_cast<double>(experts),
                 (1.0 - alpha_) + alpha_ / static_cast<double>(experts),
                 (1.0 - alpha_) * path_budget, mode) {}

    void step(const LossVector& loss) {
        detail::check_loss(loss, inner_.experts(), "mapped");
        scaled_.assign(loss.values().begin(), loss.values().end());
        const double scale = 1.0 / (1.0 - alpha_);
        for (double& v : scaled_) v *= scale;
        // raw-loss second moment about the minimum, accumulated for reporting
        double inc = 0.0;
        {
            const std::vector<double>& l = loss.values();
            double z = l[0];
            for (double v : l) z = std::min(z, v);
            const std::vector<double>& d = inner_.weights();
            for (std::size_t i = 0; i < l.size(); ++i) inc += d[i] * (l[i] - z) * (l[i] - z);
        }
        inner_.step(LossVector(scaled_));
        lifetime_qd_ += inc;
    }

    // One scheduled reset: clear inner statistics and retarget the budget.
    // In the hat mode the mixer is re-optimized for the new budget and the
    // carried weights are re-projected into the new box.
    void reset_rates(double path_budget) {
        raw_path_budget_ = path_budget;
        if (alpha_mode_ == AlphaMode::hat) {
            const int experts = inner_.experts();
            const double alpha = alpha_hat(experts, path_budget);
            if (alpha != alpha_) {
                std::vector<double> d = inner_.weights();
                const double a = alpha / static_cast<double>(experts);
                const double b = (1.0 - alpha) + a;
                detail::truncate_project_raw(d, a, b);
                TruncatedLearner next(experts, a, b, (1.0 - alpha) * path_budget,
                                      inner_.rate_mode());
                next.overwrite_weights(d);
                inner_ = std::move(next);
                alpha_ = alpha;
                return;
            }
        }
        inner_.reset_rates((1.0 - alpha_) * path_budget);
    }

    void decision_into(std::vector<double>& out) const {
        const std::vector<double>& d = inner_.weights();
        const double floor = alpha_ / static_cast<double>(d.size());
        const double scale = 1.0 / (1.0 - alpha_);
        out.resize(d.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            out[i] = std::max(0.0, (d[i] - floor) * scale);
            sum += out[i];
        }
        if (std::abs(sum - 1.0) > 4e-15 * static_cast<double>(d.size()))
            for (double& w : out) w /= sum;
    }

    SimplexDistribution decision() const {
        std::vector<double> p;
        decision_into(p);
        return SimplexDistribution(std::move(p));
    }

    int experts() const { return inner_.experts(); }
    double alpha() const { return alpha_; }
    AlphaMode alpha_mode() const { return alpha_mode_; }
    double path_budget() const { return raw_path_budget_; }
    double loss_scale() const { return 1.0 / (1.0 - alpha_); }
    long round() const { return inner_.round(); }
    double lifetime_qd() const { return lifetime_qd_; }
    const TruncatedLearner& inner() const { return inner_; }
    TruncatedLearner& inner() { return inner_; }

private:
    static double resolve_alpha(int experts, double path_budget, AlphaMode mode,
                                double fixed_alpha) {
        switch (mode) {
            case AlphaMode::star: return alpha_star(experts);
            case AlphaMode::hat: return alpha_hat(experts, path_budget);
            case AlphaMode::fixed:
                if (fixed_alpha < 0.0 || fixed_alpha >= 1.0)
                    throw std::invalid_argument("mapped: fixed alpha outside [0,1)");
                return fixed_alpha;
        }
        throw std::logic_error("mapped: unknown alpha mode");
    }

    AlphaMode alpha_mode_;
    double alpha_;
    double raw_path_budget_;
    TruncatedLearner inner_;
    double lifetime_qd_ = 0.0;
    std::vector<double> scaled_;

    friend struct SnapshotAccess;
};

// Doubling schedule around the mapped learner: right before rounds
// t = 1, 2, 4, 8, ... the rate statistics are cleared and the budget is set
// to t - 1, so the assumed path grows with the horizon actually seen. With a
// terminal cap K the reset at t = 2^K is the last one and the budget stays
// at 2^K - 1; that is how the universal learner pins each hyper-expert to a
// fixed budget target.
class DoublingLearner {
public:
    explicit DoublingLearner(int experts, AlphaMode alpha_mode = AlphaMode::star,
                             RateMode mode = RateMode::min_biased,
                             std::optional<int> terminal_cap = std::nullopt)
        : inner_(experts, 0.0, alpha_mode, mode), terminal_cap_(terminal_cap) {
        if (terminal_cap_ && *terminal_cap_ < 0)
            throw std::invalid_argument("doubling: negative terminal cap");
    }

    void step(const LossVector& loss) {
        const long t = round_ + 1;
        if ((t & (t - 1)) == 0) {  // power of two
            const bool scheduled = !terminal_cap_ || t <= (1L << *terminal_cap_);
            if (scheduled) {
                inner_.reset_rates(static_cast<double>(t - 1));
                resets_.emplace_back(t, static_cast<double>(t - 1));
            }
        }
        inner_.step(loss);
        ++round_;
    }

    void decision_into(std::vector<double>& out) const { inner_.decision_into(out); }
    SimplexDistribution decision() const { return inner_.decision(); }
    int experts() const { return inner_.experts(); }
    long round() const { return round_; }
    std::optional<int> terminal_cap() const { return terminal_cap_; }
    const MappedLearner& inner() const { return inner_; }
    MappedLearner& inner() { return inner_; }
    const std::vector<std::pair<long, double>>& resets() const { return resets_; }
    int segment_index() const { return static_cast<int>(resets_.size()); }
    long segment_start() const { return resets_.empty() ? 1 : resets_.back().first; }
    double path_cap() const { return resets_.empty() ? 0.0 : resets_.back().second; }

private:
    MappedLearner inner_;
    std::optional<int> terminal_cap_;
    long round_ = 0;
    std::vector<std::pair<long, double>> resets_;

    friend class UniversalLearner;
    friend struct SnapshotAccess;
};

// Universal learner: a growing family of doubling runs A_1, A_2, ... over the
// original experts, each pinned to the budget target 2^{k-1} - 1, chained by
// two-expert mixers B_0, B_1, ... At round t = 2^k the latest run is cloned
// into A_{k+1} (which immediately resets to the new target), the deepest
// chain slot stops being a pass-through and becomes a live mixer over
// {A_{k+1}, pass-through}, and the chain deepens by one. The combined
// decision is the full recursive mix, with the deepest pass-through mass
// folded into the latest run, so the chain weights add to one exactly.
class UniversalLearner {
public:
    explicit UniversalLearner(int experts) : experts_(experts) {
        if (experts < 2) throw std::invalid_argument("universal: need at least 2 experts");
        runs_.emplace_back(experts, AlphaMode::star, RateMode::min_biased, 0);
        mixers_.emplace_back(2, 0.0, AlphaMode::star, RateMode::min_biased);
        combined_ = SimplexDistribution::uniform(experts).values();
    }

    void step(const LossVector& loss) {
        detail::check_loss(loss, experts_, "universal");
        const long t = round_ + 1;
        if (t == (1L << depth_)) {
            DoublingLearner spawned = runs_.back();       // inherit the whole progression
            spawned.terminal_cap_ = depth_;               // final reset happens this round
            runs_.push_back(std::move(spawned));
            mixers_.emplace_back(2, 0.0, AlphaMode::star, RateMode::min_biased);
            ++depth_;
        }
        const int k = depth_;
        const std::vector<double>& l = loss.values();

        // hyper-expert losses under the current decisions
        run_loss_.resize(runs_.size());
        for (std::size_t i = 0; i < runs_.size(); ++i) {
            runs_[i].decision_into(scratch_);
            run_loss_[i] = dot(scratch_, l);
        }
        chain_loss_.assign(static_cast<std::size_t>(k) + 1, 0.0);
        chain_loss_[static_cast<std::size_t>(k)] = run_loss_.back();  // pass-through slot
        mixer_w_.resize(mixers_.size());
        for (int j = k - 1; j >= 0; --j) {
            mixers_[static_cast<std::size_t>(j)].decision_into(mixer_w_[static_cast<std::size_t>(j)]);
            const std::vector<double>& w = mixer_w_[static_cast<std::size_t>(j)];
            chain_loss_[static_cast<std::size_t>(j)] =
                w[0] * run_loss_[static_cast<std::size_t>(j)] +
                w[1] * chain_loss_[static_cast<std::size_t>(j) + 1];
        }

        // updates: every run sees the raw losses, every live mixer the pair
        // (its run's loss, the rest of the chain below it)
        for (DoublingLearner& run : runs_) run.step(loss);
        for (int j = 0; j < k; ++j) {
            pair_buf_[0] = run_loss_[static_cast<std::size_t>(j)];
            pair_buf_[1] = chain_loss_[static_cast<std::size_t>(j) + 1];
            mixers_[static_cast<std::size_t>(j)].step(LossVector({pair_buf_[0], pair_buf_[1]}));
        }

        // recombine with the updated decisions
        runs_.back().decision_into(combined_);
        for (int j = k - 1; j >= 0; --j) {
            mixers_[static_cast<std::size_t>(j)].decision_into(pair_w_);
            runs_[static_cast<std::size_t>(j)].decision_into(scratch_);
            for (std::size_t m = 0; m < combined_.size(); ++m)
                combined_[m] = pair_w_[0] * scratch_[m] + pair_w_[1] * combined_[m];
        }
        ++round_;
    }

    const std::vector<double>& weights() const { return combined_; }
    SimplexDistribution decision() const { return SimplexDistribution(combined_); }
    int experts() const { return experts_; }
    long round() const { return round_; }
    int depth() const { return depth_; }
    const std::vector<DoublingLearner>& runs() const { return runs_; }
    const std::vector<MappedLearner>& mixers() const { return mixers_; }

private:
    int experts_;
    long round_ = 0;
    int depth_ = 1;
    std::vector<DoublingLearner> runs_;
    std::vector<MappedLearner> mixers_;
    std::vector<double> combined_;
    // scratch buffers, reused across rounds
    std::vector<double> scratch_, run_loss_, chain_loss_, pair_w_;
    std::vector<std::vector<double>> mixer_w_;
    double pair_buf_[2] = {0.0, 0.0};

    friend struct SnapshotAccess;
};

// ---------------------------------------------------------------------------
// Closed-form regret bounds evaluated from realized statistics.

// constants of the mixer-optimized and doubling guarantees
inline constexpr double kMappedBoundFactor = 5.111;
inline constexpr double kMappedPathDiscount = 0.3;   // theta
inline constexpr double kDoublingBoundFactor = 8.4;
inline constexpr double kDoublingPathSurcharge = 1.2;  // theta'
inline constexpr double kUniversalBoundFactor = 75.17;

struct BoundContext {
    int experts = 2;
    long horizon = 1;          // uniform mix only
    RateMode rate_mode = RateMode::variance_biased;
    double box_low = 0.0;      // truncated only
    double V = 0.0;
    double Q = 0.0;            // raw-loss mapped-space moment for mapped/doubling
    double E = 0.0;
    double deviation_norm = 0.0;  // universal only
};

inline double bound_value(LearnerKind kind, const BoundContext& ctx, double path) {
    const double m = static_cast<double>(ctx.experts);
    switch (kind) {
        case LearnerKind::uniform_mix: {
            const double num = std::log(m * (static_cast<double>(ctx.horizon) + 1.0)) * (2.0 + path);
            if (ctx.rate_mode == RateMode::variance_biased)
                return 2.0 * std::sqrt(2.0 * num * ctx.V) + num * ctx.E;
            return 2.0 * std::sqrt(num * ctx.Q);
        }
        case LearnerKind::truncated: {
            if (ctx.box_low <= 0.0)
                throw std::invalid_argument("bound_value: truncated bound needs a > 0");
            const double num = std::log(m / ctx.box_low) + std::log(1.0 / ctx.box_low) * path;
            if (ctx.rate_mode == RateMode::variance_biased)
                return 2.0 * std::sqrt(2.0 * num * ctx.V) + num * ctx.E;
            return 2.0 * std::sqrt(num * ctx.Q);
        }
        case LearnerKind::mapped:
            return kMappedBoundFactor *
                   std::sqrt((1.0 + (1.0 - kMappedPathDiscount) * path) * ctx.Q * std::log(m));
        case LearnerKind::doubling:
            return kDoublingBoundFactor *
                   std::sqrt((1.0 + (1.0 + kDoublingPathSurcharge) * path) * ctx.Q * std::log(m));
        case LearnerKind::universal:
            return kUniversalBoundFactor *
                   std::sqrt(std::floor(1.0 + path) * std::log(m)) * ctx.deviation_norm;
    }
    throw std::logic_error("bound_value: unknown learner kind");
}

inline BoundContext bound_context(const UniformMixLearner& l) {
    return BoundContext{l.experts(), l.horizon(), l.rate_mode(), 0.0,
                        l.stats().V, l.stats().Q, l.stats().E, 0.0};
}

inline BoundContext bound_context(const TruncatedLearner& l) {
    return BoundContext{l.experts(), 1, l.rate_mode(), l.box_low(),
                        l.stats().V, l.stats().Q, l.stats().E, 0.0};
}

// Q is expressed in raw loss units in the mapped decision space.
inline BoundContext bound_context(const MappedLearner& l) {
    return BoundContext{l.experts(), 1, l.inner().rate_mode(), l.inner().box_low(),
                        l.inner().stats().V, l.lifetime_qd(), l.inner().stats().E, 0.0};
}

inline BoundContext bound_context(const DoublingLearner& l) {
    BoundContext ctx = bound_context(l.inner());
    return ctx;
}

}  // namespace exptrack
