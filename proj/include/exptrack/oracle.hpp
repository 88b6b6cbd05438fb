#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "exptrack/game.hpp"
#include "exptrack/learners.hpp"
#include "exptrack/rng.hpp"
#include "exptrack/simplex.hpp"

namespace exptrack {

// One-hot competitor sequence with its switch count and cumulative loss.
// A switch between one-hot vectors is a total-variation jump of exactly 1,
// so the path length of the sequence equals the switch count.
struct CompetitorCertificate {
    std::vector<SimplexDistribution> sequence;
    int switches = 0;
    double total_loss = 0.0;
};

// argmin over experts of the cumulative loss; ties go to the lowest index
inline CompetitorCertificate best_fixed_expert(const GameScript& script) {
    if (script.losses.empty())
        throw std::invalid_argument("best_fixed_expert: empty script");
    const int M = script.experts;
    std::vector<double> totals(static_cast<std::size_t>(M), 0.0);
    for (const LossVector& l : script.losses)
        for (int m = 0; m < M; ++m) totals[static_cast<std::size_t>(m)] += l[static_cast<std::size_t>(m)];
    int best = 0;
    for (int m = 1; m < M; ++m)
        if (totals[static_cast<std::size_t>(m)] < totals[static_cast<std::size_t>(best)]) best = m;
    CompetitorCertificate cert;
    cert.sequence.assign(script.losses.size(), SimplexDistribution::one_hot(M, best));
    cert.switches = 0;
    cert.total_loss = totals[static_cast<std::size_t>(best)];
    return cert;
}

// Exact minimum cumulative loss over one-hot sequences with at most
// `max_switches` switches, by dynamic programming over (round, expert,
// switches used). Per layer only the running minimum and second minimum of
// the previous switch level are needed, so the sweep is O(T M S).
inline CompetitorCertificate best_switching_competitor(const GameScript& script,
                                                       int max_switches) {
    if (script.losses.empty())
        throw std::invalid_argument("best_switching_competitor: empty script");
    if (max_switches < 0)
        throw std::invalid_argument("best_switching_competitor: negative switch budget");
    const int M = script.experts;
    const long T = script.rounds();
    const int S = static_cast<int>(std::min<long>(max_switches, T - 1));
    const double inf = std::numeric_limits<double>::infinity();

    // cost[s][m]: best loss through the current round ending at expert m with s switches
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(S) + 1,
                                          std::vector<double>(static_cast<std::size_t>(M), inf));
    // parent expert per (t, s, m); switches decrease by one when the expert changes
    std::vector<std::vector<std::int16_t>> parent(
        static_cast<std::size_t>(T),
        std::vector<std::int16_t>(static_cast<std::size_t>((S + 1) * M), -1));

    for (int m = 0; m < M; ++m)
        cost[0][static_cast<std::size_t>(m)] = script.losses[0][static_cast<std::size_t>(m)];

    for (long t = 1; t < T; ++t) {
        for (int s = S; s >= 0; --s) {
            // min and runner-up of the previous level (for switching in)
            int arg1 = -1;
            double min1 = inf, min2 = inf;
            if (s > 0) {
                const std::vector<double>& prev = cost[static_cast<std::size_t>(s) - 1];
                for (int m = 0; m < M; ++m) {
                    const double c = prev[static_cast<std::size_t>(m)];
                    if (c < min1) { min2 = min1; min1 = c; arg1 = m; }
                    else if (c < min2) { min2 = c; }
                }
            }
            std::vector<double>& cur = cost[static_cast<std::size_t>(s)];
            for (int m = 0; m < M; ++m) {
                double stay = cur[static_cast<std::size_t>(m)];
                double come = inf;
                int from = -1;
                if (s > 0 && arg1 >= 0) {
                    if (arg1 != m) { come = min1; from = arg1; }
                    else if (std::isfinite(min2)) {
                        come = min2;
                        // locate the runner-up index for path reconstruction
                        const std::vector<double>& prev = cost[static_cast<std::size_t>(s) - 1];
                        for (int j = 0; j < M; ++j)
                            if (j != m && prev[static_cast<std::size_t>(j)] == min2) { from = j; break; }
                    }
                }
                const double l = script.losses[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
                if (come < stay && from >= 0) {
                    cur[static_cast<std::size_t>(m)] = come + l;
                    parent[static_cast<std::size_t>(t)][static_cast<std::size_t>(s * M + m)] =
                        static_cast<std::int16_t>(from);
                } else {
                    cur[static_cast<std::size_t>(m)] = stay + l;
                    parent[static_cast<std::size_t>(t)][static_cast<std::size_t>(s * M + m)] =
                        static_cast<std::int16_t>(m);
                }
            }
        }
        // entering round t with s switches but staying put is also reachable
        // from s-1 histories; the sweep above already covers that because
        // cost[s] carries forward.
    }

    int best_s = 0, best_m = 0;
    double best = inf;
    for (int s = 0; s <= S; ++s)
        for (int m = 0; m < M; ++m)
            if (cost[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)] < best) {
                best = cost[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
                best_s = s;
                best_m = m;
            }

    CompetitorCertificate cert;
    cert.total_loss = best;
    std::vector<int> experts(static_cast<std::size_t>(T));
    int m = best_m, s = best_s;
    for (long t = T - 1; t >= 0; --t) {
        experts[static_cast<std::size_t>(t)] = m;
        if (t == 0) break;
        const int from = parent[static_cast<std::size_t>(t)][static_cast<std::size_t>(s * M + m)];
        if (from != m) --s;
        m = from;
    }
    cert.sequence.reserve(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        cert.sequence.push_back(SimplexDistribution::one_hot(M, experts[static_cast<std::size_t>(t)]));
        if (t > 0 && experts[static_cast<std::size_t>(t)] != experts[static_cast<std::size_t>(t) - 1])
            ++cert.switches;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Per-step inequality checkers. Each verifies one step of the analysis
// numerically and reports the slack (left side minus right side of the >=
// form); anything above -1e-9 counts as a pass.

struct CheckResult {
    bool pass = false;
    double slack = 0.0;
};

inline constexpr double kCheckerTolerance = -1e-9;

// Divergence-change bound for one reweight-and-mix transition:
//   (1/eta)[D(p*|p) - D(p*|p_next)]
//     >= l.(p - p*) - eta * E_p[(l-mu)^2] + log(1-gamma)/eta
// under |eta (l_m - mu)| <= 1. The min-biased variant replaces mu by the
// round minimum and halves the quadratic term; it needs no range condition
// because its exponents are nonpositive.
inline CheckResult check_kl_step(const SimplexDistribution& p, const SimplexDistribution& p_next,
                                 const SimplexDistribution& p_star, const LossVector& loss,
                                 double eta, double gamma,
                                 RateMode mode = RateMode::variance_biased) {
    const int M = p.size();
    if (p_next.size() != M || p_star.size() != M || loss.size() != M)
        throw std::invalid_argument("check_kl_step: dimension mismatch");
    if (!(eta > 0.0) || gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("check_kl_step: need eta > 0 and gamma in [0,1)");

    double mu = 0.0;
    for (int m = 0; m < M; ++m)
        mu += p[static_cast<std::size_t>(m)] * loss[static_cast<std::size_t>(m)];
    const double bias = (mode == RateMode::variance_biased)
                            ? mu
                            : *std::min_element(loss.values().begin(), loss.values().end());
    double quad = 0.0;
    for (int m = 0; m < M; ++m) {
        const double d = loss[static_cast<std::size_t>(m)] - bias;
        if (mode == RateMode::variance_biased && std::abs(eta * d) > 1.0 + 1e-9)
            throw std::invalid_argument("check_kl_step: |eta (l - mu)| exceeds 1");
        quad += p[static_cast<std::size_t>(m)] * d * d;
    }
    const double quad_factor = (mode == RateMode::variance_biased) ? 1.0 : 0.5;

    const double lhs = (detail::kl_or_infinity(p_star.values(), p.values()) -
                        detail::kl_or_infinity(p_star.values(), p_next.values())) / eta;
    double drift = 0.0;
    for (int m = 0; m < M; ++m)
        drift += loss[static_cast<std::size_t>(m)] *
                 (p[static_cast<std::size_t>(m)] - p_star[static_cast<std::size_t>(m)]);
    const double rhs = drift - eta * quad_factor * quad + std::log1p(-gamma) / eta;
    const double slack = lhs - rhs;
    return CheckResult{slack >= kCheckerTolerance, slack};
}

// Competitor-change bound:
//   -D(p*|p_next) <= -D(p*_next|p_next) + H(p*) - H(p*_next)
//                    + 0.5 ||p*_next - p*||_1 log(1 / min_m p_next_m)
inline CheckResult check_change_kl_step(const SimplexDistribution& p_star,
                                        const SimplexDistribution& p_star_next,
                                        const SimplexDistribution& p_next) {
    const int M = p_next.size();
    if (p_star.size() != M || p_star_next.size() != M)
        throw std::invalid_argument("check_change_kl_step: dimension mismatch");
    const double pmin = *std::min_element(p_next.values().begin(), p_next.values().end());
    if (!(pmin > 0.0))
        throw std::invalid_argument("check_change_kl_step: p_next must be strictly positive");
    const double lhs = -kl_divergence(p_star, p_next);
    const double rhs = -kl_divergence(p_star_next, p_next) + entropy(p_star) -
                       entropy(p_star_next) +
                       total_variation(p_star, p_star_next) * std::log(1.0 / pmin);
    const double slack = rhs - lhs;
    return CheckResult{slack >= kCheckerTolerance, slack};
}

// Projection contraction: D(p*|q_next) >= D(p*|p_next) whenever the
// competitor already lies inside the clipping box.
inline CheckResult check_truncation_step(const SimplexDistribution& p_star,
                                         const SimplexDistribution& q_next,
                                         const SimplexDistribution& p_next, double a, double b) {
    const int M = q_next.size();
    if (p_star.size() != M || p_next.size() != M)
        throw std::invalid_argument("check_truncation_step: dimension mismatch");
    for (int m = 0; m < M; ++m) {
        const double v = p_star[static_cast<std::size_t>(m)];
        if (v < a - 1e-12 || v > b + 1e-12)
            throw std::invalid_argument("check_truncation_step: competitor outside the box");
    }
    const double dq = detail::kl_or_infinity(p_star.values(), q_next.values());
    const double dp = detail::kl_or_infinity(p_star.values(), p_next.values());
    const double slack = dq - dp;
    return CheckResult{slack >= kCheckerTolerance, slack};
}

// ---------------------------------------------------------------------------
// Replaying a learner through a script with full accounting.

struct LedgerRow {
    long round = 0;
    double learner_loss = 0.0;
    double competitor_loss = 0.0;
    double cumulative_regret = 0.0;
    double bound = 0.0;
    double eta = 0.0;
    double path = 0.0;  // competitor movement so far
};

struct RegretLedger {
    std::vector<LedgerRow> rows;
    double final_regret = 0.0;
    double final_bound = 0.0;
    double ratio = 0.0;  // final regret / final bound (0 when the bound is 0)
    double deviation_norm = 0.0;
    double path = 0.0;
};

struct CheckReport {
    long kl_checked = 0, kl_passed = 0;
    long change_checked = 0, change_passed = 0;
    long trunc_checked = 0, trunc_passed = 0;
    double kl_min_slack = std::numeric_limits<double>::infinity();
    double change_min_slack = std::numeric_limits<double>::infinity();
    double trunc_min_slack = std::numeric_limits<double>::infinity();

    bool all_passed() const {
        return kl_checked == kl_passed && change_checked == change_passed &&
               trunc_checked == trunc_passed;
    }
};

struct ReplayOptions {
    bool run_checks = false;
    bool record_decisions = false;
    // losses fed to the learner instead of the script's (noisy feedback,
    // rescaled games); must have the same shape as the script
    const GameScript* feedback = nullptr;
    // dynamic per-round feedback (partial observation); overrides `feedback`
    std::function<LossVector(long t, const std::vector<double>& decision,
                             const LossVector& true_loss, CounterRng& rng)> feedback_fn;
    CounterRng* rng = nullptr;
    // played decision as a function of the learner decision (floor embeddings)
    std::function<std::vector<double>(const std::vector<double>&)> decision_map;
    double bound_scale = 1.0;
    // fixed path value for the bound (budgeted learners); negative = use the
    // competitor movement measured so far
    double bound_path_override = -1.0;
};

struct ReplayResult {
    RegretLedger ledger;
    CheckReport checks;
    std::vector<std::vector<double>> decisions;  // when recorded
};

namespace detail {

template <typename Learner>
struct LearnerTraits;

template <>
struct LearnerTraits<UniformMixLearner> {
    static constexpr LearnerKind kind = LearnerKind::uniform_mix;
    static double fixed_budget(const UniformMixLearner& l) { return l.path_budget(); }
};
template <>
struct LearnerTraits<TruncatedLearner> {
    static constexpr LearnerKind kind = LearnerKind::truncated;
    static double fixed_budget(const TruncatedLearner& l) { return l.path_budget(); }
};
template <>
struct LearnerTraits<MappedLearner> {
    static constexpr LearnerKind kind = LearnerKind::mapped;
    static double fixed_budget(const MappedLearner& l) { return l.path_budget(); }
};
template <>
struct LearnerTraits<DoublingLearner> {
    static constexpr LearnerKind kind = LearnerKind::doubling;
    static double fixed_budget(const DoublingLearner&) { return -1.0; }  // adaptive
};
template <>
struct LearnerTraits<UniversalLearner> {
    static constexpr LearnerKind kind = LearnerKind::universal;
    static double fixed_budget(const UniversalLearner&) { return -1.0; }
};

inline void get_decision(const UniformMixLearner& l, std::vector<double>& out) { out = l.weights(); }
inline void get_decision(const TruncatedLearner& l, std::vector<double>& out) { out = l.weights(); }
inline void get_decision(const MappedLearner& l, std::vector<double>& out) { l.decision_into(out); }
inline void get_decision(const DoublingLearner& l, std::vector<double>& out) { l.decision_into(out); }
inline void get_decision(const UniversalLearner& l, std::vector<double>& out) { out = l.weights(); }

inline double current_eta(const UniformMixLearner& l) { return l.eta(); }
inline double current_eta(const TruncatedLearner& l) { return l.eta(); }
inline double current_eta(const MappedLearner& l) { return l.inner().eta(); }
inline double current_eta(const DoublingLearner& l) { return l.inner().inner().eta(); }
inline double current_eta(const UniversalLearner& l) {
    return l.runs().back().inner().inner().eta();
}

// Runs the applicable inequality checkers on one traced transition. The trace
// lives in the learner's own decision space; the competitor pair must already
// be expressed in that space.
inline void apply_checks(const StepTrace& trace, const SimplexDistribution& star,
                         const SimplexDistribution& star_next, CheckReport& report) {
    if (!trace.reweighted) return;
    const bool mixed = trace.gamma > 0.0;
    const SimplexDistribution before{std::vector<double>(trace.before)};
    const SimplexDistribution expo{std::vector<double>(trace.exponential)};
    const SimplexDistribution after{std::vector<double>(trace.after)};
    const LossVector loss{std::vector<double>(trace.loss)};

    // divergence-change step: against the mixed decision when mixing is on,
    // otherwise against the pre-projection exponential update
    const SimplexDistribution& target = mixed ? after : expo;
    bool target_positive = *std::min_element(trace.before.begin(), trace.before.end()) > 0.0;
    for (int m = 0; target_positive && m < target.size(); ++m)
        if (!(target[static_cast<std::size_t>(m)] > 0.0)) target_positive = false;
    if (target_positive) {
        const auto r = check_kl_step(before, target, star, loss, trace.eta, trace.gamma, trace.mode);
        ++report.kl_checked;
        report.kl_passed += r.pass ? 1 : 0;
        report.kl_min_slack = std::min(report.kl_min_slack, r.slack);
    }
    bool star_in_box = true;
    for (int m = 0; m < star.size(); ++m) {
        const double v = star[static_cast<std::size_t>(m)];
        if (v < trace.box_low - 1e-12 || v > trace.box_high + 1e-12) {
            star_in_box = false;
            break;
        }
    }
    if (!mixed && star_in_box) {
        const auto r = check_truncation_step(star, expo, after, trace.box_low, trace.box_high);
        ++report.trunc_checked;
        report.trunc_passed += r.pass ? 1 : 0;
        report.trunc_min_slack = std::min(report.trunc_min_slack, r.slack);
    }
    // a decision cap is a second clipping projection on the mixed decision
    if (!trace.capped.empty() && star_in_box) {
        const SimplexDistribution capped{std::vector<double>(trace.capped)};
        const auto r = check_truncation_step(star, after, capped, trace.box_low, trace.box_high);
        ++report.trunc_checked;
        report.trunc_passed += r.pass ? 1 : 0;
        report.trunc_min_slack = std::min(report.trunc_min_slack, r.slack);
    }
    {
        const std::vector<double>& final_dec = trace.capped.empty() ? trace.after : trace.capped;
        const double final_min = *std::min_element(final_dec.begin(), final_dec.end());
        if (final_min > 0.0) {
            const auto r = check_change_kl_step(star, star_next,
                                                SimplexDistribution(std::vector<double>(final_dec)));
            ++report.change_checked;
            report.change_passed += r.pass ? 1 : 0;
            report.change_min_slack = std::min(report.change_min_slack, r.slack);
        }
    }
}

template <typename Learner>
inline const StepTrace* traced_step(Learner& l) {
    if constexpr (std::is_same_v<Learner, UniformMixLearner> ||
                  std::is_same_v<Learner, TruncatedLearner>) {
        return &l.last_trace();
    } else if constexpr (std::is_same_v<Learner, MappedLearner>) {
        return &l.inner().last_trace();
    } else {
        return nullptr;
    }
}

template <typename Learner>
inline void set_trace(Learner& l, bool on) {
    if constexpr (std::is_same_v<Learner, UniformMixLearner> ||
                  std::is_same_v<Learner, TruncatedLearner>) {
        l.enable_trace(on);
    } else if constexpr (std::is_same_v<Learner, MappedLearner>) {
        l.inner().enable_trace(on);
    }
}

}  // namespace detail

// Steps the learner through the script, accounting regret against the given
// competitor sequence, evaluating the learner's closed-form bound per prefix
// and optionally running every applicable per-step checker.
template <typename Learner>
ReplayResult replay_with_checks(Learner& learner, const GameScript& script,
                                const std::vector<SimplexDistribution>& competitor,
                                const ReplayOptions& options = {}) {
    const long T = script.rounds();
    if (T == 0) throw std::invalid_argument("replay: empty script");
    if (static_cast<long>(competitor.size()) != T)
        throw std::invalid_argument("replay: competitor length mismatch");
    if (options.feedback && options.feedback->rounds() != T)
        throw std::invalid_argument("replay: feedback length mismatch");

    ReplayResult result;
    result.ledger.rows.reserve(static_cast<std::size_t>(T));
    detail::set_trace(learner, options.run_checks);

    std::vector<double> decision, played;
    double cum_regret = 0.0, path = 0.0, dev_sq = 0.0;
    for (long t = 0; t < T; ++t) {
        const LossVector& true_loss = script.losses[static_cast<std::size_t>(t)];
        detail::get_decision(learner, decision);
        const std::vector<double>* play = &decision;
        if (options.decision_map) {
            played = options.decision_map(decision);
            play = &played;
        }
        if (options.record_decisions) result.decisions.push_back(*play);

        const double learner_loss = dot(*play, true_loss.values());
        const double comp_loss = dot(competitor[static_cast<std::size_t>(t)].values(),
                                     true_loss.values());
        cum_regret += learner_loss - comp_loss;
        if (t > 0)
            path += total_variation(competitor[static_cast<std::size_t>(t) - 1],
                                    competitor[static_cast<std::size_t>(t)]);

        LossVector fed = options.feedback_fn
                             ? options.feedback_fn(t + 1, *play, true_loss, *options.rng)
                             : (options.feedback
                                    ? options.feedback->losses[static_cast<std::size_t>(t)]
                                    : true_loss);
        dev_sq += half_range(fed) * half_range(fed);
        learner.step(fed);

        if (options.run_checks) {
            if (const StepTrace* trace = detail::traced_step(learner)) {
                const auto& star = competitor[static_cast<std::size_t>(t)];
                const auto& star_next =
                    competitor[static_cast<std::size_t>(std::min(t + 1, T - 1))];
                if constexpr (std::is_same_v<Learner, MappedLearner>) {
                    // the trace lives in the mapped decision space
                    detail::apply_checks(*trace, mix_uniform(star, learner.alpha()),
                                         mix_uniform(star_next, learner.alpha()),
                                         result.checks);
                } else {
                    detail::apply_checks(*trace, star, star_next, result.checks);
                }
            }
        }

        const double fixed = detail::LearnerTraits<Learner>::fixed_budget(learner);
        const double bound_path = options.bound_path_override >= 0.0
                                      ? options.bound_path_override
                                      : (fixed >= 0.0 ? fixed : path);
        BoundContext ctx;
        if constexpr (std::is_same_v<Learner, UniversalLearner>) {
            ctx.experts = learner.experts();
            ctx.deviation_norm = std::sqrt(dev_sq);
        } else {
            ctx = bound_context(learner);
        }
        const double bound = options.bound_scale *
                             bound_value(detail::LearnerTraits<Learner>::kind, ctx, bound_path);

        result.ledger.rows.push_back(LedgerRow{t + 1, learner_loss, comp_loss, cum_regret,
                                               bound, detail::current_eta(learner), path});
    }

    result.ledger.final_regret = cum_regret;
    result.ledger.final_bound = result.ledger.rows.back().bound;
    result.ledger.ratio = result.ledger.final_bound != 0.0
                              ? result.ledger.final_regret / result.ledger.final_bound
                              : 0.0;
    result.ledger.deviation_norm = std::sqrt(dev_sq);
    result.ledger.path = path;
    detail::set_trace(learner, false);
    return result;
}

}  // namespace exptrack
