#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "exptrack/adversaries.hpp"
#include "exptrack/game.hpp"
#include "exptrack/learners.hpp"
#include "exptrack/oracle.hpp"
#include "exptrack/scenarios.hpp"
#include "exptrack/simplex.hpp"

namespace exptrack {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GameSpec {
    std::string generator;  // two_expert | static | dynamic | drift | file
    long rounds = 0;
    int experts = 2;
    double path_budget = 0.0;
    double volatility = 0.0;
    std::vector<double> ranges;
    std::string path;  // for generator == file
};

struct LearnerConfig {
    LearnerKind kind = LearnerKind::uniform_mix;
    RateMode rate_mode = RateMode::variance_biased;
    double path_budget = 0.0;
    double box_low = 0.0;
    double box_high = 1.0;
    AlphaMode alpha_mode = AlphaMode::star;
    double alpha = 0.0;
    double decision_cap = 1.0;
};

struct ScenarioConfig {
    enum class Type { noisy, discount, floor, semi_bandit };
    Type type = Type::noisy;
    NoiseModel noise_model = NoiseModel::gaussian;
    double scale = 0.0;    // noisy
    double alpha = 1.0;    // discount
    double beta0 = 1.0;    // discount
    std::vector<double> floor;
    int arms = 1;          // semi_bandit
};

struct CompetitorConfig {
    std::string kind = "best_fixed";  // best_fixed | best_switching | embedded
    int max_switches = 0;
};

struct ExperimentConfig {
    GameSpec game;
    LearnerConfig learner;
    CompetitorConfig competitor;
    std::vector<ScenarioConfig> scenarios;
    int replicates = 1;
    std::uint64_t seed_base = 1;
    int threads = 1;
    double tolerance = 0.04;  // lowerbound slack
    std::string output_dir = "out";
};

// ---------------------------------------------------------------------------
// Config parsing: a single JSON document; unknown keys are errors.

namespace harness_detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

inline RateMode parse_rate_mode(const std::string& s) {
    if (s == "variance") return RateMode::variance_biased;
    if (s == "min_biased") return RateMode::min_biased;
    throw ConfigError("learner.rate_mode must be 'variance' or 'min_biased'");
}

inline AlphaMode parse_alpha_mode(const std::string& s) {
    if (s == "star") return AlphaMode::star;
    if (s == "hat") return AlphaMode::hat;
    if (s == "fixed") return AlphaMode::fixed;
    throw ConfigError("learner.alpha_mode must be 'star', 'hat' or 'fixed'");
}

inline LearnerKind parse_kind(const std::string& s) {
    if (s == "uniform_mix") return LearnerKind::uniform_mix;
    if (s == "truncated") return LearnerKind::truncated;
    if (s == "mapped") return LearnerKind::mapped;
    if (s == "doubling") return LearnerKind::doubling;
    if (s == "universal") return LearnerKind::universal;
    throw ConfigError("learner.kind must be one of uniform_mix, truncated, mapped, doubling, universal");
}

}  // namespace harness_detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
    namespace hd = harness_detail;
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    hd::reject_unknown(doc, {"game", "learner", "competitor", "scenarios", "replicates",
                             "seed_base", "threads", "tolerance", "output"},
                       "config");
    ExperimentConfig cfg;

    if (!doc.contains("game")) throw ConfigError("config: missing 'game'");
    const auto& game = doc.at("game");
    hd::reject_unknown(game, {"generator", "rounds", "experts", "path_budget", "volatility",
                              "ranges", "path"},
                       "game");
    cfg.game.generator = hd::get_or<std::string>(game, "generator", "");
    cfg.game.rounds = hd::get_or<long>(game, "rounds", 0);
    cfg.game.experts = hd::get_or<int>(game, "experts", 2);
    cfg.game.path_budget = hd::get_or<double>(game, "path_budget", 0.0);
    cfg.game.volatility = hd::get_or<double>(game, "volatility", 0.0);
    cfg.game.ranges = hd::get_or<std::vector<double>>(game, "ranges", {});
    cfg.game.path = hd::get_or<std::string>(game, "path", "");
    if (cfg.game.generator.empty()) throw ConfigError("game.generator is required");
    if (cfg.game.generator != "file" && cfg.game.rounds < 1)
        throw ConfigError("game.rounds must be positive");
    if (cfg.game.generator == "file" && cfg.game.path.empty())
        throw ConfigError("game.path is required for the file generator");

    if (!doc.contains("learner")) throw ConfigError("config: missing 'learner'");
    const auto& learner = doc.at("learner");
    hd::reject_unknown(learner, {"kind", "rate_mode", "path_budget", "box_low", "box_high",
                                 "alpha_mode", "alpha", "decision_cap"},
                       "learner");
    cfg.learner.kind = hd::parse_kind(hd::get_or<std::string>(learner, "kind", "uniform_mix"));
    cfg.learner.rate_mode =
        hd::parse_rate_mode(hd::get_or<std::string>(learner, "rate_mode",
                                                    cfg.learner.kind == LearnerKind::uniform_mix ||
                                                            cfg.learner.kind == LearnerKind::truncated
                                                        ? "variance"
                                                        : "min_biased"));
    cfg.learner.path_budget = hd::get_or<double>(learner, "path_budget", 0.0);
    cfg.learner.box_low = hd::get_or<double>(learner, "box_low", 0.0);
    cfg.learner.box_high = hd::get_or<double>(learner, "box_high", 1.0);
    cfg.learner.alpha_mode =
        hd::parse_alpha_mode(hd::get_or<std::string>(learner, "alpha_mode", "star"));
    cfg.learner.alpha = hd::get_or<double>(learner, "alpha", 0.0);
    cfg.learner.decision_cap = hd::get_or<double>(learner, "decision_cap", 1.0);

    if (doc.contains("competitor")) {
        const auto& comp = doc.at("competitor");
        hd::reject_unknown(comp, {"kind", "max_switches"}, "competitor");
        cfg.competitor.kind = hd::get_or<std::string>(comp, "kind", "best_fixed");
        cfg.competitor.max_switches = hd::get_or<int>(comp, "max_switches", 0);
        if (cfg.competitor.kind != "best_fixed" && cfg.competitor.kind != "best_switching" &&
            cfg.competitor.kind != "embedded")
            throw ConfigError("competitor.kind must be best_fixed, best_switching or embedded");
    }

    for (const auto& sc : hd::get_or<nlohmann::json>(doc, "scenarios", nlohmann::json::array())) {
        hd::reject_unknown(sc, {"type", "model", "scale", "alpha", "beta0", "floor", "arms"},
                           "scenario");
        const std::string type = hd::get_or<std::string>(sc, "type", "");
        ScenarioConfig s;
        if (type == "noisy") {
            s.type = ScenarioConfig::Type::noisy;
            const std::string model = hd::get_or<std::string>(sc, "model", "gaussian");
            if (model == "gaussian") s.noise_model = NoiseModel::gaussian;
            else if (model == "bounded_uniform") s.noise_model = NoiseModel::bounded_uniform;
            else throw ConfigError("noisy.model must be gaussian or bounded_uniform");
            s.scale = hd::get_or<double>(sc, "scale", 0.0);
        } else if (type == "discount") {
            s.type = ScenarioConfig::Type::discount;
            s.alpha = hd::get_or<double>(sc, "alpha", 1.0);
            s.beta0 = hd::get_or<double>(sc, "beta0", 1.0);
            if (!(s.alpha > 0.0)) throw ConfigError("discount.alpha must be positive");
        } else if (type == "floor") {
            s.type = ScenarioConfig::Type::floor;
            s.floor = hd::get_or<std::vector<double>>(sc, "floor", {});
            if (s.floor.empty()) throw ConfigError("floor.floor is required");
        } else if (type == "semi_bandit") {
            s.type = ScenarioConfig::Type::semi_bandit;
            s.arms = hd::get_or<int>(sc, "arms", 1);
            if (s.arms < 1) throw ConfigError("semi_bandit.arms must be positive");
        } else {
            throw ConfigError("scenario.type must be noisy, discount, floor or semi_bandit");
        }
        cfg.scenarios.push_back(std::move(s));
    }

    cfg.replicates = hd::get_or<int>(doc, "replicates", 1);
    if (cfg.replicates < 1) throw ConfigError("replicates must be at least 1");
    cfg.seed_base = hd::get_or<std::uint64_t>(doc, "seed_base", 1);
    cfg.threads = hd::get_or<int>(doc, "threads", 1);
    if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
    cfg.tolerance = hd::get_or<double>(doc, "tolerance", 0.04);
    cfg.output_dir = hd::get_or<std::string>(doc, "output", "out");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Experiment assembly.

using AnyLearner = std::variant<UniformMixLearner, TruncatedLearner, MappedLearner,
                                DoublingLearner, UniversalLearner>;

inline AnyLearner make_learner(const LearnerConfig& lc, int experts, long horizon,
                               double decision_cap = 1.0) {
    const double cap = std::min(decision_cap, lc.decision_cap);
    switch (lc.kind) {
        case LearnerKind::uniform_mix:
            return UniformMixLearner(experts, horizon, lc.path_budget, lc.rate_mode, cap);
        case LearnerKind::truncated: {
            const double b = lc.box_high < 1.0 ? lc.box_high : std::min(1.0, cap);
            return TruncatedLearner(experts, lc.box_low, b, lc.path_budget, lc.rate_mode);
        }
        case LearnerKind::mapped:
            return MappedLearner(experts, lc.path_budget, lc.alpha_mode, lc.rate_mode, lc.alpha);
        case LearnerKind::doubling:
            return DoublingLearner(experts, lc.alpha_mode, lc.rate_mode);
        case LearnerKind::universal:
            return UniversalLearner(experts);
    }
    throw ConfigError("unknown learner kind");
}

inline GameScript make_game(const GameSpec& spec, std::uint64_t seed) {
    if (spec.generator == "two_expert") {
        if (spec.experts != 2) throw ConfigError("two_expert game requires experts = 2");
        return two_expert_env(spec.rounds, spec.ranges, seed);
    }
    if (spec.generator == "static") return static_env(spec.rounds, spec.experts, spec.ranges, seed);
    if (spec.generator == "dynamic")
        return dynamic_env(spec.rounds, spec.experts, spec.path_budget, spec.ranges, seed);
    if (spec.generator == "drift") return drift_env(spec.rounds, spec.experts, spec.volatility, seed);
    if (spec.generator == "file") {
        std::ifstream is(spec.path);
        if (!is) throw ConfigError("cannot open script file: " + spec.path);
        return read_script(is);
    }
    throw ConfigError("unknown game generator '" + spec.generator + "'");
}

inline std::vector<SimplexDistribution> resolve_competitor(const CompetitorConfig& cc,
                                                           const GameScript& script) {
    if (cc.kind == "embedded") {
        if (script.competitor.empty())
            throw ConfigError("competitor.kind = embedded but the script has none");
        return script.competitor;
    }
    if (cc.kind == "best_switching")
        return best_switching_competitor(script, cc.max_switches).sequence;
    return best_fixed_expert(script).sequence;
}

struct ReplicateOutcome {
    GameScript script;   // the game actually played
    ReplayResult result;
    double discounted_regret = 0.0;
    bool has_discount = false;
};

// One replicate end to end: generate, apply scenario transforms, resolve the
// competitor, replay.
inline ReplicateOutcome run_replicate(const ExperimentConfig& cfg, int replicate,
                                      bool run_checks) {
    const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(replicate);
    GameScript script = make_game(cfg.game, seed);

    const ScenarioConfig* discount = nullptr;
    const ScenarioConfig* noisy = nullptr;
    const ScenarioConfig* floor = nullptr;
    const ScenarioConfig* bandit = nullptr;
    for (const ScenarioConfig& s : cfg.scenarios) {
        switch (s.type) {
            case ScenarioConfig::Type::discount: discount = &s; break;
            case ScenarioConfig::Type::noisy: noisy = &s; break;
            case ScenarioConfig::Type::floor: floor = &s; break;
            case ScenarioConfig::Type::semi_bandit: bandit = &s; break;
        }
    }
    if (noisy && bandit)
        throw ConfigError("noisy and semi_bandit scenarios cannot be combined");

    ReplicateOutcome outcome;
    if (discount) script = discount_rescale(script, discount->alpha);
    outcome.script = script;

    GameScript noisy_script;
    ReplayOptions options;
    options.run_checks = run_checks;
    if (noisy) {
        noisy_script = noisy_wrapper(script, noisy->noise_model, noisy->scale, seed);
        options.feedback = &noisy_script;
    }

    CounterRng bandit_rng(seed, 0x62616e646974ull);
    if (bandit) {
        if (cfg.learner.kind != LearnerKind::uniform_mix)
            throw ConfigError("semi_bandit requires the uniform_mix learner");
        const int arms = bandit->arms;
        options.rng = &bandit_rng;
        options.feedback_fn = [arms](long, const std::vector<double>& decision,
                                     const LossVector& true_loss, CounterRng& rng) {
            const std::vector<double> b =
                semi_bandit_policy(SimplexDistribution(std::vector<double>(decision)), arms);
            const std::vector<int> observed = sample_arm_set(b, arms, rng);
            return bandit_estimate(true_loss, b, observed);
        };
    }

    std::optional<FloorConstraint> floor_c;
    std::vector<SimplexDistribution> competitor = resolve_competitor(cfg.competitor, script);
    if (floor) {
        floor_c.emplace(floor->floor);
        if (static_cast<int>(floor_c->floor.size()) != script.experts)
            throw ConfigError("floor length must match the number of experts");
        options.bound_scale = floor_c->free_mass();
        options.decision_map = [&fc = *floor_c](const std::vector<double>& q) {
            return floor_transform(fc, SimplexDistribution(std::vector<double>(q))).values();
        };
        for (SimplexDistribution& star : competitor)
            star = floor_transform(*floor_c, star);
    }
    if (discount) options.record_decisions = true;

    const double cap = bandit ? 1.0 / static_cast<double>(bandit->arms) : 1.0;
    AnyLearner learner = make_learner(cfg.learner, script.experts, script.rounds(), cap);
    outcome.result = std::visit(
        [&](auto& l) { return replay_with_checks(l, script, competitor, options); }, learner);

    if (discount) {
        outcome.has_discount = true;
        outcome.discounted_regret = discounted_regret(
            script, outcome.result.decisions, competitor, 1.0, discount->beta0);
        // the rescaled game already carries alpha^{1-t}; discounting the
        // rescaled regret sum by alpha^{T-1} recovers beta_{T-t} weights
        outcome.discounted_regret *=
            std::pow(discount->alpha, static_cast<double>(script.rounds() - 1));
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Output writers. All numbers use 17 significant digits; outputs are fully
// determined by (config, seed_base).

inline void write_ledger_csv(const RegretLedger& ledger, std::ostream& os) {
    os << "round,learner_loss,competitor_loss,cum_regret,bound,eta,path\n";
    for (const LedgerRow& r : ledger.rows) {
        os << r.round << ',' << detail::format_double(r.learner_loss) << ','
           << detail::format_double(r.competitor_loss) << ','
           << detail::format_double(r.cumulative_regret) << ','
           << detail::format_double(r.bound) << ',' << detail::format_double(r.eta) << ','
           << detail::format_double(r.path) << '\n';
    }
}

namespace harness_detail {

struct Moments {
    double mean = 0.0, stddev = 0.0, max = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    m.max = xs.front();
    for (double x : xs) {
        ss += (x - m.mean) * (x - m.mean);
        m.max = std::max(m.max, x);
    }
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
    return m;
}

inline const char* kind_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::uniform_mix: return "uniform_mix";
        case LearnerKind::truncated: return "truncated";
        case LearnerKind::mapped: return "mapped";
        case LearnerKind::doubling: return "doubling";
        case LearnerKind::universal: return "universal";
    }
    return "?";
}

}  // namespace harness_detail

// `run`: replicated replays, one ledger file per replicate plus an aggregate
// summary. Replicates execute in parallel when threads > 1; outputs are
// merged by replicate index so the bytes never depend on scheduling.
inline int cmd_run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
    auto work = [&](int begin, int step) {
        for (int r = begin; r < cfg.replicates; r += step)
            outcomes[static_cast<std::size_t>(r)] = run_replicate(cfg, r, false);
    };
    if (cfg.threads <= 1 || cfg.replicates == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        const int n = std::min(cfg.threads, cfg.replicates);
        pool.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool.emplace_back(work, i, n);
        for (std::thread& t : pool) t.join();
    }

    std::vector<double> regrets, bounds, ratios, paths, devs, discounted;
    for (int r = 0; r < cfg.replicates; ++r) {
        const ReplicateOutcome& o = outcomes[static_cast<std::size_t>(r)];
        {
            std::ofstream os(fs::path(cfg.output_dir) / ("script_" + std::to_string(r) + ".txt"));
            write_script(o.script, os);
        }
        {
            std::ofstream os(fs::path(cfg.output_dir) / ("ledger_" + std::to_string(r) + ".csv"));
            write_ledger_csv(o.result.ledger, os);
        }
        regrets.push_back(o.result.ledger.final_regret);
        bounds.push_back(o.result.ledger.final_bound);
        ratios.push_back(o.result.ledger.ratio);
        paths.push_back(o.result.ledger.path);
        devs.push_back(o.result.ledger.deviation_norm);
        if (o.has_discount) discounted.push_back(o.discounted_regret);
    }

    namespace hd = harness_detail;
    const auto mr = hd::moments(regrets), mb = hd::moments(bounds), mt = hd::moments(ratios),
               mp = hd::moments(paths), md = hd::moments(devs);
    std::ofstream os(fs::path(cfg.output_dir) / "summary.txt");
    os << "summary v1\n";
    os << "command run\n";
    os << "learner " << hd::kind_name(cfg.learner.kind) << "\n";
    os << "replicates " << cfg.replicates << "\n";
    os << "rounds " << outcomes.front().script.rounds() << "\n";
    os << "experts " << outcomes.front().script.experts << "\n";
    os << "final_regret_mean " << detail::format_double(mr.mean) << "\n";
    os << "final_regret_std " << detail::format_double(mr.stddev) << "\n";
    os << "final_bound_mean " << detail::format_double(mb.mean) << "\n";
    os << "final_bound_std " << detail::format_double(mb.stddev) << "\n";
    os << "ratio_mean " << detail::format_double(mt.mean) << "\n";
    os << "ratio_max " << detail::format_double(mt.max) << "\n";
    os << "path_mean " << detail::format_double(mp.mean) << "\n";
    os << "deviation_norm_mean " << detail::format_double(md.mean) << "\n";
    if (!discounted.empty()) {
        const auto mdisc = hd::moments(discounted);
        os << "discounted_regret_mean " << detail::format_double(mdisc.mean) << "\n";
    }
    os << "end\n";
    return 0;
}

// `verify`: replays with every applicable per-step checker and writes a
// line-oriented check report. A negative-control mode demonstrates that a
// corrupted transition is reported as a failure.
inline int cmd_verify(const ExperimentConfig& cfg, bool negative_control = false) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    CheckReport total;
    for (int r = 0; r < cfg.replicates; ++r) {
        const ReplicateOutcome o = run_replicate(cfg, r, true);
        const CheckReport& c = o.result.checks;
        total.kl_checked += c.kl_checked;
        total.kl_passed += c.kl_passed;
        total.change_checked += c.change_checked;
        total.change_passed += c.change_passed;
        total.trunc_checked += c.trunc_checked;
        total.trunc_passed += c.trunc_passed;
        total.kl_min_slack = std::min(total.kl_min_slack, c.kl_min_slack);
        total.change_min_slack = std::min(total.change_min_slack, c.change_min_slack);
        total.trunc_min_slack = std::min(total.trunc_min_slack, c.trunc_min_slack);
    }

    if (negative_control) {
        // a skewed decision updated towards uniform violates the divergence
        //-change inequality; the checker must flag it
        const SimplexDistribution p{std::vector<double>{0.9, 0.05, 0.05}};
        const SimplexDistribution corrupted = SimplexDistribution::uniform(3);
        const SimplexDistribution star = SimplexDistribution::one_hot(3, 0);
        const LossVector loss{std::vector<double>{0.0, 1.0, 1.0}};
        const auto r = check_kl_step(p, corrupted, star, loss, 0.5, 0.0);
        ++total.kl_checked;
        total.kl_passed += r.pass ? 1 : 0;
        total.kl_min_slack = std::min(total.kl_min_slack, r.slack);
    }

    const bool pass = total.all_passed();
    std::ofstream os(fs::path(cfg.output_dir) / "check_report.txt");
    os << "check report v1\n";
    os << "replicates " << cfg.replicates << "\n";
    os << "kl_checked " << total.kl_checked << "\n";
    os << "kl_passed " << total.kl_passed << "\n";
    os << "kl_min_slack " << detail::format_double(total.kl_min_slack) << "\n";
    os << "change_checked " << total.change_checked << "\n";
    os << "change_passed " << total.change_passed << "\n";
    os << "change_min_slack " << detail::format_double(total.change_min_slack) << "\n";
    os << "trunc_checked " << total.trunc_checked << "\n";
    os << "trunc_passed " << total.trunc_passed << "\n";
    os << "trunc_min_slack " << detail::format_double(total.trunc_min_slack) << "\n";
    os << "result " << (pass ? "PASS" : "FAIL") << "\n";
    os << "end\n";
    return pass ? 0 : 2;
}

// `lowerbound`: fresh adversarial scripts per replicate, mean realized regret
// of the configured learner against the embedded competitor, compared with
// the closed-form adversarial floor.
inline int cmd_lowerbound(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.game.generator != "two_expert" && cfg.game.generator != "static" &&
        cfg.game.generator != "dynamic")
        throw ConfigError("lowerbound requires an adversarial generator");
    if (!cfg.scenarios.empty())
        throw ConfigError("lowerbound does not take scenario adapters");
    fs::create_directories(cfg.output_dir);

    std::vector<double> regrets(static_cast<std::size_t>(cfg.replicates), 0.0);
    std::vector<double> floors(static_cast<std::size_t>(cfg.replicates), 0.0);
    auto work = [&](int begin, int step) {
        std::vector<double> decision;
        for (int r = begin; r < cfg.replicates; r += step) {
            const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(r);
            const GameScript script = make_game(cfg.game, seed);
            AnyLearner learner = make_learner(cfg.learner, script.experts, script.rounds());
            double learner_total = 0.0, comp_total = 0.0;
            std::visit(
                [&](auto& l) {
                    for (long t = 0; t < script.rounds(); ++t) {
                        detail::get_decision(l, decision);
                        const auto& loss = script.losses[static_cast<std::size_t>(t)];
                        learner_total += dot(decision, loss.values());
                        comp_total += dot(script.competitor[static_cast<std::size_t>(t)].values(),
                                          loss.values());
                        l.step(loss);
                    }
                },
                learner);
            regrets[static_cast<std::size_t>(r)] = learner_total - comp_total;
            floors[static_cast<std::size_t>(r)] =
                lower_bound_value(script, script.experts, cfg.game.path_budget);
        }
    };
    if (cfg.threads <= 1 || cfg.replicates == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        const int n = std::min(cfg.threads, cfg.replicates);
        for (int i = 0; i < n; ++i) pool.emplace_back(work, i, n);
        for (std::thread& t : pool) t.join();
    }

    namespace hd = harness_detail;
    const auto mr = hd::moments(regrets);
    const auto mf = hd::moments(floors);
    const bool pass = mr.mean >= mf.mean * (1.0 - cfg.tolerance);
    std::ofstream os(fs::path(cfg.output_dir) / "lowerbound_report.txt");
    os << "lowerbound report v1\n";
    os << "learner " << hd::kind_name(cfg.learner.kind) << "\n";
    os << "replicates " << cfg.replicates << "\n";
    os << "rounds " << cfg.game.rounds << "\n";
    os << "experts " << cfg.game.experts << "\n";
    os << "mean_regret " << detail::format_double(mr.mean) << "\n";
    os << "regret_std " << detail::format_double(mr.stddev) << "\n";
    os << "formula " << detail::format_double(mf.mean) << "\n";
    os << "tolerance " << detail::format_double(cfg.tolerance) << "\n";
    os << "result " << (pass ? "PASS" : "FAIL") << "\n";
    os << "end\n";
    return pass ? 0 : 2;
}

}  // namespace exptrack
