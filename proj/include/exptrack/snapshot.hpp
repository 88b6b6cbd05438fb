#pragma once

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "exptrack/game.hpp"
#include "exptrack/learners.hpp"

namespace exptrack {

// Versioned field-for-field text snapshots of learner state, so long games
// can be checkpointed and resumed bit-exactly. Values use 17 significant
// digits; infinities print as "inf" (the learning rate starts there).

namespace snapshot_detail {

inline double parse_double(const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str())
        throw std::invalid_argument("snapshot: bad number '" + tok + "'");
    return v;
}

inline std::string expect_line(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("snapshot: unexpected end of input");
    return line;
}

inline std::string expect_key(std::istream& is, const std::string& key) {
    const std::string line = expect_line(is);
    if (line.rfind(key + " ", 0) != 0)
        throw std::invalid_argument("snapshot: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

inline void expect_exact(std::istream& is, const std::string& want) {
    const std::string line = expect_line(is);
    if (line != want)
        throw std::invalid_argument("snapshot: expected '" + want + "', got '" + line + "'");
}

inline std::vector<double> parse_doubles(const std::string& s) {
    std::istringstream iss(s);
    std::vector<double> out;
    std::string tok;
    while (iss >> tok) out.push_back(parse_double(tok));
    return out;
}

inline const char* mode_name(RateMode m) {
    return m == RateMode::variance_biased ? "variance" : "min_biased";
}
inline RateMode parse_mode(const std::string& s) {
    if (s == "variance") return RateMode::variance_biased;
    if (s == "min_biased") return RateMode::min_biased;
    throw std::invalid_argument("snapshot: unknown rate mode '" + s + "'");
}
inline const char* alpha_name(AlphaMode m) {
    switch (m) {
        case AlphaMode::star: return "star";
        case AlphaMode::hat: return "hat";
        case AlphaMode::fixed: return "fixed";
    }
    return "fixed";
}
inline AlphaMode parse_alpha_mode(const std::string& s) {
    if (s == "star") return AlphaMode::star;
    if (s == "hat") return AlphaMode::hat;
    if (s == "fixed") return AlphaMode::fixed;
    throw std::invalid_argument("snapshot: unknown alpha mode '" + s + "'");
}

}  // namespace snapshot_detail

struct SnapshotAccess {
    // ---- uniform mix ----
    static void write(const UniformMixLearner& l, std::ostream& os) {
        using detail::format_double;
        using detail::format_row;
        os << "kind uniform_mix\n";
        os << "experts " << l.experts_ << "\n";
        os << "horizon " << l.horizon_ << "\n";
        os << "path_budget " << format_double(l.path_budget_) << "\n";
        os << "rate_mode " << snapshot_detail::mode_name(l.mode_) << "\n";
        os << "decision_cap " << format_double(l.decision_cap_) << "\n";
        os << "round " << l.stats_.round << "\n";
        os << "V " << format_double(l.stats_.V) << "\n";
        os << "Q " << format_double(l.stats_.Q) << "\n";
        os << "E " << format_double(l.stats_.E) << "\n";
        os << "eta " << format_double(l.eta_) << "\n";
        os << "eta_capped " << (l.eta_capped_ ? 1 : 0) << "\n";
        os << "gamma " << format_double(l.gamma_) << "\n";
        os << "weights " << format_row(l.weights_) << "\n";
        os << "end\n";
    }

    static UniformMixLearner read_uniform_mix(std::istream& is) {
        namespace sd = snapshot_detail;
        const int experts = std::stoi(sd::expect_key(is, "experts"));
        const long horizon = std::stol(sd::expect_key(is, "horizon"));
        const double budget = sd::parse_double(sd::expect_key(is, "path_budget"));
        const RateMode mode = sd::parse_mode(sd::expect_key(is, "rate_mode"));
        const double cap = sd::parse_double(sd::expect_key(is, "decision_cap"));
        UniformMixLearner l(experts, horizon, budget, mode, cap);
        l.stats_.round = std::stol(sd::expect_key(is, "round"));
        l.stats_.V = sd::parse_double(sd::expect_key(is, "V"));
        l.stats_.Q = sd::parse_double(sd::expect_key(is, "Q"));
        l.stats_.E = sd::parse_double(sd::expect_key(is, "E"));
        l.eta_ = sd::parse_double(sd::expect_key(is, "eta"));
        l.eta_capped_ = sd::expect_key(is, "eta_capped") == "1";
        l.gamma_ = sd::parse_double(sd::expect_key(is, "gamma"));
        l.weights_ = sd::parse_doubles(sd::expect_key(is, "weights"));
        if (static_cast<int>(l.weights_.size()) != experts)
            throw std::invalid_argument("snapshot: weight count mismatch");
        sd::expect_exact(is, "end");
        return l;
    }

    // ---- truncated ----
    static void write(const TruncatedLearner& l, std::ostream& os) {
        using detail::format_double;
        using detail::format_row;
        os << "kind truncated\n";
        os << "experts " << l.experts_ << "\n";
        os << "box_low " << format_double(l.box_low_) << "\n";
        os << "box_high " << format_double(l.box_high_) << "\n";
        os << "path_budget " << format_double(l.path_budget_) << "\n";
        os << "rate_mode " << snapshot_detail::mode_name(l.mode_) << "\n";
        os << "round " << l.stats_.round << "\n";
        os << "V " << format_double(l.stats_.V) << "\n";
        os << "Q " << format_double(l.stats_.Q) << "\n";
        os << "E " << format_double(l.stats_.E) << "\n";
        os << "eta " << format_double(l.eta_) << "\n";
        os << "eta_capped " << (l.eta_capped_ ? 1 : 0) << "\n";
        os << "last_min_increment " << format_double(l.last_min_increment_) << "\n";
        os << "weights " << format_row(l.weights_) << "\n";
        os << "end\n";
    }

    static TruncatedLearner read_truncated(std::istream& is) {
        namespace sd = snapshot_detail;
        const int experts = std::stoi(sd::expect_key(is, "experts"));
        const double a = sd::parse_double(sd::expect_key(is, "box_low"));
        const double b = sd::parse_double(sd::expect_key(is, "box_high"));
        const double budget = sd::parse_double(sd::expect_key(is, "path_budget"));
        const RateMode mode = sd::parse_mode(sd::expect_key(is, "rate_mode"));
        TruncatedLearner l(experts, a, b, budget, mode);
        l.stats_.round = std::stol(sd::expect_key(is, "round"));
        l.stats_.V = sd::parse_double(sd::expect_key(is, "V"));
        l.stats_.Q = sd::parse_double(sd::expect_key(is, "Q"));
        l.stats_.E = sd::parse_double(sd::expect_key(is, "E"));
        l.eta_ = sd::parse_double(sd::expect_key(is, "eta"));
        l.eta_capped_ = sd::expect_key(is, "eta_capped") == "1";
        l.last_min_increment_ = sd::parse_double(sd::expect_key(is, "last_min_increment"));
        l.weights_ = sd::parse_doubles(sd::expect_key(is, "weights"));
        if (static_cast<int>(l.weights_.size()) != experts)
            throw std::invalid_argument("snapshot: weight count mismatch");
        sd::expect_exact(is, "end");
        return l;
    }

    // ---- mapped ----
    static void write(const MappedLearner& l, std::ostream& os) {
        using detail::format_double;
        os << "kind mapped\n";
        os << "alpha_mode " << snapshot_detail::alpha_name(l.alpha_mode_) << "\n";
        os << "alpha " << format_double(l.alpha_) << "\n";
        os << "path_budget " << format_double(l.raw_path_budget_) << "\n";
        os << "lifetime_qd " << format_double(l.lifetime_qd_) << "\n";
        write(l.inner_, os);
        os << "end\n";
    }

    static MappedLearner read_mapped(std::istream& is) {
        namespace sd = snapshot_detail;
        const AlphaMode amode = sd::parse_alpha_mode(sd::expect_key(is, "alpha_mode"));
        const double alpha = sd::parse_double(sd::expect_key(is, "alpha"));
        const double budget = sd::parse_double(sd::expect_key(is, "path_budget"));
        const double qd = sd::parse_double(sd::expect_key(is, "lifetime_qd"));
        sd::expect_exact(is, "kind truncated");
        TruncatedLearner inner = read_truncated(is);
        MappedLearner l(inner.experts(), budget, AlphaMode::fixed, inner.rate_mode(), alpha);
        l.alpha_mode_ = amode;
        l.alpha_ = alpha;
        l.raw_path_budget_ = budget;
        l.lifetime_qd_ = qd;
        l.inner_ = std::move(inner);
        sd::expect_exact(is, "end");
        return l;
    }

    // ---- doubling ----
    static void write(const DoublingLearner& l, std::ostream& os) {
        using detail::format_double;
        os << "kind doubling\n";
        os << "round " << l.round_ << "\n";
        os << "terminal_cap " << (l.terminal_cap_ ? std::to_string(*l.terminal_cap_) : "none")
           << "\n";
        os << "resets " << l.resets_.size() << "\n";
        for (const auto& [t, p] : l.resets_)
            os << t << " " << format_double(p) << "\n";
        write(l.inner_, os);
        os << "end\n";
    }

    static DoublingLearner read_doubling(std::istream& is) {
        namespace sd = snapshot_detail;
        const long round = std::stol(sd::expect_key(is, "round"));
        const std::string cap = sd::expect_key(is, "terminal_cap");
        const std::size_t nresets = std::stoul(sd::expect_key(is, "resets"));
        std::vector<std::pair<long, double>> resets;
        for (std::size_t i = 0; i < nresets; ++i) {
            std::istringstream iss(sd::expect_line(is));
            long t;
            std::string p;
            iss >> t >> p;
            resets.emplace_back(t, sd::parse_double(p));
        }
        sd::expect_exact(is, "kind mapped");
        MappedLearner inner = read_mapped(is);
        DoublingLearner l(inner.experts(), inner.alpha_mode(), inner.inner().rate_mode());
        l.terminal_cap_ = (cap == "none") ? std::nullopt : std::optional<int>(std::stoi(cap));
        l.round_ = round;
        l.resets_ = std::move(resets);
        l.inner_ = std::move(inner);
        sd::expect_exact(is, "end");
        return l;
    }

    // ---- universal ----
    static void write(const UniversalLearner& l, std::ostream& os) {
        os << "kind universal\n";
        os << "experts " << l.experts_ << "\n";
        os << "round " << l.round_ << "\n";
        os << "depth " << l.depth_ << "\n";
        os << "combined " << detail::format_row(l.combined_) << "\n";
        os << "runs " << l.runs_.size() << "\n";
        for (const DoublingLearner& run : l.runs_) write(run, os);
        os << "mixers " << l.mixers_.size() << "\n";
        for (const MappedLearner& mixer : l.mixers_) write(mixer, os);
        os << "end\n";
    }

    static UniversalLearner read_universal(std::istream& is) {
        namespace sd = snapshot_detail;
        const int experts = std::stoi(sd::expect_key(is, "experts"));
        UniversalLearner l(experts);
        l.round_ = std::stol(sd::expect_key(is, "round"));
        l.depth_ = std::stoi(sd::expect_key(is, "depth"));
        l.combined_ = sd::parse_doubles(sd::expect_key(is, "combined"));
        const std::size_t nruns = std::stoul(sd::expect_key(is, "runs"));
        l.runs_.clear();
        for (std::size_t i = 0; i < nruns; ++i) {
            sd::expect_exact(is, "kind doubling");
            l.runs_.push_back(read_doubling(is));
        }
        const std::size_t nmixers = std::stoul(sd::expect_key(is, "mixers"));
        l.mixers_.clear();
        for (std::size_t i = 0; i < nmixers; ++i) {
            sd::expect_exact(is, "kind mapped");
            l.mixers_.push_back(read_mapped(is));
        }
        sd::expect_exact(is, "end");
        return l;
    }
};

template <typename Learner>
void save_snapshot(const Learner& learner, std::ostream& os) {
    os << "snapshot v1\n";
    SnapshotAccess::write(learner, os);
}

inline std::string snapshot_kind(std::istream& is) {
    snapshot_detail::expect_exact(is, "snapshot v1");
    return snapshot_detail::expect_key(is, "kind");
}

inline UniformMixLearner load_uniform_mix(std::istream& is) {
    if (snapshot_kind(is) != "uniform_mix")
        throw std::invalid_argument("snapshot: not a uniform_mix snapshot");
    return SnapshotAccess::read_uniform_mix(is);
}
inline TruncatedLearner load_truncated(std::istream& is) {
    if (snapshot_kind(is) != "truncated")
        throw std::invalid_argument("snapshot: not a truncated snapshot");
    return SnapshotAccess::read_truncated(is);
}
inline MappedLearner load_mapped(std::istream& is) {
    if (snapshot_kind(is) != "mapped")
        throw std::invalid_argument("snapshot: not a mapped snapshot");
    return SnapshotAccess::read_mapped(is);
}
inline DoublingLearner load_doubling(std::istream& is) {
    if (snapshot_kind(is) != "doubling")
        throw std::invalid_argument("snapshot: not a doubling snapshot");
    return SnapshotAccess::read_doubling(is);
}
inline UniversalLearner load_universal(std::istream& is) {
    if (snapshot_kind(is) != "universal")
        throw std::invalid_argument("snapshot: not a universal snapshot");
    return SnapshotAccess::read_universal(is);
}

}  // namespace exptrack
