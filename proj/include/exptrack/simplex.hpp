#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace exptrack {

// Distribution over M >= 2 experts. Construction accepts entries whose sum
// deviates from 1 by at most 1e-6 and rescales them; anything worse is
// rejected. Tiny negative round-off (>= -1e-12) is clamped to zero.
class SimplexDistribution {
public:
    explicit SimplexDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.size() < 2)
            throw std::invalid_argument("simplex: need at least 2 experts");
        double sum = 0.0;
        for (double& w : weights_) {
            if (!std::isfinite(w))
                throw std::invalid_argument("simplex: non-finite entry");
            if (w < 0.0) {
                if (w < -1e-12)
                    throw std::invalid_argument("simplex: negative entry " + std::to_string(w));
                w = 0.0;
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("simplex: entries sum to " + std::to_string(sum));
        if (std::abs(sum - 1.0) > 4e-15 * static_cast<double>(weights_.size()))
            for (double& w : weights_) w /= sum;
    }

    static SimplexDistribution uniform(int experts) {
        return SimplexDistribution(std::vector<double>(static_cast<std::size_t>(experts),
                                                       1.0 / static_cast<double>(experts)));
    }

    static SimplexDistribution one_hot(int experts, int index) {
        if (index < 0 || index >= experts)
            throw std::invalid_argument("one_hot: index out of range");
        std::vector<double> w(static_cast<std::size_t>(experts), 0.0);
        w[static_cast<std::size_t>(index)] = 1.0;
        return SimplexDistribution(std::move(w));
    }

    int size() const { return static_cast<int>(weights_.size()); }
    double operator[](std::size_t m) const { return weights_[m]; }
    const std::vector<double>& values() const { return weights_; }

    bool operator==(const SimplexDistribution& other) const { return weights_ == other.weights_; }

private:
    std::vector<double> weights_;
};

// Per-round expert losses; any finite real values are allowed.
class LossVector {
public:
    explicit LossVector(std::vector<double> losses) : losses_(std::move(losses)) {
        if (losses_.empty())
            throw std::invalid_argument("loss vector: empty");
        for (double v : losses_)
            if (!std::isfinite(v))
                throw std::invalid_argument("loss vector: non-finite entry");
    }

    int size() const { return static_cast<int>(losses_.size()); }
    double operator[](std::size_t m) const { return losses_[m]; }
    const std::vector<double>& values() const { return losses_; }

private:
    std::vector<double> losses_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Shannon entropy with natural log; zero-mass entries contribute nothing.
inline double entropy(const SimplexDistribution& p) {
    double h = 0.0;
    for (int m = 0; m < p.size(); ++m) {
        double w = p[static_cast<std::size_t>(m)];
        if (w > 0.0) h -= w * std::log(w);
    }
    return std::max(0.0, h);
}

namespace detail {
// KL divergence that reports an absorbing +infinity instead of throwing;
// used by the inequality checkers where an infinite divergence is meaningful.
inline double kl_or_infinity(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        if (p[m] <= 0.0) continue;
        if (q[m] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p[m] * std::log(p[m] / q[m]);
    }
    return d;
}
}  // namespace detail

inline double kl_divergence(const SimplexDistribution& p, const SimplexDistribution& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double d = detail::kl_or_infinity(p.values(), q.values());
    if (!std::isfinite(d))
        throw std::domain_error("kl_divergence: infinite (p has mass where q has none)");
    return d;
}

inline double total_variation(const SimplexDistribution& p, const SimplexDistribution& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("total_variation: dimension mismatch");
    double s = 0.0;
    for (int m = 0; m < p.size(); ++m)
        s += std::abs(p[static_cast<std::size_t>(m)] - q[static_cast<std::size_t>(m)]);
    return 0.5 * s;
}

// Half the loss range: min over translations of the sup-norm, attained at the
// midpoint of [min, max].
inline double half_range(const LossVector& l) {
    auto [lo, hi] = std::minmax_element(l.values().begin(), l.values().end());
    return 0.5 * (*hi - *lo);
}

// l2 accumulation of per-round half-ranges.
inline double deviation_norm(const std::vector<double>& ranges) {
    double s = 0.0;
    for (double u : ranges) s += u * u;
    return std::sqrt(s);
}

// d = (1-alpha) p + alpha u
inline SimplexDistribution mix_uniform(const SimplexDistribution& p, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("mix_uniform: alpha outside [0,1]");
    const double floor = alpha / static_cast<double>(p.size());
    std::vector<double> d(p.values());
    for (double& w : d) w = (1.0 - alpha) * w + floor;
    return SimplexDistribution(std::move(d));
}

// inverse of mix_uniform; tiny negative round-off is clamped to zero
inline SimplexDistribution unmix_uniform(const SimplexDistribution& d, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0)
        throw std::invalid_argument("unmix_uniform: alpha outside [0,1)");
    const double floor = alpha / static_cast<double>(d.size());
    std::vector<double> p(d.values());
    for (double& w : p) {
        if (w < floor - 1e-12)
            throw std::out_of_range("unmix_uniform: entry below alpha/M");
        w = std::max(0.0, (w - floor) / (1.0 - alpha));
    }
    return SimplexDistribution(std::move(p));
}

namespace detail {

// Solves sum_m clip(sigma * q_m, a, b) = 1 for sigma. The clipped sum is a
// continuous nondecreasing piecewise-linear function of sigma, so the
// solution is located exactly by sweeping the sorted breakpoints
// { a/q_m, b/q_m }. When a whole interval of sigma is valid (every entry
// clipped), the smallest valid sigma is returned. Zero entries stay at zero
// when a = 0 and are lifted to a otherwise.
inline double truncation_scale(const std::vector<double>& q, double a, double b) {
    const std::size_t M = q.size();
    const double Md = static_cast<double>(M);
    if (a < 0.0 || b > 1.0 + 1e-12 || a > b)
        throw std::invalid_argument("truncate_project: invalid box");
    if (a * Md > 1.0 + 1e-9 || b * Md < 1.0 - 1e-9)
        throw std::invalid_argument("truncate_project: box cannot contain a distribution");

    double qmax = 0.0;
    double qmin_nz = std::numeric_limits<double>::infinity();
    bool inside = true;
    for (double v : q) {
        qmax = std::max(qmax, v);
        if (v > 0.0) qmin_nz = std::min(qmin_nz, v);
        if (v > b || (v < a && !(v <= 0.0 && a == 0.0))) inside = false;
    }
    if (qmax <= 0.0)
        throw std::invalid_argument("truncate_project: all-zero input");
    if (inside) return 1.0;  // nothing clips, the input already sums to 1

    auto clipped_sum = [&](double s) {
        double t = 0.0;
        for (double v : q) {
            if (v <= 0.0) { t += a; continue; }
            t += std::clamp(s * v, a, b);
        }
        return t;
    };

    // two entries admit a closed form; candidates are verified and fall back
    // to the sweep on any degeneracy. The both-clipped point comes first so a
    // plateau still yields the smallest valid sigma.
    if (M == 2 && q[0] > 0.0 && q[1] > 0.0) {
        const double hi_q = std::max(q[0], q[1]);
        const double lo_q = std::min(q[0], q[1]);
        const double candidates[3] = {
            b / hi_q,                            // both clipped (a + b = 1)
            b < 1.0 ? (1.0 - b) / lo_q : -1.0,   // larger entry clipped at b
            (1.0 - a) / hi_q,                    // smaller entry clipped at a
        };
        for (double s : candidates) {
            if (s > 0.0 && std::isfinite(s) && std::abs(clipped_sum(s) - 1.0) <= 1e-12)
                return s;
        }
    }

    const double lo = (a > 0.0) ? a / qmax : 0.0;
    const double hi = (b > 0.0) ? b / qmin_nz : 0.0;

    static thread_local std::vector<double> knots;
    knots.clear();
    knots.reserve(2 * M + 2);
    knots.push_back(lo);
    knots.push_back(hi);
    for (double v : q) {
        if (v <= 0.0) continue;
        if (a > 0.0) knots.push_back(a / v);
        knots.push_back(b / v);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    knots.erase(std::remove_if(knots.begin(), knots.end(),
                               [&](double s) { return s < lo || s > hi; }),
                knots.end());

    for (std::size_t i = 0; i + 1 <= knots.size(); ++i) {
        const double s0 = knots[i];
        const double s1 = (i + 1 < knots.size()) ? knots[i + 1] : knots[i];
        const double mid = 0.5 * (s0 + s1);
        double fixed = 0.0, slope = 0.0;
        for (double v : q) {
            if (v <= 0.0) { fixed += a; continue; }
            const double sv = mid * v;
            if (sv < a) fixed += a;
            else if (sv > b) fixed += b;
            else slope += v;
        }
        if (slope > 0.0) {
            const double s = (1.0 - fixed) / slope;
            const double tol = 1e-12 * std::max(1.0, s1);
            if (s >= s0 - tol && s <= s1 + tol)
                return std::clamp(s, s0, s1);
        } else if (std::abs(fixed - 1.0) <= 1e-9) {
            return s0;  // plateau: smallest valid sigma
        }
        if (i + 1 >= knots.size()) break;
    }
    // Endpoints can carry the solution when the bracket degenerates.
    if (std::abs(clipped_sum(lo) - 1.0) <= 1e-9) return lo;
    if (std::abs(clipped_sum(hi) - 1.0) <= 1e-9) return hi;
    throw std::invalid_argument("truncate_project: no scaling yields a distribution");
}

// In-place scaled clipping onto [a,b]; returns sigma. Entries are normalized
// and re-clamped so the box holds exactly after round-off.
inline double truncate_project_raw(std::vector<double>& w, double a, double b) {
    const double sigma = truncation_scale(w, a, b);
    double sum = 0.0;
    for (double& v : w) {
        v = (v <= 0.0 && a == 0.0) ? 0.0 : std::clamp(sigma * v, a, b);
        sum += v;
    }
    if (std::abs(sum - 1.0) > 4e-15 * static_cast<double>(w.size()))
        for (double& v : w) v = std::clamp(v / sum, a, b);
    return sigma;
}

}  // namespace detail

struct TruncationResult {
    SimplexDistribution projected;
    double sigma = 1.0;
    std::vector<int> clipped_low;
    std::vector<int> clipped_high;
};

// Scaled clipping projection onto { p : a <= p_m <= b, sum p = 1 }.
inline TruncationResult truncate_project(const SimplexDistribution& q, double a, double b) {
    std::vector<double> w(q.values());
    const double sigma = detail::truncation_scale(w, a, b);
    std::vector<int> low, high;
    double sum = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
        const double sv = sigma * w[m];
        if (w[m] <= 0.0 && a == 0.0) {
            w[m] = 0.0;
        } else if (sv < a) {
            w[m] = a;
            low.push_back(static_cast<int>(m));
        } else if (sv > b) {
            w[m] = b;
            high.push_back(static_cast<int>(m));
        } else {
            w[m] = sv;
        }
        sum += w[m];
    }
    if (std::abs(sum - 1.0) > 4e-15 * static_cast<double>(w.size()))
        for (double& v : w) v = std::clamp(v / sum, a, b);
    return TruncationResult{SimplexDistribution(std::move(w)), sigma, std::move(low), std::move(high)};
}

}  // namespace exptrack
