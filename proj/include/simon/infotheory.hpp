#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "simon/errors.hpp"
#include "simon/gf2.hpp"
#include "simon/rng.hpp"

namespace simon {

/// Probability vector over a finite outcome set.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw UsageError("DiscreteDistribution: empty support");
        double total = 0.0;
        for (double v : weights_) {
            if (v < 0.0) throw UsageError("DiscreteDistribution: negative weight");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw UsageError("DiscreteDistribution: weights sum to " + std::to_string(total));
    }

    static DiscreteDistribution uniform(std::size_t size) {
        return DiscreteDistribution(
            std::vector<double>(size, 1.0 / static_cast<double>(size)));
    }

    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t k) const { return weights_[k]; }

private:
    std::vector<double> weights_;
};

/// Shannon entropy in bits.
inline double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

inline double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw UsageError("binary_entropy: p outside [0, 1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

/// D_KL(P || Q) in bits; +inf when P puts mass where Q does not.
inline double dkl_bits(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw UsageError("dkl_bits: size mismatch");
    long double d = 0.0L;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        if (q[k] == 0.0) return std::numeric_limits<double>::infinity();
        d += static_cast<long double>(p[k]) * std::log2(p[k] / q[k]);
    }
    return std::max(static_cast<double>(d), 0.0);
}

/// chi^2(P || Q) = sum (P - Q)^2 / Q; +inf on support violation.
inline double chi2_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw UsageError("chi2_divergence: size mismatch");
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (q[k] == 0.0) {
            if (p[k] == 0.0) continue;
            return std::numeric_limits<double>::infinity();
        }
        const double diff = p[k] - q[k];
        d += diff * diff / q[k];
    }
    return d;
}

/// C(p) = [(1+p) ln(1+p) - p] / p^2, extended by continuity:
/// C(0) = 1/2, C(-1) = 1. Series 1/2 - p/6 + p^2/12 - ... near zero.
inline double cp_function(double p) {
    if (p < -1.0) throw UsageError("cp_function: p must be >= -1");
    if (p == -1.0) return 1.0;
    if (std::abs(p) < 1e-4) {
        double term = 0.5;
        double value = 0.0;
        double power = 1.0;
        // sum_{k>=2} (-1)^k p^{k-2} / (k (k-1))
        for (int k = 2; k <= 12; ++k) {
            value += term * power;
            power *= -p;
            term = 1.0 / (static_cast<double>(k + 1) * static_cast<double>(k));
        }
        return value;
    }
    return ((1.0 + p) * std::log1p(p) - p) / (p * p);
}

struct DivergenceCheck {
    double dkl = 0.0;   // bits
    double chi2 = 0.0;
    double lower = 0.0; // chi2 C(r_max) / ln 2
    double upper = 0.0; // chi2 C(r_min) / ln 2
    bool bounds_hold = false;
};

/// Verifies chi2 C(r_max)/ln2 <= D_KL <= chi2 C(r_min)/ln2 where
/// r = dP/dQ - 1 ranges over the support of Q. Support violations make both
/// divergences infinite and the bounds vacuous.
inline DivergenceCheck dkl_vs_chi2_check(const std::vector<double>& p,
                                         const std::vector<double>& q) {
    DivergenceCheck out;
    out.dkl = dkl_bits(p, q);
    out.chi2 = chi2_divergence(p, q);
    if (std::isinf(out.dkl) || std::isinf(out.chi2)) {
        out.lower = out.upper = std::numeric_limits<double>::infinity();
        out.bounds_hold = true;
        return out;
    }
    double r_min = std::numeric_limits<double>::infinity();
    double r_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (q[k] == 0.0) continue;
        const double r = p[k] / q[k] - 1.0;
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    const double ln2 = std::log(2.0);
    out.lower = out.chi2 * cp_function(r_max) / ln2;
    out.upper = out.chi2 * cp_function(r_min) / ln2;
    const double slack = 1e-12 * (1.0 + out.chi2);
    out.bounds_hold = out.dkl >= out.lower - slack && out.dkl <= out.upper + slack;
    return out;
}

/// chi^2(P_Z || P_U) for the one-valid-sample distribution induced by a prior
/// P_B over the candidate set: equal to sum_b P_B(b)^2.
inline double chi2_pz_pu(const std::vector<double>& prior) {
    double total = 0.0;
    double norm = 0.0;
    for (double v : prior) {
        if (v < 0.0) throw UsageError("chi2_pz_pu: negative prior weight");
        total += v * v;
        norm += v;
    }
    if (std::abs(norm - 1.0) > 1e-9) throw UsageError("chi2_pz_pu: prior not normalized");
    return total;
}

/// Explicit P_Z over all 2^n outcomes for a prior over the candidate set:
/// z is uniform over null(b) for the drawn b.
inline std::vector<double> pz_from_prior(const CandidateSet& candidates,
                                         const std::vector<double>& prior) {
    const int n = candidates.n();
    if (n > 20) throw ResourceError("pz_from_prior: 2^n outcome table too large");
    if (prior.size() != candidates.size()) throw UsageError("pz_from_prior: prior size mismatch");
    std::vector<double> pz(std::size_t{1} << n, 0.0);
    const double per_z = std::ldexp(1.0, 1 - n); // 2^{1-n}
    for (std::size_t k = 0; k < prior.size(); ++k) {
        const std::uint64_t b = candidates.members()[k].word();
        for (std::uint64_t z = 0; z < pz.size(); ++z)
            if ((std::popcount(b & z) & 1) == 0) pz[z] += prior[k] * per_z;
    }
    return pz;
}

struct InfoPerQuery {
    bool exact_available = false;
    double exact = 0.0;     // I(B; Z_p) by joint enumeration, bits
    double r_exact = 0.0;   // D_KL(P_{Z_p} || P_U), bits
    double lower = 0.0;     // 1 - H((1+p)/2) - K p^2 C(-p)/ln2
    double upper = 0.0;     // 1 - H((1+p)/2) - K p^2 C(p)/ln2
};

/// I(B; Z_p) for the channel that returns a valid orthogonal sample with
/// probability p and a uniform string otherwise:
///   I = 1 - H((1+p)/2) - r,  r = D_KL(P_{Z_p} || P_U) in [K p^2 C(p),
///   K p^2 C(-p)] / ln2,  K = sum P_B(b)^2.
/// Exact value by joint enumeration when n is small enough.
inline InfoPerQuery info_per_query(double p, const CandidateSet& candidates,
                                   const std::vector<double>& prior) {
    if (p < 0.0 || p > 1.0) throw UsageError("info_per_query: p outside [0, 1]");
    const double big_k = chi2_pz_pu(prior);
    const double ln2 = std::log(2.0);
    const double base = 1.0 - binary_entropy((1.0 + p) / 2.0);
    InfoPerQuery out;
    out.lower = base - big_k * p * p * cp_function(-p) / ln2;
    out.upper = base - big_k * p * p * cp_function(p) / ln2;
    const int n = candidates.n();
    if (n > 10) return out;

    const std::size_t domain = std::size_t{1} << n;
    const double uniform = 1.0 / static_cast<double>(domain);
    const double per_valid = std::ldexp(1.0, 1 - n);
    std::vector<double> pz(domain, 0.0);
    for (std::size_t k = 0; k < prior.size(); ++k) {
        const std::uint64_t b = candidates.members()[k].word();
        for (std::uint64_t z = 0; z < domain; ++z) {
            const bool orth = (std::popcount(b & z) & 1) == 0;
            pz[z] += prior[k] * (p * (orth ? per_valid : 0.0) + (1.0 - p) * uniform);
        }
    }
    long double info = 0.0L;
    for (std::size_t k = 0; k < prior.size(); ++k) {
        if (prior[k] == 0.0) continue;
        const std::uint64_t b = candidates.members()[k].word();
        for (std::uint64_t z = 0; z < domain; ++z) {
            const bool orth = (std::popcount(b & z) & 1) == 0;
            const double cond = p * (orth ? per_valid : 0.0) + (1.0 - p) * uniform;
            if (cond > 0.0)
                info += static_cast<long double>(prior[k]) * cond * std::log2(cond / pz[z]);
        }
    }
    out.exact_available = true;
    out.exact = std::max(static_cast<double>(info), 0.0);
    out.r_exact = dkl_bits(pz, std::vector<double>(domain, uniform));
    return out;
}

/// E(Q) <= H(P_B) / (1 - H[(1+p)/2] - K1 p^2 C(-p)/ln2).
inline double expected_queries_bound(double h_prior_bits, double p, double k1) {
    if (h_prior_bits < 0.0) throw UsageError("expected_queries_bound: negative entropy");
    if (h_prior_bits == 0.0) return 0.0;
    const double denom =
        1.0 - binary_entropy((1.0 + p) / 2.0) - k1 * p * p * cp_function(-p) / std::log(2.0);
    if (denom <= 0.0)
        throw NumericalError("expected_queries_bound: denominator not positive, bound inapplicable");
    return h_prior_bits / denom;
}

/// Query-cost ceiling of the threshold agent at noise exponent q:
/// 8 ln(N_w) e^{2q} / (1 - N_w^{-2}), the exponentially small remainder in the
/// denominator dropped.
inline double nts_q_upper_bound(int n, int w, double q) {
    if (q < 0.0) throw UsageError("nts_q_upper_bound: q must be nonnegative");
    const double num_candidates = static_cast<double>(candidate_count(n, w));
    if (num_candidates == 1.0) return 0.0;
    return 8.0 * std::log(num_candidates) * std::exp(2.0 * q) /
           (1.0 - 1.0 / (num_candidates * num_candidates));
}

namespace detail {
inline double xlog2(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }
} // namespace detail

/// Closed form for I(Z; B) of the three-case sampling model (b uniform over
/// all nonzero strings; z = 0 with probability q, otherwise orthogonal with
/// probability p):
///   I = (1-q) [ p log2( p (2^n - 1) / (2^{n-1} - 1) )
///             + (1-p) log2( (1-p)(2^n - 1) / 2^{n-1} ) ].
/// p is 0 by definition at n = 1.
inline double mutual_info_zb(double p, double q, int n) {
    if (n < 1 || n > 62) throw UsageError("mutual_info_zb: n out of range");
    if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
        throw UsageError("mutual_info_zb: p, q must be probabilities");
    if (n == 1) p = 0.0;
    if (q == 1.0) return 0.0;
    const double all = std::ldexp(1.0, n) - 1.0;      // 2^n - 1
    const double orth = std::ldexp(1.0, n - 1) - 1.0; // 2^{n-1} - 1
    const double nonorth = std::ldexp(1.0, n - 1);    // 2^{n-1}
    double inner = 0.0;
    if (p > 0.0) {
        if (orth == 0.0) return 0.0; // n = 1 has no nonzero orthogonal z
        inner += p * std::log2(p * all / orth);
    }
    if (p < 1.0) inner += (1.0 - p) * std::log2((1.0 - p) * all / nonorth);
    return (1.0 - q) * inner;
}

/// Same quantity by direct enumeration of the joint distribution, n <= 10.
inline double mutual_info_zb_enumerated(double p, double q, int n) {
    if (n < 1 || n > 10) throw UsageError("mutual_info_zb_enumerated: need n <= 10");
    if (n == 1) p = 0.0;
    const std::size_t domain = std::size_t{1} << n;
    const double prior = 1.0 / static_cast<double>(domain - 1);
    std::vector<double> pz(domain, 0.0);
    std::vector<std::vector<double>> cond(domain, std::vector<double>(domain, 0.0));
    for (std::uint64_t b = 1; b < domain; ++b) {
        const double orth = std::ldexp(1.0, n - 1) - 1.0;
        const double nonorth = std::ldexp(1.0, n - 1);
        for (std::uint64_t z = 0; z < domain; ++z) {
            double c = 0.0;
            if (z == 0)
                c = q;
            else if ((std::popcount(b & z) & 1) == 0)
                c = orth > 0.0 ? (1.0 - q) * p / orth : 0.0;
            else
                c = (1.0 - q) * (1.0 - p) / nonorth;
            cond[b][z] = c;
            pz[z] += prior * c;
        }
    }
    long double info = 0.0L;
    for (std::uint64_t b = 1; b < domain; ++b)
        for (std::uint64_t z = 0; z < domain; ++z)
            if (cond[b][z] > 0.0 && pz[z] > 0.0)
                info += static_cast<long double>(prior) * cond[b][z] *
                        std::log2(cond[b][z] / pz[z]);
    return std::max(static_cast<double>(info), 0.0);
}

struct PqEstimate {
    double p = 0.0;
    double q = 0.0;
    bool p_defined = true; // false when every observed z was 0
};

/// Estimates the sampling-model parameters from an observed z histogram:
/// q = freq(z = 0), p = freq(z . b = 0 and z != 0) / (1 - q).
inline PqEstimate extract_pq(const std::map<std::string, double>& counts, const BitString& b) {
    if (counts.empty()) throw UsageError("extract_pq: empty histogram");
    double total = 0.0, zero = 0.0, orthogonal = 0.0;
    for (const auto& [key, weight] : counts) {
        if (weight < 0.0) throw DataError("extract_pq: negative count");
        const BitString z = BitString::parse(key);
        z.check_same_length(b);
        total += weight;
        if (z.is_zero())
            zero += weight;
        else if (dot_mod2(z, b) == 0)
            orthogonal += weight;
    }
    if (total <= 0.0) throw DataError("extract_pq: zero total count");
    PqEstimate out;
    out.q = zero / total;
    if (b.length() == 1) {
        out.p = 0.0;
        out.p_defined = true;
        return out;
    }
    if (zero == total) {
        out.p_defined = false;
        return out;
    }
    out.p = orthogonal / (total - zero);
    return out;
}

/// Iterative Bayesian unfolding. R is row-indexed by observed outcome and
/// column-indexed by true outcome; columns must sum to 1.
inline std::vector<double> mem_ibu(const std::vector<double>& observed,
                                   const std::vector<std::vector<double>>& response,
                                   std::vector<double> theta, int iters) {
    const std::size_t rows = response.size();
    if (rows == 0 || rows != observed.size()) throw UsageError("mem_ibu: shape mismatch");
    const std::size_t cols = response.front().size();
    if (theta.size() != cols) throw UsageError("mem_ibu: theta0 size mismatch");
    for (std::size_t j = 0; j < cols; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (response[i].size() != cols) throw UsageError("mem_ibu: ragged response matrix");
            col += response[i][j];
        }
        if (std::abs(col - 1.0) > 1e-9)
            throw UsageError("mem_ibu: response matrix not column-stochastic");
        if (theta[j] <= 0.0) throw UsageError("mem_ibu: theta0 must be strictly positive");
    }
    for (int it = 0; it < iters; ++it) {
        std::vector<double> next(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double denom = 0.0;
            for (std::size_t m = 0; m < cols; ++m) denom += response[i][m] * theta[m];
            if (denom <= 0.0) {
                if (observed[i] == 0.0) continue;
                throw NumericalError("mem_ibu: degenerate denominator in IBU update");
            }
            for (std::size_t j = 0; j < cols; ++j)
                next[j] += observed[i] * response[i][j] * theta[j] / denom;
        }
        double total = 0.0;
        for (double v : next) total += v;
        if (total <= 0.0) throw NumericalError("mem_ibu: update annihilated the estimate");
        for (double& v : next) v /= total;
        theta = std::move(next);
    }
    return theta;
}

/// Belief diffusion toy model. Latent coordinates follow
///   Y_b(t) = W_b(t) + t d_{b,B}
/// with independent Brownian W_b, and beliefs are the Gibbs-like weights
///   X_b(t) = X_b(0) e^{-Y_b(t)} / sum_{b'} X_{b'}(0) e^{-Y_{b'}(t)}.
/// Euler integration from the uniform start; the trajectory holds X at
/// t = 0, dt, 2dt, ..., T.
inline std::vector<std::vector<double>> diffusion_simulate(std::size_t num_candidates,
                                                           std::size_t truth, double total_time,
                                                           double dt, Rng& rng) {
    if (num_candidates < 2 || truth >= num_candidates)
        throw UsageError("diffusion_simulate: bad candidate count or truth index");
    if (dt <= 0.0 || dt > 0.01) throw UsageError("diffusion_simulate: require 0 < dt <= 0.01");
    const auto steps = static_cast<std::size_t>(std::llround(total_time / dt));
    if (std::abs(static_cast<double>(steps) * dt - total_time) > 1e-9)
        throw UsageError("diffusion_simulate: T must be a multiple of dt");

    std::vector<double> y(num_candidates, 0.0);
    const double sigma = std::sqrt(dt);
    std::vector<std::vector<double>> trajectory;
    trajectory.reserve(steps + 1);
    const auto snapshot = [&]() {
        std::vector<double> x(num_candidates);
        double y_min = y[0];
        for (double v : y) y_min = std::min(y_min, v);
        double total = 0.0;
        for (std::size_t b = 0; b < num_candidates; ++b) {
            x[b] = std::exp(-(y[b] - y_min));
            total += x[b];
        }
        for (double& v : x) v /= total;
        trajectory.push_back(std::move(x));
    };
    snapshot();
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t b = 0; b < num_candidates; ++b) {
            y[b] += sigma * rng.next_normal();
            if (b == truth) y[b] += dt;
        }
        snapshot();
    }
    return trajectory;
}

} // namespace simon
