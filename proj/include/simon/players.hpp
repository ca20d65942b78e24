#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "simon/errors.hpp"
#include "simon/game.hpp"
#include "simon/gf2.hpp"
#include "simon/rng.hpp"

namespace simon {

namespace constants {
inline constexpr double erdos_borwein = 1.6066951524152917637833015231909245;
inline constexpr double euler_mascheroni = 0.5772156649015328606065120900824024;
} // namespace constants

/// Circuit-level error model for the sampled z strings.
///   perfect:      z always uniform over the null space of b.
///   constant_p:   valid sample with probability p, else uniform over all of {0,1}^n.
///   hw_quadratic: like constant_p with p = exp(-lambda * HW(b)^2).
struct NoiseModel {
    enum class Mode { perfect, constant_p, hw_quadratic };
    Mode mode = Mode::perfect;
    double p = 1.0;       // constant_p
    double lambda = 0.0;  // hw_quadratic

    static NoiseModel perfect() { return {}; }
    static NoiseModel constant(double p) {
        if (p <= 0.0 || p > 1.0) throw UsageError("NoiseModel: p must be in (0, 1]");
        return {Mode::constant_p, p, 0.0};
    }
    static NoiseModel quadratic(double lambda) {
        if (lambda < 0.0) throw UsageError("NoiseModel: lambda must be nonnegative");
        return {Mode::hw_quadratic, 1.0, lambda};
    }

    /// Probability of a valid sample for a hidden string of weight i.
    double valid_probability(int i) const {
        switch (mode) {
            case Mode::perfect: return 1.0;
            case Mode::constant_p: return p;
            case Mode::hw_quadratic: return std::exp(-lambda * static_cast<double>(i) * static_cast<double>(i));
        }
        return 1.0;
    }
};

inline double q_of_hw(int i, double lambda) {
    if (i < 1 || lambda < 0.0) throw UsageError("q_of_hw: need i >= 1 and lambda >= 0");
    return lambda * static_cast<double>(i) * static_cast<double>(i);
}

inline double p_of_hw(int i, double lambda) { return std::exp(-q_of_hw(i, lambda)); }

/// Uniform sample from the 2^{n-1} strings orthogonal to b: a random GF(2)
/// combination of a null-space basis.
inline BitString sample_z_ideal(const BitString& b, Rng& rng) {
    const auto basis = null_space_basis(b);
    std::uint64_t z = 0;
    std::uint64_t picks = rng.next_u64();
    for (std::size_t k = 0; k < basis.size(); ++k)
        if ((picks >> k) & 1) z ^= basis[k];
    return BitString(z, b.length());
}

inline BitString sample_z_noisy(const BitString& b, const NoiseModel& model, Rng& rng) {
    const double p = model.valid_probability(hamming_weight(b));
    if (rng.next_bernoulli(p)) return sample_z_ideal(b, rng);
    const int n = b.length();
    const std::uint64_t mask = (n == 63) ? ~std::uint64_t{0} >> 1 : (std::uint64_t{1} << n) - 1;
    return BitString(rng.next_u64() & mask, n);
}

/// Noiseless elimination player: samples ideal z's and strikes candidates
/// until exactly one survives. Returns the number of queries used.
inline std::uint64_t ideal_player_run(const BitString& truth, const CandidateSet& candidates,
                                      Rng& rng) {
    std::vector<std::uint64_t> alive;
    alive.reserve(candidates.size());
    for (const auto& m : candidates.members()) alive.push_back(m.word());
    std::uint64_t queries = 0;
    while (alive.size() > 1) {
        const std::uint64_t z = sample_z_ideal(truth, rng).word();
        ++queries;
        std::size_t kept = 0;
        for (std::size_t k = 0; k < alive.size(); ++k)
            if ((std::popcount(alive[k] & z) & 1) == 0) alive[kept++] = alive[k];
        alive.resize(kept);
    }
    if (alive.empty() || alive.front() != truth.word())
        throw NumericalError("ideal_player_run: elimination lost the true hidden string");
    return queries;
}

/// Eq-exact ideal NTS for unrestricted Simon-n: sum_{k=1}^{n-1} 1/(1-2^{-k}).
inline double nts_iq_exact_unrestricted(int n) {
    if (n < 1) throw UsageError("nts_iq_exact_unrestricted: n >= 1 required");
    double total = 0.0;
    for (int k = 1; k < n; ++k) total += 1.0 / (1.0 - std::ldexp(1.0, -k));
    return total;
}

/// Exact E[max of n-1 iid Geometric(1/2)] = sum_{k>=0} (1 - (1 - 2^{-k})^{n-1}),
/// summed to double-precision convergence.
inline double nts_iq_exact_w1(int n) {
    if (n < 2) throw UsageError("nts_iq_exact_w1: n >= 2 required");
    const double m = static_cast<double>(n - 1);
    double total = 0.0;
    for (int k = 0; k < 4096; ++k) {
        const double term = 1.0 - std::pow(1.0 - std::ldexp(1.0, -k), m);
        total += term;
        if (k > 1 && term < 1e-18 * total) break;
    }
    return total;
}

/// Interpolation between the w=1 and w=infinity limits with
/// t = N_w / (2^n - 1):
///   NTS_IQ(t) = log2(N_w) + (1/2 + gamma/ln 2)(1 - t) + (E_EB - 1) t.
inline double nts_iq_interpolated(int n, int w) {
    const double num_candidates = static_cast<double>(candidate_count(n, w));
    const double t = num_candidates / (std::ldexp(1.0, n) - 1.0);
    const double gamma_term = 0.5 + constants::euler_mascheroni / std::log(2.0);
    return std::log2(num_candidates) + gamma_term * (1.0 - t) +
           (constants::erdos_borwein - 1.0) * t;
}

/// Theorem-2 bracket [log2 |S|, log2(|S|-1) + 2] for |S| >= 2.
inline std::pair<double, double> nts_iq_bounds(std::uint64_t set_size) {
    if (set_size < 2) return {0.0, 0.0};
    return {std::log2(static_cast<double>(set_size)),
            std::log2(static_cast<double>(set_size) - 1.0) + 2.0};
}

/// Belief state of the Bayesian agent: probabilities over the candidate set,
/// kept aligned with `candidates.members()`.
class PosteriorState {
public:
    explicit PosteriorState(const CandidateSet& candidates)
        : probs_(candidates.size(), 1.0 / static_cast<double>(candidates.size())) {}

    const std::vector<double>& probs() const { return probs_; }
    std::vector<double>& probs() { return probs_; }

    std::size_t argmax() const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < probs_.size(); ++k)
            if (probs_[k] > probs_[best]) best = k; // strict >: ties go to the smaller word
        return best;
    }

    double max_prob() const { return probs_[argmax()]; }

    void normalize() {
        double total = 0.0;
        for (double v : probs_) total += v;
        if (total <= 0.0) throw NumericalError("PosteriorState: all posterior weights vanished");
        for (double& v : probs_) v /= total;
    }

private:
    std::vector<double> probs_;
};

/// One step of the post-processing algorithm: multiply each candidate's
/// weight by f(HW) when z . b == 0 and by 1 - f(HW) otherwise, then
/// renormalize. f is indexed by Hamming weight (f[i-1] for weight i).
inline void bayes_update(PosteriorState& state, const CandidateSet& candidates, const BitString& z,
                         const std::vector<double>& f_of_hw) {
    auto& probs = state.probs();
    const auto& members = candidates.members();
    for (std::size_t k = 0; k < members.size(); ++k) {
        const int hw = hamming_weight(members[k]);
        const double f = f_of_hw[static_cast<std::size_t>(hw - 1)];
        probs[k] *= (dot_mod2(members[k], z) == 0) ? f : 1.0 - f;
    }
    state.normalize();
}

/// Consistency likelihood f(i) = Pr(z . b = 0) under the model:
/// a valid sample is always orthogonal, a scrambled one with probability 1/2.
inline std::vector<double> consistency_likelihoods(const NoiseModel& model, int w) {
    std::vector<double> f(static_cast<std::size_t>(w));
    for (int i = 1; i <= w; ++i) {
        const double p = model.valid_probability(i);
        f[static_cast<std::size_t>(i - 1)] = p + (1.0 - p) / 2.0;
    }
    return f;
}

struct AgentResult {
    std::uint64_t queries = 0;
    BitString guess = BitString::zero(1);
    bool forced = false; // max_queries exhausted before the threshold was met
    double posterior_max = 0.0;
};

/// Default stopping threshold (1 + 1/N_w)/2 guarantees E(P) >= 1/2.
inline double default_threshold(std::uint64_t num_candidates) {
    return (1.0 + 1.0 / static_cast<double>(num_candidates)) / 2.0;
}

inline std::uint64_t default_max_queries(std::uint64_t num_candidates, double q_max) {
    const double bound =
        std::ceil(100.0 * std::log(static_cast<double>(std::max<std::uint64_t>(num_candidates, 2))) *
                  std::exp(2.0 * q_max));
    return static_cast<std::uint64_t>(bound);
}

/// Bayesian agent: sample noisy z's and update the posterior until one
/// candidate reaches the threshold (or the query budget runs out, in which
/// case the current argmax is returned flagged as forced).
inline AgentResult noisy_agent_run(const BitString& truth, const CandidateSet& candidates,
                                   const NoiseModel& model, double threshold,
                                   std::uint64_t max_queries, Rng& rng) {
    const double inv_size = 1.0 / static_cast<double>(candidates.size());
    if (threshold <= inv_size || threshold >= 1.0)
        throw UsageError("noisy_agent_run: threshold must be in (1/N_w, 1)");
    const auto f_of_hw = consistency_likelihoods(model, candidates.w());
    PosteriorState state(candidates);
    AgentResult result;
    if (candidates.size() == 1) {
        result.guess = candidates.members().front();
        result.posterior_max = 1.0;
        return result;
    }
    while (state.max_prob() < threshold) {
        if (result.queries >= max_queries) {
            result.forced = true;
            break;
        }
        const BitString z = sample_z_noisy(truth, model, rng);
        ++result.queries;
        bayes_update(state, candidates, z, f_of_hw);
    }
    result.guess = candidates.members()[state.argmax()];
    result.posterior_max = state.max_prob();
    return result;
}

} // namespace simon
