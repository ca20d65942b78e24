#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_set>
#include <vector>

#include "simon/errors.hpp"
#include "simon/gf2.hpp"
#include "simon/rng.hpp"

namespace simon {

/// Scoring parameters for the restricted-weight guessing game. A correct
/// guess scores 1, a wrong guess scores -p_r/(1-p_r) = -1/(N_w-1), which
/// zeroes the expected score of a uniformly random guesser.
struct GameConfig {
    int n = 0;
    int w = 0;
    std::uint64_t num_candidates = 0; // N_w

    static GameConfig make(int n, int w) {
        GameConfig cfg;
        cfg.n = n;
        cfg.w = w;
        cfg.num_candidates = candidate_count(n, w);
        return cfg;
    }

    double random_guess_probability() const { return 1.0 / static_cast<double>(num_candidates); }
    double penalty() const {
        if (num_candidates == 1) return -std::numeric_limits<double>::infinity();
        return -1.0 / (static_cast<double>(num_candidates) - 1.0);
    }
};

struct RoundRecord {
    std::uint64_t queries = 0;
    bool correct = false;
    BitString guessed = BitString::zero(1);
    BitString truth = BitString::zero(1);
};

inline double score_guess(const BitString& guess, const BitString& truth, const GameConfig& cfg) {
    guess.check_same_length(truth);
    if (guess.is_zero() || hamming_weight(guess) > cfg.w)
        throw UsageError("score_guess: guess outside the candidate set");
    return guess == truth ? 1.0 : cfg.penalty();
}

/// NTS = <Q>/<P>, Eq-of-merit of the game. Infinite when the mean score is
/// not positive. The mean-score sign test is exact: with C correct and W
/// wrong rounds, <P> > 0 iff C*(N_w - 1) > W.
inline double nts(const std::vector<RoundRecord>& records, const GameConfig& cfg) {
    if (records.empty()) throw UsageError("nts: no rounds");
    std::uint64_t correct = 0;
    long double total_queries = 0.0L;
    for (const auto& r : records) {
        correct += r.correct ? 1 : 0;
        total_queries += static_cast<long double>(r.queries);
    }
    const std::uint64_t wrong = records.size() - correct;
    const long double scale = static_cast<long double>(cfg.num_candidates) - 1.0L;
    if (static_cast<long double>(correct) * scale <= static_cast<long double>(wrong))
        return std::numeric_limits<double>::infinity();
    const long double mean_queries = total_queries / static_cast<long double>(records.size());
    const long double mean_score =
        (static_cast<long double>(correct) * scale - static_cast<long double>(wrong)) /
        (scale * static_cast<long double>(records.size()));
    return static_cast<double>(mean_queries / mean_score);
}

inline double mean_score(const std::vector<RoundRecord>& records, const GameConfig& cfg) {
    if (records.empty()) throw UsageError("mean_score: no rounds");
    std::uint64_t correct = 0;
    for (const auto& r : records) correct += r.correct ? 1 : 0;
    const double wrong = static_cast<double>(records.size() - correct);
    return (static_cast<double>(correct) + wrong * cfg.penalty()) /
           static_cast<double>(records.size());
}

inline double binomial(int n, int k) {
    double v = 1.0;
    for (int j = 1; j <= k; ++j) v = v * static_cast<double>(n - j + 1) / static_cast<double>(j);
    return v;
}

/// Representative-HW NTS:
///   NTS_Q(n; w) = (N_w - 1)/N_w * sum_i h_i Q_i / (sum_i h_i p_i - 1),
/// with h_i = C(n, i), Q_i the mean query count and p_i the success
/// probability of the representative weight-i hidden string.
inline double nts_weighted(const std::vector<double>& mean_queries_per_hw,
                           const std::vector<double>& success_prob_per_hw, int n, int w) {
    if (mean_queries_per_hw.size() != static_cast<std::size_t>(w) ||
        success_prob_per_hw.size() != static_cast<std::size_t>(w))
        throw UsageError("nts_weighted: need one entry per Hamming weight 1..w");
    const double num_candidates = static_cast<double>(candidate_count(n, w));
    double weighted_queries = 0.0;
    double weighted_success = 0.0;
    for (int i = 1; i <= w; ++i) {
        const double h = binomial(n, i);
        weighted_queries += h * mean_queries_per_hw[static_cast<std::size_t>(i - 1)];
        weighted_success += h * success_prob_per_hw[static_cast<std::size_t>(i - 1)];
    }
    const double denom = weighted_success - 1.0;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return (num_candidates - 1.0) / num_candidates * weighted_queries / denom;
}

/// Closed-form classical lower bounds as functions of N_w:
///   k_min          - minimal worst-case query count,
///   expected_queries_lb - lower bound on <Q_C>,
///   nts_lb         - the same value, used as the classical NTS baseline.
struct ClassicalBounds {
    std::uint64_t k_min = 0;
    double expected_queries_lb = 0.0;
    double nts_lb = 0.0;
};

inline ClassicalBounds classical_bounds(std::uint64_t num_candidates) {
    if (num_candidates < 1) throw UsageError("classical_bounds: N_w >= 1 required");
    // ceil(sqrt(2 N_w - 7/4) + 1/2) == minimal integer k with k(k-1)/2 >= N_w - 1;
    // computed in integers to avoid rounding at large N_w.
    std::uint64_t k = static_cast<std::uint64_t>(
        std::ceil(std::sqrt(2.0 * static_cast<double>(num_candidates) - 1.75) + 0.5));
    if (k < 1) k = 1;
    while (k > 1 && (k - 1) * (k - 2) / 2 >= num_candidates - 1) --k;
    while (k * (k - 1) / 2 < num_candidates - 1) ++k;
    ClassicalBounds out;
    out.k_min = k;
    const double kd = static_cast<double>(k);
    out.expected_queries_lb =
        kd - kd * (kd - 1.0) * (kd - 2.0) / (6.0 * static_cast<double>(num_candidates));
    out.nts_lb = out.expected_queries_lb;
    return out;
}

/// A deterministic classical query sequence, validated against the stopping
/// condition |S \ S_j| <= 1 iff j == k over the given candidate set.
class QuerySequence {
public:
    QuerySequence(std::vector<BitString> queries, const CandidateSet& candidates)
        : queries_(std::move(queries)) {
        validate(candidates);
    }

    const std::vector<BitString>& queries() const { return queries_; }

    /// |S_j| for j = 0..k: candidates covered by pairwise XORs of the first j
    /// queries.
    static std::vector<std::size_t> coverage_profile(const std::vector<BitString>& queries,
                                                     const CandidateSet& candidates) {
        std::unordered_set<std::uint64_t> members;
        for (const auto& m : candidates.members()) members.insert(m.word());
        std::unordered_set<std::uint64_t> covered;
        std::vector<std::size_t> profile;
        profile.push_back(0);
        for (std::size_t j = 1; j <= queries.size(); ++j) {
            for (std::size_t l = 0; l + 1 < j; ++l) {
                const std::uint64_t x = queries[l].word() ^ queries[j - 1].word();
                if (members.count(x)) covered.insert(x);
            }
            profile.push_back(covered.size());
        }
        return profile;
    }

private:
    void validate(const CandidateSet& candidates) const {
        const auto profile = coverage_profile(queries_, candidates);
        const std::size_t total = candidates.size();
        if (total <= 1) {
            if (!queries_.empty())
                throw DataError("QuerySequence: |S| <= 1 requires the empty sequence");
            return;
        }
        for (std::size_t j = 0; j + 1 < profile.size(); ++j)
            if (total - profile[j] <= 1)
                throw DataError("QuerySequence: stopping condition met before the last query");
        if (total - profile.back() > 1)
            throw DataError("QuerySequence: sequence does not determine the hidden string");
    }

    std::vector<BitString> queries_;
};

/// Exact expected query count of the deterministic strategy:
///   NTS_C(x) = sum_{i=0}^{k-1} (1 - |S_i| / |S|).
inline double classical_nts_exact(const QuerySequence& seq, const CandidateSet& candidates) {
    if (candidates.size() <= 1) return 0.0;
    const auto profile = QuerySequence::coverage_profile(seq.queries(), candidates);
    const double total = static_cast<double>(candidates.size());
    double nts_value = 0.0;
    for (std::size_t i = 0; i + 1 < profile.size(); ++i)
        nts_value += 1.0 - static_cast<double>(profile[i]) / total;
    return nts_value;
}

namespace detail {

/// Greedy step: pick the query whose pairwise XORs with the chosen prefix
/// cover the most not-yet-covered candidates.
inline std::vector<BitString> greedy_sequence(const CandidateSet& candidates, Rng& rng) {
    const int n = candidates.n();
    const std::uint64_t domain = std::uint64_t{1} << n;
    std::unordered_set<std::uint64_t> members;
    for (const auto& m : candidates.members()) members.insert(m.word());

    std::vector<std::uint64_t> chosen;
    std::unordered_set<std::uint64_t> covered;
    chosen.push_back(rng.next_below(domain));
    while (members.size() - covered.size() > 1) {
        std::uint64_t best = 0;
        long best_gain = -1;
        for (std::uint64_t x = 0; x < domain; ++x) {
            long gain = 0;
            for (std::uint64_t q : chosen) {
                const std::uint64_t diff = x ^ q;
                if (members.count(diff) && !covered.count(diff)) ++gain;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = x;
            }
        }
        for (std::uint64_t q : chosen) {
            const std::uint64_t diff = best ^ q;
            if (members.count(diff)) covered.insert(diff);
        }
        chosen.push_back(best);
    }
    std::vector<BitString> out;
    out.reserve(chosen.size());
    for (std::uint64_t q : chosen) out.emplace_back(q, n);
    return out;
}

/// Drops trailing queries that are no longer needed and re-validates.
inline std::vector<BitString> trim_sequence(std::vector<BitString> seq,
                                            const CandidateSet& candidates) {
    const auto profile = QuerySequence::coverage_profile(seq, candidates);
    const std::size_t total = candidates.size();
    for (std::size_t j = 0; j < profile.size(); ++j)
        if (total - profile[j] <= 1) {
            seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(j), seq.end());
            break;
        }
    return seq;
}

} // namespace detail

/// Greedy construction plus randomized single-query replacement hill
/// climbing. The returned sequence's exact NTS is an upper bound on the true
/// optimum.
inline QuerySequence heuristic_sequence_search(const CandidateSet& candidates,
                                               std::uint64_t budget, std::uint64_t seed) {
    if (candidates.size() <= 1) return QuerySequence({}, candidates);
    const int n = candidates.n();
    const std::uint64_t domain = std::uint64_t{1} << n;
    Rng rng(seed);

    std::vector<BitString> best = detail::trim_sequence(detail::greedy_sequence(candidates, rng),
                                                        candidates);
    double best_value = classical_nts_exact(QuerySequence(best, candidates), candidates);

    for (std::uint64_t iter = 0; iter < budget; ++iter) {
        std::vector<BitString> trial = best;
        const std::size_t pos = static_cast<std::size_t>(rng.next_below(trial.size()));
        trial[pos] = BitString(rng.next_below(domain), n);
        trial = detail::trim_sequence(trial, candidates);
        const auto profile = QuerySequence::coverage_profile(trial, candidates);
        if (candidates.size() - profile.back() > 1) continue; // no longer solves the game
        bool early = false;
        for (std::size_t j = 0; j + 1 < profile.size(); ++j)
            if (candidates.size() - profile[j] <= 1) early = true;
        if (early) continue;
        const double value = classical_nts_exact(QuerySequence(trial, candidates), candidates);
        if (value < best_value) {
            best_value = value;
            best = std::move(trial);
        }
    }
    return QuerySequence(best, candidates);
}

} // namespace simon
