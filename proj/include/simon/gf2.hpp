#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simon/errors.hpp"

namespace simon {

/// Fixed-length word of n bits over GF(2), 1 <= n <= 63.
///
/// Coordinate 0 is the leftmost character of the textual form, so the
/// stored word is simply the string read as a binary number. The hidden
/// strings written 0^{n-i}1^i therefore have word value 2^i - 1.
class BitString {
public:
    BitString(std::uint64_t word, int n) : word_(word), n_(n) {
        if (n < 1 || n > 63) throw UsageError("BitString: length must be in [1, 63]");
        if (n < 64 && (word >> n) != 0)
            throw UsageError("BitString: word has bits set beyond length " + std::to_string(n));
    }

    static BitString zero(int n) { return BitString(0, n); }

    /// b = 0^{n-i}1^i.
    static BitString tail_ones(int n, int i) {
        if (i < 0 || i > n) throw UsageError("BitString: tail weight out of range");
        return BitString(i == 0 ? 0 : ((std::uint64_t{1} << i) - 1), n);
    }

    static BitString parse(std::string_view text) {
        if (text.empty() || text.size() > 63) throw UsageError("BitString: bad text length");
        std::uint64_t w = 0;
        for (char c : text) {
            if (c != '0' && c != '1') throw UsageError("BitString: expected only '0'/'1'");
            w = (w << 1) | static_cast<std::uint64_t>(c - '0');
        }
        return BitString(w, static_cast<int>(text.size()));
    }

    int length() const { return n_; }
    std::uint64_t word() const { return word_; }

    /// Coordinate j, 0-based from the left.
    bool bit(int j) const { return ((word_ >> (n_ - 1 - j)) & 1) != 0; }

    bool is_zero() const { return word_ == 0; }

    BitString operator^(const BitString& other) const {
        check_same_length(other);
        return BitString(word_ ^ other.word_, n_);
    }

    bool operator==(const BitString& other) const {
        return n_ == other.n_ && word_ == other.word_;
    }
    bool operator!=(const BitString& other) const { return !(*this == other); }
    bool operator<(const BitString& other) const { return word_ < other.word_; }

    std::string str() const {
        std::string s(static_cast<std::size_t>(n_), '0');
        for (int j = 0; j < n_; ++j)
            if (bit(j)) s[static_cast<std::size_t>(j)] = '1';
        return s;
    }

    void check_same_length(const BitString& other) const {
        if (n_ != other.n_) throw UsageError("BitString: length mismatch");
    }

private:
    std::uint64_t word_;
    int n_;
};

/// Parity of the AND of two equal-length words.
inline int dot_mod2(const BitString& x, const BitString& y) {
    x.check_same_length(y);
    return std::popcount(x.word() & y.word()) & 1;
}

inline int hamming_weight(const BitString& x) { return std::popcount(x.word()); }

/// All nonzero length-n strings with Hamming weight <= w, ascending word order.
class CandidateSet {
public:
    CandidateSet(std::vector<BitString> members, int n, int w)
        : members_(std::move(members)), n_(n), w_(w) {
        for (const auto& m : members_) {
            if (m.length() != n) throw UsageError("CandidateSet: member length mismatch");
            if (m.is_zero()) throw UsageError("CandidateSet: zero string is not a candidate");
            if (hamming_weight(m) > w) throw UsageError("CandidateSet: member exceeds weight bound");
        }
    }

    const std::vector<BitString>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    int n() const { return n_; }
    int w() const { return w_; }

private:
    std::vector<BitString> members_;
    int n_;
    int w_;
};

/// N_w = sum_{j=1..w} C(n, j). Exact for n <= 63 (fits in uint64 since
/// N_w < 2^n <= 2^63).
inline std::uint64_t candidate_count(int n, int w) {
    if (w < 1 || w > n || n > 63) throw UsageError("candidate_count: need 1 <= w <= n <= 63");
    unsigned __int128 total = 0;
    unsigned __int128 binom = 1; // C(n, 0)
    for (int j = 1; j <= w; ++j) {
        binom = binom * static_cast<unsigned>(n - j + 1) / static_cast<unsigned>(j);
        total += binom;
    }
    // N_w < 2^n <= 2^63, so the result always fits.
    return static_cast<std::uint64_t>(total);
}

inline constexpr std::uint64_t kDefaultCandidateCap = std::uint64_t{1} << 26;

inline CandidateSet enumerate_candidates(int n, int w,
                                         std::uint64_t cap = kDefaultCandidateCap) {
    if (w < 1 || w > n || n > 63) throw UsageError("enumerate_candidates: need 1 <= w <= n <= 63");
    const std::uint64_t count = candidate_count(n, w);
    if (count > cap)
        throw ResourceError("enumerate_candidates: N_w = " + std::to_string(count) +
                            " exceeds cap; use representative-HW mode");
    std::vector<BitString> members;
    members.reserve(count);
    const std::uint64_t limit = (n == 63) ? ~std::uint64_t{0} >> 1 : (std::uint64_t{1} << n) - 1;
    for (std::uint64_t v = 1; v <= limit; ++v)
        if (std::popcount(v) <= w) members.emplace_back(v, n);
    return CandidateSet(std::move(members), n, w);
}

/// Outcome of filtering candidates against the orthogonality constraints.
/// `survivors` is in ascending word order; `unique()` iff exactly one is left.
struct SolveResult {
    std::vector<BitString> survivors;

    bool unique() const { return survivors.size() == 1; }
    const BitString& value() const {
        if (!unique()) throw DataError("SolveResult: hidden string is undetermined");
        return survivors.front();
    }
};

/// Keeps the candidates orthogonal to every z. Throws DataError when no
/// candidate survives (corrupted z's).
inline SolveResult solve_unique(const std::vector<BitString>& zs, const CandidateSet& candidates) {
    SolveResult result;
    for (const auto& b : candidates.members()) {
        bool ok = true;
        for (const auto& z : zs)
            if (dot_mod2(b, z) != 0) {
                ok = false;
                break;
            }
        if (ok) result.survivors.push_back(b);
    }
    if (result.survivors.empty()) throw DataError("solve_unique: no candidate survives");
    return result;
}

/// Row-echelon basis of span(rows) over GF(2), as words.
inline std::vector<std::uint64_t> gf2_row_echelon(const std::vector<BitString>& rows) {
    std::vector<std::uint64_t> basis;
    for (const auto& r : rows) {
        std::uint64_t v = r.word();
        for (std::uint64_t b : basis) {
            const int lead = 63 - std::countl_zero(b);
            if ((v >> lead) & 1) v ^= b;
        }
        if (v != 0) basis.push_back(v);
    }
    return basis;
}

/// Same contract as solve_unique, implemented via Gaussian elimination:
/// candidates are tested against a reduced basis of span(zs) instead of the
/// raw list.
inline SolveResult solve_unique_gauss(const std::vector<BitString>& zs,
                                      const CandidateSet& candidates) {
    const auto basis = gf2_row_echelon(zs);
    SolveResult result;
    for (const auto& b : candidates.members()) {
        bool ok = true;
        for (std::uint64_t row : basis)
            if (std::popcount(b.word() & row) & 1) {
                ok = false;
                break;
            }
        if (ok) result.survivors.push_back(b);
    }
    if (result.survivors.empty()) throw DataError("solve_unique_gauss: no candidate survives");
    return result;
}

/// Basis of the null space {z : b . z = 0}, n-1 vectors for b != 0.
inline std::vector<std::uint64_t> null_space_basis(const BitString& b) {
    if (b.is_zero()) throw UsageError("null_space_basis: b must be nonzero");
    const int n = b.length();
    const std::uint64_t word = b.word();
    const int pivot = std::countr_zero(word); // lowest set bit of b
    std::vector<std::uint64_t> basis;
    basis.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
        if (j == pivot) continue;
        std::uint64_t v = std::uint64_t{1} << j;
        if ((word >> j) & 1) v |= std::uint64_t{1} << pivot;
        basis.push_back(v);
    }
    return basis;
}

} // namespace simon
