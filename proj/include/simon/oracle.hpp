#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "simon/errors.hpp"
#include "simon/gf2.hpp"
#include "simon/rng.hpp"

namespace simon {

/// Keyed permutation of {0,1}^n hiding the oracle's internal structure.
///
/// Two realizations: a 4-round alternating Feistel network (any n <= 63,
/// no table storage) and an explicit Fisher-Yates table (n <= 20). Both are
/// uniform-looking keyed permutations; they differ pointwise for the same
/// seed but are interchangeable distributionally.
class F1Permutation {
public:
    enum class Mode { identity, feistel, table };

    F1Permutation(int n, std::uint64_t seed, Mode mode) : n_(n), seed_(seed), mode_(mode) {
        if (n < 1 || n > 63) throw UsageError("F1Permutation: n out of range");
        if (mode == Mode::table) {
            if (n > 20) throw ResourceError("F1Permutation: table mode needs n <= 20");
            table_.resize(std::uint64_t{1} << n);
            std::iota(table_.begin(), table_.end(), std::uint64_t{0});
            Rng rng(seed);
            for (std::uint64_t k = table_.size() - 1; k > 0; --k)
                std::swap(table_[k], table_[rng.next_below(k + 1)]);
        }
    }

    static F1Permutation identity(int n) { return F1Permutation(n, 0, Mode::identity); }

    int n() const { return n_; }
    Mode mode() const { return mode_; }

    std::uint64_t apply(std::uint64_t x) const {
        switch (mode_) {
            case Mode::identity: return x;
            case Mode::table: return table_[x];
            case Mode::feistel: return feistel(x);
        }
        return x;
    }

    BitString apply(const BitString& x) const {
        if (x.length() != n_) throw UsageError("F1Permutation: length mismatch");
        return BitString(apply(x.word()), n_);
    }

private:
    std::uint64_t feistel(std::uint64_t x) const {
        if (n_ == 1) return x ^ (Rng::mix(seed_) & 1);
        int left_bits = n_ / 2;
        int right_bits = n_ - left_bits;
        std::uint64_t left = x >> right_bits;
        std::uint64_t right = x & ((std::uint64_t{1} << right_bits) - 1);
        for (int round = 0; round < 4; ++round) {
            const std::uint64_t f =
                Rng::mix(Rng::mix(seed_ + static_cast<std::uint64_t>(round)) ^ right) &
                ((std::uint64_t{1} << left_bits) - 1);
            const std::uint64_t new_left = right;
            const std::uint64_t new_right = left ^ f;
            left = new_left;
            right = new_right;
            std::swap(left_bits, right_bits);
        }
        return (left << right_bits) | right;
    }

    int n_;
    std::uint64_t seed_;
    Mode mode_;
    std::vector<std::uint64_t> table_;
};

/// Coordinate permutation sigma that stably moves the set bits of b to the
/// tail, so sigma(b) = 0^{n-i}1^i. Returned as a map: sigma[j] = new
/// coordinate of original coordinate j.
inline std::vector<int> canonicalizing_permutation(const BitString& b) {
    const int n = b.length();
    std::vector<int> sigma(static_cast<std::size_t>(n));
    int next = 0;
    for (int j = 0; j < n; ++j)
        if (!b.bit(j)) sigma[static_cast<std::size_t>(j)] = next++;
    for (int j = 0; j < n; ++j)
        if (b.bit(j)) sigma[static_cast<std::size_t>(j)] = next++;
    return sigma;
}

inline std::vector<int> inverse_permutation(const std::vector<int>& sigma) {
    std::vector<int> inv(sigma.size());
    for (std::size_t j = 0; j < sigma.size(); ++j)
        inv[static_cast<std::size_t>(sigma[j])] = static_cast<int>(j);
    return inv;
}

/// Applies a coordinate permutation to a word: output coordinate sigma[j]
/// takes the value of input coordinate j.
inline std::uint64_t permute_coords(std::uint64_t x, const std::vector<int>& sigma, int n) {
    std::uint64_t y = 0;
    for (int j = 0; j < n; ++j)
        if ((x >> (n - 1 - j)) & 1) y |= std::uint64_t{1} << (n - 1 - sigma[static_cast<std::size_t>(j)]);
    return y;
}

/// f0 for the canonical hidden string b = 0^{n-i}1^i:
/// output_j = x_j for j < n-i, 0 for j = n-i, x_j ^ x_{n-i} for j > n-i.
inline std::uint64_t f0_canonical(std::uint64_t x, int n, int i) {
    if (i < 1 || i > n) throw UsageError("f0_canonical: i out of range");
    const std::uint64_t pivot_bit = std::uint64_t{1} << (i - 1); // coordinate n-i
    std::uint64_t y = x;
    if (x & pivot_bit) y ^= pivot_bit - 1; // xor x_{n-i} into coordinates j > n-i
    return y & ~pivot_bit;
}

/// A Simon oracle f = f1 o f0 with hidden string b. For general b, f0 is the
/// canonical map conjugated by the stable bit permutation that sends b to
/// 0^{n-i}1^i.
class OracleInstance {
public:
    OracleInstance(BitString b, std::uint64_t f1_seed,
                   F1Permutation::Mode f1_mode = F1Permutation::Mode::feistel)
        : b_(b),
          sigma_(canonicalizing_permutation(b)),
          sigma_inv_(inverse_permutation(sigma_)),
          f1_(b.length(), f1_seed, f1_mode) {
        if (b.is_zero()) throw UsageError("OracleInstance: b must be nonzero");
    }

    int n() const { return b_.length(); }
    const BitString& hidden() const { return b_; }
    const F1Permutation& f1() const { return f1_; }
    const std::vector<int>& sigma() const { return sigma_; }
    const std::vector<int>& sigma_inverse() const { return sigma_inv_; }

    std::uint64_t f0(std::uint64_t x) const {
        const int n = b_.length();
        const int i = hamming_weight(b_);
        return permute_coords(f0_canonical(permute_coords(x, sigma_, n), n, i), sigma_inv_, n);
    }

    BitString evaluate(const BitString& x) const {
        if (x.length() != n()) throw UsageError("OracleInstance: length mismatch");
        return BitString(f1_.apply(f0(x.word())), n());
    }

private:
    BitString b_;
    std::vector<int> sigma_;
    std::vector<int> sigma_inv_;
    F1Permutation f1_;
};

/// Full-enumeration check that every output of f has exactly two preimages
/// differing by b. n <= 12 only.
inline bool verify_two_to_one(const OracleInstance& inst) {
    const int n = inst.n();
    if (n > 12) throw ResourceError("verify_two_to_one: full enumeration limited to n <= 12");
    const std::uint64_t size = std::uint64_t{1} << n;
    std::map<std::uint64_t, std::vector<std::uint64_t>> preimages;
    for (std::uint64_t x = 0; x < size; ++x)
        preimages[inst.evaluate(BitString(x, n)).word()].push_back(x);
    const std::uint64_t b = inst.hidden().word();
    for (const auto& [y, xs] : preimages) {
        if (xs.size() != 2) return false;
        if ((xs[0] ^ xs[1]) != b) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// CNOT circuits

struct CnotGate {
    int control; // data qubit index
    int target;  // ancilla qubit index
    bool operator==(const CnotGate&) const = default;
};

struct CnotCircuit {
    int n = 0;
    std::vector<CnotGate> gates;
    bool operator==(const CnotCircuit&) const = default;

    /// Ancilla word produced by running the CNOTs on classical input x.
    std::uint64_t apply(std::uint64_t x) const {
        std::uint64_t anc = 0;
        for (const auto& g : gates)
            if ((x >> (n - 1 - g.control)) & 1) anc ^= std::uint64_t{1} << (n - 1 - g.target);
        return anc;
    }
};

/// Circuit computing f0 for b = 0^{n-i}1^i: copy gadgets d_j -> a_j for
/// j < n-i, XOR gadgets (d_{n-i} -> a_j, d_j -> a_j) for j > n-i, ancilla
/// a_{n-i} untouched.
inline CnotCircuit build_canonical_circuit(int n, int i) {
    if (n < 1 || n > 63) throw UsageError("build_canonical_circuit: n out of range");
    if (i < 1 || i > n) throw UsageError("build_canonical_circuit: need 1 <= i <= n");
    CnotCircuit c;
    c.n = n;
    for (int j = 0; j < n - i; ++j) c.gates.push_back({j, j});
    for (int j = n - i + 1; j < n; ++j) {
        c.gates.push_back({n - i, j});
        c.gates.push_back({j, j});
    }
    return c;
}

inline std::string emit_circuit_text(const CnotCircuit& c) {
    std::ostringstream out;
    out << "SIMON n=" << c.n << '\n';
    for (const auto& g : c.gates) out << "CX d" << g.control << " a" << g.target << '\n';
    return out.str();
}

inline CnotCircuit parse_circuit_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CnotCircuit c;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "SIMON") {
            std::string nspec;
            ls >> nspec;
            if (nspec.rfind("n=", 0) != 0)
                throw DataError("circuit text line " + std::to_string(lineno) + ": bad header");
            c.n = std::stoi(nspec.substr(2));
            header_seen = true;
        } else if (tok == "CX") {
            if (!header_seen)
                throw DataError("circuit text line " + std::to_string(lineno) + ": gate before header");
            std::string ctrl, tgt;
            ls >> ctrl >> tgt;
            if (ctrl.size() < 2 || tgt.size() < 2 || ctrl[0] != 'd' || tgt[0] != 'a')
                throw DataError("circuit text line " + std::to_string(lineno) + ": bad gate operands");
            c.gates.push_back({std::stoi(ctrl.substr(1)), std::stoi(tgt.substr(1))});
        } else {
            throw DataError("circuit text line " + std::to_string(lineno) + ": unknown directive '" +
                            tok + "'");
        }
    }
    if (!header_seen) throw DataError("circuit text: missing SIMON header");
    for (const auto& g : c.gates)
        if (g.control < 0 || g.control >= c.n || g.target < 0 || g.target >= c.n)
            throw DataError("circuit text: qubit index out of range");
    return c;
}

/// Recovers i such that c == build_canonical_circuit(c.n, i).
inline int canonical_circuit_weight(const CnotCircuit& c) {
    for (int i = 1; i <= c.n; ++i)
        if (c == build_canonical_circuit(c.n, i)) return i;
    throw UsageError("compile: circuit does not have the canonical copy/XOR structure");
}

// ---------------------------------------------------------------------------
// Compilation (canonical H-sandwich + classical post-processing)

/// The uncompiled composition: data/ancilla registers reordered so the
/// hidden string is general b, the canonical f0 block, and the f1
/// permutation applied in-circuit before measurement.
struct RawProgram {
    CnotCircuit f0;      // must be the canonical circuit for HW(b)
    OracleInstance oracle;
};

/// Classical post-processing replacing the in-circuit f1 and qubit reorder.
struct Postprocessing {
    std::vector<int> coord_unpermute; // inverse of the reorder used at compile time
    F1Permutation f1;

    /// Maps a compiled-circuit outcome (z, ancilla) to the uncompiled one.
    std::pair<BitString, BitString> apply(const BitString& z, const BitString& anc) const {
        const int n = z.length();
        return {BitString(permute_coords(z.word(), coord_unpermute, n), n),
                f1.apply(BitString(permute_coords(anc.word(), coord_unpermute, n), n))};
    }
};

struct CompiledProgram {
    CnotCircuit circuit; // canonical Hadamard-sandwiched f0
    Postprocessing post;
};

inline CompiledProgram compile(const RawProgram& raw) {
    const int i = canonical_circuit_weight(raw.f0);
    if (i != hamming_weight(raw.oracle.hidden()))
        throw UsageError("compile: circuit weight does not match the hidden string");
    return CompiledProgram{raw.f0,
                           Postprocessing{raw.oracle.sigma_inverse(), raw.oracle.f1()}};
}

// ---------------------------------------------------------------------------
// Output distributions and histograms

/// Histogram over textual bitstring outcomes. Values are counts or
/// probability mass, depending on context.
using Histogram = std::map<std::string, double>;

/// Exact noiseless output distribution of the full Simon circuit for this
/// oracle: z uniform over the null space of b, ancilla uniform over the
/// image of f, independent. Keys are 2n chars, data bits then ancilla bits.
inline Histogram exact_output_distribution(const OracleInstance& inst) {
    const int n = inst.n();
    if (n > 12) throw ResourceError("exact_output_distribution: limited to n <= 12");
    const std::uint64_t size = std::uint64_t{1} << n;

    std::vector<std::uint64_t> zs;
    for (std::uint64_t z = 0; z < size; ++z)
        if ((std::popcount(z & inst.hidden().word()) & 1) == 0) zs.push_back(z);

    std::vector<std::uint64_t> image;
    {
        std::vector<bool> seen(size, false);
        for (std::uint64_t x = 0; x < size; ++x) {
            const std::uint64_t y = inst.evaluate(BitString(x, n)).word();
            if (!seen[y]) {
                seen[y] = true;
                image.push_back(y);
            }
        }
    }

    const double mass = 1.0 / (static_cast<double>(zs.size()) * static_cast<double>(image.size()));
    Histogram dist;
    for (std::uint64_t z : zs)
        for (std::uint64_t a : image)
            dist[BitString(z, n).str() + BitString(a, n).str()] = mass;
    return dist;
}

/// Marginalizes a Simon-n histogram (2n-bit keys, data then ancilla) onto the
/// trailing m data and m ancilla bits. Total count is preserved.
inline Histogram reduce_counts(const Histogram& counts, int n, int m) {
    if (m >= n || m < 1) throw UsageError("reduce_counts: need 1 <= m < n");
    Histogram reduced;
    for (const auto& [key, value] : counts) {
        if (key.size() != static_cast<std::size_t>(2 * n))
            throw DataError("reduce_counts: key '" + key + "' is not 2n bits");
        const std::string small = key.substr(static_cast<std::size_t>(n - m), static_cast<std::size_t>(m)) +
                                  key.substr(static_cast<std::size_t>(2 * n - m), static_cast<std::size_t>(m));
        reduced[small] += value;
    }
    return reduced;
}

inline double total_variation_distance(const Histogram& a, const Histogram& b) {
    double tv = 0.0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        tv += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : b)
        if (a.find(k) == a.end()) tv += std::abs(v);
    return tv / 2.0;
}

} // namespace simon
