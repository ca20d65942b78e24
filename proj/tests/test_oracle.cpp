#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "simon/oracle.hpp"
#include "support/statevector.hpp"

using namespace simon;

TEST_CASE("f0_canonical follows the coordinate formula") {
    // n=3, i=2 (b = 011): out = (x0, 0, x1 ^ x2).
    CHECK(f0_canonical(BitString::parse("000").word(), 3, 2) == BitString::parse("000").word());
    CHECK(f0_canonical(BitString::parse("010").word(), 3, 2) == BitString::parse("001").word());
    CHECK(f0_canonical(BitString::parse("001").word(), 3, 2) == BitString::parse("001").word());
    CHECK(f0_canonical(BitString::parse("011").word(), 3, 2) == BitString::parse("000").word());
    CHECK(f0_canonical(BitString::parse("110").word(), 3, 2) == BitString::parse("101").word());

    // Coordinate-wise check against the definition for all n <= 10, i <= n.
    for (int n = 1; n <= 10; ++n)
        for (int i = 1; i <= n; ++i)
            for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
                const BitString in(x, n);
                const BitString out(f0_canonical(x, n, i), n);
                for (int j = 0; j < n; ++j) {
                    bool expected;
                    if (j < n - i)
                        expected = in.bit(j);
                    else if (j == n - i)
                        expected = false;
                    else
                        expected = in.bit(j) != in.bit(n - i);
                    CHECK(out.bit(j) == expected);
                }
            }
}

TEST_CASE("canonicalizing permutation sends b to tail ones") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(12));
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        std::uint64_t word = 0;
        while (word == 0) word = rng.next_u64() & mask;
        const BitString b(word, n);
        const auto sigma = canonicalizing_permutation(b);
        const int i = hamming_weight(b);
        CHECK(permute_coords(b.word(), sigma, n) == BitString::tail_ones(n, i).word());
        const auto inv = inverse_permutation(sigma);
        CHECK(permute_coords(permute_coords(b.word(), sigma, n), inv, n) == b.word());
    }
}

TEST_CASE("oracle collision structure: f(x) == f(y) iff y in {x, x^b}") {
    Rng rng(99);
    for (int n = 2; n <= 10; ++n) {
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        std::uint64_t word = 0;
        while (word == 0) word = rng.next_u64() & mask;
        const OracleInstance inst(BitString(word, n), rng.next_u64());
        CHECK(verify_two_to_one(inst));
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            const BitString bx(x, n);
            CHECK(inst.evaluate(bx) == inst.evaluate(bx ^ inst.hidden()));
        }
    }
}

TEST_CASE("f1 table mode is a permutation and matches nothing but itself") {
    const int n = 6;
    F1Permutation table(n, 17, F1Permutation::Mode::table);
    F1Permutation feistel(n, 17, F1Permutation::Mode::feistel);
    std::set<std::uint64_t> t_out, f_out;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        t_out.insert(table.apply(x));
        f_out.insert(feistel.apply(x));
    }
    CHECK(t_out.size() == (std::uint64_t{1} << n)); // bijective
    CHECK(f_out.size() == (std::uint64_t{1} << n));
    CHECK(F1Permutation::identity(n).apply(37) == 37);
    CHECK_THROWS_AS(F1Permutation(25, 1, F1Permutation::Mode::table), ResourceError);

    // Both realizations give valid 2-to-1 oracles.
    for (auto mode : {F1Permutation::Mode::table, F1Permutation::Mode::feistel}) {
        const OracleInstance inst(BitString::parse("011010"), 123, mode);
        CHECK(verify_two_to_one(inst));
    }
}

TEST_CASE("adversarial circuit with a deleted edge breaks the collision law") {
    const int n = 3, i = 2;
    const std::uint64_t b = (std::uint64_t{1} << i) - 1; // intended hidden string 011
    auto circuit = build_canonical_circuit(n, i);
    circuit.gates.pop_back();
    // The mutated circuit no longer collides exactly on cosets of {0, b}.
    bool law_holds = true;
    for (std::uint64_t x = 0; x < 8 && law_holds; ++x)
        for (std::uint64_t xp = 0; xp < 8 && law_holds; ++xp) {
            const bool collide = circuit.apply(x) == circuit.apply(xp);
            const bool coset = (x ^ xp) == 0 || (x ^ xp) == b;
            if (collide != coset) law_holds = false;
        }
    CHECK_FALSE(law_holds);
}

TEST_CASE("canonical circuit shapes") {
    const auto c32 = build_canonical_circuit(3, 2);
    REQUIRE(c32.gates.size() == 3);
    CHECK(c32.gates[0] == CnotGate{0, 0});
    CHECK(c32.gates[1] == CnotGate{1, 2});
    CHECK(c32.gates[2] == CnotGate{2, 2});

    const auto c55 = build_canonical_circuit(5, 5); // no copy edges
    REQUIRE(c55.gates.size() == 8);
    for (std::size_t k = 0; k < c55.gates.size(); k += 2) CHECK(c55.gates[k].control == 0);

    const auto c51 = build_canonical_circuit(5, 1); // copies only, a4 untouched
    REQUIRE(c51.gates.size() == 4);
    for (int j = 0; j < 4; ++j) CHECK(c51.gates[static_cast<std::size_t>(j)] == CnotGate{j, j});

    // Circuit computes f0_canonical for every n, i, x.
    for (int n = 1; n <= 8; ++n)
        for (int i = 1; i <= n; ++i) {
            const auto c = build_canonical_circuit(n, i);
            for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x)
                CHECK(c.apply(x) == f0_canonical(x, n, i));
        }
    CHECK_THROWS_AS(build_canonical_circuit(3, 0), UsageError);
    CHECK_THROWS_AS(build_canonical_circuit(3, 4), UsageError);
}

TEST_CASE("circuit text round trip") {
    CHECK(emit_circuit_text(build_canonical_circuit(3, 2)) ==
          "SIMON n=3\nCX d0 a0\nCX d1 a2\nCX d2 a2\n");
    const CnotCircuit empty{4, {}};
    CHECK(emit_circuit_text(empty) == "SIMON n=4\n");

    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(20));
        const int i = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto c = build_canonical_circuit(n, i);
        CHECK(parse_circuit_text(emit_circuit_text(c)) == c);
    }

    CHECK_THROWS_AS(parse_circuit_text("CX d0 a0\n"), DataError);
    CHECK_THROWS_AS(parse_circuit_text("SIMON n=3\nCX q0 a0\n"), DataError);
    CHECK_THROWS_AS(parse_circuit_text("SIMON n=3\nCX d0 a7\n"), DataError);
    CHECK_THROWS_AS(parse_circuit_text("SIMON n=3\nH d0\n"), DataError);
    CHECK_THROWS_AS(parse_circuit_text(""), DataError);
}

TEST_CASE("analytic output distribution equals state-vector simulation") {
    Rng rng(31);
    for (int n = 2; n <= 5; ++n) {
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        std::uint64_t word = 0;
        while (word == 0) word = rng.next_u64() & mask;
        const OracleInstance inst(BitString(word, n), rng.next_u64(),
                                  F1Permutation::Mode::table);
        const auto analytic = exact_output_distribution(inst);
        const auto simulated = testsupport::simulate_oracle_distribution(inst);
        CHECK(total_variation_distance(analytic, simulated) < 1e-10);
    }
}

TEST_CASE("compile preserves the output distribution") {
    Rng rng(77);
    for (int n = 2; n <= 6; ++n) {
        const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
        std::uint64_t word = 0;
        while (word == 0) word = rng.next_u64() & mask;
        const BitString b(word, n);
        const OracleInstance inst(b, rng.next_u64(), F1Permutation::Mode::table);
        const RawProgram raw{build_canonical_circuit(n, hamming_weight(b)), inst};
        const auto compiled = compile(raw);
        const auto dist_raw = testsupport::simulate_raw_program(raw);
        const auto dist_compiled = testsupport::simulate_compiled_program(compiled, n);
        const auto dist_oracle = testsupport::simulate_oracle_distribution(inst);
        CHECK(total_variation_distance(dist_raw, dist_compiled) < 1e-10);
        CHECK(total_variation_distance(dist_raw, dist_oracle) < 1e-10);
    }

    // Identity f1, canonical b: post-processing is the identity map.
    const OracleInstance plain(BitString::parse("011"), 0, F1Permutation::Mode::identity);
    const auto compiled = compile(RawProgram{build_canonical_circuit(3, 2), plain});
    const auto [z, a] =
        compiled.post.apply(BitString::parse("101"), BitString::parse("110"));
    CHECK(z.str() == "101");
    CHECK(a.str() == "110");

    // Mismatched circuit weight is rejected.
    CHECK_THROWS_AS(compile(RawProgram{build_canonical_circuit(3, 1), plain}), UsageError);
    CnotCircuit scrambled{3, {{2, 0}}};
    CHECK_THROWS_AS(compile(RawProgram{scrambled, plain}), UsageError);
}

TEST_CASE("reduce_counts basics") {
    Histogram counts;
    counts["000000"] = 100.0;
    const auto reduced = reduce_counts(counts, 3, 2);
    REQUIRE(reduced.size() == 1);
    CHECK(reduced.at("0000") == 100.0);

    // Uniform in, uniform out, mass preserved.
    Histogram uniform_full;
    for (std::uint64_t x = 0; x < 8; ++x)
        for (std::uint64_t a = 0; a < 8; ++a)
            uniform_full[BitString(x, 3).str() + BitString(a, 3).str()] = 1.0 / 64.0;
    const auto marginal = reduce_counts(uniform_full, 3, 2);
    REQUIRE(marginal.size() == 16);
    for (const auto& [k, v] : marginal) CHECK(v == doctest::Approx(1.0 / 16.0));

    CHECK_THROWS_AS(reduce_counts(counts, 3, 3), UsageError);
    Histogram bad;
    bad["000"] = 1.0;
    CHECK_THROWS_AS(reduce_counts(bad, 3, 2), DataError);
}

TEST_CASE("reducing the Simon-n distribution gives the Simon-m distribution") {
    // Hidden string supported on the trailing m coordinates, identity f1:
    // the marginal factorizes exactly onto the smaller problem.
    for (int n = 3; n <= 8; ++n)
        for (int m = 1; m < n; ++m)
            for (int i = 1; i <= m; ++i) {
                const OracleInstance big(BitString::tail_ones(n, i), 0,
                                         F1Permutation::Mode::identity);
                const OracleInstance small(BitString::tail_ones(m, i), 0,
                                           F1Permutation::Mode::identity);
                const auto reduced = reduce_counts(exact_output_distribution(big), n, m);
                const auto direct = exact_output_distribution(small);
                CHECK(total_variation_distance(reduced, direct) == 0.0);
            }
}

TEST_CASE("total variation distance") {
    Histogram a{{"0", 0.5}, {"1", 0.5}};
    Histogram b{{"0", 1.0}};
    CHECK(total_variation_distance(a, a) == 0.0);
    CHECK(total_variation_distance(a, b) == doctest::Approx(0.5));
}
