#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cantor/numtheory.hpp"

namespace cantor {

/**
 * Sparse signed-digit expansion in base b with digits in {-1, 0, ..., b-2}.
 *
 * Represents Sum digit * b^position.  Positions are arbitrary-precision, so
 * values far beyond any native integer range (e.g. frequencies whose top
 * digit sits at position ~ b^n) stay exact.  Two tiers:
 *
 *   - `low`:  dense digits for positions 0 .. low.size()-1 (the stem part),
 *   - `high`: sparse (position, digit) pairs, strictly ascending positions,
 *             every position >= low.size(), every digit nonzero.
 *
 * Canonical form: the overall top digit is nonzero (low has no trailing
 * zeros when high is empty).  The zero value is {empty, empty}.  Because the
 * digit set is a complete residue system with |digit| < b, the expansion of
 * an integer is unique, so value comparisons reduce to digit comparisons.
 */
struct Expansion {
    std::vector<int16_t> low;
    std::vector<std::pair<BigInt, int16_t>> high;

    bool is_zero() const { return low.empty() && high.empty(); }

    /** Sign of the represented value: sign of the top digit, 0 for zero. */
    int sign() const;

    /** Number of nonzero digits. */
    std::size_t weight() const;

    /** Position of the top (most significant) nonzero digit; zero -> nullopt. */
    std::optional<BigInt> top_position() const;

    /** All nonzero digits as (position, digit), ascending. */
    std::vector<std::pair<BigInt, int>> terms() const;
};

/** Expansion of an ordinary integer (base b >= 3). */
Expansion expansion_from_int(const BigInt& n, int b);

/**
 * Expansion from explicit nonzero digit terms, ascending positions.
 * Validates digits lie in {-1..b-2}\{0} and positions strictly increase;
 * throws std::invalid_argument otherwise.
 */
Expansion expansion_from_terms(const std::vector<std::pair<BigInt, int>>& terms, int b);

/** Exact value comparison: -1, 0, +1 as a < b, a == b, a > b. */
int expansion_compare(const Expansion& a, const Expansion& b);

/** Exact difference a - b, renormalized to canonical digits (base b >= 3). */
Expansion expansion_subtract(const Expansion& a, const Expansion& b, int base);

/**
 * Lowest position where the two expansions carry different digits, with both
 * digits; equal expansions -> nullopt.  This is the place where divisibility
 * of the digit gap decides orthogonality of the pair.
 */
std::optional<std::tuple<BigInt, int, int>> first_difference(const Expansion& a, const Expansion& b);

/**
 * The represented integer, if it fits within max_bits bits; otherwise
 * nullopt (the value would be astronomically large, not an error).
 */
std::optional<BigInt> materialize(const Expansion& e, int b, unsigned max_bits);

/** Decimal rendering via materialize; nullopt when over the bit budget. */
std::optional<std::string> to_decimal(const Expansion& e, int b, unsigned max_bits);

/** Product by a small factor in [0, base], renormalized. */
Expansion expansion_scale(const Expansion& e, int factor, int base);

/** log2 of the absolute represented value; -infinity for zero. */
double expansion_log2(const Expansion& e, int base);

}  // namespace cantor
