#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <utility>
#include <vector>

#include "cantor/params.hpp"

namespace cantor {

/** Arbitrary-precision signed integer used for tree indices and frequencies. */
using BigInt = boost::multiprecision::cpp_int;

/**
 * Signed radix expansion of n in base b with digit set {-1, 0, ..., b-2},
 * least significant digit first.  The digit at each step is
 * c = ((n + 1) mod b) - 1, which is the unique digit in the set congruent to
 * n mod b; the canonical form has a nonzero leading (= last) digit and the
 * empty vector represents 0.  Every integer has exactly one such expansion.
 *
 * Requires b >= 3: with b == 2 the digit set {-1, 0} cannot reach positive
 * integers.  Throws std::invalid_argument on bad b.
 */
std::vector<int> signed_expand(BigInt n, int b);

/** Value of a signed/plain digit vector (least significant first) in base b. */
BigInt radix_eval(const std::vector<int>& digits, int b);

/**
 * Plain radix expansion of n >= 1 in base q >= 2 with digits {0..q-1},
 * least significant first; canonical form ends in a nonzero digit.
 * Throws std::invalid_argument when n < 1 or q < 2.
 */
std::vector<int> q_adic_expand(BigInt n, int q);

/**
 * Factors out the largest power of b: m = b^e * a with b not dividing a.
 * Requires m != 0 and b >= 2.  Returns {e, a}.
 */
std::pair<int, BigInt> strip_base_powers(BigInt m, int b);

/**
 * Membership of the integer frequency d in the vanishing set of the Fourier
 * transform of the measure: d lies in it iff d = (b/q) * b^k * a for some
 * k >= 0 and integer a not divisible by q.  Requires q | b; d == 0 is never
 * a member.
 */
bool in_zero_set(const BigInt& d, const MeasureParams& p);

/**
 * Zero-set membership for a rational frequency n/q (general q < b, no
 * divisibility assumed): n/q vanishes iff n = b^k * a with k >= 1 and q
 * not dividing a.  n == 0 returns false.
 */
bool zero_numerator(const BigInt& n, int q, int b);

}  // namespace cantor
