#pragma once

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cantor/expansion.hpp"
#include "cantor/params.hpp"

namespace cantor {

/** Requested truncation cannot be certified (frequency too large for depth). */
struct TruncationError : std::domain_error {
    using std::domain_error::domain_error;
};

/** Grid too coarse to certify a strictly positive minimum. */
struct RefinementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Controls evaluation of the infinite product transform.  `depth` is the
 * number of explicit factors (per digit block in shifted evaluations);
 * `tail_tol` is the multiplicative deviation allowed for the neglected tail
 * — plain transform evaluation extends the depth until the certified tail
 * bound is below it.
 */
struct TruncationPolicy {
    int depth = 40;
    double tail_tol = 1e-12;
};

/** Mask m(xi) = (1/q) * sum_{j<q} e^{2 pi i j xi}; period 1, m(0) = 1. */
std::complex<double> mask(int q, double xi);

/** |m(xi)| = |sin(q pi xi) / (q sin(pi xi))|, stable at integers (-> 1). */
double mask_abs(int q, double xi);

/** Finite product of the first n mask factors: prod_{j=1..n} m(xi / b^j). */
std::complex<double> mu_n_hat(const MeasureParams& p, double xi, int n);

/** Truncated transform with a certified tail bound on the modulus. */
struct MuValue {
    std::complex<double> value;  // prod_{j<=J} m(xi / b^j)
    double tail_bound;           // | |mu(xi)| - |value| | <= tail_bound
    int factors;                 // J actually used
};

/**
 * Truncated mu(xi).  The neglected factors j > J deviate from 1 by at most
 * sum_j pi (q-1) |xi| / b^j, certified only when |xi| / b^J <= 1/2; throws
 * TruncationError otherwise.  Depth extends past t.depth until the bound
 * drops under t.tail_tol.
 */
MuValue mu_hat(const MeasureParams& p, double xi, TruncationPolicy t = {});

/**
 * Certified extrema of the mask products: c_min = min of
 * prod_{j>=0} |m(b^-j xi)|^2 over |xi| <= (b-1)/(qb), and c_max = max of
 * |m(xi)|^2 over 1/b^2 <= |xi| <= (b-1)/(qb).  Grid values plus Lipschitz
 * safety margins give enclosing intervals; criteria consume the conservative
 * endpoints c1() and c2().
 */
struct MaskConstants {
    double c_min_lo = 0, c_min_hi = 0;
    double c_max_lo = 0, c_max_hi = 0;
    int q = 0, b = 0;
    double resolution = 0;

    double c1() const { return c_min_lo; }
    double c2() const { return c_max_hi; }
};

/** Throws RefinementError when the margin cannot certify c_min > 0. */
MaskConstants compute_mask_constants(const MeasureParams& p, double resolution = 1e-4);

/** H = [e^{2 pi i * ijr / (qr)}] satisfies H H* = q I within tol. */
bool hadamard_check(int q, int r, double tol = 1e-12);

/**
 * Squared modulus of the transform at a shifted frequency xi + scale*e,
 * where e is a digit expansion whose positions may be far beyond native
 * integers.  Factors are evaluated per digit block (the argument of factor j
 * only involves digits below j, by periodicity); each block runs at most
 * `depth` factors, with the certified remainder folded into rel_slack.
 */
struct ProductSq {
    double value_sq;   // truncated |mu|^2, in log-magnitude accumulation
    double rel_slack;  // true value in value_sq * exp(+-rel_slack)
    double fp_noise;   // additive allowance for float rounding
    long factors;      // mask evaluations performed

    double budget() const;  // absolute error allowance combining both
};
ProductSq mu_sq_shifted(const MeasureParams& p, double xi, const Expansion& e, int scale,
                        const TruncationPolicy& t = {});

/** Exactly n factors of the shifted product (no tail): |mu_n(xi+scale*e)|^2. */
ProductSq mu_n_sq_shifted(const MeasureParams& p, double xi, const Expansion& e, int scale, long long n);

/**
 * Two-sided digit-count bound test: for t = xi + sum d_k b^{n_k} with digits
 * d_k in {1..r-1} at strictly increasing positions n_k >= 1 and
 * |xi| <= r(b-2)/(b-1), checks
 *   c_min^{N+1} - tol <= |mu(t)|^2 <= c_max^N + tol
 * using conservative interval endpoints; tol = base_tol + truncation budget.
 */
struct BoundsReport {
    bool ok;
    double value_sq;
    double lower, upper;  // bound values actually compared against
    double tol;
    int digit_count;
};
BoundsReport envelope_bounds_check(const MeasureParams& p, double xi,
                                   const std::vector<std::pair<BigInt, int>>& digits,
                                   const MaskConstants& mc, const TruncationPolicy& t = {},
                                   double base_tol = 1e-6);

}  // namespace cantor
