#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace cantor {

/**
 * Parameters of the self-similar measure generated by the maps
 * x -> (x + i)/b for digits i = 0..q-1 with equal weights.
 *
 * Requires 2 <= q < b.  When q divides b the contraction ratio splits as
 * b = q*r and the measure admits a nontrivial orthogonality structure; r is
 * present exactly in that case.  b == q is excluded by q < b (that measure is
 * Lebesgue on [0,1] and out of scope).
 */
struct MeasureParams {
    int q = 0;
    int b = 0;
    std::optional<int> r;  // b/q when q | b

    bool divides() const { return r.has_value(); }

    /** r, guarded: throws std::domain_error when q does not divide b. */
    int r_value() const {
        if (!r) throw std::domain_error("measure parameters: q does not divide b, no scale r");
        return *r;
    }
};

/** Validates and builds MeasureParams.  Throws std::invalid_argument. */
inline MeasureParams make_params(int q, int b) {
    if (q < 2) throw std::invalid_argument("measure parameters: q must be >= 2, got " + std::to_string(q));
    if (b <= q) throw std::invalid_argument("measure parameters: need q < b, got q=" + std::to_string(q) +
                                            " b=" + std::to_string(b));
    MeasureParams p;
    p.q = q;
    p.b = b;
    if (b % q == 0) p.r = b / q;
    return p;
}

}  // namespace cantor
