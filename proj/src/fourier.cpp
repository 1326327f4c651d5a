#include "cantor/fourier.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>

namespace cantor {

namespace {

constexpr double kPi = std::numbers::pi;
// Below this argument a mask factor is 1 within float noise; the remainder of
// the factor run is folded into the certified slack instead of evaluated.
constexpr double kArgFloor = 1e-17;

// Signed distance to the nearest integer, in [-1/2, 1/2].  The mask has
// period 1, so evaluating at the reduced argument is exact and avoids the
// precision loss of trigonometric argument reduction at large frequencies.
double frac_delta(double x) { return x - std::nearbyint(x); }

double sq(double x) { return x * x; }

// Sum over factors j = base.. of log |m((xi + scale*value(e)) / b^j)|,
// visiting the expansion's digit blocks.  By periodicity, factor j only sees
// the digits at positions < j, so between digit activations the argument
// just decays by b.  `limit` (nullable) caps the factor index; per block at
// most `depth` factors run explicitly, the rest contribute certified slack.
struct LogProduct {
    double log_abs = 0;
    double slack = 0;  // bound on |neglected log factors|
    long factors = 0;
    bool zero = false;
};

LogProduct shifted_log_product(const MeasureParams& p, double xi, const Expansion& e, int scale, const BigInt* limit,
                               int depth) {
    const int q = p.q, b = p.b;
    const auto terms = e.terms();
    LogProduct out;

    double eta = xi / b;  // argument at the first factor of the current block
    BigInt base(1);       // factor index eta corresponds to
    std::size_t k = 0;    // next digit term to activate

    while (true) {
        if (limit && base > *limit) break;

        bool bounded = false;
        BigInt len;  // factors in this block
        if (k < terms.size()) {
            len = terms[k].first + 1 - base;
            bounded = true;
        }
        if (limit) {
            BigInt rem = *limit - base + 1;
            if (!bounded || rem < len) {
                len = rem;
                bounded = true;
            }
        }

        long long len_cap = -1;  // -1: unbounded; depth (< 10^6) always binds first on long runs
        if (bounded) len_cap = len > 1000000 ? 1000001 : static_cast<long long>(len);
        double arg = eta;
        long long t = 0;
        while (len_cap < 0 || t < len_cap) {
            if (t >= depth || std::fabs(arg) < kArgFloor) {
                // Remaining arguments decay geometrically; |1 - m(y)| <= pi(q-1)|y|.
                out.slack += kPi * (q - 1) * std::fabs(arg) * b / (b - 1.0) * 1.2;
                break;
            }
            double am = mask_abs(q, arg);
            if (am < 1e-300) {
                out.zero = true;
                out.factors += t + 1;
                return out;
            }
            out.log_abs += std::log(am);
            arg /= b;
            ++t;
        }
        out.factors += t;

        if (k >= terms.size()) break;                            // final block done
        if (limit && terms[k].first + 1 > *limit) break;         // next digit outside the factor range
        BigInt gap = terms[k].first + 1 - base;                  // >= 0
        double decayed = gap > 1100 ? 0.0 : eta * std::pow(static_cast<double>(b), -static_cast<double>(gap));
        eta = decayed + static_cast<double>(scale) * terms[k].second / b;
        base = terms[k].first + 1;
        ++k;
    }
    return out;
}

ProductSq finish(const LogProduct& lp) {
    ProductSq r;
    r.factors = lp.factors;
    if (lp.zero) {
        r.value_sq = 0;
        r.rel_slack = 0;
        r.fp_noise = 1e-300;
        return r;
    }
    r.value_sq = std::exp(2 * lp.log_abs);
    r.rel_slack = 2 * lp.slack;
    r.fp_noise = r.value_sq * (static_cast<double>(lp.factors) * 32 * DBL_EPSILON + 1e-14) + 1e-300;
    return r;
}

void check_policy(const TruncationPolicy& t) {
    if (t.depth < 1 || t.depth > 1000000) throw std::invalid_argument("truncation policy: depth must be in [1, 10^6]");
    if (!(t.tail_tol > 0 && t.tail_tol < 1)) throw std::invalid_argument("truncation policy: tail_tol must be in (0,1)");
}

}  // namespace

double ProductSq::budget() const { return value_sq * std::expm1(rel_slack) + fp_noise; }

std::complex<double> mask(int q, double xi) {
    if (q < 2) throw std::invalid_argument("mask: q must be >= 2");
    double d = frac_delta(xi);
    std::complex<double> s = 0;
    for (int j = 0; j < q; ++j) s += std::polar(1.0, 2 * kPi * j * d);
    return s / static_cast<double>(q);
}

double mask_abs(int q, double xi) {
    double d = frac_delta(xi);
    double ad = std::fabs(d);
    if (ad < 1e-9) {
        // sin(q pi d)/(q sin(pi d)) -> 1 - (q^2-1)(pi d)^2/6 at the removable point.
        double t = kPi * d;
        return 1.0 - (static_cast<double>(q) * q - 1.0) * t * t / 6.0;
    }
    return std::fabs(std::sin(q * kPi * d)) / (q * std::fabs(std::sin(kPi * d)));
}

std::complex<double> mu_n_hat(const MeasureParams& p, double xi, int n) {
    if (n < 0) throw std::invalid_argument("mu_n_hat: n must be >= 0");
    std::complex<double> v = 1;
    double arg = xi;
    for (int j = 1; j <= n; ++j) {
        arg /= p.b;
        v *= mask(p.q, arg);
    }
    return v;
}

MuValue mu_hat(const MeasureParams& p, double xi, TruncationPolicy t) {
    check_policy(t);
    const int q = p.q, b = p.b;
    const double ax = std::fabs(xi);
    const double lgb = std::log(static_cast<double>(b));
    if (ax * std::exp(-t.depth * lgb) > 0.5)
        throw TruncationError("mu_hat: |xi|/b^depth > 1/2 at depth " + std::to_string(t.depth) +
                              ", tail bound cannot certify");
    auto tail_of = [&](int J) { return kPi * (q - 1) * ax * std::exp(-J * lgb) / (b - 1); };
    int J = t.depth;
    while (J < 100000 && tail_of(J) > t.tail_tol) ++J;

    std::complex<double> v = 1;
    double arg = xi;
    for (int j = 1; j <= J; ++j) {
        arg /= b;
        v *= mask(q, arg);
    }
    double bound = std::abs(v) * (std::expm1(tail_of(J)) + J * 4 * DBL_EPSILON) + 1e-300;
    return {v, bound, J};
}

MaskConstants compute_mask_constants(const MeasureParams& p, double resolution) {
    p.r_value();  // requires q | b
    if (!(resolution > 0)) throw std::invalid_argument("mask constants: resolution must be positive");
    const int q = p.q, b = p.b;
    const double hi_end = static_cast<double>(b - 1) / (static_cast<double>(q) * b);
    const double lo_end = 1.0 / (static_cast<double>(b) * b);
    if (lo_end > hi_end)
        throw std::invalid_argument("mask constants: empty c_max domain, 1/b^2 > (b-1)/(qb)");

    // Full product F(x) = prod_{j>=0} |m(x/b^j)|^2, 64 explicit factors
    // (remainder deviates from 1 by < 1e-30 on |x| <= 1).
    auto full_product = [&](double x) {
        double f = 1;
        double arg = x;
        for (int j = 0; j < 64; ++j) {
            f *= sq(mask_abs(q, arg));
            arg /= b;
        }
        return f;
    };

    MaskConstants mc;
    mc.q = q;
    mc.b = b;
    mc.resolution = resolution;

    long n_min = static_cast<long>(std::ceil(hi_end / resolution));
    double gmin = 1;
    for (long i = 0; i <= n_min; ++i) {
        double x = std::min(i * resolution, hi_end);
        gmin = std::min(gmin, full_product(x));
    }
    const double lip_full = 2 * kPi * (q - 1) * b / (b - 1.0);
    mc.c_min_hi = gmin + 1e-12;
    mc.c_min_lo = gmin - lip_full * resolution / 2 - 1e-12;
    if (mc.c_min_lo <= 0)
        throw RefinementError("mask constants: resolution " + std::to_string(resolution) +
                              " too coarse to certify c_min > 0");

    long n_max = static_cast<long>(std::ceil((hi_end - lo_end) / resolution));
    double gmax = 0;
    for (long i = 0; i <= n_max; ++i) {
        double x = std::min(lo_end + i * resolution, hi_end);
        gmax = std::max(gmax, sq(mask_abs(q, x)));
    }
    const double lip_one = 2 * kPi * (q - 1);
    mc.c_max_lo = gmax - 1e-12;
    mc.c_max_hi = gmax + lip_one * resolution / 2 + 1e-12;
    if (mc.c_max_hi >= 1)
        throw RefinementError("mask constants: resolution too coarse to certify c_max < 1");
    if (!(mc.c_min_hi < mc.c_max_lo))
        throw RefinementError("mask constants: certified intervals violate c_min < c_max");
    return mc;
}

bool hadamard_check(int q, int r, double tol) {
    if (q < 2) throw std::invalid_argument("hadamard_check: q must be >= 2");
    if (r < 1) throw std::invalid_argument("hadamard_check: r must be >= 1");
    const int b = q * r;
    for (int i = 0; i < q; ++i) {
        for (int k = 0; k < q; ++k) {
            std::complex<double> s = 0;
            for (int j = 0; j < q; ++j)
                s += std::polar(1.0, 2 * kPi * ((static_cast<double>(i - k) * j * r) / b));
            double expect = i == k ? q : 0;
            if (std::abs(s - std::complex<double>(expect, 0)) > tol * q) return false;
        }
    }
    return true;
}

ProductSq mu_sq_shifted(const MeasureParams& p, double xi, const Expansion& e, int scale, const TruncationPolicy& t) {
    check_policy(t);
    if (scale < 1) throw std::invalid_argument("mu_sq_shifted: scale must be >= 1");
    return finish(shifted_log_product(p, xi, e, scale, nullptr, t.depth));
}

ProductSq mu_n_sq_shifted(const MeasureParams& p, double xi, const Expansion& e, int scale, long long n) {
    if (n < 0) throw std::invalid_argument("mu_n_sq_shifted: n must be >= 0");
    if (scale < 1) throw std::invalid_argument("mu_n_sq_shifted: scale must be >= 1");
    BigInt limit(n);
    // Depth cap per block chosen so a skipped run costs < 1e-16 relative.
    return finish(shifted_log_product(p, xi, e, scale, &limit, 64));
}

BoundsReport envelope_bounds_check(const MeasureParams& p, double xi, const std::vector<std::pair<BigInt, int>>& digits,
                                 const MaskConstants& mc, const TruncationPolicy& t, double base_tol) {
    const int r = p.r_value();
    const double xi_range = static_cast<double>(r) * (p.b - 2) / (p.b - 1);
    if (std::fabs(xi) > xi_range * (1 + 1e-12))
        throw std::invalid_argument("digit-count bounds: |xi| exceeds r(b-2)/(b-1)");
    const BigInt* prev = nullptr;
    for (const auto& [pos, d] : digits) {
        if (pos < 1) throw std::invalid_argument("digit-count bounds: positions must be >= 1");
        if (prev && !(*prev < pos)) throw std::invalid_argument("digit-count bounds: positions must strictly increase");
        prev = &pos;
        if (d < 1 || d > r - 1) throw std::invalid_argument("digit-count bounds: digits must lie in {1..r-1}");
    }

    Expansion e = expansion_from_terms(digits, p.b);
    ProductSq ps = mu_sq_shifted(p, xi, e, 1, t);

    BoundsReport rep;
    rep.digit_count = static_cast<int>(digits.size());
    rep.value_sq = ps.value_sq;
    rep.lower = std::pow(mc.c_min_lo, rep.digit_count + 1);
    rep.upper = std::pow(mc.c_max_hi, rep.digit_count);
    rep.tol = base_tol + ps.budget();
    rep.ok = rep.lower - rep.tol <= ps.value_sq && ps.value_sq <= rep.upper + rep.tol;
    return rep;
}

}  // namespace cantor
