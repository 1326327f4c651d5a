#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantor/fourier.hpp"
#include "cantor/treemap.hpp"

namespace cantor {

/**
 * Candidate data fails a hard orthogonality requirement (not a resource or
 * schema problem): e.g. a pairwise difference outside the transform's
 * vanishing set.  Carries the witnessing pair in the message.
 */
struct OrthogonalityFailure : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/** Exact pairwise orthogonality audit of a candidate prefix. */
struct BizeroResult {
    bool ok = true;
    // First violating pair (i, j) with i > j, scan order (1,0),(2,0),(2,1),...
    std::optional<std::pair<std::size_t, std::size_t>> witness;
    std::string detail;
};

/**
 * True iff every pairwise difference r*(lambda_i - lambda_j), i != j, lies in
 * the vanishing set of the transform.  Exact digit arithmetic: the scaled
 * difference vanishes the transform exactly when the digit gap at the lowest
 * differing position is not a multiple of q.  O(n^2) with early exit.
 */
BizeroResult check_bizero(const SpectrumCandidate& c);

/** Window sweep for frequencies orthogonal to an entire candidate prefix. */
struct MaximalityReport {
    long long window = 0;
    long long prefix = 0;
    // Scaled frequencies theta = r*m, |m| <= window, theta not already in the
    // scaled prefix, with theta - r*lambda_i in the vanishing set for all
    // i < prefix.  Empty = desk-scale maximality evidence; nonempty entries
    // are counterexample leads (or a hint the prefix was too short).
    std::vector<BigInt> survivors;
};

MaximalityReport check_maximality_window(const SpectrumCandidate& c, long long window, long long prefix);

/** Depth-matched completeness identity audit (exact up to rounding). */
struct IdentityReport {
    int level = 0;        // n: number of explicit factors and log_q of the term count
    long long terms = 0;  // q^n
    double max_abs_dev = 0;
    double worst_xi = 0;
};

/**
 * Evaluates sum_{k < q^n} |mu_n(xi + r lambda_k)|^2 at each xi and returns
 * the worst |sum - 1|.  For any complete residue tree of depth n this sum is
 * identically 1, so the deviation is pure floating-point noise; requires at
 * least q^n elements.
 */
IdentityReport qn_identity_check(const SpectrumCandidate& c, int level, const std::vector<double>& xis);

/** One partial-sum evaluation of the completeness function. */
struct QValue {
    double xi = 0;
    double Q = 0;             // sum_{k < terms} |mu(xi + r lambda_k)|^2
    double error_budget = 0;  // absolute allowance: truncation slack + rounding
    long long terms = 0;
};

/**
 * Partial completeness sum with certified error budget.  Terms are evaluated
 * in fixed blocks of 256 and combined along a fixed pairwise reduction tree,
 * so the result is bit-identical for any thread count (threads taken from
 * CANTOR_SPECTRA_THREADS, default: hardware concurrency).
 */
QValue q_eval(const SpectrumCandidate& c, double xi, long long terms, const TruncationPolicy& t = {});

/** Grid used by verdicts: xi = j/64 for j = 1..32, plus 1e-2 and 1e-3. */
std::vector<double> default_xi_grid();

enum class Conclusion { SatisfiesI, SatisfiesII, Neither, Inconclusive };
std::string to_string(Conclusion c);

/**
 * Finite-horizon evidence thresholds for the divergence/convergence criteria.
 * The literal thresholds read the computed gap and partial-sum sequences
 * directly; two structural routes can certify the divergence side when the
 * horizon is too short for the literal thresholds:
 *   - constant window exponents (the series terms are bounded below by a
 *     positive constant) together with strictly increasing gaps;
 *   - a rule-derived finite bound on sup N* supplied by the caller.
 */
struct CriterionConfig {
    double gap_threshold = 10.0;  // divergence: last gap must reach this
    double sum_threshold = 20.0;  // divergence: c1 partial sum must reach this
    double ratio_cap = 0.95;      // convergence: sustained term ratio below this
    int min_windows = 2;          // evidence needs at least this many windows/levels
    std::optional<long long> structural_sup_nstar;
};

struct CriterionReport {
    std::pair<double, double> c1_interval{0, 0};
    std::pair<double, double> c2_interval{0, 0};
    std::vector<long long> alpha;              // tested sequence (clipped to horizon)
    std::vector<double> gaps;                  // alpha_{n+1} - M(alpha_n), saturated
    std::vector<long long> window_exponents;   // max N* over [q^alpha_n, q^alpha_{n+1})
    std::vector<double> sums_i;                // running sums of c1^window_exponent
    std::vector<long long> level_exponents;    // L*_n for n < horizon
    std::vector<double> terms_ii;              // c2^L*_n
    std::vector<double> sums_ii;               // running sums of terms_ii
    int horizon = 0;
    Conclusion conclusion = Conclusion::Inconclusive;
    std::string detail;
};

/**
 * Evaluates both series criteria over the available horizon: divergent
 * c1-sum with gaps growing beyond every bound is evidence the scaled set is
 * complete; a geometrically convergent c2-sum is evidence it is not.
 * Throws std::out_of_range when the horizon exceeds the stats.
 */
CriterionReport criterion_report(const DigitStats& s, const MaskConstants& mc,
                                 const std::vector<long long>& alpha, int horizon,
                                 const CriterionConfig& cfg = {});

/** alpha_1 = 1, alpha_{n+1} = n + M(alpha_n), clipped to the horizon. */
std::vector<long long> default_alpha(const DigitStats& s, int horizon);

/**
 * Bound on the completeness mass beyond the summed prefix: level n >= L
 * contributes at most (q-1) q^n c2^{L*_n}.  The level exponents beyond the
 * computed stats are extrapolated with the smallest recent per-level
 * increment; `assumption` records exactly what was assumed, and
 * verified_levels how many levels were computed rather than extrapolated.
 * bound = +infinity when the extrapolated level ratio is not < 1.
 */
struct RemainingMass {
    double bound = std::numeric_limits<double>::infinity();
    int verified_levels = 0;
    long long assumed_increment = 0;
    double level_ratio = std::numeric_limits<double>::infinity();
    std::string assumption;
};

RemainingMass remaining_mass_bound(const DigitStats& s, const MaskConstants& mc);

enum class VerdictKind { OrthogonalOnly, MaximalOrthogonal, SpectrumNumeric, NotSpectrumNumeric, Unknown };
std::string to_string(VerdictKind k);

struct CertifyConfig {
    long long terms = 4096;
    TruncationPolicy policy{};
    std::vector<double> xi_grid;        // empty -> default_xi_grid()
    double q_tolerance = 1e-3;          // complete side: max(|Q-1| - budget) <= this
    double identity_tolerance = 1e-10;  // depth-matched identity noise allowance
    double deficit_margin = 0.01;       // deficient side: Q + budget + remaining < 1 - margin
    CriterionConfig criteria{};
    long long maximality_window = 200;  // 0 disables the window sweep
    long long maximality_prefix = 64;
    long long budget = 1000000;
    double constants_resolution = 1e-4;
};

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    MeasureParams params{};
    std::string label;
    bool numerical_only = true;  // verdicts are evidence, never proof
    long long terms = 0;
    TruncationPolicy policy{};
    std::vector<QValue> grid;
    double worst_abs_dev = 0;  // max over grid of |Q-1| minus budget, clamped at 0
    std::optional<QValue> deficit_witness;
    double deficit_total = std::numeric_limits<double>::quiet_NaN();
    RemainingMass remaining;
    double identity_dev = std::numeric_limits<double>::quiet_NaN();
    int identity_level = 0;
    CriterionReport criteria;
    MaskConstants constants;
    MaximalityReport maximality;
    std::string explanation;
};

/**
 * Full pipeline: enumerate, exact pairwise orthogonality (violations throw
 * OrthogonalityFailure naming the pair), digit statistics and both series
 * criteria, completeness sums on the xi grid, and the depth-matched identity.
 * Synthesis: divergence criterion plus grid sums within tolerance of 1 (or,
 * for rules with finitely many tail digits per element, the exact
 * depth-matched identity, since the grid sums then converge only beyond any
 * desk horizon) -> SpectrumNumeric; convergence criterion plus a certified
 * total deficit Q + budget + remaining < 1 - margin -> NotSpectrumNumeric;
 * otherwise the maximality window refines Unknown into OrthogonalOnly
 * (survivors found) or MaximalOrthogonal (window clean).
 */
Verdict spectrum_verdict(const TreeMappingSpec& spec, const CertifyConfig& cfg = {});

enum class PairClass { AtMostFinitelyManyExponentials, InfinitelyManyOrthogonal, SpectralByConstruction };
std::string to_string(PairClass c);

struct Classification {
    int q = 0, b = 0, gcd = 0;
    PairClass kind = PairClass::AtMostFinitelyManyExponentials;
    bool unknown_spectrality = false;  // infinite orthogonal sets exist but completeness is open
    bool hadamard = false;             // unitary digit matrix evidence (q | b only)
    std::string note;
};

/**
 * Trichotomy by gcd(q, b): coprime -> every orthogonal set is finite;
 * gcd = q -> complete orthogonal set by construction (with unitary matrix
 * evidence); otherwise infinitely many orthogonal exponentials exist but
 * completeness is open.
 */
Classification classify_qb(int q, int b);

struct OrthogonalSearch {
    int size = 0;                 // max mutually orthogonal count in the window, 0 included
    std::vector<BigInt> witness;  // frequencies as numerators over q, sorted, 0 included
    int denominator = 1;          // witness values are numerator / denominator
    std::size_t vertices = 0;
    long long window = 0;
};

/**
 * Exact maximum mutually-orthogonal set within |frequency| <= window, by
 * branch-and-bound clique search (bitset adjacency, degeneracy order, greedy
 * colouring bound) on the graph of vanishing-set members.  Frequencies live
 * on the grid of q-th fractions.  Throws ResourceError when the window
 * yields too many vertices for exact search.
 */
OrthogonalSearch max_orthogonal_search(const MeasureParams& p, long long window);

struct DensityRow {
    double log2_R = 0;   // log2 of the window radius
    long long count = 0; // max points of the scaled set in any open window of length 2R
    double g_value = 0;  // g(R)
    double ratio = 0;    // count / g(R)
};

/**
 * Exact sliding-window counting densities of the scaled candidate set:
 * the sup over x of points in (x-R, x+R) equals the largest number of
 * consecutive sorted elements spanning strictly less than 2R (two-pointer
 * sweep on exact digit arithmetic; x_probes is unused and kept for interface
 * stability).  Radii may be far beyond native integers.
 */
std::vector<DensityRow> beurling_density(const SpectrumCandidate& c, const GrowthSpec& g,
                                         const std::vector<Expansion>& R_values, int x_probes = 0);

struct RegularizedComparison {
    Verdict base;
    Verdict regularized;
    bool agree = false;  // kinds equal, or at least one side inconclusive
};

/**
 * Certifies a spec against its regularization (all declared irregular tails
 * forced to zero).  The two scaled sets are complete or incomplete together,
 * so two conclusive verdicts must match; `agree` is false only on a
 * conclusive mismatch.
 */
RegularizedComparison compare_regularized(const TreeMappingSpec& spec, const CertifyConfig& cfg = {});

}  // namespace cantor
