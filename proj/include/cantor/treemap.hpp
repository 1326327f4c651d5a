#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantor/expansion.hpp"
#include "cantor/fourier.hpp"
#include "cantor/params.hpp"

namespace cantor {

/** Enumeration/search budget exceeded; maps to CLI exit code 2. */
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** A node of the q-adic tree: letters in {0..q-1}; empty = root. */
using Word = std::vector<int>;

std::string word_string(const Word& w);

/** Letters of n >= 1 in base q, least significant first (last letter nonzero). */
Word word_from_index(const BigInt& n, int q);

/** Inverse of word_from_index; requires nonempty word with nonzero last letter. */
BigInt word_index(const Word& w, int q);

/**
 * Target growth function g for sparse spectra and density sweeps.
 *   log    : g(R) = log2(1 + R)
 *   pow:a  : g(R) = R^a   (sqrt = pow:0.5)
 *   linear : g(R) = R
 */
struct GrowthSpec {
    enum class Family { Log2_1p, Power, Linear };
    Family family = Family::Log2_1p;
    double exponent = 1.0;

    static GrowthSpec parse(const std::string& name);
    std::string name() const;
    double eval(double R) const;
    double eval_log2(double log2_R) const;  // g(R) given log2(R), for huge R
};

/**
 * Tail digit assignment tau(stem 0^l), l >= 1.  All kinds have finite
 * support on every stem (the mapping stays regular); values are multiples
 * of q inside the digit set, as forced at nodes whose last letter is 0.
 *
 *   AllZero     : always 0.
 *   SparsePowers: digit at the single absolute position m_n (n = stem index);
 *                 m_n from `growth` via b^{m_n} >= 2*h^{-1}(b^{n+1}), or the
 *                 explicit strictly increasing `m_seq`.
 *   LengthRamp  : for a stem of length s, `digit` at l = 1..ceil(rate*(s-1)).
 *   IndexLogLog : for stem index n, `digit` at l = 1..floor(log(log_q n)/log(base)).
 *   Custom      : finite table stem -> [(level, digit)].
 */
struct TailRule {
    enum class Kind { AllZero, SparsePowers, LengthRamp, IndexLogLog, Custom };
    Kind kind = Kind::AllZero;
    int digit = 0;
    std::optional<GrowthSpec> growth;
    std::vector<BigInt> m_seq;
    double ramp_rate = 0;
    double loglog_base = 0;
    std::map<Word, std::vector<std::pair<BigInt, int>>> custom;
};

/** A declared never-eventually-zero path: tau(stem 0^l) = tail_digit for all l >= 1. */
struct IrregularPath {
    Word stem;
    int tail_digit = 0;
};

/**
 * Finite description of a maximal tree mapping: default residue digits at
 * nonzero letters, a tail rule at eventually-zero continuations, explicit
 * node overrides, declared irregular paths, and stems whose tails have been
 * forced to zero by regularization.  Precedence at a node:
 * zeroed tail > override > irregular generator > tail rule.
 */
struct TreeMappingSpec {
    MeasureParams params;
    std::vector<int> base_residues;  // size q, base_residues[i] == i (mod q), [0] == 0
    TailRule tail_rule;
    std::map<Word, int> overrides;
    std::vector<IrregularPath> irregular;
    std::vector<Word> zero_tail_stems;
    std::string label;
};

struct ValidationIssue {
    std::string node;  // offending node/path in "$.field" or "[1,0,1]" form
    std::string message;
};
struct ValidationReport {
    bool ok = false;
    std::vector<ValidationIssue> issues;
};

/**
 * Checks the maximal-mapping clauses on all nodes to `depth`: the zero spine
 * is fixed at 0, every digit lies in the residue class of its node's last
 * letter, and a regular continuation exists from every node (structural:
 * finitely many irregular paths, finite-support tails).  Violations are
 * data, not exceptions.
 */
ValidationReport validate(const TreeMappingSpec& spec, int depth);

/** Digit at the node stem*0^zeros (stem canonical: empty or nonzero last letter). */
int tau_digit(const TreeMappingSpec& spec, const Word& stem, const BigInt& zeros);

/** Digit at an explicit node word (trailing zeros allowed). */
int tau(const TreeMappingSpec& spec, const Word& node);

/** m_n sequence of a SparsePowers rule (n >= 1). */
BigInt sparse_m(const TreeMappingSpec& spec, const BigInt& n);

struct Projection {
    bool regular = true;
    Expansion value;  // sum of tau over the path, digit k at position k-1
};

/** Projection of the path stem*0^inf; regular == false for declared irregular stems. */
Projection project(const TreeMappingSpec& spec, const Word& stem);

/** Finite prefix sum over the first |node| levels only (node may end in 0). */
BigInt node_prefix_value(const TreeMappingSpec& spec, const Word& node);

/**
 * Ordered enumeration of the pre-scaling frequency set.  Index n walks the
 * q-adic tree order; irregular stems are skipped while surviving elements
 * keep their original tree index.  N is the 1-based position of the top
 * nonzero digit (0 for the zero element), nstar the number of nonzero
 * digits past the stem length.
 */
struct SpectrumCandidate {
    MeasureParams params;
    std::vector<Expansion> lambda;
    std::vector<BigInt> N;
    std::vector<long long> nstar;
    std::vector<BigInt> tree_index;
    std::string source;
};

SpectrumCandidate enumerate_candidate(const TreeMappingSpec& spec, long long count, long long budget = 1000000);

/**
 * Per-level digit statistics over levels l < levels, level l covering
 * candidate indices [max(1, q^l), q^{l+1}).
 */
struct DigitStats {
    int q = 0;
    int levels = 0;
    std::vector<BigInt> max_N;
    std::vector<long long> max_Nstar;
    std::vector<long long> min_Nstar;

    BigInt M(int n) const;                        // max N_k, 1 <= k < q^n (1 <= n <= levels)
    long long Nstar_window(int m, int n) const;   // max N*_k, q^m <= k < q^n
    long long Lstar(int n) const;                 // min N*_k, q^n <= k < q^{n+1}
};

DigitStats stats(const SpectrumCandidate& c, int up_to_level);

/** Residue-identity mapping: digit i at letter i, all tails zero. */
TreeMappingSpec canonical_spec(const MeasureParams& p);

/**
 * Sparse construction: canonical stems plus one tail digit q at absolute
 * position m_n chosen so b^{m_n} >= 2 h^{-1}(b^{n+1}) with h = g; the scaled
 * set then meets any radius-R window in O(g(R)) points.
 */
TreeMappingSpec sparse_spec(const MeasureParams& p, const GrowthSpec& g);

/**
 * Tail runs of length ceil((1+epsilon) log_{1/c2} q^{s-1}) after every
 * length-s stem; the level minima L*_n then grow fast enough that
 * sum c2^{L*_n} converges and the scaled set cannot be complete.
 */
TreeMappingSpec nonspectrum_spec(const MeasureParams& p, double epsilon, const MaskConstants& mc);

/** Tail runs of floor(log_{c1^-2} log_q n) digits: slow enough to keep completeness. */
TreeMappingSpec slow_growth_spec(const MeasureParams& p, const MaskConstants& mc);

/** Zeroes the tails on the listed stems (default: all irregular paths). */
TreeMappingSpec regularize(const TreeMappingSpec& spec, const std::vector<Word>& paths);
TreeMappingSpec regularize(const TreeMappingSpec& spec);

/** Upper bound on sup_n N*_n derivable from the rule structure, if finite. */
std::optional<long long> structural_sup_nstar(const TreeMappingSpec& spec);

/**
 * Rebuilds mapping digits from an r-scaled orthogonal set via the signed
 * expansions of set/r: every witnessed node digit is recorded, tree nodes
 * (depth <= depth) with no witness are listed undetermined, and orthogonality
 * violations (same-residue digit clash, pairwise difference outside the
 * vanishing set) are reported with witness pairs.
 */
struct Reconstruction {
    bool ok = false;
    std::map<Word, int> assignments;
    std::vector<Word> undetermined;
    struct Violation {
        std::string kind;  // "difference" | "residue-clash"
        BigInt a, b;       // witnessing scaled elements
        std::string detail;
    };
    std::vector<Violation> violations;
};

Reconstruction mapping_from_set(const std::vector<BigInt>& lams, const MeasureParams& p, int depth);

/**
 * Enumeration of the subtree frequency set at node I: projections of I's
 * continuations re-based at depth |I|, the root path included exactly when
 * the mapping is regular on I*0^inf.
 */
SpectrumCandidate subtree_enumerate(const TreeMappingSpec& spec, const Word& I, long long count,
                                    long long budget = 1000000);

/** Window radius R = h^{-1}(b^s) for the density sweep, as an expansion. */
Expansion h_inverse_window(const GrowthSpec& g, const MeasureParams& p, int s);

}  // namespace cantor
