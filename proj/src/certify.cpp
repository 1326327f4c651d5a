#include "cantor/certify.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numeric>
#include <sstream>
#include <thread>

namespace cantor {

namespace {

constexpr long long kBlock = 256;  // q_eval accumulation block; fixed for determinism

double big_to_double_sat(const BigInt& v) {
    static const BigInt cap = BigInt(1) << 63;
    if (v > cap) return 9.22e18;
    if (v < -cap) return -9.22e18;
    return v.convert_to<double>();
}

std::string describe_pair(const SpectrumCandidate& c, std::size_t i, std::size_t j) {
    std::ostringstream os;
    os << "indices (" << i << ", " << j << ")";
    auto di = to_decimal(c.lambda[i], c.params.b, 512);
    auto dj = to_decimal(c.lambda[j], c.params.b, 512);
    if (di && dj) os << ", values (" << *di << ", " << *dj << ")";
    return os.str();
}

// The scaled difference r*(a - b) lies in the vanishing set iff the digit gap
// at the lowest position where a and b differ is not a multiple of q: the
// difference equals b^p ((da-db) + b*T) with 0 < |da-db| < b, so the stripped
// numerator is congruent to da-db mod q (q divides b).
bool pair_orthogonal(const Expansion& a, const Expansion& b, int q) {
    auto fd = first_difference(a, b);
    if (!fd) return false;  // equal values: zero difference never vanishes the transform
    int gap = std::get<1>(*fd) - std::get<2>(*fd);
    return gap % q != 0;
}

unsigned thread_count() {
    if (const char* env = std::getenv("CANTOR_SPECTRA_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 64));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(hw, 16u);
}

bool conclusive(VerdictKind k) {
    return k == VerdictKind::SpectrumNumeric || k == VerdictKind::NotSpectrumNumeric;
}

int level_of_terms(long long terms, int q) {
    int level = 0;
    long long pw = 1;
    while (pw <= terms / q) {
        pw *= q;
        ++level;
    }
    return level;  // largest n with q^n <= terms
}

}  // namespace

BizeroResult check_bizero(const SpectrumCandidate& c) {
    BizeroResult r;
    int q = c.params.q;
    for (std::size_t i = 1; i < c.lambda.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (pair_orthogonal(c.lambda[i], c.lambda[j], q)) continue;
            r.ok = false;
            r.witness = {i, j};
            auto fd = first_difference(c.lambda[i], c.lambda[j]);
            std::ostringstream os;
            if (!fd) {
                os << "duplicate value at " << describe_pair(c, i, j);
            } else {
                os << "difference at " << describe_pair(c, i, j) << " has digit gap "
                   << (std::get<1>(*fd) - std::get<2>(*fd)) << " (multiple of " << q
                   << ") at its lowest differing position, so the scaled difference misses the "
                      "transform's vanishing set";
            }
            r.detail = os.str();
            return r;
        }
    }
    return r;
}

MaximalityReport check_maximality_window(const SpectrumCandidate& c, long long window, long long prefix) {
    MaximalityReport rep;
    rep.window = window;
    rep.prefix = std::min<long long>(prefix, static_cast<long long>(c.lambda.size()));
    int q = c.params.q;
    int b = c.params.b;
    BigInt r = c.params.r_value();
    for (long long m = -window; m <= window; ++m) {
        if (m == 0) continue;  // theta = 0 is the scaled zero element itself
        Expansion me = expansion_from_int(m, b);
        bool survives = true;
        for (long long i = 0; i < rep.prefix && survives; ++i) {
            auto fd = first_difference(me, c.lambda[i]);
            if (!fd) {
                survives = false;  // already in the prefix
            } else if ((std::get<1>(*fd) - std::get<2>(*fd)) % q == 0) {
                survives = false;  // difference misses the vanishing set
            }
        }
        if (survives) rep.survivors.push_back(r * m);
    }
    return rep;
}

IdentityReport qn_identity_check(const SpectrumCandidate& c, int level, const std::vector<double>& xis) {
    IdentityReport rep;
    rep.level = level;
    if (level < 0) throw std::invalid_argument("identity level must be >= 0");
    long long terms = 1;
    for (int i = 0; i < level; ++i) {
        if (terms > static_cast<long long>(1) << 56) throw ResourceError("identity level too deep");
        terms *= c.params.q;
    }
    rep.terms = terms;
    if (terms > static_cast<long long>(c.lambda.size()))
        throw std::out_of_range("candidate has fewer elements than the identity needs");
    int r = static_cast<int>(c.params.r_value());
    for (double xi : xis) {
        double sum = 0;
        for (long long k = 0; k < terms; ++k)
            sum += mu_n_sq_shifted(c.params, xi, c.lambda[static_cast<std::size_t>(k)], r, level).value_sq;
        double dev = std::fabs(sum - 1.0);
        if (dev > rep.max_abs_dev) {
            rep.max_abs_dev = dev;
            rep.worst_xi = xi;
        }
    }
    return rep;
}

QValue q_eval(const SpectrumCandidate& c, double xi, long long terms, const TruncationPolicy& t) {
    if (terms < 0 || terms > static_cast<long long>(c.lambda.size()))
        throw std::out_of_range("q_eval: terms exceeds available candidate elements");
    QValue out;
    out.xi = xi;
    out.terms = terms;
    if (terms == 0) return out;

    int r = static_cast<int>(c.params.r_value());
    long long blocks = (terms + kBlock - 1) / kBlock;
    std::vector<double> bsum(static_cast<std::size_t>(blocks), 0.0);
    std::vector<double> bbud(static_cast<std::size_t>(blocks), 0.0);

    auto run_block = [&](long long blk) {
        long long lo = blk * kBlock;
        long long hi = std::min(terms, lo + kBlock);
        double s = 0, e = 0;
        for (long long k = lo; k < hi; ++k) {
            ProductSq ps = mu_sq_shifted(c.params, xi, c.lambda[static_cast<std::size_t>(k)], r, t);
            s += ps.value_sq;
            e += ps.budget();
        }
        bsum[static_cast<std::size_t>(blk)] = s;
        bbud[static_cast<std::size_t>(blk)] = e;
    };

    unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(blocks));
    if (workers <= 1) {
        for (long long blk = 0; blk < blocks; ++blk) run_block(blk);
    } else {
        std::vector<std::future<void>> fs;
        fs.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            fs.push_back(std::async(std::launch::async, [&, w] {
                for (long long blk = w; blk < blocks; blk += workers) run_block(blk);
            }));
        }
        for (auto& f : fs) f.get();
    }

    // Fixed pairwise reduction tree over block sums: the float result does not
    // depend on how blocks were distributed over threads.
    std::size_t n = bsum.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) {
            bsum[i] += bsum[i + half];
            bbud[i] += bbud[i + half];
        }
        n = half;
    }
    out.Q = bsum[0];
    // Summation rounding: at most log2(#blocks)+block additions of magnitude <= Q.
    double add_noise = (std::log2(static_cast<double>(blocks)) + kBlock) * DBL_EPSILON * std::max(out.Q, 1.0);
    out.error_budget = bbud[0] + add_noise;
    return out;
}

std::vector<double> default_xi_grid() {
    std::vector<double> g;
    g.reserve(34);
    for (int j = 1; j <= 32; ++j) g.push_back(j / 64.0);
    g.push_back(1e-2);
    g.push_back(1e-3);
    return g;
}

std::string to_string(Conclusion c) {
    switch (c) {
        case Conclusion::SatisfiesI: return "satisfies-divergence-criterion";
        case Conclusion::SatisfiesII: return "satisfies-convergence-criterion";
        case Conclusion::Neither: return "neither";
        case Conclusion::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<long long> default_alpha(const DigitStats& s, int horizon) {
    std::vector<long long> alpha;
    if (horizon < 1 || s.levels < 1) return alpha;
    alpha.push_back(1);
    BigInt limit = horizon;
    for (long long n = 1;; ++n) {
        BigInt next = n + s.M(static_cast<int>(alpha.back()));
        if (next > limit || next <= alpha.back()) break;
        alpha.push_back(next.convert_to<long long>());
    }
    return alpha;
}

CriterionReport criterion_report(const DigitStats& s, const MaskConstants& mc,
                                 const std::vector<long long>& alpha, int horizon,
                                 const CriterionConfig& cfg) {
    if (horizon > s.levels) throw std::out_of_range("criterion horizon exceeds available stats");
    CriterionReport rep;
    rep.horizon = horizon;
    rep.c1_interval = {mc.c_min_lo, mc.c_min_hi};
    rep.c2_interval = {mc.c_max_lo, mc.c_max_hi};
    double c1 = mc.c1();
    double c2 = mc.c2();

    for (long long a : alpha) {
        if (a < 1 || a > horizon) break;
        if (!rep.alpha.empty() && a <= rep.alpha.back()) break;
        rep.alpha.push_back(a);
    }
    double sum_i = 0;
    for (std::size_t n = 0; n + 1 < rep.alpha.size(); ++n) {
        int lo = static_cast<int>(rep.alpha[n]);
        int hi = static_cast<int>(rep.alpha[n + 1]);
        rep.gaps.push_back(static_cast<double>(hi) - big_to_double_sat(s.M(lo)));
        long long w = s.Nstar_window(lo, hi);
        rep.window_exponents.push_back(w);
        sum_i += std::pow(c1, static_cast<double>(w));
        rep.sums_i.push_back(sum_i);
    }
    double sum_ii = 0;
    for (int n = 0; n < horizon; ++n) {
        long long l = s.Lstar(n);
        rep.level_exponents.push_back(l);
        double term = std::pow(c2, static_cast<double>(l));
        rep.terms_ii.push_back(term);
        sum_ii += term;
        rep.sums_ii.push_back(sum_ii);
    }

    std::size_t windows = rep.gaps.size();
    bool literal_i = windows >= static_cast<std::size_t>(cfg.min_windows) &&
                     rep.gaps.back() >= cfg.gap_threshold &&
                     std::is_sorted(rep.gaps.begin(), rep.gaps.end()) &&
                     rep.sums_i.back() >= cfg.sum_threshold;
    bool constant_exponents =
        windows >= static_cast<std::size_t>(cfg.min_windows) &&
        std::adjacent_find(rep.window_exponents.begin(), rep.window_exponents.end(),
                           std::not_equal_to<>()) == rep.window_exponents.end() &&
        std::adjacent_find(rep.gaps.begin(), rep.gaps.end(), std::greater_equal<>()) == rep.gaps.end();
    bool structural = cfg.structural_sup_nstar.has_value();
    bool evidence_i = literal_i || constant_exponents || structural;

    bool evidence_ii = false;
    if (rep.terms_ii.size() >= std::max<std::size_t>(2, static_cast<std::size_t>(cfg.min_windows))) {
        evidence_ii = true;
        for (std::size_t n = 0; n + 1 < rep.terms_ii.size(); ++n)
            if (!(rep.terms_ii[n + 1] <= cfg.ratio_cap * rep.terms_ii[n])) evidence_ii = false;
    }

    std::ostringstream why;
    if (evidence_i && evidence_ii) {
        rep.conclusion = Conclusion::Inconclusive;
        why << "conflicting evidence for divergence and convergence";
    } else if (evidence_i) {
        rep.conclusion = Conclusion::SatisfiesI;
        if (literal_i)
            why << "gaps reach " << rep.gaps.back() << " (threshold " << cfg.gap_threshold
                << ") and the c1 partial sum reaches " << rep.sums_i.back();
        else if (constant_exponents)
            why << "window exponents are constant (" << rep.window_exponents.front()
                << "), so the c1 series has constant positive terms, and the gaps increase strictly";
        if (structural) {
            if (literal_i || constant_exponents) why << "; ";
            why << "rule structure bounds every tail digit count by " << *cfg.structural_sup_nstar;
        }
    } else if (evidence_ii) {
        rep.conclusion = Conclusion::SatisfiesII;
        why << "c2 level terms decay geometrically (every ratio <= " << cfg.ratio_cap
            << "), so the series converges";
    } else if (windows >= static_cast<std::size_t>(cfg.min_windows) && rep.terms_ii.size() >= 2) {
        rep.conclusion = Conclusion::Neither;
        why << "neither the divergence nor the convergence thresholds are met on this horizon";
    } else {
        rep.conclusion = Conclusion::Inconclusive;
        why << "horizon too short: " << windows << " complete window(s)";
    }
    rep.detail = why.str();
    return rep;
}

RemainingMass remaining_mass_bound(const DigitStats& s, const MaskConstants& mc) {
    RemainingMass rm;
    rm.verified_levels = s.levels;
    if (s.levels < 3) {
        rm.assumption = "too few levels to extrapolate the tail exponents";
        return rm;
    }
    long long inc = std::numeric_limits<long long>::max();
    int lookback = std::min(3, s.levels - 1);
    for (int n = s.levels - lookback; n < s.levels; ++n) inc = std::min(inc, s.Lstar(n) - s.Lstar(n - 1));
    if (inc < 0) {
        rm.assumption = "level tail exponents are not monotone; no extrapolation";
        return rm;
    }
    rm.assumed_increment = inc;
    double c2 = mc.c2();
    double ratio = s.q * std::pow(c2, static_cast<double>(inc));
    rm.level_ratio = ratio;
    std::ostringstream as;
    as << "assumes the per-level minimum tail exponent keeps growing by >= " << inc
       << " beyond level " << (s.levels - 1) << " (observed over the last " << lookback
       << " level increments)";
    rm.assumption = as.str();
    if (ratio >= 1) return rm;  // bound stays infinite: per-level mass does not contract
    double first =
        (s.q - 1.0) * std::pow(static_cast<double>(s.q), static_cast<double>(s.levels)) *
        std::pow(c2, static_cast<double>(s.Lstar(s.levels - 1) + inc));
    rm.bound = first / (1.0 - ratio);
    return rm;
}

std::string to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::OrthogonalOnly: return "orthogonal-only";
        case VerdictKind::MaximalOrthogonal: return "maximal-orthogonal";
        case VerdictKind::SpectrumNumeric: return "spectrum-numeric";
        case VerdictKind::NotSpectrumNumeric: return "not-spectrum-numeric";
        case VerdictKind::Unknown: return "unknown";
    }
    return "?";
}

Verdict spectrum_verdict(const TreeMappingSpec& spec, const CertifyConfig& cfg) {
    Verdict v;
    v.params = spec.params;
    v.label = spec.label;
    v.terms = cfg.terms;
    v.policy = cfg.policy;

    SpectrumCandidate c = enumerate_candidate(spec, cfg.terms, cfg.budget);
    BizeroResult bz = check_bizero(c);
    if (!bz.ok) throw OrthogonalityFailure("pairwise orthogonality failed: " + bz.detail);

    int L = level_of_terms(cfg.terms, spec.params.q);
    DigitStats st = stats(c, L);
    v.constants = compute_mask_constants(spec.params, cfg.constants_resolution);

    CriterionConfig crit_cfg = cfg.criteria;
    if (!crit_cfg.structural_sup_nstar) crit_cfg.structural_sup_nstar = structural_sup_nstar(spec);
    v.criteria = criterion_report(st, v.constants, default_alpha(st, L), L, crit_cfg);
    v.remaining = remaining_mass_bound(st, v.constants);

    std::vector<double> grid = cfg.xi_grid.empty() ? default_xi_grid() : cfg.xi_grid;
    double worst = 0;
    std::size_t lowest = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        QValue qv = q_eval(c, grid[i], cfg.terms, cfg.policy);
        worst = std::max(worst, std::fabs(qv.Q - 1.0) - qv.error_budget);
        if (v.grid.empty() || qv.Q < v.grid[lowest].Q) lowest = i;
        v.grid.push_back(qv);
    }
    v.worst_abs_dev = std::max(0.0, worst);

    bool regular = spec.irregular.empty();
    if (regular) {
        v.identity_level = L;
        IdentityReport ir = qn_identity_check(c, L, grid);
        v.identity_dev = ir.max_abs_dev;
    }

    if (cfg.maximality_window > 0)
        v.maximality = check_maximality_window(c, cfg.maximality_window,
                                               std::min<long long>(cfg.maximality_prefix, cfg.terms));

    bool full_q_ok = v.worst_abs_dev <= cfg.q_tolerance;
    bool structural = crit_cfg.structural_sup_nstar.has_value() && regular &&
                      !std::isnan(v.identity_dev) && v.identity_dev <= cfg.identity_tolerance;
    bool bessel_ok = true;
    for (const QValue& qv : v.grid)
        if (qv.Q > 1.0 + qv.error_budget + cfg.q_tolerance) bessel_ok = false;

    bool spectrum_ok =
        v.criteria.conclusion == Conclusion::SatisfiesI && bessel_ok && (full_q_ok || structural);

    bool deficit_ok = false;
    if (!v.grid.empty() && std::isfinite(v.remaining.bound)) {
        const QValue& low = v.grid[lowest];
        double total = low.Q + low.error_budget + v.remaining.bound;
        if (total < 1.0 - cfg.deficit_margin) {
            deficit_ok = true;
            v.deficit_witness = low;
            v.deficit_total = total;
        }
    }
    bool notspectrum_ok = v.criteria.conclusion == Conclusion::SatisfiesII && deficit_ok;

    std::ostringstream ex;
    if (spectrum_ok && !notspectrum_ok) {
        v.kind = VerdictKind::SpectrumNumeric;
        ex << "divergence criterion holds (" << v.criteria.detail << ")";
        if (full_q_ok) {
            ex << "; grid sums match 1 within " << cfg.q_tolerance << " after budgets";
        } else {
            ex << "; grid sums are below 1 at this horizon (worst deviation " << v.worst_abs_dev
               << ") because each element carries a bounded number of far-out tail digits whose "
                  "mass returns only beyond any desk-scale term count; the depth-matched identity "
                  "is exact (deviation "
               << v.identity_dev << ")";
        }
        ex << "; numerical evidence, not a proof";
    } else if (notspectrum_ok && !spectrum_ok) {
        v.kind = VerdictKind::NotSpectrumNumeric;
        ex << "convergence criterion holds (" << v.criteria.detail << "); at xi = "
           << v.deficit_witness->xi << " the certified total " << v.deficit_total
           << " = Q + budget + remaining mass stays below " << (1.0 - cfg.deficit_margin) << "; "
           << v.remaining.assumption;
    } else if (spectrum_ok && notspectrum_ok) {
        v.kind = VerdictKind::Unknown;
        ex << "conflicting completeness evidence; treating as unknown";
    } else if (cfg.maximality_window > 0 && !v.maximality.survivors.empty()) {
        v.kind = VerdictKind::OrthogonalOnly;
        ex << "orthogonality holds but " << v.maximality.survivors.size()
           << " window frequencies are orthogonal to the whole prefix (first survivor "
           << v.maximality.survivors.front()
           << "); the set is provably not maximal within the window unless the prefix was too short";
    } else if (cfg.maximality_window > 0) {
        v.kind = VerdictKind::MaximalOrthogonal;
        ex << "orthogonal and window-maximal, but neither series criterion is conclusive ("
           << v.criteria.detail << ")";
    } else {
        v.kind = VerdictKind::Unknown;
        ex << "no conclusive completeness evidence (" << v.criteria.detail << ")";
    }
    v.explanation = ex.str();
    return v;
}

std::string to_string(PairClass c) {
    switch (c) {
        case PairClass::AtMostFinitelyManyExponentials: return "at-most-finitely-many-exponentials";
        case PairClass::InfinitelyManyOrthogonal: return "infinitely-many-orthogonal";
        case PairClass::SpectralByConstruction: return "spectral-by-construction";
    }
    return "?";
}

Classification classify_qb(int q, int b) {
    MeasureParams p = make_params(q, b);
    Classification cl;
    cl.q = q;
    cl.b = b;
    cl.gcd = std::gcd(q, b);
    if (cl.gcd == 1) {
        cl.kind = PairClass::AtMostFinitelyManyExponentials;
        cl.note = "q and b coprime: every mutually orthogonal set of exponentials is finite";
    } else if (cl.gcd == q) {
        cl.kind = PairClass::SpectralByConstruction;
        cl.hadamard = hadamard_check(q, static_cast<int>(p.r_value()));
        cl.note = "q divides b: the residue construction yields a complete orthogonal set";
    } else {
        cl.kind = PairClass::InfinitelyManyOrthogonal;
        cl.unknown_spectrality = true;
        cl.note = "1 < gcd(q,b) < q: infinite orthogonal sets exist; completeness is open";
    }
    return cl;
}

namespace {

// Exact max clique by branch and bound: vertices in degeneracy order, bitset
// candidate sets, greedy colouring as the bound.
class CliqueSolver {
  public:
    explicit CliqueSolver(const std::vector<std::vector<uint64_t>>& adj) : adj_(adj), n_(adj.size()) {}

    void solve(std::vector<int>& best) {
        std::vector<int> order = degeneracy_order();
        std::vector<uint64_t> cand(words(), 0);
        std::vector<int> cur;
        for (std::size_t idx = 0; idx < n_; ++idx) {
            int v = order[idx];
            std::fill(cand.begin(), cand.end(), 0);
            // candidates: neighbours of v that come later in the order
            for (std::size_t jdx = idx + 1; jdx < n_; ++jdx) {
                int u = order[jdx];
                if (test(adj_[static_cast<std::size_t>(v)], u)) set(cand, u);
            }
            cur.assign(1, v);
            expand(cand, cur);
        }
        best = best_;
    }

  private:
    std::size_t words() const { return (n_ + 63) / 64; }
    static bool test(const std::vector<uint64_t>& s, int i) {
        return (s[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
    }
    static void set(std::vector<uint64_t>& s, int i) { s[static_cast<std::size_t>(i) >> 6] |= 1ull << (i & 63); }
    static void clear(std::vector<uint64_t>& s, int i) { s[static_cast<std::size_t>(i) >> 6] &= ~(1ull << (i & 63)); }

    std::vector<int> degeneracy_order() const {
        std::vector<int> deg(n_, 0), order;
        std::vector<char> removed(n_, 0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j && test(adj_[i], static_cast<int>(j))) ++deg[i];
        order.reserve(n_);
        for (std::size_t step = 0; step < n_; ++step) {
            int bestv = -1;
            for (std::size_t i = 0; i < n_; ++i)
                if (!removed[i] && (bestv < 0 || deg[i] < deg[static_cast<std::size_t>(bestv)]))
                    bestv = static_cast<int>(i);
            removed[static_cast<std::size_t>(bestv)] = 1;
            order.push_back(bestv);
            for (std::size_t j = 0; j < n_; ++j)
                if (!removed[j] && test(adj_[static_cast<std::size_t>(bestv)], static_cast<int>(j))) --deg[j];
        }
        return order;
    }

    void expand(std::vector<uint64_t>& cand, std::vector<int>& cur) {
        std::vector<int> verts;
        for (std::size_t w = 0; w < cand.size(); ++w) {
            uint64_t bits = cand[w];
            while (bits) {
                int i = static_cast<int>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
                verts.push_back(i);
                bits &= bits - 1;
            }
        }
        if (cur.size() > best_.size()) best_ = cur;
        if (verts.empty()) return;

        // greedy colouring bound, processed in reverse colour order
        std::vector<int> colour(verts.size(), 0);
        std::vector<std::vector<uint64_t>> classes;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            int v = verts[i];
            std::size_t k = 0;
            while (k < classes.size()) {
                bool clash = false;
                for (std::size_t w = 0; w < classes[k].size() && !clash; ++w)
                    if (classes[k][w] & adj_[static_cast<std::size_t>(v)][w]) clash = true;
                if (!clash) break;
                ++k;
            }
            if (k == classes.size()) classes.emplace_back(words(), 0);
            set(classes[k], v);
            colour[i] = static_cast<int>(k) + 1;
        }
        for (std::size_t i = verts.size(); i-- > 0;) {
            if (cur.size() + static_cast<std::size_t>(colour[i]) <= best_.size()) return;
            int v = verts[i];
            cur.push_back(v);
            std::vector<uint64_t> next(words());
            for (std::size_t w = 0; w < next.size(); ++w)
                next[w] = cand[w] & adj_[static_cast<std::size_t>(v)][w];
            // only vertices before i remain candidates (later ones already explored)
            std::vector<uint64_t> mask(words(), 0);
            for (std::size_t j = 0; j < i; ++j) set(mask, verts[j]);
            for (std::size_t w = 0; w < next.size(); ++w) next[w] &= mask[w];
            expand(next, cur);
            cur.pop_back();
            clear(cand, v);
        }
    }

    const std::vector<std::vector<uint64_t>>& adj_;
    std::size_t n_;
    std::vector<int> best_;
};

}  // namespace

OrthogonalSearch max_orthogonal_search(const MeasureParams& p, long long window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    OrthogonalSearch res;
    res.window = window;
    res.denominator = p.q;

    // Frequencies are x = k/q; x lies in the vanishing set iff k = b^n a with
    // n >= 1 and q not dividing a.  0 is orthogonal to every such x, so the
    // answer is 1 + (max clique among nonzero vertices).
    std::vector<BigInt> verts;
    BigInt kmax = BigInt(p.q) * window;
    for (BigInt k = -kmax; k <= kmax; ++k)
        if (!k.is_zero() && zero_numerator(k, p.q, p.b)) verts.push_back(k);
    res.vertices = verts.size();
    if (verts.size() > 20000) throw ResourceError("window produces too many vertices for exact clique search");
    if (verts.empty()) {
        res.size = 1;
        res.witness = {0};
        return res;
    }

    std::size_t n = verts.size();
    std::size_t w = (n + 63) / 64;
    std::vector<std::vector<uint64_t>> adj(n, std::vector<uint64_t>(w, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (zero_numerator(verts[i] - verts[j], p.q, p.b)) {
                adj[i][j >> 6] |= 1ull << (j & 63);
                adj[j][i >> 6] |= 1ull << (i & 63);
            }

    std::vector<int> best;
    CliqueSolver solver(adj);
    solver.solve(best);

    res.size = static_cast<int>(best.size()) + 1;
    res.witness.push_back(0);
    for (int v : best) res.witness.push_back(verts[static_cast<std::size_t>(v)]);
    std::sort(res.witness.begin(), res.witness.end());
    return res;
}

std::vector<DensityRow> beurling_density(const SpectrumCandidate& c, const GrowthSpec& g,
                                         const std::vector<Expansion>& R_values, int x_probes) {
    (void)x_probes;  // the sweep is exact; probing x is unnecessary
    int b = c.params.b;
    int r = static_cast<int>(c.params.r_value());

    std::vector<Expansion> scaled;
    scaled.reserve(c.lambda.size());
    for (const Expansion& e : c.lambda) scaled.push_back(expansion_scale(e, r, b));
    std::sort(scaled.begin(), scaled.end(),
              [](const Expansion& a, const Expansion& bb) { return expansion_compare(a, bb) < 0; });

    std::vector<DensityRow> table;
    for (const Expansion& R : R_values) {
        Expansion twoR = expansion_scale(R, 2, b);
        long long bestcount = scaled.empty() ? 0 : 1;
        std::size_t i = 0;
        for (std::size_t j = 0; j < scaled.size(); ++j) {
            while (i < j) {
                Expansion span = expansion_subtract(scaled[j], scaled[i], b);
                if (expansion_compare(span, twoR) < 0) break;
                ++i;
            }
            Expansion span = expansion_subtract(scaled[j], scaled[i], b);
            if (expansion_compare(span, twoR) < 0)
                bestcount = std::max<long long>(bestcount, static_cast<long long>(j - i) + 1);
        }
        DensityRow row;
        row.log2_R = expansion_log2(R, b);
        row.count = bestcount;
        row.g_value = g.eval_log2(row.log2_R);
        row.ratio = row.g_value > 0 ? static_cast<double>(bestcount) / row.g_value
                                    : std::numeric_limits<double>::infinity();
        table.push_back(row);
    }
    return table;
}

RegularizedComparison compare_regularized(const TreeMappingSpec& spec, const CertifyConfig& cfg) {
    RegularizedComparison rc;
    rc.base = spectrum_verdict(spec, cfg);
    rc.regularized = spectrum_verdict(regularize(spec), cfg);
    rc.agree = !(conclusive(rc.base.kind) && conclusive(rc.regularized.kind) &&
                 rc.base.kind != rc.regularized.kind);
    return rc;
}

}  // namespace cantor
