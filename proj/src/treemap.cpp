#include "cantor/treemap.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cantor {

namespace {

// log2 of n >= 1, exact enough for level counts (top 53 bits).
double big_log2(const BigInt& n) {
    std::size_t k = boost::multiprecision::msb(n);
    if (k < 900) return std::log2(n.convert_to<double>());
    BigInt top = n >> (k - 52);
    return static_cast<double>(k - 52) + std::log2(top.convert_to<double>());
}

// Canonical stem of a node plus the length of its trailing zero run.
std::pair<Word, std::size_t> split_node(const Word& node) {
    std::size_t n = node.size();
    while (n > 0 && node[n - 1] == 0) --n;
    return {Word(node.begin(), node.begin() + n), node.size() - n};
}

bool letters_in_alphabet(const Word& w, int q) {
    for (int c : w)
        if (c < 0 || c >= q) return false;
    return true;
}

void check_letters(const Word& w, int q, const char* who) {
    if (!letters_in_alphabet(w, q)) throw std::invalid_argument(std::string(who) + ": letter outside {0..q-1}");
}

bool is_zeroed(const TreeMappingSpec& spec, const Word& stem) {
    return std::find(spec.zero_tail_stems.begin(), spec.zero_tail_stems.end(), stem) != spec.zero_tail_stems.end();
}

const IrregularPath* find_irregular(const TreeMappingSpec& spec, const Word& stem) {
    for (const auto& ip : spec.irregular)
        if (ip.stem == stem) return &ip;
    return nullptr;
}

long long ramp_len(double rate, std::size_t stem_len) {
    return static_cast<long long>(std::ceil(rate * static_cast<double>(stem_len - 1)));
}

long long loglog_len(const TailRule& rule, const BigInt& n, int q) {
    double lq = big_log2(n) / std::log2(static_cast<double>(q));
    if (!(lq > 1)) return 0;
    double c = std::floor(std::log(lq) / std::log(rule.loglog_base));
    return c < 0 ? 0 : static_cast<long long>(c);
}

// All zero-run lengths z >= 1 at which tau(stem 0^z) could be nonzero.
std::vector<BigInt> tail_support(const TreeMappingSpec& spec, const Word& stem) {
    std::vector<BigInt> zs;
    if (stem.empty()) return zs;
    const TailRule& rule = spec.tail_rule;
    const int q = spec.params.q;
    switch (rule.kind) {
        case TailRule::Kind::AllZero:
            break;
        case TailRule::Kind::SparsePowers: {
            BigInt m = sparse_m(spec, word_index(stem, q));
            BigInt z = m + 1 - static_cast<long long>(stem.size());
            if (z >= 1) zs.push_back(z);
            break;
        }
        case TailRule::Kind::LengthRamp: {
            long long len = ramp_len(rule.ramp_rate, stem.size());
            for (long long z = 1; z <= len; ++z) zs.emplace_back(z);
            break;
        }
        case TailRule::Kind::IndexLogLog: {
            long long len = loglog_len(rule, word_index(stem, q), q);
            for (long long z = 1; z <= len; ++z) zs.emplace_back(z);
            break;
        }
        case TailRule::Kind::Custom: {
            auto it = rule.custom.find(stem);
            if (it != rule.custom.end())
                for (const auto& [lvl, d] : it->second)
                    if (lvl >= 1) zs.push_back(lvl);
            break;
        }
    }
    for (const auto& [w, d] : spec.overrides) {
        if (w.size() <= stem.size()) continue;
        if (!std::equal(stem.begin(), stem.end(), w.begin())) continue;
        bool tail_zero = true;
        for (std::size_t i = stem.size(); i < w.size(); ++i)
            if (w[i] != 0) {
                tail_zero = false;
                break;
            }
        if (tail_zero) zs.emplace_back(w.size() - stem.size());
    }
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    return zs;
}

// Digits of the path node*0^inf strictly past tree depth `base`, re-based so
// depth base+1 maps to digit position 0.  nullopt when the path is declared
// irregular (its projection is not a usable frequency).
std::optional<Expansion> project_levels(const TreeMappingSpec& spec, const Word& node, std::size_t base) {
    auto [stem, zpad] = split_node(node);
    if (find_irregular(spec, stem) && !is_zeroed(spec, stem)) return std::nullopt;

    std::vector<std::pair<BigInt, int>> terms;
    Word sub;
    for (std::size_t k = 1; k <= node.size(); ++k) {
        if (node[k - 1] != 0) sub.assign(node.begin(), node.begin() + k);
        if (k <= base) continue;
        int d = tau_digit(spec, sub, BigInt(k - sub.size()));
        if (d != 0) terms.emplace_back(BigInt(k - 1 - base), d);
    }
    for (const BigInt& z : tail_support(spec, stem)) {
        if (z <= zpad) continue;
        int d = tau_digit(spec, stem, z);
        if (d != 0) terms.emplace_back(BigInt(stem.size()) + z - 1 - static_cast<long long>(base), d);
    }
    std::sort(terms.begin(), terms.end());
    return expansion_from_terms(terms, spec.params.b);
}

std::vector<int> identity_residues(int q) {
    std::vector<int> r(q);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

void require_divisible(const MeasureParams& p, const char* who) {
    if (!p.divides()) throw std::invalid_argument(std::string(who) + ": tree mappings need b to be a multiple of q");
}

void require_constants_match(const MeasureParams& p, const MaskConstants& mc, const char* who) {
    if (mc.q != p.q || mc.b != p.b)
        throw std::invalid_argument(std::string(who) + ": mask constants were computed for different parameters");
}

}  // namespace

std::string word_string(const Word& w) {
    std::string s = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(w[i]);
    }
    return s + "]";
}

Word word_from_index(const BigInt& n, int q) { return q_adic_expand(n, q); }

BigInt word_index(const Word& w, int q) {
    if (w.empty() || w.back() == 0) throw std::invalid_argument("word_index: not a canonical stem");
    check_letters(w, q, "word_index");
    return radix_eval(w, q);
}

GrowthSpec GrowthSpec::parse(const std::string& name) {
    GrowthSpec g;
    if (name == "log") {
        g.family = Family::Log2_1p;
        return g;
    }
    if (name == "linear") {
        g.family = Family::Linear;
        return g;
    }
    if (name == "sqrt") {
        g.family = Family::Power;
        g.exponent = 0.5;
        return g;
    }
    if (name.rfind("pow:", 0) == 0) {
        g.family = Family::Power;
        try {
            g.exponent = std::stod(name.substr(4));
        } catch (const std::exception&) {
            throw std::invalid_argument("growth: cannot parse exponent in '" + name + "'");
        }
        if (!std::isfinite(g.exponent) || !(g.exponent > 0) || g.exponent > 64)
            throw std::invalid_argument("growth: exponent must lie in (0, 64]");
        return g;
    }
    throw std::invalid_argument("growth: unknown family '" + name + "' (expected log | linear | sqrt | pow:<a>)");
}

std::string GrowthSpec::name() const {
    switch (family) {
        case Family::Log2_1p:
            return "log";
        case Family::Linear:
            return "linear";
        case Family::Power: {
            if (exponent == 0.5) return "sqrt";
            std::ostringstream o;
            o << "pow:" << exponent;
            return o.str();
        }
    }
    return "?";
}

double GrowthSpec::eval(double R) const {
    switch (family) {
        case Family::Log2_1p:
            return std::log2(1.0 + R);
        case Family::Power:
            return std::pow(R, exponent);
        case Family::Linear:
            return R;
    }
    return 0;
}

double GrowthSpec::eval_log2(double log2_R) const {
    switch (family) {
        case Family::Log2_1p:
            return log2_R < 500 ? std::log2(1.0 + std::exp2(log2_R)) : log2_R;
        case Family::Power:
            return std::exp2(exponent * log2_R);
        case Family::Linear:
            return std::exp2(log2_R);
    }
    return 0;
}

int tau_digit(const TreeMappingSpec& spec, const Word& stem, const BigInt& zeros) {
    if (zeros < 0) throw std::invalid_argument("tau: negative zero run");
    if (stem.empty()) return 0;  // the zero spine is pinned at 0
    if (stem.back() == 0) throw std::invalid_argument("tau: stem not canonical (trailing zero)");

    if (zeros > 0 && !spec.zero_tail_stems.empty() && is_zeroed(spec, stem)) return 0;

    for (const auto& [w, d] : spec.overrides) {
        if (BigInt(w.size()) != BigInt(stem.size()) + zeros) continue;
        if (!std::equal(stem.begin(), stem.end(), w.begin())) continue;
        bool tail_zero = true;
        for (std::size_t i = stem.size(); i < w.size(); ++i)
            if (w[i] != 0) {
                tail_zero = false;
                break;
            }
        if (tail_zero) return d;
    }

    if (zeros == 0) {
        int letter = stem.back();
        if (letter < 0 || letter >= spec.params.q || static_cast<int>(spec.base_residues.size()) != spec.params.q)
            throw std::invalid_argument("tau: letter outside the alphabet");
        return spec.base_residues[letter];
    }

    if (const IrregularPath* ip = find_irregular(spec, stem)) return ip->tail_digit;

    const TailRule& rule = spec.tail_rule;
    switch (rule.kind) {
        case TailRule::Kind::AllZero:
            return 0;
        case TailRule::Kind::SparsePowers: {
            BigInt m = sparse_m(spec, word_index(stem, spec.params.q));
            return (BigInt(stem.size()) + zeros == m + 1) ? rule.digit : 0;
        }
        case TailRule::Kind::LengthRamp:
            return (zeros <= ramp_len(rule.ramp_rate, stem.size())) ? rule.digit : 0;
        case TailRule::Kind::IndexLogLog:
            return (zeros <= loglog_len(rule, word_index(stem, spec.params.q), spec.params.q)) ? rule.digit : 0;
        case TailRule::Kind::Custom: {
            auto it = rule.custom.find(stem);
            if (it != rule.custom.end())
                for (const auto& [lvl, d] : it->second)
                    if (lvl == zeros) return d;
            return 0;
        }
    }
    return 0;
}

int tau(const TreeMappingSpec& spec, const Word& node) {
    check_letters(node, spec.params.q, "tau");
    auto [stem, zeros] = split_node(node);
    return tau_digit(spec, stem, BigInt(zeros));
}

BigInt sparse_m(const TreeMappingSpec& spec, const BigInt& n) {
    const TailRule& rule = spec.tail_rule;
    if (rule.kind != TailRule::Kind::SparsePowers) throw std::logic_error("sparse_m: rule has no sparse positions");
    if (n < 1) throw std::invalid_argument("sparse_m: index must be >= 1");
    if (!rule.m_seq.empty()) {
        if (n > static_cast<long long>(rule.m_seq.size()))
            throw ResourceError("sparse_m: explicit position table exhausted at index " + n.str());
        return rule.m_seq[n.convert_to<std::size_t>() - 1];
    }
    if (!rule.growth) throw std::invalid_argument("sparse_m: no growth family or position table");
    const int b = spec.params.b;
    switch (rule.growth->family) {
        case GrowthSpec::Family::Log2_1p: {
            // b^m >= 2*(2^(b^(n+1)) - 1) holds once m >= (b^(n+1)+1)*log_b(2).
            if (n > 4000000) throw ResourceError("sparse_m: position exceeds the representable range");
            BigInt B = boost::multiprecision::pow(BigInt(b), n.convert_to<unsigned>() + 1);
            if ((b & (b - 1)) == 0) {
                int e = 63 - __builtin_clzll(static_cast<unsigned long long>(b));
                return (B + e) / e;  // exact: b^m = 2^(e*m) >= 2^(B+1)
            }
            // Rational upper bound u/2^32 >= log_b(2) keeps the bound exact.
            BigInt u = BigInt(static_cast<unsigned long long>(std::floor(std::log(2.0) / std::log(static_cast<double>(b)) * 4294967296.0)) + 2);
            return ((B + 1) * u + 4294967295ULL) >> 32;
        }
        case GrowthSpec::Family::Power: {
            // b^m >= 2*b^((n+1)/a) holds once m >= (n+1)/a + 1.
            double a = rule.growth->exponent;
            BigInt u = BigInt(static_cast<unsigned long long>(std::floor(4294967296.0 / a)) + 2);
            BigInt m = (((n + 1) * u + 4294967295ULL) >> 32) + 1;
            if (a > 1) m += n + 1;  // keep the sequence strictly increasing
            return m;
        }
        case GrowthSpec::Family::Linear:
            return n + 2;  // b^(n+2) >= 2*b^(n+1)
    }
    throw std::logic_error("sparse_m: unreachable");
}

Projection project(const TreeMappingSpec& spec, const Word& stem) {
    check_letters(stem, spec.params.q, "project");
    if (!stem.empty() && stem.back() == 0)
        throw std::invalid_argument("project: stem not canonical (trailing zero)");
    auto e = project_levels(spec, stem, 0);
    if (!e) return {false, Expansion{}};
    return {true, std::move(*e)};
}

BigInt node_prefix_value(const TreeMappingSpec& spec, const Word& node) {
    check_letters(node, spec.params.q, "node_prefix_value");
    BigInt v = 0, pw = 1;
    Word sub;
    for (std::size_t k = 1; k <= node.size(); ++k) {
        if (node[k - 1] != 0) sub.assign(node.begin(), node.begin() + k);
        int d = tau_digit(spec, sub, BigInt(k - sub.size()));
        v += pw * d;
        pw *= spec.params.b;
    }
    return v;
}

ValidationReport validate(const TreeMappingSpec& spec, int depth) {
    if (depth < 0) throw std::invalid_argument("validate: negative depth");
    ValidationReport rep;
    auto issue = [&](std::string node, std::string msg) {
        rep.issues.push_back({std::move(node), std::move(msg)});
    };
    const int q = spec.params.q, b = spec.params.b;
    if (b % q != 0) issue("$.params", "b must be a multiple of q for maximal mappings");
    auto in_digits = [&](int d) { return d >= -1 && d <= b - 2; };

    if (static_cast<int>(spec.base_residues.size()) != q) {
        issue("$.base_residues", "expected exactly q digits");
    } else {
        if (spec.base_residues[0] != 0) issue("$.base_residues[0]", "letter-0 digit must be 0");
        for (int i = 0; i < q; ++i) {
            int d = spec.base_residues[i];
            std::string node = "$.base_residues[" + std::to_string(i) + "]";
            if (!in_digits(d))
                issue(node, "digit outside {-1..b-2}");
            else if (((d - i) % q + q) % q != 0)
                issue(node, "digit not congruent to its letter mod q");
        }
    }

    const TailRule& rule = spec.tail_rule;
    auto tail_digit_ok = [&](int d, const std::string& node) {
        if (d == 0 || d % q != 0 || !in_digits(d))
            issue(node, "tail digit must be a nonzero multiple of q in {-1..b-2}");
    };
    switch (rule.kind) {
        case TailRule::Kind::AllZero:
            break;
        case TailRule::Kind::SparsePowers: {
            tail_digit_ok(rule.digit, "$.tail_rule.digit");
            if (rule.m_seq.empty() && !rule.growth)
                issue("$.tail_rule", "sparse rule needs a growth family or explicit positions");
            if (rule.growth && rule.growth->family == GrowthSpec::Family::Power &&
                !(std::isfinite(rule.growth->exponent) && rule.growth->exponent > 0 && rule.growth->exponent <= 64))
                issue("$.tail_rule.growth", "power exponent outside (0, 64]");
            BigInt prev = 0;
            for (std::size_t i = 0; i < rule.m_seq.size(); ++i) {
                const BigInt& m = rule.m_seq[i];
                std::string node = "$.tail_rule.m_seq[" + std::to_string(i) + "]";
                if (m < 1) issue(node, "positions must be >= 1");
                if (i > 0 && m <= prev) issue(node, "positions must strictly increase");
                std::size_t len = word_from_index(BigInt(i + 1), q).size();
                if (m < static_cast<long long>(len)) issue(node, "position falls inside its stem");
                prev = m;
            }
            break;
        }
        case TailRule::Kind::LengthRamp:
            tail_digit_ok(rule.digit, "$.tail_rule.digit");
            if (!std::isfinite(rule.ramp_rate) || !(rule.ramp_rate > 0) || rule.ramp_rate > 1000)
                issue("$.tail_rule.ramp_rate", "rate must lie in (0, 1000]");
            break;
        case TailRule::Kind::IndexLogLog:
            tail_digit_ok(rule.digit, "$.tail_rule.digit");
            if (!std::isfinite(rule.loglog_base) || !(rule.loglog_base > 1))
                issue("$.tail_rule.loglog_base", "base must be > 1");
            break;
        case TailRule::Kind::Custom:
            for (const auto& [stem, entries] : rule.custom) {
                std::string node = word_string(stem);
                if (stem.empty() || !letters_in_alphabet(stem, q) || stem.back() == 0) {
                    issue(node, "custom stem not in canonical form");
                    continue;
                }
                for (const auto& [lvl, d] : entries) {
                    if (lvl < 1) issue(node, "custom tail level must be >= 1");
                    if (d != 0 && (d % q != 0 || !in_digits(d)))
                        issue(node, "custom tail digit must be a multiple of q in {-1..b-2}");
                }
            }
            break;
    }

    for (const auto& [w, d] : spec.overrides) {
        std::string node = word_string(w);
        if (w.empty()) {
            issue(node, "override at the root");
            continue;
        }
        if (!letters_in_alphabet(w, q)) {
            issue(node, "letter outside {0..q-1}");
            continue;
        }
        if (std::all_of(w.begin(), w.end(), [](int c) { return c == 0; })) {
            issue(node, "override on the zero spine");
            continue;
        }
        if (!in_digits(d))
            issue(node, "digit outside {-1..b-2}");
        else if (((d - w.back()) % q + q) % q != 0)
            issue(node, "digit not congruent to its letter mod q");
    }

    std::set<Word> seen;
    for (const auto& ip : spec.irregular) {
        std::string node = word_string(ip.stem);
        if (ip.stem.empty() || !letters_in_alphabet(ip.stem, q) || ip.stem.back() == 0) {
            issue(node, "irregular stem not in canonical form");
            continue;
        }
        if (!seen.insert(ip.stem).second) issue(node, "duplicate irregular stem");
        if (ip.tail_digit == 0 || ip.tail_digit % q != 0 || !in_digits(ip.tail_digit))
            issue(node, "irregular tail digit must be a nonzero multiple of q in {-1..b-2}");
        if (is_zeroed(spec, ip.stem)) issue(node, "stem is both irregular and zero-tailed");
    }
    for (const Word& z : spec.zero_tail_stems)
        if (z.empty() || !letters_in_alphabet(z, q) || z.back() == 0)
            issue(word_string(z), "zero-tail stem not in canonical form");

    // Full node sweep: every digit sits in the residue class of its letter
    // and the zero spine stays pinned.  Only run on structurally sane specs.
    double node_count = (std::pow(static_cast<double>(q), depth + 1) - q) / (q - 1);
    if (node_count > 2.5e6)
        throw ResourceError("validate: node sweep to depth " + std::to_string(depth) + " is too large");
    if (rep.issues.empty()) {
        Word w;
        bool spine = true;
        auto rec = [&](auto&& self, int remaining, bool on_spine) -> void {
            if (remaining == 0 || rep.issues.size() > 5000) return;
            for (int letter = 0; letter < q; ++letter) {
                w.push_back(letter);
                bool sp = on_spine && letter == 0;
                int d = tau(spec, w);
                if (sp) {
                    if (d != 0) issue(word_string(w), "zero-spine digit must be 0");
                } else if (!in_digits(d)) {
                    issue(word_string(w), "digit outside {-1..b-2}");
                } else if (((d - letter) % q + q) % q != 0) {
                    issue(word_string(w), "digit not congruent to its letter mod q");
                }
                self(self, remaining - 1, sp);
                w.pop_back();
            }
        };
        rec(rec, depth, spine);
    }
    rep.ok = rep.issues.empty();
    return rep;
}

SpectrumCandidate enumerate_candidate(const TreeMappingSpec& spec, long long count, long long budget) {
    if (count < 0) throw std::invalid_argument("enumerate: negative count");
    if (count > budget)
        throw ResourceError("enumerate: count " + std::to_string(count) + " exceeds budget " + std::to_string(budget));
    SpectrumCandidate c;
    c.params = spec.params;
    c.source = spec.label;
    if (count == 0) return c;
    c.lambda.reserve(static_cast<std::size_t>(count));
    c.lambda.push_back(Expansion{});
    c.N.emplace_back(0);
    c.nstar.push_back(0);
    c.tree_index.emplace_back(0);
    BigInt n = 0;
    long long scanned = 0;
    while (static_cast<long long>(c.lambda.size()) < count) {
        ++n;
        if (++scanned > budget)
            throw ResourceError("enumerate: budget of " + std::to_string(budget) + " stems exhausted");
        Word stem = word_from_index(n, spec.params.q);
        auto e = project_levels(spec, stem, 0);
        if (!e) continue;  // irregular stem: not a member
        auto top = e->top_position();
        c.N.push_back(top ? *top + 1 : BigInt(0));
        long long ns = 0;
        for (const auto& [pos, d] : e->terms())
            if (pos >= static_cast<long long>(stem.size())) ++ns;
        c.nstar.push_back(ns);
        c.lambda.push_back(std::move(*e));
        c.tree_index.push_back(n);
    }
    return c;
}

BigInt DigitStats::M(int n) const {
    if (n < 1 || n > levels) throw std::out_of_range("M: level out of range");
    BigInt mx = 0;
    for (int l = 0; l < n; ++l) mx = std::max(mx, max_N[l]);
    return mx;
}

long long DigitStats::Nstar_window(int m, int n) const {
    if (m < 0 || m >= n || n > levels) throw std::out_of_range("Nstar_window: bad level range");
    long long mx = LLONG_MIN;
    for (int l = m; l < n; ++l) mx = std::max(mx, max_Nstar[l]);
    return mx;
}

long long DigitStats::Lstar(int n) const {
    if (n < 0 || n >= levels) throw std::out_of_range("Lstar: level out of range");
    return min_Nstar[n];
}

DigitStats stats(const SpectrumCandidate& c, int up_to_level) {
    if (up_to_level < 1) throw std::invalid_argument("stats: need at least one level");
    const int q = c.params.q;
    BigInt need = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(up_to_level));
    if (need > static_cast<long long>(c.lambda.size()))
        throw std::invalid_argument("stats: candidate holds " + std::to_string(c.lambda.size()) +
                                    " elements, level " + std::to_string(up_to_level) + " needs " + need.str());
    DigitStats st;
    st.q = q;
    st.levels = up_to_level;
    long long lo = 1, hi = q;
    for (int l = 0; l < up_to_level; ++l) {
        BigInt mx = 0;
        long long mxs = LLONG_MIN, mns = LLONG_MAX;
        for (long long k = lo; k < hi; ++k) {
            mx = std::max(mx, c.N[static_cast<std::size_t>(k)]);
            mxs = std::max(mxs, c.nstar[static_cast<std::size_t>(k)]);
            mns = std::min(mns, c.nstar[static_cast<std::size_t>(k)]);
        }
        st.max_N.push_back(mx);
        st.max_Nstar.push_back(mxs);
        st.min_Nstar.push_back(mns);
        lo = hi;
        hi *= q;
    }
    return st;
}

TreeMappingSpec canonical_spec(const MeasureParams& p) {
    require_divisible(p, "canonical_spec");
    TreeMappingSpec s;
    s.params = p;
    s.base_residues = identity_residues(p.q);
    s.tail_rule.kind = TailRule::Kind::AllZero;
    s.label = "canonical";
    return s;
}

TreeMappingSpec sparse_spec(const MeasureParams& p, const GrowthSpec& g) {
    require_divisible(p, "sparse_spec");
    if (p.r_value() < 2) throw std::invalid_argument("sparse_spec: nonzero tail digits need b >= 2q");
    TreeMappingSpec s;
    s.params = p;
    s.base_residues = identity_residues(p.q);
    s.tail_rule.kind = TailRule::Kind::SparsePowers;
    s.tail_rule.digit = p.q;
    s.tail_rule.growth = g;
    s.label = "sparse-" + g.name();
    return s;
}

TreeMappingSpec nonspectrum_spec(const MeasureParams& p, double epsilon, const MaskConstants& mc) {
    require_divisible(p, "nonspectrum_spec");
    if (p.r_value() < 2) throw std::invalid_argument("nonspectrum_spec: nonzero tail digits need b >= 2q");
    require_constants_match(p, mc, "nonspectrum_spec");
    if (!std::isfinite(epsilon) || !(epsilon > 0) || epsilon > 64)
        throw std::invalid_argument("nonspectrum_spec: epsilon must lie in (0, 64]");
    // Tail runs of ceil(rate*(len-1)) force c2^(L*_n) to decay like q^-(1+eps)n.
    double rate = (1.0 + epsilon) * std::log(static_cast<double>(p.q)) / std::log(1.0 / mc.c2());
    if (!std::isfinite(rate) || !(rate > 0) || rate > 1000)
        throw std::invalid_argument("nonspectrum_spec: derived ramp rate out of range (0, 1000]");
    TreeMappingSpec s;
    s.params = p;
    s.base_residues = identity_residues(p.q);
    s.tail_rule.kind = TailRule::Kind::LengthRamp;
    s.tail_rule.digit = p.q;
    s.tail_rule.ramp_rate = rate;
    std::ostringstream o;
    o << "nonspectrum-eps" << epsilon;
    s.label = o.str();
    return s;
}

TreeMappingSpec slow_growth_spec(const MeasureParams& p, const MaskConstants& mc) {
    require_divisible(p, "slow_growth_spec");
    if (p.r_value() < 2) throw std::invalid_argument("slow_growth_spec: nonzero tail digits need b >= 2q");
    require_constants_match(p, mc, "slow_growth_spec");
    double base = 1.0 / (mc.c1() * mc.c1());
    if (!std::isfinite(base) || !(base > 1))
        throw std::invalid_argument("slow_growth_spec: degenerate lower mask constant");
    TreeMappingSpec s;
    s.params = p;
    s.base_residues = identity_residues(p.q);
    s.tail_rule.kind = TailRule::Kind::IndexLogLog;
    s.tail_rule.digit = p.q;
    s.tail_rule.loglog_base = base;
    s.label = "slow-growth";
    return s;
}

TreeMappingSpec regularize(const TreeMappingSpec& spec, const std::vector<Word>& paths) {
    TreeMappingSpec out = spec;
    for (const Word& w : paths) {
        if (w.empty() || w.back() == 0)
            throw std::invalid_argument("regularize: path " + word_string(w) + " not in canonical stem form");
        check_letters(w, spec.params.q, "regularize");
        out.irregular.erase(
            std::remove_if(out.irregular.begin(), out.irregular.end(), [&](const IrregularPath& ip) { return ip.stem == w; }),
            out.irregular.end());
        if (std::find(out.zero_tail_stems.begin(), out.zero_tail_stems.end(), w) == out.zero_tail_stems.end())
            out.zero_tail_stems.push_back(w);
    }
    std::sort(out.zero_tail_stems.begin(), out.zero_tail_stems.end());
    return out;
}

TreeMappingSpec regularize(const TreeMappingSpec& spec) {
    std::vector<Word> paths;
    paths.reserve(spec.irregular.size());
    for (const auto& ip : spec.irregular) paths.push_back(ip.stem);
    return regularize(spec, paths);
}

std::optional<long long> structural_sup_nstar(const TreeMappingSpec& spec) {
    long long base = 0;
    switch (spec.tail_rule.kind) {
        case TailRule::Kind::AllZero:
            base = 0;
            break;
        case TailRule::Kind::SparsePowers:
            base = 1;
            break;
        case TailRule::Kind::LengthRamp:
        case TailRule::Kind::IndexLogLog:
            return std::nullopt;  // tail runs grow without bound
        case TailRule::Kind::Custom:
            for (const auto& [stem, entries] : spec.tail_rule.custom) {
                long long c = 0;
                for (const auto& [lvl, d] : entries)
                    if (d != 0) ++c;
                base = std::max(base, c);
            }
            break;
    }
    // Overrides past a stem add at most their own count of nonzero digits.
    std::map<Word, long long> extra;
    long long extra_max = 0;
    for (const auto& [w, d] : spec.overrides) {
        if (d == 0) continue;
        auto [stem, zeros] = split_node(w);
        if (zeros == 0) continue;
        extra_max = std::max(extra_max, ++extra[stem]);
    }
    return base + extra_max;
}

Reconstruction mapping_from_set(const std::vector<BigInt>& lams, const MeasureParams& p, int depth) {
    if (!p.divides()) throw std::invalid_argument("mapping_from_set: b must be a multiple of q");
    if (depth < 1) throw std::invalid_argument("mapping_from_set: depth must be >= 1");
    std::vector<BigInt> set = lams;
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (!std::binary_search(set.begin(), set.end(), BigInt(0)))
        throw std::invalid_argument("mapping_from_set: the set must contain 0");
    const int r = p.r_value(), q = p.q, b = p.b;
    for (const BigInt& v : set)
        if (v % r != 0)
            throw std::invalid_argument("mapping_from_set: element " + v.str() + " is not divisible by b/q");
    if (set.size() > 20000) throw ResourceError("mapping_from_set: pairwise check too large");

    Reconstruction rec;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            if (!in_zero_set(set[j] - set[i], p))
                rec.violations.push_back({"difference", set[i], set[j],
                                          "difference " + BigInt(set[j] - set[i]).str() +
                                              " misses the transform's vanishing set"});

    std::vector<std::vector<int>> digs;
    digs.reserve(set.size());
    for (const BigInt& v : set) digs.push_back(signed_expand(v / r, b));
    auto digit_at = [&](std::size_t idx, int pos) {
        const auto& d = digs[idx];
        return pos < static_cast<int>(d.size()) ? d[static_cast<std::size_t>(pos)] : 0;
    };

    Word node;
    auto walk = [&](auto&& self, const std::vector<std::size_t>& members, int level) -> void {
        if (level == depth) return;
        std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(q));
        std::vector<int> first_digit(static_cast<std::size_t>(q), INT_MIN);
        for (std::size_t idx : members) {
            int d = digit_at(idx, level);
            int res = ((d % q) + q) % q;
            auto& bucket = buckets[static_cast<std::size_t>(res)];
            if (bucket.empty()) {
                first_digit[static_cast<std::size_t>(res)] = d;
            } else if (first_digit[static_cast<std::size_t>(res)] != d) {
                node.push_back(res);
                rec.violations.push_back({"residue-clash", set[bucket.front()], set[idx],
                                          "node " + word_string(node) + ": digits " +
                                              std::to_string(first_digit[static_cast<std::size_t>(res)]) + " vs " +
                                              std::to_string(d)});
                node.pop_back();
            }
            bucket.push_back(idx);
        }
        for (int res = 0; res < q; ++res) {
            node.push_back(res);
            const auto& bucket = buckets[static_cast<std::size_t>(res)];
            if (bucket.empty()) {
                rec.undetermined.push_back(node);  // root of an unwitnessed subtree
            } else {
                rec.assignments[node] = first_digit[static_cast<std::size_t>(res)];
                self(self, bucket, level + 1);
            }
            node.pop_back();
        }
    };
    std::vector<std::size_t> all(set.size());
    std::iota(all.begin(), all.end(), 0);
    walk(walk, all, 0);
    rec.ok = rec.violations.empty();
    return rec;
}

SpectrumCandidate subtree_enumerate(const TreeMappingSpec& spec, const Word& I, long long count, long long budget) {
    check_letters(I, spec.params.q, "subtree_enumerate");
    if (count < 0) throw std::invalid_argument("subtree_enumerate: negative count");
    if (count > budget)
        throw ResourceError("subtree_enumerate: count " + std::to_string(count) + " exceeds budget " +
                            std::to_string(budget));
    SpectrumCandidate c;
    c.params = spec.params;
    c.source = spec.label + "@" + word_string(I);
    if (count == 0) return c;

    auto push = [&](std::optional<Expansion> e, const BigInt& idx, std::size_t stem_len) {
        auto top = e->top_position();
        c.N.push_back(top ? *top + 1 : BigInt(0));
        long long ns = 0;
        for (const auto& [pos, d] : e->terms())
            if (pos >= static_cast<long long>(stem_len)) ++ns;
        c.nstar.push_back(ns);
        c.lambda.push_back(std::move(*e));
        c.tree_index.push_back(idx);
    };

    // The subtree's own zero path contributes exactly when the mapping is
    // regular along I*0^inf.
    if (auto e = project_levels(spec, I, I.size())) push(std::move(e), BigInt(0), 0);

    BigInt j = 0;
    long long scanned = 0;
    while (static_cast<long long>(c.lambda.size()) < count) {
        ++j;
        if (++scanned > budget)
            throw ResourceError("subtree_enumerate: budget of " + std::to_string(budget) + " stems exhausted");
        Word full = I;
        Word J = word_from_index(j, spec.params.q);
        full.insert(full.end(), J.begin(), J.end());
        auto e = project_levels(spec, full, I.size());
        if (!e) continue;
        push(std::move(e), j, J.size());
    }
    return c;
}

Expansion h_inverse_window(const GrowthSpec& g, const MeasureParams& p, int s) {
    if (s < 0) throw std::invalid_argument("h_inverse_window: negative scale");
    const int b = p.b;
    switch (g.family) {
        case GrowthSpec::Family::Log2_1p: {
            // R = 2^(b^s) - 1
            BigInt yb = boost::multiprecision::pow(BigInt(b), static_cast<unsigned>(s));
            if (yb > 50000000) throw ResourceError("h_inverse_window: radius 2^(b^s) too large at s=" + std::to_string(s));
            unsigned long long y = yb.convert_to<unsigned long long>();
            if ((b & (b - 1)) == 0) {
                int e = 63 - __builtin_clzll(static_cast<unsigned long long>(b));
                // 2^y = 2^(y mod e) * b^(y/e); the leading digit 2^(y mod e) <= b/2
                Expansion p2 = expansion_from_terms({{BigInt(y / static_cast<unsigned>(e)), 1 << (y % static_cast<unsigned>(e))}}, b);
                return expansion_subtract(p2, expansion_from_int(BigInt(1), b), b);
            }
            if (y > 120000)
                throw ResourceError("h_inverse_window: radius too large for base " + std::to_string(b));
            return expansion_from_int((BigInt(1) << y) - 1, b);
        }
        case GrowthSpec::Family::Power: {
            double Rd = std::pow(static_cast<double>(b), static_cast<double>(s) / g.exponent);
            if (!(Rd < 9e17)) throw ResourceError("h_inverse_window: radius b^(s/a) too large");
            return expansion_from_int(BigInt(static_cast<unsigned long long>(std::ceil(Rd))), b);
        }
        case GrowthSpec::Family::Linear:
            return expansion_from_terms({{BigInt(s), 1}}, b);
    }
    throw std::logic_error("h_inverse_window: unreachable");
}

}  // namespace cantor
