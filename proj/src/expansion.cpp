#include "cantor/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cantor {

namespace {

// Dense-tier cap: digit positions below this go into `low`, the rest into
// `high`.  Stems are short; only tail digits live at large positions.
constexpr std::size_t kLowCap = 4096;

void check_digit(int d, int b) {
    if (d == 0 || d < -1 || d > b - 2)
        throw std::invalid_argument("expansion: digit " + std::to_string(d) + " outside {-1..b-2}\\{0} for base " +
                                    std::to_string(b));
}

}  // namespace

int Expansion::sign() const {
    if (!high.empty()) return high.back().second > 0 ? 1 : -1;
    if (!low.empty()) return low.back() > 0 ? 1 : -1;
    return 0;
}

std::size_t Expansion::weight() const {
    std::size_t w = high.size();
    for (int16_t d : low)
        if (d != 0) ++w;
    return w;
}

std::optional<BigInt> Expansion::top_position() const {
    if (!high.empty()) return high.back().first;
    if (!low.empty()) return BigInt(low.size() - 1);
    return std::nullopt;
}

std::vector<std::pair<BigInt, int>> Expansion::terms() const {
    std::vector<std::pair<BigInt, int>> out;
    out.reserve(weight());
    for (std::size_t i = 0; i < low.size(); ++i)
        if (low[i] != 0) out.emplace_back(BigInt(i), low[i]);
    for (const auto& [p, d] : high) out.emplace_back(p, d);
    return out;
}

Expansion expansion_from_int(const BigInt& n, int b) {
    Expansion e;
    auto digits = signed_expand(n, b);
    e.low.assign(digits.begin(), digits.end());
    return e;
}

Expansion expansion_from_terms(const std::vector<std::pair<BigInt, int>>& terms, int b) {
    if (b < 3) throw std::invalid_argument("expansion: base must be >= 3");
    Expansion e;
    const BigInt* prev = nullptr;
    for (const auto& [pos, d] : terms) {
        if (pos < 0) throw std::invalid_argument("expansion: negative digit position");
        if (prev && !(*prev < pos)) throw std::invalid_argument("expansion: positions must strictly increase");
        prev = &pos;
        check_digit(d, b);
        if (pos < kLowCap) {
            std::size_t p = static_cast<std::size_t>(pos);
            if (e.low.size() <= p) e.low.resize(p + 1, 0);
            e.low[p] = static_cast<int16_t>(d);
        } else {
            e.high.emplace_back(pos, static_cast<int16_t>(d));
        }
    }
    return e;
}

int expansion_compare(const Expansion& a, const Expansion& b) {
    // The digit set has all |digit| <= b-1, so the highest differing digit
    // dominates everything below it; compare top-down.
    auto ta = a.terms();
    auto tb = b.terms();
    auto ia = ta.rbegin();
    auto ib = tb.rbegin();
    while (ia != ta.rend() || ib != tb.rend()) {
        if (ia == ta.rend()) return ib->second > 0 ? -1 : 1;
        if (ib == tb.rend()) return ia->second > 0 ? 1 : -1;
        if (ia->first != ib->first) {
            if (ia->first > ib->first) return ia->second > 0 ? 1 : -1;
            return ib->second > 0 ? -1 : 1;
        }
        if (ia->second != ib->second) return ia->second > ib->second ? 1 : -1;
        ++ia;
        ++ib;
    }
    return 0;
}

Expansion expansion_subtract(const Expansion& a, const Expansion& b, int base) {
    if (base < 3) throw std::invalid_argument("expansion: base must be >= 3");
    auto ta = a.terms();
    auto tb = b.terms();
    std::vector<std::pair<BigInt, int>> out;
    out.reserve(ta.size() + tb.size() + 2);

    std::size_t ia = 0, ib = 0;
    int carry = 0;
    std::optional<BigInt> carry_pos;  // position the pending carry applies to

    auto flush_carry_below = [&](const BigInt& next) {
        // The carry never re-propagates across an empty run: it lands one
        // position up as a digit in {-1, 1}, which is already canonical.
        while (carry != 0 && carry_pos && *carry_pos < next) {
            int c = ((carry + 1) % base + base) % base - 1;
            int up = (carry - c) / base;
            if (c != 0) out.emplace_back(*carry_pos, c);
            carry = up;
            *carry_pos += 1;
        }
    };

    while (ia < ta.size() || ib < tb.size() || carry != 0) {
        BigInt pos;
        bool have_term = false;
        if (ia < ta.size() && (ib >= tb.size() || ta[ia].first <= tb[ib].first)) {
            pos = ta[ia].first;
            have_term = true;
        } else if (ib < tb.size()) {
            pos = tb[ib].first;
            have_term = true;
        }
        if (!have_term) {
            // Only the carry remains.
            flush_carry_below(*carry_pos + 1 + 1);
            break;
        }
        flush_carry_below(pos);

        int delta = 0;
        if (ia < ta.size() && ta[ia].first == pos) delta += ta[ia++].second;
        if (ib < tb.size() && tb[ib].first == pos) delta -= tb[ib++].second;
        if (carry_pos && *carry_pos == pos) {
            delta += carry;
            carry = 0;
        }
        int c = ((delta + 1) % base + base) % base - 1;
        carry = (delta - c) / base;
        if (c != 0) out.emplace_back(pos, c);
        carry_pos = pos + 1;
    }
    return expansion_from_terms(out, base);
}

std::optional<std::tuple<BigInt, int, int>> first_difference(const Expansion& a, const Expansion& b) {
    auto ta = a.terms();
    auto tb = b.terms();
    std::size_t ia = 0, ib = 0;
    while (ia < ta.size() || ib < tb.size()) {
        if (ia == ta.size()) return std::make_tuple(tb[ib].first, 0, tb[ib].second);
        if (ib == tb.size()) return std::make_tuple(ta[ia].first, ta[ia].second, 0);
        if (ta[ia].first < tb[ib].first) return std::make_tuple(ta[ia].first, ta[ia].second, 0);
        if (tb[ib].first < ta[ia].first) return std::make_tuple(tb[ib].first, 0, tb[ib].second);
        if (ta[ia].second != tb[ib].second) return std::make_tuple(ta[ia].first, ta[ia].second, tb[ib].second);
        ++ia;
        ++ib;
    }
    return std::nullopt;
}

std::optional<BigInt> materialize(const Expansion& e, int b, unsigned max_bits) {
    auto top = e.top_position();
    if (!top) return BigInt(0);
    // Bits needed ~ top * log2(b) + 1; screen before any big pow.
    BigInt bit_bound = (*top + 1) * (64 - __builtin_clzll(static_cast<unsigned long long>(b))) + 1;
    if (bit_bound > max_bits) return std::nullopt;

    BigInt v = 0;
    BigInt pw = 1;
    BigInt at = 0;
    for (const auto& [pos, d] : e.terms()) {
        if (at < pos) {
            pw *= boost::multiprecision::pow(BigInt(b), static_cast<unsigned>(pos - at));
            at = pos;
        }
        v += pw * d;
    }
    return v;
}

std::optional<std::string> to_decimal(const Expansion& e, int b, unsigned max_bits) {
    auto v = materialize(e, b, max_bits);
    if (!v) return std::nullopt;
    return v->str();
}

Expansion expansion_scale(const Expansion& e, int factor, int base) {
    if (base < 3) throw std::invalid_argument("expansion: base must be >= 3");
    if (factor < 0 || factor > base)
        throw std::invalid_argument("expansion: scale factor outside [0, base]");
    if (factor == 0 || e.is_zero()) return Expansion{};
    if (factor == 1) return e;

    auto ts = e.terms();
    std::vector<std::pair<BigInt, int>> out;
    out.reserve(ts.size() + 4);
    int carry = 0;
    std::optional<BigInt> carry_pos;

    auto flush_carry_below = [&](const BigInt& next) {
        // |carry| <= base-1 here, so it settles within two positions.
        while (carry != 0 && carry_pos && *carry_pos < next) {
            int c = ((carry + 1) % base + base) % base - 1;
            int up = (carry - c) / base;
            if (c != 0) out.emplace_back(*carry_pos, c);
            carry = up;
            *carry_pos += 1;
        }
    };

    for (const auto& [pos, d] : ts) {
        flush_carry_below(pos);
        int v = d * factor;
        if (carry_pos && *carry_pos == pos) {
            v += carry;
            carry = 0;
        }
        int c = ((v + 1) % base + base) % base - 1;
        if (c != 0) out.emplace_back(pos, c);
        carry = (v - c) / base;
        carry_pos = pos + 1;
    }
    while (carry != 0 && carry_pos) {
        int c = ((carry + 1) % base + base) % base - 1;
        if (c != 0) out.emplace_back(*carry_pos, c);
        carry = (carry - c) / base;
        *carry_pos += 1;
    }
    return expansion_from_terms(out, base);
}

double expansion_log2(const Expansion& e, int base) {
    if (base < 3) throw std::invalid_argument("expansion: base must be >= 3");
    auto ts = e.terms();
    if (ts.empty()) return -std::numeric_limits<double>::infinity();
    // The top digit dominates: summing the top 64 terms relative to the top
    // position leaves a remainder below base^-63, and |acc| >= 1/(base-1).
    const double lg_b = std::log2(static_cast<double>(base));
    const BigInt& top = ts.back().first;
    double acc = 0;
    std::size_t lim = ts.size() > 64 ? ts.size() - 64 : 0;
    for (std::size_t i = ts.size(); i-- > lim;) {
        double rel = BigInt(ts[i].first - top).convert_to<double>();
        acc += static_cast<double>(ts[i].second) * std::exp2(rel * lg_b);
    }
    return std::log2(std::fabs(acc)) + top.convert_to<double>() * lg_b;
}

}  // namespace cantor
