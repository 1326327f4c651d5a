#include "cantor/numtheory.hpp"

#include <stdexcept>
#include <string>

namespace cantor {

std::vector<int> signed_expand(BigInt n, int b) {
    if (b < 3) throw std::invalid_argument("signed_expand: base must be >= 3, got " + std::to_string(b));
    std::vector<int> digits;
    while (n != 0) {
        // Unique digit in {-1..b-2} congruent to n mod b.
        BigInt c = ((n + 1) % b + b) % b - 1;
        digits.push_back(static_cast<int>(c));
        n = (n - c) / b;
    }
    return digits;
}

BigInt radix_eval(const std::vector<int>& digits, int b) {
    if (b < 2) throw std::invalid_argument("radix_eval: base must be >= 2, got " + std::to_string(b));
    BigInt v = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) v = v * b + *it;
    return v;
}

std::vector<int> q_adic_expand(BigInt n, int q) {
    if (q < 2) throw std::invalid_argument("q_adic_expand: base must be >= 2, got " + std::to_string(q));
    if (n < 1) throw std::invalid_argument("q_adic_expand: index must be >= 1");
    std::vector<int> digits;
    while (n != 0) {
        digits.push_back(static_cast<int>(n % q));
        n /= q;
    }
    return digits;
}

std::pair<int, BigInt> strip_base_powers(BigInt m, int b) {
    if (m == 0) throw std::invalid_argument("strip_base_powers: argument must be nonzero");
    if (b < 2) throw std::invalid_argument("strip_base_powers: base must be >= 2, got " + std::to_string(b));
    int e = 0;
    while (m % b == 0) {
        m /= b;
        ++e;
    }
    return {e, m};
}

bool in_zero_set(const BigInt& d, const MeasureParams& p) {
    const int r = p.r_value();
    if (d == 0) return false;
    if (d % r != 0) return false;
    auto [e, a] = strip_base_powers(d / r, p.b);
    (void)e;  // any power of b is allowed once r divides out
    return a % p.q != 0;
}

bool zero_numerator(const BigInt& n, int q, int b) {
    if (n == 0) return false;
    if (n % b != 0) return false;
    auto [e, a] = strip_base_powers(n, b);
    (void)e;
    return a % q != 0;
}

}  // namespace cantor
