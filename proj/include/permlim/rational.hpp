#ifndef PERMLIM_RATIONAL_HPP
#define PERMLIM_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace permlim {

/// Exact arbitrary-precision fraction (always kept canonical).
using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1)
{
    Rational r{BigInt{std::to_string(num)}, BigInt{std::to_string(den)}};
    r.canonicalize();
    return r;
}

inline BigInt big(std::uint64_t v) { return BigInt{std::to_string(v)}; }

inline BigInt binomial(std::uint64_t n, std::uint64_t k)
{
    BigInt r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline std::uint64_t factorial(int k)
{
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

/// Parses "p/q", "p" or a finite decimal such as "0.25" exactly.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" for integers).
inline std::string to_string(const Rational& r) { return r.get_str(); }

}  // namespace permlim

#endif
