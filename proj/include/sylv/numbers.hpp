#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "sylv/error.hpp"

namespace sylv {

/// Arbitrary-precision signed integer.
using BigInt = boost::multiprecision::mpz_int;

/// Arbitrary-precision rational, canonical after every construction and operation
/// (GMP keeps gcd(|num|, den) = 1 and den > 0).
using BigRat = boost::multiprecision::mpq_rational;

inline BigInt numerator_of(const BigRat& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator_of(const BigRat& q) { return boost::multiprecision::denominator(q); }

inline BigRat make_rat(const BigInt& num, const BigInt& den)
{
    if (den == 0) throw DomainError("zero denominator");
    return BigRat(num, den);
}

inline bool is_integral(const BigRat& q) { return denominator_of(q) == 1; }

inline BigInt gcd(const BigInt& a, const BigInt& b)
{
    BigInt r;
    mpz_gcd(r.backend().data(), a.backend().data(), b.backend().data());
    return r;
}

inline BigInt lcm(const BigInt& a, const BigInt& b)
{
    BigInt r;
    mpz_lcm(r.backend().data(), a.backend().data(), b.backend().data());
    return r;
}

/// floor(a / b), b != 0
inline BigInt floor_div(const BigInt& a, const BigInt& b)
{
    if (b == 0) throw DomainError("division by zero");
    BigInt r;
    mpz_fdiv_q(r.backend().data(), a.backend().data(), b.backend().data());
    return r;
}

/// ceil(a / b), b != 0
inline BigInt ceil_div(const BigInt& a, const BigInt& b)
{
    if (b == 0) throw DomainError("division by zero");
    BigInt r;
    mpz_cdiv_q(r.backend().data(), a.backend().data(), b.backend().data());
    return r;
}

inline int sign(const BigInt& a) { return mpz_sgn(a.backend().data()); }
inline int sign(const BigRat& a) { return mpq_sgn(a.backend().data()); }

/// Decimal "123" / "-45".
inline std::string to_string(const BigInt& a) { return a.str(); }

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const BigRat& q)
{
    if (is_integral(q)) return numerator_of(q).str();
    return numerator_of(q).str() + "/" + denominator_of(q).str();
}

inline BigInt parse_bigint(std::string_view text)
{
    std::size_t i = 0;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) i = 1;
    if (i == text.size()) throw ParseError("empty integer literal");
    for (std::size_t k = i; k < text.size(); ++k) {
        if (text[k] < '0' || text[k] > '9')
            throw ParseError("invalid integer literal '" + std::string(text) + "'");
    }
    return BigInt(std::string(text[0] == '+' ? text.substr(1) : text));
}

/// Accepts "p/q" and "p". Non-canonical input ("2/4") is rejected so that
/// serialized witnesses stay byte-stable.
inline BigRat parse_bigrat(std::string_view text)
{
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return BigRat(parse_bigint(text));
    BigInt num = parse_bigint(text.substr(0, slash));
    BigInt den = parse_bigint(text.substr(slash + 1));
    if (den <= 0) throw ParseError("non-positive denominator in '" + std::string(text) + "'");
    BigRat q(num, den);
    if (numerator_of(q) != num || denominator_of(q) != den)
        throw ParseError("rational '" + std::string(text) + "' is not in lowest terms");
    return q;
}

inline std::size_t hash_value(const BigInt& a)
{
    const auto* z = a.backend().data();
    if (mpz_fits_slong_p(z)) return std::hash<long>{}(mpz_get_si(z));
    return std::hash<std::string>{}(a.str());
}

} // namespace sylv
