#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace freecum {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Raised for malformed textual rationals. Carries the offending token.
class ParseError : public std::invalid_argument {
public:
    explicit ParseError(std::string token)
        : std::invalid_argument("malformed rational: '" + token + "'"), token_(std::move(token)) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

/// Parses "p", "p/q" or "-p/q". Decimal points are rejected so that no
/// float round-trip can sneak in.
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto bad = [&] { return ParseError(s); };
    if (s.empty())
        throw bad();
    auto slash = s.find('/');
    auto digits_ok = [](std::string_view part, bool allow_sign) {
        if (part.empty())
            return false;
        std::size_t i = 0;
        if (allow_sign && (part[0] == '-' || part[0] == '+'))
            i = 1;
        if (i == part.size())
            return false;
        for (; i < part.size(); ++i)
            if (part[i] < '0' || part[i] > '9')
                return false;
        return true;
    };
    std::string num = slash == std::string::npos ? s : s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!digits_ok(num, true) || !digits_ok(den, false))
        throw bad();
    if (num[0] == '+')
        num.erase(0, 1);
    BigInt d(den);
    if (d == 0)
        throw bad();
    Rational q(BigInt(num), d);
    q.canonicalize();
    return q;
}

/// Canonical "p/q" form; integers are written "p/1".
inline std::string to_string(const Rational& q)
{
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rational pow(const Rational& base, long exponent)
{
    if (exponent < 0) {
        if (base == 0)
            throw std::domain_error("zero raised to a negative power");
        return pow(Rational(1) / base, -exponent);
    }
    Rational result(1);
    Rational b = base;
    auto e = static_cast<unsigned long>(exponent);
    while (e) {
        if (e & 1u)
            result *= b;
        e >>= 1u;
        if (e)
            b *= b;
    }
    return result;
}

inline Rational sign_power(long exponent) { return (exponent % 2 == 0) ? Rational(1) : Rational(-1); }

}  // namespace freecum
