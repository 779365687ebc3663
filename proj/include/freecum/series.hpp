#pragma once

// Truncated formal power series over the rationals.

#include "freecum/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace freecum {

/// Coefficients c_0..c_{N-1}; every operation truncates to the shorter operand.
class Series {
public:
    Series() = default;
    explicit Series(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {}
    Series(std::size_t order, std::vector<Rational> leading) : c_(order)
    {
        for (std::size_t i = 0; i < std::min(order, leading.size()); ++i)
            c_[i] = leading[i];
    }

    std::size_t order() const noexcept { return c_.size(); }
    const Rational& operator[](std::size_t i) const { return c_.at(i); }
    Rational& operator[](std::size_t i) { return c_.at(i); }
    const std::vector<Rational>& coefficients() const noexcept { return c_; }

    Series truncated(std::size_t order) const
    {
        Series s(order, {});
        for (std::size_t i = 0; i < std::min(order, c_.size()); ++i)
            s.c_[i] = c_[i];
        return s;
    }

    friend Series operator+(const Series& a, const Series& b)
    {
        std::size_t n = std::min(a.order(), b.order());
        Series s(n, {});
        for (std::size_t i = 0; i < n; ++i)
            s.c_[i] = a.c_[i] + b.c_[i];
        return s;
    }

    friend Series operator-(const Series& a, const Series& b)
    {
        std::size_t n = std::min(a.order(), b.order());
        Series s(n, {});
        for (std::size_t i = 0; i < n; ++i)
            s.c_[i] = a.c_[i] - b.c_[i];
        return s;
    }

    friend Series operator*(const Series& a, const Series& b)
    {
        std::size_t n = std::min(a.order(), b.order());
        Series s(n, {});
        for (std::size_t i = 0; i < n; ++i) {
            if (a.c_[i] == 0)
                continue;
            for (std::size_t j = 0; i + j < n; ++j)
                s.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return s;
    }

    friend Series operator*(const Rational& k, const Series& a)
    {
        Series s = a;
        for (auto& x : s.c_)
            x *= k;
        return s;
    }

    /// Drops the constant term, which must be zero: f(z)/z.
    Series divided_by_z() const
    {
        if (c_.empty() || c_[0] != 0)
            throw std::domain_error("series not divisible by z");
        return Series(std::vector<Rational>(c_.begin() + 1, c_.end()));
    }

private:
    std::vector<Rational> c_;
};

/// Multiplicative inverse by Newton iteration g <- g(2 - f g), doubling the
/// number of correct coefficients per step.
inline Series series_inverse(const Series& f)
{
    if (f.order() == 0)
        return f;
    if (f[0] == 0)
        throw std::domain_error("series inverse needs a nonzero constant term");
    Series g(1, {Rational(1) / f[0]});
    std::size_t have = 1;
    while (have < f.order()) {
        have = std::min(2 * have, f.order());
        Series gg = g.truncated(have);
        Series two(have, {Rational(2)});
        g = gg * (two - f.truncated(have) * gg);
    }
    return g;
}

/// Square root with prescribed constant term root0 (root0^2 must equal
/// f[0]) by Newton iteration s <- (s + f/s)/2.
inline Series series_sqrt(const Series& f, const Rational& root0)
{
    if (f.order() == 0)
        return f;
    if (root0 == 0 || root0 * root0 != f[0])
        throw std::domain_error("series sqrt: bad constant term");
    Series s(1, {root0});
    std::size_t have = 1;
    const Rational half(1, 2);
    while (have < f.order()) {
        have = std::min(2 * have, f.order());
        Series ss = s.truncated(have);
        s = half * (ss + f.truncated(have) * series_inverse(ss));
    }
    return s;
}

}  // namespace freecum
