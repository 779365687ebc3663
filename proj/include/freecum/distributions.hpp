#pragma once

// Exact cumulant and moment sequences for the free Poisson law nu(lambda, alpha),
// the law of its inverse, and the standardized free gamma law, plus float
// density evaluation.

#include "freecum/partition.hpp"
#include "freecum/rational.hpp"
#include "freecum/series.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace freecum {

/// Raised when an inverse-law operation is asked of a non-invertible law.
class NonInvertibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct FreePoissonParams {
    Rational lambda;
    Rational alpha;

    FreePoissonParams(Rational rate, Rational jump) : lambda(std::move(rate)), alpha(std::move(jump))
    {
        if (lambda <= 0)
            throw std::domain_error("free Poisson rate must be positive, got " + to_string(lambda));
        if (alpha <= 0)
            throw std::domain_error("free Poisson jump size must be positive, got " + to_string(alpha));
    }

    /// 0 lies outside the support exactly when lambda > 1.
    bool invertible() const { return lambda > 1; }

    void require_invertible() const
    {
        if (!invertible())
            throw NonInvertibleError("free Poisson law with lambda = " + to_string(lambda) +
                                     " <= 1 is not invertible (its support touches 0)");
    }
};

/// Support endpoints alpha (1 -+ sqrt(lambda))^2, kept as (alpha, lambda);
/// only the float accessors take the square root.
struct SupportInterval {
    Rational alpha;
    Rational lambda;

    double lower() const
    {
        double s = std::sqrt(lambda.get_d());
        return alpha.get_d() * (1.0 - s) * (1.0 - s);
    }
    double upper() const
    {
        double s = std::sqrt(lambda.get_d());
        return alpha.get_d() * (1.0 + s) * (1.0 + s);
    }
};

inline SupportInterval support(const FreePoissonParams& p) { return {p.alpha, p.lambda}; }

/// Generator k -> R_k for k >= 1.
using CumulantSequence = std::function<Rational(int)>;

inline void require_order(int k)
{
    if (k < 1)
        throw std::domain_error("cumulant order must be >= 1, got " + std::to_string(k));
}

/// R_k(nu(lambda, alpha)) = lambda alpha^k.
inline Rational fp_cumulant(int k, const FreePoissonParams& p)
{
    require_order(k);
    return p.lambda * pow(p.alpha, k);
}

/// R_k of X^{-1} for X ~ nu(lambda, alpha), lambda > 1:
/// C_{k-1} / (alpha^k (lambda-1)^{2k-1}).
inline Rational inv_fp_cumulant(int k, const FreePoissonParams& p)
{
    require_order(k);
    p.require_invertible();
    Rational c(catalan(static_cast<unsigned>(k - 1)));
    return c / (pow(p.alpha, k) * pow(p.lambda - 1, 2 * k - 1));
}

/// Moment of order m from a cumulant sequence by direct summation over NC(m).
inline Rational moment_from_cumulants_nc(const CumulantSequence& kappa, int m)
{
    if (m < 0)
        throw std::domain_error("moment order must be >= 0");
    if (m == 0)
        return 1;
    std::vector<Rational> k(static_cast<std::size_t>(m) + 1);
    for (int i = 1; i <= m; ++i)
        k[i] = kappa(i);
    Rational total = 0;
    for_each_nc(m, [&](const Partition& pi) {
        std::vector<int> sizes(static_cast<std::size_t>(pi.num_blocks()), 0);
        for (auto l : pi.labels())
            ++sizes[l];
        Rational term = 1;
        for (int s : sizes)
            term *= k[s];
        total += term;
    });
    return total;
}

/// Moments m_0..m_n from cumulants by the first-block recursion
/// m_n = sum_s kappa_s [z^{n-s}] M(z)^s.
inline std::vector<Rational> moments_from_cumulants(const CumulantSequence& kappa, int n)
{
    if (n < 0)
        throw std::domain_error("moment order must be >= 0");
    std::vector<Rational> m(static_cast<std::size_t>(n) + 1);
    m[0] = 1;
    std::vector<Rational> k(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i)
        k[i] = kappa(i);
    for (int order = 1; order <= n; ++order) {
        // power[j] = [z^j] M(z)^s, accumulated for s = 1..order.
        std::vector<Rational> power(static_cast<std::size_t>(order), 0);
        power[0] = 1;
        Rational total = 0;
        for (int s = 1; s <= order; ++s) {
            std::vector<Rational> next(static_cast<std::size_t>(order), 0);
            for (int i = 0; i < order; ++i) {
                if (power[i] == 0)
                    continue;
                for (int j = 0; i + j < order; ++j)
                    next[i + j] += power[i] * m[j];
            }
            power = std::move(next);
            total += k[s] * power[order - s];
        }
        m[order] = total;
    }
    return m;
}

/// Inverse of moments_from_cumulants: cumulants R_1..R_n from m_0..m_n.
inline std::vector<Rational> cumulants_from_moments(const std::vector<Rational>& moments)
{
    if (moments.empty() || moments[0] != 1)
        throw std::domain_error("moment sequence must start with m_0 = 1");
    const int n = static_cast<int>(moments.size()) - 1;
    std::vector<Rational> k(static_cast<std::size_t>(n) + 1, 0);
    for (int order = 1; order <= n; ++order) {
        // Same recursion as above with kappa_order unknown; the s = order
        // term contributes kappa_order * m_0^order.
        std::vector<Rational> power(static_cast<std::size_t>(order), 0);
        power[0] = 1;
        Rational partial = 0;
        for (int s = 1; s < order; ++s) {
            std::vector<Rational> next(static_cast<std::size_t>(order), 0);
            for (int i = 0; i < order; ++i) {
                if (power[i] == 0)
                    continue;
                for (int j = 0; i + j < order; ++j)
                    next[i + j] += power[i] * moments[j];
            }
            power = std::move(next);
            partial += k[s] * power[order - s];
        }
        k[order] = moments[order] - partial;
    }
    k.erase(k.begin());
    return k;
}

/// phi(X^m) for X ~ nu(lambda, alpha), m >= 0.
inline Rational fp_moment(int m, const FreePoissonParams& p)
{
    if (m < 0)
        throw std::domain_error("fp_moment order must be >= 0; use negative_moment");
    return moment_from_cumulants_nc([&](int k) { return fp_cumulant(k, p); }, m);
}

enum class NegativeMomentRoute { cumulant, cauchy };

/// phi(X^{-m}) for m = 0..max_m through the Taylor coefficients at 0 of the
/// Cauchy transform G, which solves alpha z G^2 - (z + alpha(1-lambda)) G + 1 = 0
/// and expands as G(z) = -sum_m z^m phi(X^{-(m+1)}).
inline std::vector<Rational> negative_moments_cauchy(int max_m, const FreePoissonParams& p)
{
    p.require_invertible();
    std::vector<Rational> out{Rational(1)};
    if (max_m <= 0)
        return out;
    const std::size_t order = static_cast<std::size_t>(max_m) + 1;
    const Rational c = p.alpha * (1 - p.lambda);
    // Discriminant (z + c)^2 - 4 alpha z.
    Series disc(order, {c * c, 2 * c - 4 * p.alpha, Rational(1)});
    // The branch regular at 0 needs c + S(0) = 0, and c < 0.
    Series root = series_sqrt(disc, -c);
    Series numerator = Series(order, {c, Rational(1)}) + root;
    Series g = (Rational(1) / (2 * p.alpha)) * numerator.divided_by_z();
    for (int m = 1; m <= max_m; ++m)
        out.push_back(-g[static_cast<std::size_t>(m - 1)]);
    return out;
}

/// phi(X^{-m}) by either route; lambda must exceed 1.
inline Rational negative_moment(int m, const FreePoissonParams& p, NegativeMomentRoute route)
{
    if (m < 0)
        throw std::domain_error("negative_moment order must be >= 0");
    p.require_invertible();
    if (m == 0)
        return 1;
    if (route == NegativeMomentRoute::cumulant)
        return moment_from_cumulants_nc([&](int k) { return inv_fp_cumulant(k, p); }, m);
    return negative_moments_cauchy(m, p).back();
}

/// R_k of the standardized free gamma law as coefficient * a^{odd ? 1 : 0},
/// parameterized by a^2: R_1 = 0, R_k = C_{k-1} a^{k-2}.
struct ParityValue {
    Rational coefficient;
    bool odd_power = false;

    friend bool operator==(const ParityValue&, const ParityValue&) = default;
};

inline ParityValue std_free_gamma_cumulant(int k, const Rational& a_squared)
{
    require_order(k);
    if (a_squared <= 0)
        throw std::domain_error("standardized free gamma needs a^2 > 0");
    if (k == 1)
        return {Rational(0), false};
    Rational c(catalan(static_cast<unsigned>(k - 1)));
    return {c * pow(a_squared, (k - 2) / 2), (k - 2) % 2 == 1};
}

enum class DensityKind { free_poisson, inverse_free_poisson };

/// Mass of the atom at 0: max{0, 1 - lambda}.
inline Rational atom_mass(const FreePoissonParams& p) { return p.lambda < 1 ? Rational(1 - p.lambda) : Rational(0); }

/// Absolutely continuous density at x, 0 off the support. The free Poisson
/// density is (1/(2 pi alpha x)) sqrt(4 lambda alpha^2 - (x - alpha(1+lambda))^2),
/// whose total mass is min{1, lambda}; the atom is reported by atom_mass.
inline double density_value(double x, DensityKind which, const FreePoissonParams& p)
{
    const double lam = p.lambda.get_d();
    const double a = p.alpha.get_d();
    if (which == DensityKind::free_poisson) {
        auto s = support(p);
        if (x <= s.lower() || x >= s.upper() || x <= 0.0)
            return 0.0;
        double inner = 4.0 * lam * a * a - (x - a * (1.0 + lam)) * (x - a * (1.0 + lam));
        if (inner <= 0.0)
            return 0.0;
        return std::sqrt(inner) / (2.0 * std::numbers::pi * a * x);
    }
    p.require_invertible();
    const double s = std::sqrt(lam);
    const double lo = 1.0 / (a * (1.0 + s) * (1.0 + s));
    const double hi = 1.0 / (a * (1.0 - s) * (1.0 - s));
    if (x <= lo || x >= hi)
        return 0.0;
    const double l1 = lam - 1.0;
    const double centre = (lam + 1.0) / (a * l1 * l1);
    double inner = 4.0 * lam / (a * a * l1 * l1 * l1 * l1) - (x - centre) * (x - centre);
    if (inner <= 0.0)
        return 0.0;
    return l1 * std::sqrt(inner) / (2.0 * std::numbers::pi * x * x);
}

enum class Law { free_poisson, inverse_free_poisson, std_free_gamma };

inline std::string law_name(Law law)
{
    switch (law) {
    case Law::free_poisson:
        return "free_poisson";
    case Law::inverse_free_poisson:
        return "inverse_free_poisson";
    case Law::std_free_gamma:
        return "std_free_gamma";
    }
    return "?";
}

/// {"law": ..., "lambda": "p/q", "alpha": "p/q", "<key>": ["p/q", ...]}
inline nlohmann::json sequence_json(Law law, const FreePoissonParams& p, const std::string& key,
                                    const std::vector<Rational>& values)
{
    nlohmann::json j;
    j["law"] = law_name(law);
    j["lambda"] = to_string(p.lambda);
    j["alpha"] = to_string(p.alpha);
    std::vector<std::string> strs;
    for (const auto& v : values)
        strs.push_back(to_string(v));
    j[key] = strs;
    return j;
}

}  // namespace freecum
