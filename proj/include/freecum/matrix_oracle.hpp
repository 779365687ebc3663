#pragma once

// Monte Carlo over complex Wishart matrices. X = (alpha/d) A A^* with A a
// d x ceil(lambda d) matrix of standard complex Gaussians approximates a free
// Poisson variable under the normalized trace, and independent copies are
// asymptotically free.

#include "freecum/partition.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace freecum::oracle {

using CMatrix = Eigen::MatrixXcd;

struct EnsembleSpec {
    int dim = 200;
    double lambda = 2.0;
    double kappa = 1.0;
    double alpha = 1.0;
    int samples = 50;
    std::uint64_t seed = 0;

    int columns(double rate) const { return static_cast<int>(std::ceil(rate * dim - 1e-9)); }

    void validate() const
    {
        if (dim < 2)
            throw std::domain_error("ensemble dimension must be >= 2");
        if (!(lambda > 0) || !(kappa > 0) || !(alpha > 0))
            throw std::domain_error("lambda, kappa and alpha must be positive");
        if (columns(lambda) < 1 || columns(kappa) < 1)
            throw std::domain_error("ceil(rate * d) must be >= 1");
        if (samples < 1)
            throw std::domain_error("samples must be >= 1");
    }
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based stream: output i is a pure function of (key, i), so samples
/// can be drawn in any order or in parallel.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
        : key_(splitmix64(splitmix64(seed ^ 0x6A09E667F3BCC909ull) ^ splitmix64(index + 0x3C6EF372FE94F82Bull) ^
                          splitmix64(stream * 0xA54FF53A5F1D36F1ull)))
    {
    }

    std::uint64_t next() { return splitmix64(key_ + 0x9E3779B97F4A7C15ull * counter_++); }

    /// Uniform in (0, 1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard complex Gaussian (E|z|^2 = 1) by Box-Muller.
    std::complex<double> complex_gaussian()
    {
        double r = std::sqrt(-std::log(uniform()));
        double t = 2.0 * std::numbers::pi * uniform();
        return {r * std::cos(t), r * std::sin(t)};
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline CMatrix wishart(int dim, int columns, double alpha, CounterRng& rng)
{
    CMatrix a(dim, columns);
    for (int j = 0; j < columns; ++j)
        for (int i = 0; i < dim; ++i)
            a(i, j) = rng.complex_gaussian();
    CMatrix x = (alpha / dim) * (a * a.adjoint());
    return (x + x.adjoint()) * 0.5;
}

/// Independent (X, Y) for sample `index`; bit-identical for equal (seed, index).
inline std::pair<CMatrix, CMatrix> sample_pair(const EnsembleSpec& spec, std::uint64_t index)
{
    spec.validate();
    CounterRng rx(spec.seed, index, 0), ry(spec.seed, index, 1);
    return {wishart(spec.dim, spec.columns(spec.lambda), spec.alpha, rx),
            wishart(spec.dim, spec.columns(spec.kappa), spec.alpha, ry)};
}

inline double normalized_trace(const CMatrix& m) { return m.trace().real() / static_cast<double>(m.rows()); }

/// Pairwise summation in fixed index order.
inline double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};

inline Estimate summarize(const std::vector<double>& xs)
{
    Estimate e;
    e.samples = static_cast<int>(xs.size());
    if (xs.empty())
        return e;
    e.mean = pairwise_sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        std::vector<double> sq(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            sq[i] = (xs[i] - e.mean) * (xs[i] - e.mean);
        double var = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(xs.size() - 1);
        e.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return e;
}

/// Sample means of phi(X^m), m = 1..max_m.
inline std::vector<Estimate> empirical_moments(const EnsembleSpec& spec, int max_m)
{
    std::vector<std::vector<double>> per(static_cast<std::size_t>(max_m));
    for (int s = 0; s < spec.samples; ++s) {
        CMatrix x = sample_pair(spec, static_cast<std::uint64_t>(s)).first;
        CMatrix power = x;
        for (int m = 1; m <= max_m; ++m) {
            per[static_cast<std::size_t>(m - 1)].push_back(normalized_trace(power));
            if (m < max_m)
                power = power * x;
        }
    }
    std::vector<Estimate> out;
    for (const auto& v : per)
        out.push_back(summarize(v));
    return out;
}

/// Sample mean of the smallest eigenvalue of X.
inline Estimate empirical_min_eigenvalue(const EnsembleSpec& spec)
{
    std::vector<double> mins;
    for (int s = 0; s < spec.samples; ++s) {
        CMatrix x = sample_pair(spec, static_cast<std::uint64_t>(s)).first;
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(x, Eigen::EigenvaluesOnly);
        mins.push_back(eig.eigenvalues().minCoeff());
    }
    return summarize(mins);
}

/// Eigenvalues below this make the inverse square root unreliable.
inline constexpr double kEigenvalueFloor = 1e-12;

inline CMatrix inverse_sqrt(const CMatrix& m)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("Hermitian eigendecomposition failed");
    const auto& values = eig.eigenvalues();
    if (values.minCoeff() <= kEigenvalueFloor)
        throw std::runtime_error("inverse square root: eigenvalue " + std::to_string(values.minCoeff()) +
                                 " below floor");
    Eigen::VectorXd scale = values.array().rsqrt();
    return eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().adjoint();
}

/// The two slot matrices for one sample. With use_sqrt, slot U is
/// V^{-1/2} X V^{-1/2}; otherwise it is W = X^{-1}(X + Y), which stands for
/// U^{-1} under the trace and needs lambda > 1.
inline std::pair<CMatrix, CMatrix> slot_matrices(const EnsembleSpec& spec, std::uint64_t index, bool use_sqrt)
{
    auto [x, y] = sample_pair(spec, index);
    CMatrix v = x + y;
    if (use_sqrt) {
        CMatrix r = inverse_sqrt(v);
        return {r * x * r, std::move(v)};
    }
    Eigen::LLT<CMatrix> chol(x);
    if (chol.info() != Eigen::Success)
        throw std::runtime_error("X is numerically singular");
    return {chol.solve(v), std::move(v)};
}

/// Plug-in free cumulant of a slot sequence from its normalized-trace
/// moments: R_n = phi(M_1...M_n) - sum_{pi != 1_n} prod_B R_B.
inline double plug_in_cumulant(const std::vector<const CMatrix*>& slots)
{
    const int n = static_cast<int>(slots.size());
    if (n == 0 || n > 8)
        throw std::domain_error("plug-in cumulant supports 1..8 slots");
    // moment[mask] = phi of the ordered product over the positions in mask.
    const std::uint32_t full = (1u << n) - 1;
    std::vector<double> moment(full + 1, 0.0), cumulant(full + 1, 0.0);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        CMatrix prod;
        bool first = true;
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1u << i)))
                continue;
            prod = first ? *slots[static_cast<std::size_t>(i)] : CMatrix(prod * *slots[static_cast<std::size_t>(i)]);
            first = false;
        }
        moment[mask] = normalized_trace(prod);
    }
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        std::vector<int> pos;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i))
                pos.push_back(i);
        const int k = static_cast<int>(pos.size());
        double value = moment[mask];
        if (k > 1) {
            const Partition top = Partition::one(k);
            for (const auto& pi : nc_table(k)) {
                if (pi == top)
                    continue;
                double term = 1.0;
                for (const auto& block : pi.blocks()) {
                    std::uint32_t sub = 0;
                    for (int b : block)
                        sub |= 1u << pos[static_cast<std::size_t>(b - 1)];
                    term *= cumulant[sub];
                }
                value -= term;
            }
        }
        cumulant[mask] = value;
    }
    return cumulant[full];
}

struct MixedEstimate {
    std::string pattern;
    double estimate = 0.0;
    double stderr_ = 0.0;
    int dim = 0;
    int samples = 0;
    bool use_sqrt = true;
};

/// Mixed free cumulant over a pattern in {U, V} (order <= 4), estimated per
/// sample by plug-in and averaged.
inline MixedEstimate empirical_mixed_cumulant(const EnsembleSpec& spec, const std::string& pattern, bool use_sqrt)
{
    spec.validate();
    if (pattern.empty() || pattern.size() > 4)
        throw std::domain_error("pattern order must be 1..4");
    for (char c : pattern)
        if (c != 'U' && c != 'V')
            throw std::domain_error("pattern letters must be U or V");
    if (!(spec.lambda + spec.kappa > 1.0))
        throw std::domain_error("lambda + kappa must exceed 1 for V to be invertible");
    if (!use_sqrt && !(spec.lambda > 1.0))
        throw std::domain_error("W = X^{-1}(X+Y) needs lambda > 1 (X invertible); use the square-root path");
    std::vector<double> values;
    for (int s = 0; s < spec.samples; ++s) {
        auto [u, v] = slot_matrices(spec, static_cast<std::uint64_t>(s), use_sqrt);
        std::vector<const CMatrix*> slots;
        for (char c : pattern)
            slots.push_back(c == 'U' ? &u : &v);
        values.push_back(plug_in_cumulant(slots));
    }
    auto e = summarize(values);
    return {pattern, e.mean, e.stderr_, spec.dim, spec.samples, use_sqrt};
}

inline nlohmann::json to_json(const MixedEstimate& m)
{
    return {{"pattern", m.pattern},   {"estimate", m.estimate}, {"stderr", m.stderr_},
            {"d", m.dim},             {"samples", m.samples},   {"use_sqrt", m.use_sqrt}};
}

enum class BoundStatus { ok, flagged, exceeded };

inline std::string to_string(BoundStatus s)
{
    switch (s) {
    case BoundStatus::ok:
        return "ok";
    case BoundStatus::flagged:
        return "flagged";
    case BoundStatus::exceeded:
        return "exceeded";
    }
    return "?";
}

/// Soft bound |empirical - exact| <= 5 max(1, |exact|) / sqrt(samples d):
/// within it is ok, up to twice it is flagged, beyond that exceeded. The
/// max(1, |exact|) factor keeps the bound in the units of phi(X^m).
inline BoundStatus soft_bound_status(double empirical, double exact, const EnsembleSpec& spec)
{
    const double bound =
        5.0 * std::max(1.0, std::abs(exact)) / std::sqrt(static_cast<double>(spec.samples) * spec.dim);
    const double err = std::abs(empirical - exact);
    if (err <= bound)
        return BoundStatus::ok;
    if (err <= 2.0 * bound)
        return BoundStatus::flagged;
    return BoundStatus::exceeded;
}

}  // namespace freecum::oracle
