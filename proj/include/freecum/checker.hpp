#pragma once

// Verifiers built on the engine. Every check emits a VerificationReport whose
// entries carry exact values.

#include "freecum/distributions.hpp"
#include "freecum/engine.hpp"
#include "freecum/model.hpp"
#include "freecum/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace freecum {

/// Default cap on the mixed-cumulant order of the Lukacs check.
inline constexpr int kLukacsOrderCap = 6;

/// The exact path needs an invertible X; the lambda <= 1 < lambda + kappa
/// regime is only reachable through the matrix oracle.
class ExactPathUnavailable : public NonInvertibleError {
public:
    using NonInvertibleError::NonInvertibleError;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Results are
/// written by index, so any schedule gives the same output.
template <class Result>
std::vector<Result> fan_out(std::size_t count, int jobs, const std::function<Result(std::size_t)>& task)
{
    std::vector<Result> out(count);
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = task(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        out[i] = task(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

}  // namespace detail

/// Slot patterns over {U, V} as strings such as "UVV".
using SlotPattern = std::string;

/// Least rotation of each length-n string over {U, V} that uses both symbols.
inline std::vector<SlotPattern> mixed_patterns(int n, bool up_to_rotation = true)
{
    std::vector<SlotPattern> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        SlotPattern p;
        for (int i = 0; i < n; ++i)
            p += (mask & (1u << (n - 1 - i))) ? 'V' : 'U';
        if (p.find('U') == std::string::npos || p.find('V') == std::string::npos)
            continue;
        if (up_to_rotation) {
            bool least = true;
            for (int r = 1; r < n && least; ++r)
                least = p <= p.substr(static_cast<std::size_t>(r)) + p.substr(0, static_cast<std::size_t>(r));
            if (!least)
                continue;
        }
        out.push_back(p);
    }
    return out;
}

inline std::string pattern_query(const SlotPattern& p)
{
    std::string q = "R_" + std::to_string(p.size()) + "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i)
            q += ',';
        q += p[i];
    }
    return q + ")";
}

/// Model with X ~ nu(lambda, alpha) and Y ~ nu(kappa, alpha) free.
inline FreeModel lukacs_model(const Rational& lambda, const Rational& kappa, const Rational& alpha)
{
    FreeModel m;
    m.add_family(free_poisson_family("X", FreePoissonParams(lambda, alpha)));
    m.add_family(free_poisson_family("Y", FreePoissonParams(kappa, alpha)));
    return m;
}

/// Same X, with Y replaced by the standard semicircle.
inline FreeModel semicircle_control_model(const Rational& lambda, const Rational& alpha)
{
    FreeModel m;
    m.add_family(free_poisson_family("X", FreePoissonParams(lambda, alpha)));
    m.add_family(semicircle_family("Y"));
    return m;
}

/// Slots for U~ = X^{-1} Y and V = X + Y in a model whose families are X, Y.
inline std::vector<Expr> lukacs_slots(const FreeModel& m, const SlotPattern& pattern)
{
    const Expr u(Word{m.letter("X", -1), m.letter("Y")});
    const Expr v = Expr(Word{m.letter("X")}) + Expr(Word{m.letter("Y")});
    std::vector<Expr> slots;
    for (char c : pattern)
        slots.push_back(c == 'U' ? u : v);
    return slots;
}

struct LukacsOptions {
    int jobs = 1;
    bool negative_control = true;
    /// Also evaluate every unreduced pattern of order <= 3 on an engine that
    /// does not canonicalize rotations.
    bool rotation_audit = true;
};

/// Every mixed cumulant of U~ = X^{-1}Y and V = X+Y of order 2..max_order
/// (patterns up to rotation) must vanish exactly.
inline VerificationReport lukacs_check(const Rational& lambda, const Rational& kappa, const Rational& alpha,
                                       int max_order, const LukacsOptions& options = {})
{
    const auto start = std::chrono::steady_clock::now();
    if (lambda <= 1)
        throw ExactPathUnavailable("exact Lukacs check needs lambda > 1 (X invertible); got lambda = " +
                                   to_string(lambda) + ". Use the matrix oracle (`oracle mixed`) for the " +
                                   "lambda <= 1 < lambda + kappa regime");
    if (max_order < 2)
        throw std::domain_error("max_order must be >= 2");
    if (max_order > kLukacsOrderCap)
        throw std::length_error("max_order " + std::to_string(max_order) + " exceeds the cap of " +
                                std::to_string(kLukacsOrderCap));

    VerificationReport report;
    report.check_name = "lukacs";
    report.parameters = {{"lambda", to_string(lambda)},
                         {"kappa", to_string(kappa)},
                         {"alpha", to_string(alpha)},
                         {"max_order", std::to_string(max_order)}};

    Engine engine(lukacs_model(lambda, kappa, alpha));
    std::vector<SlotPattern> patterns;
    for (int n = 2; n <= max_order; ++n)
        for (auto& p : mixed_patterns(n))
            patterns.push_back(std::move(p));
    auto values = detail::fan_out<Rational>(patterns.size(), options.jobs, [&](std::size_t i) {
        return engine.expr_mixed_cumulant(lukacs_slots(engine.model(), patterns[i]));
    });
    for (std::size_t i = 0; i < patterns.size(); ++i)
        report.entries.push_back(make_entry(pattern_query(patterns[i]), values[i], 0));

    if (options.rotation_audit) {
        Engine plain(lukacs_model(lambda, kappa, alpha), EngineOptions{.canonical_rotation = false});
        for (int n = 2; n <= std::min(3, max_order); ++n)
            for (const auto& p : mixed_patterns(n, false))
                report.entries.push_back(make_entry("unreduced " + pattern_query(p),
                                                    plain.expr_mixed_cumulant(lukacs_slots(plain.model(), p)), 0));
    }

    if (options.negative_control) {
        Engine control(semicircle_control_model(lambda, alpha));
        for (const auto& p : mixed_patterns(2))
            report.entries.push_back(make_nonzero_entry("control[Y semicircle] " + pattern_query(p),
                                                        control.expr_mixed_cumulant(lukacs_slots(control.model(), p))));
    }

    report.notes.push_back("U~ = X^{-1}Y stands in for U^{-1} = V^{1/2} X^{-1} V^{1/2} by traciality; "
                           "the unit part of X^{-1}(X+Y) = I + X^{-1}Y drops out of mixed cumulants");
    report.notes.push_back("finite-order certificate at one parameter point; vanishing as an identity in "
                           "(lambda, kappa) is certified by sampling several points (heuristic degree bound "
                           "4*order per parameter)");
    report.elapsed_ms = detail::elapsed_ms(start);
    return report;
}

/// Runs lukacs_check over a parameter grid, one report per point.
inline std::vector<VerificationReport> lukacs_grid(const std::vector<Rational>& lambdas,
                                                   const std::vector<Rational>& kappas, const Rational& alpha,
                                                   int max_order, const LukacsOptions& options = {})
{
    std::vector<VerificationReport> out;
    for (const auto& l : lambdas)
        for (const auto& k : kappas)
            out.push_back(lukacs_check(l, k, alpha, max_order, options));
    return out;
}

inline std::vector<Rational> default_lambda_grid() { return {2, Rational(5, 2), 3, Rational(7, 2), 4}; }
inline std::vector<Rational> default_kappa_grid() { return {1, Rational(3, 2), 2}; }

/// Words X^{-1} X^{i_1} ... X^{-1} X^{i_m} of total length <= max_len, as run lengths.
inline std::vector<std::vector<int>> run_length_patterns(int max_len)
{
    std::vector<std::vector<int>> out;
    for (int n = 1; n <= max_len; ++n) {
        // Bit i of mask (i = 0..n-2) says position i+1 holds X.
        for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
            std::vector<int> runs{0};
            for (int i = 0; i < n - 1; ++i) {
                if (mask & (1u << i))
                    ++runs.back();
                else
                    runs.push_back(0);
            }
            out.push_back(std::move(runs));
        }
    }
    return out;
}

inline std::string runs_query(const std::vector<int>& runs)
{
    std::string q = "R(";
    bool first = true;
    for (int r : runs) {
        q += first ? "Xi" : ",Xi";
        first = false;
        for (int j = 0; j < r; ++j)
            q += ",X";
    }
    return q + ")";
}

/// Joint cumulants of X and X^{-1} computed by the engine from moments
/// against the closed form, for every run-length pattern up to max_len.
inline VerificationReport prop31_sweep(const Rational& lambda, int max_len, const Rational& alpha = 1, int jobs = 1)
{
    const auto start = std::chrono::steady_clock::now();
    FreePoissonParams params(lambda, alpha);
    params.require_invertible();
    if (max_len < 1)
        throw std::domain_error("max_len must be >= 1");
    if (max_len > 12)
        throw std::length_error("prop31 sweep supports max_len <= 12");
    VerificationReport report;
    report.check_name = "prop31";
    report.parameters = {{"lambda", to_string(lambda)},
                         {"alpha", to_string(alpha)},
                         {"max_len", std::to_string(max_len)}};
    FreeModel m;
    m.add_family(free_poisson_family("X", params));
    Engine engine(std::move(m));
    const auto patterns = run_length_patterns(max_len);
    auto values = detail::fan_out<Rational>(patterns.size(), jobs,
                                            [&](std::size_t i) { return engine.joint_cumulant(prop31_word(patterns[i])); });
    for (std::size_t i = 0; i < patterns.size(); ++i)
        report.entries.push_back(
            make_entry(runs_query(patterns[i]), values[i], prop31_closed_form(patterns[i], lambda, alpha)));
    report.notes.push_back("engine values come from negative moments of the Cauchy-transform series, not from "
                           "the closed-form inverse cumulants");
    report.elapsed_ms = detail::elapsed_ms(start);
    return report;
}

/// Derived R_n(X^{-1}) against C_{n-1} / (R_1(X) - 1)^{2n-1}.
inline VerificationReport remark32_check(const Rational& r1x, int n_max)
{
    const auto start = std::chrono::steady_clock::now();
    if (n_max > 12)
        throw std::length_error("remark32 check supports n_max <= 12");
    VerificationReport report;
    report.check_name = "remark32";
    report.parameters = {{"r1x", to_string(r1x)}, {"n_max", std::to_string(n_max)}};
    const auto derived = remark32_derive(r1x, n_max);
    for (int n = 1; n <= n_max; ++n) {
        Rational closed = Rational(catalan(static_cast<unsigned>(n - 1))) / pow(r1x - 1, 2 * n - 1);
        report.entries.push_back(
            make_entry("R_" + std::to_string(n) + "(Xi)", derived[static_cast<std::size_t>(n - 1)], closed));
    }
    report.elapsed_ms = detail::elapsed_ms(start);
    return report;
}

/// X, Y free, both distributed as the inverse of nu(lambda, 1) (free gamma).
/// R_2((I + Y X^{-1})(I + X^{-1} Y), X + Y) must be nonzero, with components
/// 4 lambda^2/(lambda-1)^5 and twice (2 lambda - 1)/(lambda-1)^4.
inline VerificationReport gamma_counterexample(const Rational& lambda)
{
    const auto start = std::chrono::steady_clock::now();
    FreePoissonParams base(lambda, 1);
    base.require_invertible();
    VerificationReport report;
    report.check_name = "gamma";
    report.parameters = {{"lambda", to_string(lambda)}};

    FreeModel m;
    m.add_family(inverse_free_poisson_family("X", base));
    m.add_family(inverse_free_poisson_family("Y", base));
    Engine engine(m);
    const Letter x = m.letter("X"), xi = m.letter("X", -1), y = m.letter("Y");
    const Expr one = Expr::identity();
    const Expr left = one + Expr(Word{y, xi});   // I + Y X^{-1}
    const Expr right = one + Expr(Word{xi, y});  // I + X^{-1} Y
    const Expr v = Expr(Word{x}) + Expr(Word{y});

    const Rational l1 = lambda - 1;
    const Rational r3_expected = 4 * lambda * lambda / pow(l1, 5);
    const Rational r2r1_expected = (2 * lambda - 1) / pow(l1, 4);

    report.entries.push_back(make_entry("R_3(Y*Xi, Xi*Y, X)",
                                        engine.expr_mixed_cumulant({Expr(Word{y, xi}), Expr(Word{xi, y}), Expr(Word{x})}),
                                        0));
    report.entries.push_back(make_entry("R_3(Y*Xi, Xi*Y, Y)",
                                        engine.expr_mixed_cumulant({Expr(Word{y, xi}), Expr(Word{xi, y}), Expr(Word{y})}),
                                        r3_expected));
    const Rational r3 = engine.expr_mixed_cumulant({left, right, v});
    report.entries.push_back(make_entry("R_3(I+Y*Xi, I+Xi*Y, X+Y)", r3, r3_expected));
    const Rational c1 = engine.expr_mixed_cumulant({left, v}) * engine.expr_mixed_cumulant({right});
    const Rational c2 = engine.expr_mixed_cumulant({right, v}) * engine.expr_mixed_cumulant({left});
    report.entries.push_back(make_entry("R_2(I+Y*Xi, X+Y) R_1(I+Xi*Y)", c1, r2r1_expected));
    report.entries.push_back(make_entry("R_2(I+Xi*Y, X+Y) R_1(I+Y*Xi)", c2, r2r1_expected));

    const Rational total_expected = r3_expected + 2 * r2r1_expected;
    const Rational expanded = engine.product_expand(left, right, {v});
    const Rational direct = engine.expr_mixed_cumulant({left * right, v});
    report.entries.push_back(make_entry("R_2((I+Y*Xi)(I+Xi*Y), X+Y) [product expansion]", expanded, total_expected));
    report.entries.push_back(make_entry("R_2((I+Y*Xi)(I+Xi*Y), X+Y) [direct]", direct, total_expected));
    report.entries.push_back(make_nonzero_entry("R_2((I+Y*Xi)(I+Xi*Y), X+Y)", direct));
    report.notes.push_back("X and Y are free gamma: X^{-1} and Y^{-1} are free Poisson(lambda, 1)");
    report.elapsed_ms = detail::elapsed_ms(start);
    return report;
}

}  // namespace freecum
