#pragma once

// Joint free cumulants of words and expressions over a FreeModel.
//
// Moments of words are computed by the first-block recursion
//   phi(w) = sum_{B containing position 1} R(w|B) prod_{gaps G of B} phi(w|G),
// with blocks restricted to one family (mixed cumulants vanish). Joint
// cumulants inside a family come from the moment-cumulant recursion on the
// family's signed-power moments. Both tables are memoized on the canonical
// rotation of the word, which traciality makes a valid key.

#include "freecum/distributions.hpp"
#include "freecum/model.hpp"
#include "freecum/partition.hpp"

#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace freecum {

/// Longest word the engine accepts (memo and NC tables are sized for it).
inline constexpr std::size_t kMaxWordLength = 24;

namespace detail {

inline void append_key(std::string& key, const Word& w)
{
    for (const auto& l : w)
        key.push_back(static_cast<char>(1 + 2 * l.family + (l.power > 0 ? 1 : 0)));
}

inline std::string word_key(const Word& w)
{
    std::string key;
    key.reserve(w.size());
    append_key(key, w);
    return key;
}

/// Concurrent idempotent cache: concurrent duplicate fills store equal values.
class RationalCache {
public:
    std::optional<Rational> find(const std::string& key) const
    {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it == map_.end())
            return std::nullopt;
        return it->second;
    }

    void store(const std::string& key, const Rational& value)
    {
        std::unique_lock lock(mutex_);
        map_.try_emplace(key, value);
    }

    std::size_t size() const
    {
        std::shared_lock lock(mutex_);
        return map_.size();
    }

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Rational> map_;
};

}  // namespace detail

struct EngineOptions {
    /// Key memo tables on the least cyclic rotation. Turning this off makes
    /// every rotation an independent computation, which the traciality
    /// checks rely on.
    bool canonical_rotation = true;
};

class Engine {
public:
    explicit Engine(FreeModel model, EngineOptions options = {}) : model_(std::move(model)), options_(options) {}

    const FreeModel& model() const noexcept { return model_; }

    /// phi(w), fast memoized path.
    Rational word_moment(const Word& w)
    {
        check(w);
        return moment_canonical(canon(w));
    }

    /// phi(w) by summation over all of NC(|w|); the reference path.
    Rational word_moment_reference(const Word& w)
    {
        check(w);
        if (w.empty())
            return 1;
        if (w.size() > static_cast<std::size_t>(kMaterializeCap))
            throw std::length_error("reference moment path supports words up to length 14");
        Rational total = 0;
        for (const auto& pi : nc_table(static_cast<int>(w.size()))) {
            Rational term = 1;
            for (const auto& block : pi.blocks()) {
                std::vector<Letter> sub;
                for (int i : block)
                    sub.push_back(w[static_cast<std::size_t>(i - 1)]);
                term *= joint_cumulant(Word(std::move(sub)));
                if (term == 0)
                    break;
            }
            total += term;
        }
        return total;
    }

    /// R_n(w_1, ..., w_n), one letter per slot.
    Rational joint_cumulant(const Word& w)
    {
        check(w);
        if (w.empty())
            throw std::domain_error("joint cumulant of an empty word");
        const int fam = w[0].family;
        for (const auto& l : w)
            if (l.family != fam)
                return 0;
        return family_cumulant(canon(w));
    }

    /// R_n with each slot a word (a product of letters). Slots equal to the
    /// unit make the cumulant vanish for n >= 2.
    Rational slot_cumulant(const std::vector<Word>& slots)
    {
        if (slots.empty())
            throw std::domain_error("cumulant with no slots");
        for (const auto& s : slots)
            check(s);
        if (slots.size() == 1)
            return word_moment(slots[0]);
        bool letters_only = true;
        for (const auto& s : slots) {
            if (s.empty())
                return 0;
            letters_only = letters_only && s.size() == 1;
        }
        if (letters_only) {
            std::vector<Letter> flat;
            for (const auto& s : slots)
                flat.push_back(s[0]);
            return joint_cumulant(Word(std::move(flat)));
        }
        return slot_cumulant_canonical(options_.canonical_rotation ? rotate_slots(slots) : slots);
    }

    /// R_n(e_1, ..., e_n) over expressions, expanded multilinearly.
    Rational expr_mixed_cumulant(const std::vector<Expr>& slots)
    {
        if (slots.empty())
            throw std::domain_error("cumulant with no slots");
        const std::size_t n = slots.size();
        std::vector<std::vector<std::pair<Word, Rational>>> options(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& [w, c] : slots[i].terms()) {
                if (n >= 2 && w.empty())
                    continue;
                options[i].emplace_back(w, c);
            }
            if (options[i].empty())
                return 0;
        }
        Rational total = 0;
        std::vector<std::size_t> idx(n, 0);
        std::vector<Word> words(n);
        while (true) {
            Rational coeff = 1;
            for (std::size_t i = 0; i < n; ++i) {
                words[i] = options[i][idx[i]].first;
                coeff *= options[i][idx[i]].second;
            }
            Rational value = slot_cumulant(words);
            if (value != 0)
                total += coeff * value;
            std::size_t k = 0;
            while (k < n && ++idx[k] == options[k].size())
                idx[k++] = 0;
            if (k == n)
                break;
        }
        return total;
    }

    /// R_pi(e_1, ..., e_n): product over blocks of the block cumulants.
    Rational partitioned_cumulant(const Partition& pi, const std::vector<Expr>& slots)
    {
        if (pi.size() != static_cast<int>(slots.size()))
            throw std::domain_error("partition size does not match slot count");
        Rational out = 1;
        for (const auto& block : pi.blocks()) {
            std::vector<Expr> sub;
            for (int i : block)
                sub.push_back(slots[static_cast<std::size_t>(i - 1)]);
            out *= expr_mixed_cumulant(sub);
            if (out == 0)
                return 0;
        }
        return out;
    }

    /// R_n(a b, e_3, ..., e_{n+1}) through the expansion
    ///   sum_{i=1}^{n-1} R_i(b, e_3..e_{i+1}) R_{n+1-i}(a, e_{i+2}..e_{n+1})
    ///   + R_n(b, e_3..e_{n+1}) R_1(a) + R_{n+1}(a, b, e_3..e_{n+1}).
    Rational product_expand(const Expr& a, const Expr& b, const std::vector<Expr>& rest)
    {
        // args[0] = a, args[1] = b, args[2..n] = rest.
        std::vector<Expr> args{a, b};
        args.insert(args.end(), rest.begin(), rest.end());
        const std::size_t n = 1 + rest.size();
        auto range = [&](std::size_t from, std::size_t to) {  // args[from..to], inclusive, 0-based
            return std::vector<Expr>(args.begin() + static_cast<std::ptrdiff_t>(from),
                                     args.begin() + static_cast<std::ptrdiff_t>(to) + 1);
        };
        Rational total = expr_mixed_cumulant(args);
        total += expr_mixed_cumulant(range(1, n)) * expr_mixed_cumulant({a});
        for (std::size_t i = 1; i < n; ++i) {
            Rational left = expr_mixed_cumulant(range(1, i));
            if (left == 0)
                continue;
            std::vector<Expr> right{a};
            for (std::size_t j = i + 1; j <= n; ++j)
                right.push_back(args[j]);
            total += left * expr_mixed_cumulant(right);
        }
        return total;
    }

    /// Same quantity as the sum of R_pi over pi in NC(n+1) with pi v sigma_{n+1} = 1_{n+1}.
    Rational product_expand_by_join(const Expr& a, const Expr& b, const std::vector<Expr>& rest)
    {
        std::vector<Expr> args{a, b};
        args.insert(args.end(), rest.begin(), rest.end());
        const int m = static_cast<int>(args.size());
        const Partition sigma = sigma_pair(m);
        Rational total = 0;
        for (const auto& pi : nc_table(m))
            if (join_is_full(pi, sigma))
                total += partitioned_cumulant(pi, args);
        return total;
    }

    /// R_n(x_1 y_1, ..., x_n y_n) = sum_{pi in NC(n)} R_pi(x) R_{K(pi)}(y) for
    /// x's drawn from one family and y's from another.
    Rational cumulant_of_products(const std::vector<Expr>& xs, const std::vector<Expr>& ys)
    {
        if (xs.empty() || xs.size() != ys.size())
            throw std::domain_error("cumulant_of_products needs equally many x and y arguments");
        int fx = single_family(xs), fy = single_family(ys);
        if (fx >= 0 && fx == fy)
            throw std::domain_error("cumulant_of_products arguments must come from two free families");
        const int n = static_cast<int>(xs.size());
        Rational total = 0;
        for (const auto& pi : nc_table(n)) {
            Rational rx = partitioned_cumulant(pi, xs);
            if (rx == 0)
                continue;
            total += rx * partitioned_cumulant(kreweras(pi), ys);
        }
        return total;
    }

    std::size_t cache_entries() const { return moments_.size() + cumulants_.size() + slots_.size(); }

private:
    Word canon(const Word& w) const { return options_.canonical_rotation ? rotate_canonical(w) : w; }

    void check(const Word& w) const
    {
        if (w.size() > kMaxWordLength)
            throw std::length_error("word longer than " + std::to_string(kMaxWordLength) + " letters");
        model_.validate(w);
    }

    static std::vector<Word> rotate_slots(const std::vector<Word>& slots)
    {
        const std::size_t n = slots.size();
        std::size_t best = 0;
        for (std::size_t r = 1; r < n; ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                const Word& a = slots[(r + i) % n];
                const Word& b = slots[(best + i) % n];
                if (a < b) {
                    best = r;
                    break;
                }
                if (b < a)
                    break;
            }
        }
        std::vector<Word> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(slots[(best + i) % n]);
        return out;
    }

    int single_family(const std::vector<Expr>& args) const
    {
        int fam = -1;
        for (const auto& e : args)
            for (const auto& [w, c] : e.terms())
                for (const auto& l : w) {
                    if (fam == -1)
                        fam = l.family;
                    else if (l.family != fam)
                        throw std::domain_error("cumulant_of_products argument mixes families");
                }
        return fam;
    }

    // w is in memo-key form (see canon).
    Rational moment_canonical(const Word& w)
    {
        if (w.empty())
            return 1;
        const int fam = w[0].family;
        bool single = true;
        int exponent = 0;
        for (const auto& l : w) {
            single = single && l.family == fam;
            exponent += l.power;
        }
        if (single)
            return model_.family(fam).moment(exponent);

        const std::string key = detail::word_key(w);
        if (auto hit = moments_.find(key))
            return *hit;

        const std::size_t n = w.size();
        std::vector<std::size_t> candidates;  // positions after 0 in the family of w[0]
        for (std::size_t i = 1; i < n; ++i)
            if (w[i].family == fam)
                candidates.push_back(i);
        Rational total = 0;
        const std::size_t count = candidates.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << count); ++mask) {
            std::vector<Letter> block{w[0]};
            std::vector<std::size_t> members{0};
            for (std::size_t j = 0; j < count; ++j)
                if (mask & (std::uint64_t{1} << j)) {
                    block.push_back(w[candidates[j]]);
                    members.push_back(candidates[j]);
                }
            members.push_back(n);
            Rational term = joint_cumulant(Word(std::move(block)));
            for (std::size_t g = 0; g + 1 < members.size() && term != 0; ++g) {
                std::size_t lo = members[g] + 1, hi = members[g + 1];
                if (lo >= hi)
                    continue;
                std::vector<Letter> gap(w.letters().begin() + static_cast<std::ptrdiff_t>(lo),
                                        w.letters().begin() + static_cast<std::ptrdiff_t>(hi));
                term *= moment_canonical(canon(Word(std::move(gap))));
            }
            total += term;
        }
        moments_.store(key, total);
        return total;
    }

    // w is in memo-key form, nonempty, single family.
    Rational family_cumulant(const Word& w)
    {
        const Family& fam = model_.family(w[0].family);
        const std::size_t n = w.size();
        bool all_positive = true;
        int exponent = 0;
        for (const auto& l : w) {
            all_positive = all_positive && l.power > 0;
            exponent += l.power;
        }
        if (n == 1)
            return fam.moment(exponent);
        if (all_positive && fam.cumulant)
            return fam.cumulant(static_cast<int>(n));

        const std::string key = detail::word_key(w);
        if (auto hit = cumulants_.find(key))
            return *hit;

        // phi(w) = sum over blocks B containing position 0 of R(w|B) times the
        // moments of the gaps, which inside one family depend only on the
        // exponent sum. Solve for the B = everything term.
        std::vector<int> prefix(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i)
            prefix[i + 1] = prefix[i] + w[i].power;
        Rational rest = 0;
        const std::uint64_t full = (std::uint64_t{1} << (n - 1)) - 1;
        for (std::uint64_t mask = 0; mask < full; ++mask) {
            std::vector<Letter> block{w[0]};
            Rational gaps = 1;
            std::size_t prev = 0;
            for (std::size_t j = 1; j < n; ++j) {
                if (mask & (std::uint64_t{1} << (j - 1))) {
                    block.push_back(w[j]);
                    if (j > prev + 1)
                        gaps *= fam.moment(prefix[j] - prefix[prev + 1]);
                    prev = j;
                }
            }
            if (n > prev + 1)
                gaps *= fam.moment(prefix[n] - prefix[prev + 1]);
            if (gaps == 0)
                continue;
            rest += family_cumulant(canon(Word(std::move(block)))) * gaps;
        }
        Rational value = fam.moment(exponent) - rest;
        cumulants_.store(key, value);
        return value;
    }

    // slots in memo-key form, n >= 2, no unit slots, some slot longer than one letter.
    Rational slot_cumulant_canonical(const std::vector<Word>& slots)
    {
        std::string key;
        for (const auto& s : slots) {
            detail::append_key(key, s);
            key.push_back('\0');
        }
        if (auto hit = slots_.find(key))
            return *hit;
        const int n = static_cast<int>(slots.size());
        Word concat;
        for (const auto& s : slots)
            concat = concat * s;
        Rational value = word_moment(concat);
        const Partition top = Partition::one(n);
        for (const auto& pi : nc_table(n)) {
            if (pi == top)
                continue;
            Rational term = 1;
            for (const auto& block : pi.blocks()) {
                std::vector<Word> sub;
                for (int i : block)
                    sub.push_back(slots[static_cast<std::size_t>(i - 1)]);
                term *= slot_cumulant(sub);
                if (term == 0)
                    break;
            }
            value -= term;
        }
        slots_.store(key, value);
        return value;
    }

    FreeModel model_;
    EngineOptions options_;
    detail::RationalCache moments_;
    detail::RationalCache cumulants_;
    detail::RationalCache slots_;
};

/// Closed form for R(X^{-1}, X^{i_1}, X^{-1}, X^{i_2}, ..., X^{-1}, X^{i_m})
/// with X ~ nu(lambda, alpha): 0 if some i_k > 1, otherwise
/// (-1)^{i_1+...+i_m} R_m(X^{-1}) at alpha = 1, rescaled by alpha^{#X - #X^{-1}}.
inline Rational prop31_closed_form(const std::vector<int>& runs, const Rational& lambda, const Rational& alpha)
{
    if (runs.empty())
        throw std::domain_error("run-length pattern needs m >= 1");
    FreePoissonParams unit(lambda, 1);
    unit.require_invertible();
    if (alpha <= 0)
        throw std::domain_error("alpha must be positive");
    long xs = 0;
    for (int r : runs) {
        if (r < 0)
            throw std::domain_error("negative run length");
        if (r > 1)
            return 0;
        xs += r;
    }
    const long m = static_cast<long>(runs.size());
    return sign_power(xs) * inv_fp_cumulant(static_cast<int>(m), unit) * pow(alpha, xs - m);
}

/// The word X^{-1} X^{i_1} X^{-1} X^{i_2} ... for a run-length pattern.
inline Word prop31_word(const std::vector<int>& runs, int family = 0)
{
    std::vector<Letter> letters;
    for (int r : runs) {
        letters.push_back({family, -1});
        for (int j = 0; j < r; ++j)
            letters.push_back({family, 1});
    }
    return Word(std::move(letters));
}

/// R_1..R_{n_max} of X^{-1} from R_1(X) alone, using the expansion of
/// R_n(X X^{-1}, X^{-1}, ..., X^{-1}) together with the hypothesis
/// R_{k+1}(X, X^{-1}, ..., X^{-1}) = -R_k(X^{-1}).
inline std::vector<Rational> remark32_derive(const Rational& r1x, int n_max)
{
    if (r1x == 1)
        throw std::domain_error("R_1(X) = 1 makes the recursion singular");
    if (n_max < 1)
        throw std::domain_error("n_max must be >= 1");
    std::vector<Rational> inv(static_cast<std::size_t>(n_max) + 1, 0);  // inv[k] = R_k(X^{-1})
    auto mixed = [&](int k) -> Rational { return -inv[static_cast<std::size_t>(k)]; };  // R_{k+1}(X, X^{-1} x k)
    // n = 1: 1 = R_1(X) R_1(X^{-1}) + R_2(X, X^{-1}).
    // n >= 2: 0 = R_{n+1}(X, X^{-1}..) + R_1(X) R_n(X^{-1}) + sum_{i<n} R_i(X^{-1}) R_{n+1-i}(X, X^{-1}..).
    // Both are linear in R_n(X^{-1}) with slope R_1(X) - 1.
    for (int n = 1; n <= n_max; ++n) {
        Rational known = 0;
        for (int i = 1; i < n; ++i)
            known += inv[static_cast<std::size_t>(i)] * mixed(n - i);
        Rational lhs = n == 1 ? Rational(1) : Rational(0);
        inv[static_cast<std::size_t>(n)] = (lhs - known) / (r1x - 1);
    }
    inv.erase(inv.begin());
    return inv;
}

}  // namespace freecum
