#pragma once

// Free families, letters, words and formal rational combinations of words.

#include "freecum/distributions.hpp"
#include "freecum/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace freecum {

/// A generator or its inverse. Family -1 is the unit.
struct Letter {
    int family = -1;
    int power = 1;  // +1 or -1

    bool is_identity() const noexcept { return family < 0; }

    friend auto operator<=>(const Letter&, const Letter&) = default;
};

inline constexpr Letter kIdentity{};

/// Finite product of letters. The canonical form carries no identity letters.
class Word {
public:
    Word() = default;
    Word(std::initializer_list<Letter> letters) : Word(std::vector<Letter>(letters)) {}
    explicit Word(std::vector<Letter> letters)
    {
        for (const auto& l : letters)
            if (!l.is_identity())
                letters_.push_back(l);
    }

    std::size_t size() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    const Letter& operator[](std::size_t i) const { return letters_[i]; }
    const std::vector<Letter>& letters() const noexcept { return letters_; }
    auto begin() const { return letters_.begin(); }
    auto end() const { return letters_.end(); }

    friend Word operator*(const Word& a, const Word& b)
    {
        Word w = a;
        w.letters_.insert(w.letters_.end(), b.letters_.begin(), b.letters_.end());
        return w;
    }

    friend auto operator<=>(const Word&, const Word&) = default;

private:
    std::vector<Letter> letters_;
};

/// Lexicographically least cyclic rotation, under the letter order
/// (family, power) so that X^{-1} < X < Y^{-1} < Y.
inline Word rotate_canonical(const Word& w)
{
    const std::size_t n = w.size();
    if (n <= 1)
        return w;
    std::size_t best = 0;
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const Letter& a = w[(r + i) % n];
            const Letter& b = w[(best + i) % n];
            if (a < b) {
                best = r;
                break;
            }
            if (b < a)
                break;
        }
    }
    std::vector<Letter> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(w[(best + i) % n]);
    return Word(std::move(out));
}

/// Finite rational combination of words; zero coefficients are never stored.
class Expr {
public:
    Expr() = default;
    Expr(const Word& w, Rational coeff = 1) { add(w, coeff); }
    static Expr identity() { return Expr(Word{}); }

    void add(const Word& w, const Rational& coeff)
    {
        if (coeff == 0)
            return;
        auto [it, inserted] = terms_.try_emplace(w, coeff);
        if (!inserted) {
            it->second += coeff;
            if (it->second == 0)
                terms_.erase(it);
        }
    }

    const std::map<Word, Rational>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    friend Expr operator+(const Expr& a, const Expr& b)
    {
        Expr out = a;
        for (const auto& [w, c] : b.terms_)
            out.add(w, c);
        return out;
    }

    friend Expr operator-(const Expr& a, const Expr& b) { return a + Rational(-1) * b; }

    friend Expr operator*(const Expr& a, const Expr& b)
    {
        Expr out;
        for (const auto& [wa, ca] : a.terms_)
            for (const auto& [wb, cb] : b.terms_)
                out.add(wa * wb, ca * cb);
        return out;
    }

    friend Expr operator*(const Rational& k, const Expr& a)
    {
        Expr out;
        for (const auto& [w, c] : a.terms_)
            out.add(w, k * c);
        return out;
    }

    friend bool operator==(const Expr&, const Expr&) = default;

private:
    std::map<Word, Rational> terms_;
};

/// One single-generator free family. The state restricted to the family is
/// given by phi(g^m); negative m only for invertible generators.
struct Family {
    std::string symbol;
    bool invertible = false;
    std::function<Rational(int)> moment;
    /// Optional pure cumulants R_k(g, ..., g), used for all-positive words.
    std::function<Rational(int)> cumulant;
    /// Label for reports, e.g. "free_poisson(2/1,1/1)".
    std::string description;
};

/// Unresolvable letters and inverses of non-invertible generators.
class ModelError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Mutually free single-generator families on a tracial state.
class FreeModel {
public:
    int add_family(Family f)
    {
        for (const auto& g : families_)
            if (g.symbol == f.symbol)
                throw ModelError("duplicate family symbol " + f.symbol);
        families_.push_back(std::move(f));
        return static_cast<int>(families_.size()) - 1;
    }

    const std::vector<Family>& families() const noexcept { return families_; }
    const Family& family(int index) const
    {
        if (index < 0 || index >= static_cast<int>(families_.size()))
            throw ModelError("unknown family index " + std::to_string(index));
        return families_[static_cast<std::size_t>(index)];
    }

    int find(const std::string& symbol) const
    {
        for (std::size_t i = 0; i < families_.size(); ++i)
            if (families_[i].symbol == symbol)
                return static_cast<int>(i);
        throw ModelError("unknown generator '" + symbol + "'");
    }

    Letter letter(const std::string& symbol, int power = 1) const
    {
        int f = find(symbol);
        if (power != 1 && power != -1)
            throw ModelError("letter power must be +1 or -1");
        if (power == -1 && !families_[static_cast<std::size_t>(f)].invertible)
            throw ModelError("generator '" + symbol + "' is not invertible in this model");
        return {f, power};
    }

    void validate(const Word& w) const
    {
        for (const auto& l : w) {
            const Family& f = family(l.family);
            if (l.power == -1 && !f.invertible)
                throw ModelError("generator '" + f.symbol + "' is not invertible in this model");
            if (l.power != 1 && l.power != -1)
                throw ModelError("letter power must be +1 or -1");
        }
    }

    std::string letter_name(const Letter& l) const
    {
        if (l.is_identity())
            return "I";
        return family(l.family).symbol + (l.power < 0 ? "i" : "");
    }

    std::string word_name(const Word& w) const
    {
        if (w.empty())
            return "I";
        std::string out;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i)
                out += '*';
            out += letter_name(w[i]);
        }
        return out;
    }

    std::string expr_name(const Expr& e) const
    {
        if (e.is_zero())
            return "0";
        std::string out;
        bool first = true;
        for (const auto& [w, c] : e.terms()) {
            if (!first)
                out += " + ";
            first = false;
            if (c != 1)
                out += to_string(c) + "*";
            out += word_name(w);
        }
        return out;
    }

private:
    std::vector<Family> families_;
};

namespace detail {

/// Lazily extended table of moments indexed by order >= 0.
class MomentTable {
public:
    using Generator = std::function<std::vector<Rational>(int)>;
    explicit MomentTable(Generator gen) : gen_(std::move(gen)) {}

    Rational at(int m)
    {
        std::lock_guard lock(mutex_);
        if (m >= static_cast<int>(values_.size()))
            values_ = gen_(std::max(m, 2 * static_cast<int>(values_.size()) + 8));
        return values_[static_cast<std::size_t>(m)];
    }

private:
    Generator gen_;
    std::vector<Rational> values_;
    std::mutex mutex_;
};

}  // namespace detail

/// Free Poisson generator. Positive moments come from the cumulants lambda alpha^k;
/// negative moments (lambda > 1) from the Cauchy-transform series, which does
/// not use the closed-form inverse cumulants.
inline Family free_poisson_family(const std::string& symbol, const FreePoissonParams& p)
{
    auto pos = std::make_shared<detail::MomentTable>(
        [p](int n) { return moments_from_cumulants([&](int k) { return fp_cumulant(k, p); }, n); });
    std::shared_ptr<detail::MomentTable> neg;
    if (p.invertible())
        neg = std::make_shared<detail::MomentTable>([p](int n) { return negative_moments_cauchy(n, p); });
    Family f;
    f.symbol = symbol;
    f.invertible = p.invertible();
    f.moment = [pos, neg, symbol](int m) -> Rational {
        if (m >= 0)
            return pos->at(m);
        if (!neg)
            throw ModelError("negative power of non-invertible generator '" + symbol + "'");
        return neg->at(-m);
    };
    f.cumulant = [p](int k) { return fp_cumulant(k, p); };
    f.description = "free_poisson(" + to_string(p.lambda) + "," + to_string(p.alpha) + ")";
    return f;
}

/// Generator distributed as X^{-1} for X ~ nu(lambda, alpha), lambda > 1
/// (the free gamma law). Its own inverse is free Poisson.
inline Family inverse_free_poisson_family(const std::string& symbol, const FreePoissonParams& p)
{
    p.require_invertible();
    Family base = free_poisson_family(symbol, p);
    Family f;
    f.symbol = symbol;
    f.invertible = true;
    f.moment = [m = base.moment](int k) { return m(-k); };
    f.description = "inverse_free_poisson(" + to_string(p.lambda) + "," + to_string(p.alpha) + ")";
    return f;
}

/// Non-invertible generator given by its cumulant sequence.
inline Family cumulant_family(const std::string& symbol, CumulantSequence kappa, std::string description)
{
    auto pos = std::make_shared<detail::MomentTable>([kappa](int n) { return moments_from_cumulants(kappa, n); });
    Family f;
    f.symbol = symbol;
    f.invertible = false;
    f.moment = [pos, symbol](int m) -> Rational {
        if (m < 0)
            throw ModelError("negative power of non-invertible generator '" + symbol + "'");
        return pos->at(m);
    };
    f.cumulant = std::move(kappa);
    f.description = std::move(description);
    return f;
}

/// Standard semicircle: cumulants (0, 1, 0, 0, ...).
inline Family semicircle_family(const std::string& symbol)
{
    return cumulant_family(symbol, [](int k) { return k == 2 ? Rational(1) : Rational(0); }, "semicircle(0,1)");
}

class ExprParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Grammar: expr := term ('+' term)*; term := [rational '*'] factor ('*' factor)*;
/// factor := letter symbol, its inverse (symbol + "i"), or I. A leading '-'
/// negates a term.
inline Expr parse_expr(const std::string& text, const FreeModel& model)
{
    std::vector<std::string> terms;
    {
        std::string cur;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == ' ')
                continue;
            if (c == '+' || (c == '-' && !cur.empty() && cur.back() != '*' && cur.back() != '/')) {
                if (cur.empty() && c == '+')
                    throw ExprParseError("empty term in '" + text + "'");
                if (!cur.empty())
                    terms.push_back(cur);
                cur = c == '-' ? "-" : "";
                continue;
            }
            cur += c;
        }
        if (cur.empty() || cur == "-")
            throw ExprParseError("empty term in '" + text + "'");
        terms.push_back(cur);
    }
    Expr out;
    for (const auto& term : terms) {
        Rational coeff = 1;
        std::vector<Letter> letters;
        std::size_t start = 0;
        bool first = true;
        while (start <= term.size()) {
            std::size_t star = term.find('*', start);
            std::string factor = term.substr(start, star == std::string::npos ? std::string::npos : star - start);
            if (factor.empty())
                throw ExprParseError("empty factor in '" + text + "'");
            bool negate = false;
            if (first && factor[0] == '-') {
                negate = true;
                factor.erase(0, 1);
                if (factor.empty())
                    throw ExprParseError("dangling '-' in '" + text + "'");
            }
            if (negate)
                coeff = -coeff;
            if (first && ((factor[0] >= '0' && factor[0] <= '9'))) {
                coeff *= parse_rational(factor);
            } else if (factor == "I") {
                letters.push_back(kIdentity);
            } else {
                int power = 1;
                std::string symbol = factor;
                bool known = false;
                for (const auto& f : model.families())
                    known = known || f.symbol == symbol;
                if (!known && symbol.size() > 1 && symbol.back() == 'i') {
                    symbol.pop_back();
                    power = -1;
                }
                try {
                    letters.push_back(model.letter(symbol, power));
                } catch (const ModelError& e) {
                    throw ExprParseError(std::string(e.what()) + " in '" + text + "'");
                }
            }
            first = false;
            if (star == std::string::npos)
                break;
            start = star + 1;
        }
        out.add(Word(std::move(letters)), coeff);
    }
    return out;
}

}  // namespace freecum
