#pragma once

// Non-crossing set partitions of {1..n}: enumeration, Kreweras complement,
// joins, restrictions and Catalan counting.

#include "freecum/rational.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace freecum {

/// Largest n for which enumerate_nc materializes the whole lattice
/// (C_14 = 2,674,440). Beyond this use for_each_nc.
inline constexpr int kMaterializeCap = 14;

class Partition {
public:
    using Block = std::vector<int>;

    Partition() = default;

    /// Builds from blocks over {1..n}. Blocks may come in any order; the
    /// result is canonical. Throws std::invalid_argument unless the blocks
    /// are disjoint, nonempty and cover {1..n} exactly.
    Partition(int n, const std::vector<Block>& blocks)
    {
        if (n <= 0)
            throw std::invalid_argument("partition of an empty ground set");
        std::vector<int> raw(static_cast<std::size_t>(n), -1);
        int label = 0;
        for (const auto& block : blocks) {
            if (block.empty())
                throw std::invalid_argument("partition has an empty block");
            for (int e : block) {
                if (e < 1 || e > n)
                    throw std::invalid_argument("partition element out of range: " + std::to_string(e));
                if (raw[e - 1] != -1)
                    throw std::invalid_argument("partition blocks overlap at " + std::to_string(e));
                raw[e - 1] = label;
            }
            ++label;
        }
        for (int i = 0; i < n; ++i)
            if (raw[i] == -1)
                throw std::invalid_argument("partition does not cover " + std::to_string(i + 1));
        *this = from_labels(raw);
    }

    /// Builds from an arbitrary block-label per element (0-based positions).
    static Partition from_labels(const std::vector<int>& raw)
    {
        if (raw.empty())
            throw std::invalid_argument("partition of an empty ground set");
        Partition p;
        p.labels_.resize(raw.size());
        std::vector<int> remap;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            int r = raw[i];
            if (r < 0)
                throw std::invalid_argument("negative block label");
            if (static_cast<std::size_t>(r) >= remap.size())
                remap.resize(r + 1, -1);
            if (remap[r] == -1)
                remap[r] = p.num_blocks_++;
            p.labels_[i] = static_cast<std::uint8_t>(remap[r]);
        }
        return p;
    }

    static Partition one(int n) { return from_labels(std::vector<int>(static_cast<std::size_t>(n), 0)); }

    static Partition singletons(int n)
    {
        std::vector<int> raw(static_cast<std::size_t>(n));
        std::iota(raw.begin(), raw.end(), 0);
        return from_labels(raw);
    }

    int size() const noexcept { return static_cast<int>(labels_.size()); }
    int num_blocks() const noexcept { return num_blocks_; }

    /// Block index (ordered by block minimum) of element i in {1..n}.
    int block_of(int i) const { return labels_.at(static_cast<std::size_t>(i - 1)); }

    /// Restricted-growth labels, 0-based by position.
    const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

    std::vector<Block> blocks() const
    {
        std::vector<Block> out(static_cast<std::size_t>(num_blocks_));
        for (std::size_t i = 0; i < labels_.size(); ++i)
            out[labels_[i]].push_back(static_cast<int>(i + 1));
        return out;
    }

    bool same_block(int i, int j) const { return block_of(i) == block_of(j); }

    /// p <= q in refinement order: every block of p lies inside a block of q.
    bool refines(const Partition& q) const
    {
        if (q.size() != size())
            throw std::domain_error("refinement test on different ground sets");
        std::vector<int> image(static_cast<std::size_t>(num_blocks_), -1);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            int& slot = image[labels_[i]];
            if (slot == -1)
                slot = q.labels_[i];
            else if (slot != q.labels_[i])
                return false;
        }
        return true;
    }

    friend bool operator==(const Partition&, const Partition&) = default;
    friend bool operator<(const Partition& a, const Partition& b) { return a.labels_ < b.labels_; }

private:
    std::vector<std::uint8_t> labels_;
    int num_blocks_ = 0;
};

/// "{1,2}{3,4}" form.
inline std::string to_string(const Partition& p)
{
    std::string out;
    for (const auto& block : p.blocks()) {
        out += '{';
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (i)
                out += ',';
            out += std::to_string(block[i]);
        }
        out += '}';
    }
    return out;
}

/// Parses the "{1,2}{3,4}" form; n is the largest element.
inline Partition parse_partition(const std::string& text)
{
    std::vector<Partition::Block> blocks;
    int n = 0;
    std::size_t i = 0;
    auto fail = [&] { return std::invalid_argument("malformed partition: '" + text + "'"); };
    while (i < text.size()) {
        if (text[i] == ' ') {
            ++i;
            continue;
        }
        if (text[i] != '{')
            throw fail();
        ++i;
        Partition::Block block;
        std::string num;
        for (; i < text.size() && text[i] != '}'; ++i) {
            char c = text[i];
            if (c >= '0' && c <= '9')
                num += c;
            else if (c == ',' || c == ' ') {
                if (!num.empty()) {
                    block.push_back(std::stoi(num));
                    num.clear();
                }
            } else
                throw fail();
        }
        if (i == text.size())
            throw fail();
        ++i;
        if (!num.empty())
            block.push_back(std::stoi(num));
        for (int e : block)
            n = std::max(n, e);
        blocks.push_back(std::move(block));
    }
    return Partition(n, blocks);
}

inline nlohmann::json to_json(const Partition& p)
{
    return {{"n", p.size()}, {"blocks", p.blocks()}};
}

inline Partition partition_from_json(const nlohmann::json& j)
{
    return Partition(j.at("n").get<int>(), j.at("blocks").get<std::vector<Partition::Block>>());
}

/// True iff no a<b<c<d with a,c in one block and b,d in another.
inline bool is_noncrossing(const Partition& p)
{
    // Scan left to right with a stack of open blocks; an element of a block
    // that is not on top of the stack closes over an interleaved block.
    const auto& lab = p.labels();
    std::vector<int> last(static_cast<std::size_t>(p.num_blocks()), -1);
    for (std::size_t i = 0; i < lab.size(); ++i)
        last[lab[i]] = static_cast<int>(i);
    std::vector<int> stack;
    std::vector<char> open(static_cast<std::size_t>(p.num_blocks()), 0);
    for (std::size_t i = 0; i < lab.size(); ++i) {
        int b = lab[i];
        if (open[b]) {
            if (stack.back() != b)
                return false;
        } else {
            open[b] = 1;
            stack.push_back(b);
        }
        if (last[b] == static_cast<int>(i)) {
            stack.pop_back();
            open[b] = 0;
        }
    }
    return true;
}

namespace detail {

// Fills labels over the pending intervals. The block containing the lowest
// pending element is chosen first; its gaps become independent intervals.
template <class Visitor>
void nc_fill(std::vector<int>& labels, std::vector<std::pair<int, int>>& agenda, int next_label, Visitor& visit)
{
    while (!agenda.empty() && agenda.back().first > agenda.back().second)
        agenda.pop_back();
    if (agenda.empty()) {
        visit(labels);
        return;
    }
    auto [lo, hi] = agenda.back();
    agenda.pop_back();
    const int span = hi - lo;
    // Bit j of mask selects lo+1+j into the block of lo.
    for (std::uint32_t mask = 0; mask < (1u << span); ++mask) {
        std::vector<std::pair<int, int>> saved = agenda;
        labels[lo] = next_label;
        int prev = lo;
        std::vector<std::pair<int, int>> gaps;
        for (int j = 0; j < span; ++j) {
            if (mask & (1u << j)) {
                int e = lo + 1 + j;
                labels[e] = next_label;
                gaps.emplace_back(prev + 1, e - 1);
                prev = e;
            }
        }
        gaps.emplace_back(prev + 1, hi);
        // Stack order: earliest gap on top.
        for (auto it = gaps.rbegin(); it != gaps.rend(); ++it)
            agenda.push_back(*it);
        nc_fill(labels, agenda, next_label + 1, visit);
        agenda = std::move(saved);
    }
}

}  // namespace detail

/// Streams every element of NC(n) to visit(const Partition&), in a fixed
/// deterministic order, without materializing the lattice.
template <class Visitor>
void for_each_nc(int n, Visitor&& visit)
{
    if (n <= 0)
        throw std::invalid_argument("NC(n) requires n >= 1");
    if (n > 31)
        throw std::length_error("NC(n) enumeration supports n <= 31");
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<std::pair<int, int>> agenda{{0, n - 1}};
    auto emit = [&](const std::vector<int>& raw) { visit(Partition::from_labels(raw)); };
    detail::nc_fill(labels, agenda, 0, emit);
}

/// All of NC(n), canonical and duplicate-free. n is capped at kMaterializeCap.
inline std::vector<Partition> enumerate_nc(int n)
{
    if (n <= 0)
        throw std::invalid_argument("NC(n) requires n >= 1");
    if (n > kMaterializeCap)
        throw std::length_error("NC(" + std::to_string(n) + ") exceeds the materialization cap of " +
                                std::to_string(kMaterializeCap) + "; use for_each_nc");
    std::vector<Partition> out;
    for_each_nc(n, [&](const Partition& p) { out.push_back(p); });
    return out;
}

/// Shared, lazily built NC(n) tables for the evaluation hot paths.
inline const std::vector<Partition>& nc_table(int n)
{
    static std::mutex mutex;
    static std::vector<std::vector<Partition>> tables(kMaterializeCap + 1);
    static std::vector<char> built(kMaterializeCap + 1, 0);
    if (n <= 0 || n > kMaterializeCap)
        throw std::length_error("NC table size out of range: " + std::to_string(n));
    std::lock_guard lock(mutex);
    if (!built[n]) {
        tables[n] = enumerate_nc(n);
        built[n] = 1;
    }
    return tables[n];
}

/// C_k via the binomial formula (2k choose k)/(k+1).
inline BigInt catalan(unsigned k)
{
    BigInt binom;
    mpz_bin_uiui(binom.get_mpz_t(), 2ul * k, k);
    return binom / (k + 1);
}

/// C_0..C_k via the convolution recurrence C_k = sum_{i=1}^k C_{i-1} C_{k-i}.
inline std::vector<BigInt> catalan_by_recurrence(unsigned k)
{
    std::vector<BigInt> c(k + 1);
    c[0] = 1;
    for (unsigned m = 1; m <= k; ++m) {
        BigInt s = 0;
        for (unsigned i = 1; i <= m; ++i)
            s += c[i - 1] * c[m - i];
        c[m] = s;
    }
    return c;
}

/// Kreweras complement K(p): the coarsest sigma on the barred points with
/// p and sigma interleaved still non-crossing. Computed as the cycles of
/// p^{-1} composed with the long cycle (1 2 ... n).
inline Partition kreweras(const Partition& p)
{
    if (!is_noncrossing(p))
        throw std::domain_error("Kreweras complement of a crossing partition: " + to_string(p));
    const int n = p.size();
    std::vector<int> prev(static_cast<std::size_t>(n));  // p^{-1}: previous element of the block, cyclically
    for (const auto& block : p.blocks()) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            int e = block[i] - 1;
            int before = block[(i + block.size() - 1) % block.size()] - 1;
            prev[e] = before;
        }
    }
    std::vector<int> raw(static_cast<std::size_t>(n), -1);
    int label = 0;
    for (int start = 0; start < n; ++start) {
        if (raw[start] != -1)
            continue;
        int e = start;
        while (raw[e] == -1) {
            raw[e] = label;
            e = prev[(e + 1) % n];
        }
        ++label;
    }
    return Partition::from_labels(raw);
}

/// Whether the join of p and q in the full partition lattice is 1_n.
inline bool join_is_full(const Partition& p, const Partition& q)
{
    if (p.size() != q.size())
        throw std::domain_error("join of partitions on different ground sets");
    const int n = p.size();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    int components = n;
    auto unite = [&](const Partition& part) {
        std::vector<int> first(static_cast<std::size_t>(part.num_blocks()), -1);
        for (int i = 0; i < n; ++i) {
            int b = part.labels()[i];
            if (first[b] == -1) {
                first[b] = i;
                continue;
            }
            int a = find(first[b]), c = find(i);
            if (a != c) {
                parent[a] = c;
                --components;
            }
        }
    };
    unite(p);
    unite(q);
    return components == 1;
}

/// Restriction to a sorted subset s of {1..n}, relabelled to {1..|s|}.
inline Partition restrict(const Partition& p, const std::vector<int>& subset)
{
    if (subset.empty())
        throw std::domain_error("restriction to an empty subset");
    std::vector<int> raw;
    raw.reserve(subset.size());
    int previous = 0;
    for (int e : subset) {
        if (e <= previous || e > p.size())
            throw std::domain_error("restriction subset is not a sorted subset of {1.." + std::to_string(p.size()) +
                                    "}");
        previous = e;
        raw.push_back(p.block_of(e));
    }
    return Partition::from_labels(raw);
}

/// Rotation i -> i-1 (mod n, so 1 -> n).
inline Partition rotate_down(const Partition& p)
{
    const int n = p.size();
    std::vector<int> raw(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        raw[(i + n - 1) % n] = p.labels()[i];
    return Partition::from_labels(raw);
}

/// sigma_n: {(1,2),(3),...,(n)}.
inline Partition sigma_pair(int n)
{
    if (n < 2)
        throw std::invalid_argument("sigma_n requires n >= 2");
    std::vector<int> raw(static_cast<std::size_t>(n));
    raw[0] = 0;
    for (int i = 1; i < n; ++i)
        raw[i] = i - 1;
    return Partition::from_labels(raw);
}

}  // namespace freecum
