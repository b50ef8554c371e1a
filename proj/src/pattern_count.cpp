#include "permlim/pattern_count.hpp"
#include "permlim/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace permlim {

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i)
    {
        for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    /// Number of inserted keys < i.
    std::int64_t prefix(std::size_t i) const
    {
        std::int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

std::vector<int> zero_based(const Perm& tau)
{
    std::vector<int> v(tau.images().begin(), tau.images().end());
    for (int& x : v) --x;
    return v;
}

/// leftLess[j] = #{i < j : v[i] < v[j]}.
std::vector<std::int64_t> left_less(const std::vector<int>& v)
{
    Fenwick fw(v.size());
    std::vector<std::int64_t> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        out[j] = fw.prefix(static_cast<std::size_t>(v[j]));
        fw.add(static_cast<std::size_t>(v[j]));
    }
    return out;
}

std::uint64_t rank_of(std::initializer_list<int> keys)
{
    std::vector<int> k(keys);
    return pattern_of(std::span<const int>(k)).lex_rank();
}

// Value ranges relative to the fixed middle element(s): below, between, above.
enum Range { kLow = 0, kMid = 1, kHigh = 2 };

// Representative key for the outer element in `range`; `second` breaks ties
// between two outer elements in the same range.
int representative(int range, bool second) { return range * 20 + (second ? 2 : 1); }

/// Pattern rank for (i, j, l) with j the middle element (key 20).
std::uint64_t pattern3(int ri, int rl, bool i_less)
{
    const int base_i = ri == kLow ? 0 : 2;
    const int base_l = rl == kLow ? 0 : 2;
    bool i_second = false, l_second = false;
    if (ri == rl) (i_less ? l_second : i_second) = true;
    return rank_of({representative(base_i, i_second), 20, representative(base_l, l_second)});
}

/// Pattern rank for (i, j, k, l); `up` means v[j] < v[k].
std::uint64_t pattern4(bool up, int ri, int rl, bool i_less)
{
    bool i_second = false, l_second = false;
    if (ri == rl) (i_less ? l_second : i_second) = true;
    const int vj = up ? 20 : 40;
    const int vk = up ? 40 : 20;
    return rank_of({representative(ri, i_second), vj, vk, representative(rl, l_second)});
}

std::vector<std::uint64_t> count2(const std::vector<int>& v)
{
    const auto n = static_cast<std::uint64_t>(v.size());
    std::uint64_t ascents = 0;
    for (std::int64_t c : left_less(v)) ascents += static_cast<std::uint64_t>(c);
    return {ascents, n * (n - 1) / 2 - ascents};
}

std::vector<std::uint64_t> count3(const std::vector<int>& v)
{
    const std::size_t n = v.size();
    std::vector<std::uint64_t> out(6, 0);
    // less[x] = #{i < j : v[i] < x}; rebuilt for every middle element j.
    std::vector<char> seen(n, 0);
    std::vector<std::int64_t> less(n + 1, 0);
    std::array<std::array<std::int64_t, 2>, 2> prod{};
    std::array<std::int64_t, 2> same_up{};
    for (std::size_t j = 0; j < n; ++j) {
        std::int64_t run = 0;
        for (std::size_t x = 0; x < n; ++x) {
            less[x] = run;
            run += seen[x];
        }
        less[n] = run;
        const int vj = v[j];
        const std::int64_t aL = less[static_cast<std::size_t>(vj)];
        const std::int64_t aH = static_cast<std::int64_t>(j) - aL;
        const std::int64_t bL = vj - aL;
        const std::int64_t bH = static_cast<std::int64_t>(n - 1 - j) - bL;
        std::int64_t uL = 0, uH = 0;
        for (std::size_t l = j + 1; l < n; ++l) {
            const int vl = v[l];
            if (vl < vj)
                uL += less[static_cast<std::size_t>(vl)];
            else
                uH += less[static_cast<std::size_t>(vl)] - aL;
        }
        prod[kLow][0] += aL * bL;
        prod[kLow][1] += aL * bH;
        prod[1][kLow] += aH * bL;
        prod[1][1] += aH * bH;
        same_up[0] += uL;
        same_up[1] += uH;
        seen[static_cast<std::size_t>(vj)] = 1;
    }
    const int ranges[2] = {kLow, kHigh};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            if (a != b) {
                out[pattern3(ranges[a], ranges[b], false)] += static_cast<std::uint64_t>(prod[a][b]);
            } else {
                out[pattern3(ranges[a], ranges[a], true)] += static_cast<std::uint64_t>(same_up[a]);
                out[pattern3(ranges[a], ranges[a], false)] +=
                    static_cast<std::uint64_t>(prod[a][a] - same_up[a]);
            }
        }
    return out;
}

/*
 * Four-point counts. Fix the second and third positions j < k. The outer
 * elements i < j and l > k fall into one of three value ranges relative to
 * v[j], v[k]; ranges determine the pattern except when both outer elements
 * share a range, where the order of v[i] and v[l] decides. Those "same range,
 * v[i] < v[l]" counts are built from
 *   D(x) = #{(i, l) : i < j, l > k, v[i] < v[l] < x}
 * at x = v[j], v[k] and infinity. D(v[k]) and D(inf) are incremental in j for
 * fixed k; D(v[j]) is incremental in k for fixed j. Since all contributions are
 * additive over (j, k), the two families are accumulated in separate passes.
 */
std::vector<std::uint64_t> count4(const std::vector<int>& v)
{
    const std::size_t n = v.size();
    const auto sn = static_cast<std::int64_t>(n);
    std::vector<std::uint64_t> out(24, 0);
    if (n < 4) return out;
    const std::vector<std::int64_t> ll = left_less(v);

    // [up][ri][rl] products and [up][r] same-range ascending counts.
    std::int64_t prod[2][3][3] = {};
    std::int64_t same_up[2][3] = {};

    // Pass A: outer loop over j, contributes D(v[j]).
    {
        std::vector<char> seen(n, 0);
        std::vector<std::int64_t> less(n + 1, 0);
        for (std::size_t j = 0; j < n; ++j) {
            std::int64_t run = 0;
            for (std::size_t x = 0; x < n; ++x) {
                less[x] = run;
                run += seen[x];
            }
            const int vj = v[j];
            std::int64_t s = 0;  // D(v[j]) for the current k
            for (std::size_t k = n - 1; k > j; --k) {
                const int vk = v[k];
                if (vj < vk) {
                    same_up[1][kLow] += s;
                    same_up[1][kMid] -= s;
                } else {
                    same_up[0][kMid] += s;
                    same_up[0][kHigh] -= s;
                    s += less[static_cast<std::size_t>(vk)];
                }
            }
            seen[static_cast<std::size_t>(vj)] = 1;
        }
    }

    // Pass B: outer loop over k, everything else.
    {
        std::vector<char> right(n, 0);
        for (std::size_t l = 0; l < n; ++l) right[static_cast<std::size_t>(v[l])] = 1;
        std::vector<std::int64_t> below(n + 1, 0);  // below[x] = #{l > k : v[l] < x}
        for (std::size_t k = 0; k < n; ++k) {
            right[static_cast<std::size_t>(v[k])] = 0;
            std::int64_t run = 0;
            for (std::size_t x = 0; x < n; ++x) {
                below[x] = run;
                run += right[x];
            }
            below[n] = run;
            const int vk = v[k];
            const std::int64_t n_right = sn - 1 - static_cast<std::int64_t>(k);
            const std::int64_t bk = below[static_cast<std::size_t>(vk)];
            std::int64_t pjk = 0;   // #{i < j : v[i] < v[k]}
            std::int64_t dinf = 0;  // D(inf)
            std::int64_t dk = 0;    // D(v[k])
            for (std::size_t j = 0; j < k; ++j) {
                const int vj = v[j];
                const bool up = vj < vk;
                const std::int64_t pjj = ll[j];
                const std::int64_t bj = below[static_cast<std::size_t>(vj)];
                const std::int64_t plo = up ? pjj : pjk;
                const std::int64_t phi = up ? pjk : pjj;
                const std::int64_t blo = up ? bj : bk;
                const std::int64_t bhi = up ? bk : bj;
                const std::int64_t a[3] = {plo, phi - plo, static_cast<std::int64_t>(j) - phi};
                const std::int64_t b[3] = {blo, bhi - blo, n_right - bhi};
                auto& p = prod[up ? 1 : 0];
                for (int r1 = 0; r1 < 3; ++r1)
                    for (int r2 = 0; r2 < 3; ++r2) p[r1][r2] += a[r1] * b[r2];
                auto& u = same_up[up ? 1 : 0];
                if (up) {
                    u[kMid] += dk - a[kLow] * b[kMid];
                    u[kHigh] += dinf - dk - (a[kLow] + a[kMid]) * b[kHigh];
                } else {
                    u[kLow] += dk;
                    u[kMid] += -dk - a[kLow] * b[kMid];
                    u[kHigh] += dinf - (a[kLow] + a[kMid]) * b[kHigh];
                }
                dinf += n_right - bj;
                if (up) {
                    dk += bk - bj;
                    ++pjk;
                }
            }
        }
    }

    for (int up = 0; up < 2; ++up)
        for (int r1 = 0; r1 < 3; ++r1)
            for (int r2 = 0; r2 < 3; ++r2) {
                const std::int64_t p = prod[up][r1][r2];
                if (r1 != r2) {
                    out[pattern4(up, r1, r2, false)] += static_cast<std::uint64_t>(p);
                } else {
                    const std::int64_t u = same_up[up][r1];
                    out[pattern4(up, r1, r1, true)] += static_cast<std::uint64_t>(u);
                    out[pattern4(up, r1, r1, false)] += static_cast<std::uint64_t>(p - u);
                }
            }
    return out;
}

std::vector<std::uint64_t> count_by_enumeration(const std::vector<int>& v, int k)
{
    const int n = static_cast<int>(v.size());
    std::vector<std::uint64_t> out(factorial(k), 0);
    std::vector<int> fact(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) fact[static_cast<std::size_t>(i)] = static_cast<int>(factorial(k - 1 - i));
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::vector<int> vals(static_cast<std::size_t>(k));
    while (true) {
        for (int i = 0; i < k; ++i) vals[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        std::uint64_t rank = 0;
        for (int i = 0; i < k; ++i) {
            int smaller = 0;
            for (int j = i + 1; j < k; ++j) smaller += vals[static_cast<std::size_t>(j)] < vals[static_cast<std::size_t>(i)];
            rank += static_cast<std::uint64_t>(smaller * fact[static_cast<std::size_t>(i)]);
        }
        ++out[rank];
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

}  // namespace

std::vector<std::uint64_t> count_patterns(const Perm& tau, int k)
{
    const int n = tau.size();
    if (k < 1 || k > kMaxExactK)
        throw std::invalid_argument("pattern length must be within 1.." + std::to_string(kMaxExactK));
    if (k > n) throw std::invalid_argument("pattern longer than permutation");
    const std::vector<int> v = zero_based(tau);
    switch (k) {
    case 1: return {static_cast<std::uint64_t>(n)};
    case 2: return count2(v);
    case 3: return count3(v);
    case 4: return count4(v);
    default:
        if (n > kMaxEnumerationN)
            throw std::invalid_argument("exact densities for k >= 5 require |tau| <= " +
                                        std::to_string(kMaxEnumerationN));
        return count_by_enumeration(v, k);
    }
}

std::uint64_t count_occurrences(const Perm& pattern, const Perm& tau)
{
    return count_patterns(tau, pattern.size())[pattern.lex_rank()];
}

Rational density_exact(const Perm& pattern, const Perm& tau)
{
    const int k = pattern.size();
    if (k > tau.size()) throw std::invalid_argument("|pi| > |tau|");
    Rational r{big(count_occurrences(pattern, tau)), binomial(static_cast<std::uint64_t>(tau.size()),
                                                              static_cast<std::uint64_t>(k))};
    r.canonicalize();
    return r;
}

DensityReport make_exact_report(int k, std::vector<Rational> values)
{
    DensityReport rep;
    rep.k = k;
    rep.exact = true;
    rep.patterns = all_perms(k);
    const Rational target{1, static_cast<unsigned long>(factorial(k))};
    rep.values.reserve(values.size());
    rep.ci99.assign(values.size(), 0.0);
    rep.exact_defect = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        rep.values.push_back(values[i].get_d());
        Rational dev = abs(values[i] - target);
        if (dev > rep.exact_defect) {
            rep.exact_defect = dev;
            rep.witness = i;
        }
    }
    rep.defect = rep.exact_defect.get_d();
    rep.exact_values = std::move(values);
    return rep;
}

DensityReport make_estimate_report(int k, std::vector<double> values, std::vector<double> ci99)
{
    DensityReport rep;
    rep.k = k;
    rep.exact = false;
    rep.patterns = all_perms(k);
    const double target = 1.0 / static_cast<double>(factorial(k));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double dev = std::abs(values[i] - target);
        if (dev > rep.defect) {
            rep.defect = dev;
            rep.witness = i;
        }
        rep.error_radius = std::max(rep.error_radius, ci99[i]);
    }
    rep.values = std::move(values);
    rep.ci99 = std::move(ci99);
    return rep;
}

DensityReport all_densities(int k, const Perm& tau)
{
    if (k < 1 || k > tau.size() || k > kMaxExactK)
        throw std::invalid_argument("k must satisfy 1 <= k <= min(|tau|, " + std::to_string(kMaxExactK) + ")");
    const auto counts = count_patterns(tau, k);
    const BigInt total = binomial(static_cast<std::uint64_t>(tau.size()), static_cast<std::uint64_t>(k));
    std::vector<Rational> values;
    values.reserve(counts.size());
    for (std::uint64_t c : counts) {
        Rational r{big(c), total};
        r.canonicalize();
        values.push_back(std::move(r));
    }
    return make_exact_report(k, std::move(values));
}

Estimate binomial_estimate(std::uint64_t hits, std::uint64_t samples)
{
    if (samples == 0) throw std::invalid_argument("samples must be positive");
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, kZ99 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

Estimate density_sampled(const Perm& pattern, const Perm& tau, std::uint64_t samples, std::uint64_t seed)
{
    const int k = pattern.size();
    const int n = tau.size();
    if (k > n) throw std::invalid_argument("|pi| > |tau|");
    if (samples == 0) throw std::invalid_argument("samples must be positive");
    Rng rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::vector<int> vals(static_cast<std::size_t>(k));
    const auto target = pattern.images();
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        // Floyd's algorithm for a uniform k-subset of {1..n}.
        std::size_t m = 0;
        for (int j = n - k + 1; j <= n; ++j) {
            const int t = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(j)));
            const bool present = std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), t) !=
                                 idx.begin() + static_cast<std::ptrdiff_t>(m);
            idx[m++] = present ? j : t;
        }
        std::sort(idx.begin(), idx.end());
        for (int i = 0; i < k; ++i) vals[static_cast<std::size_t>(i)] = tau.value(idx[static_cast<std::size_t>(i)]);
        bool match = true;
        for (int i = 0; i < k && match; ++i)
            for (int j = i + 1; j < k; ++j)
                if ((vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(j)]) !=
                    (target[static_cast<std::size_t>(i)] < target[static_cast<std::size_t>(j)])) {
                    match = false;
                    break;
                }
        hits += match;
    }
    return binomial_estimate(hits, samples);
}

}  // namespace permlim
