// Slow reference implementations. Nothing here shares code with the library
// beyond the Perm type, so agreement is meaningful.
#ifndef PERMLIM_TESTS_ORACLES_HPP
#define PERMLIM_TESTS_ORACLES_HPP

#include "permlim/perm.hpp"
#include "permlim/rational.hpp"
#include "permlim/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

using permlim::Perm;
using permlim::Rational;

// Lehmer rank of a pattern given as 1..k values.
inline std::uint64_t rank_of(const std::vector<int>& p)
{
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::uint64_t smaller = 0;
        for (std::size_t j = i + 1; j < p.size(); ++j) smaller += p[j] < p[i];
        r = r * (p.size() - i) + smaller;
    }
    return r;
}

template <class Key>
std::vector<int> ranks_of(const std::vector<Key>& keys)
{
    std::vector<int> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        int r = 1;
        for (std::size_t j = 0; j < keys.size(); ++j) r += keys[j] < keys[i];
        out[i] = r;
    }
    return out;
}

/// Occurrence counts of all k-patterns by visiting every k-subset.
inline std::vector<std::uint64_t> naive_counts(const Perm& tau, int k)
{
    const int n = tau.size();
    std::vector<std::uint64_t> out(permlim::factorial(k), 0);
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 1);
    if (k > n) return out;
    while (true) {
        std::vector<int> vals;
        for (int i : idx) vals.push_back(tau.value(i));
        ++out[rank_of(ranks_of(vals))];
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i + 1) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// n^2 d(tau) by trying every pair of non-empty intervals.
inline std::int64_t brute_discrepancy_scaled(const Perm& tau)
{
    const int n = tau.size();
    // cnt[a][b] = #{i <= a : tau(i) <= b}
    std::vector<std::vector<int>> cnt(static_cast<std::size_t>(n) + 1, std::vector<int>(static_cast<std::size_t>(n) + 1, 0));
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
            cnt[a][b] = cnt[a - 1][b] + cnt[a][b - 1] - cnt[a - 1][b - 1] + (tau.value(a) == b ? 1 : 0);
    std::int64_t best = 0;
    for (int a1 = 0; a1 < n; ++a1)
        for (int a2 = a1 + 1; a2 <= n; ++a2)
            for (int b1 = 0; b1 < n; ++b1)
                for (int b2 = b1 + 1; b2 <= n; ++b2) {
                    const std::int64_t c = cnt[a2][b2] - cnt[a1][b2] - cnt[a2][b1] + cnt[a1][b1];
                    const std::int64_t d = static_cast<std::int64_t>(n) * c - static_cast<std::int64_t>(a2 - a1) * (b2 - b1);
                    best = std::max(best, std::abs(d));
                }
    return best;
}

/**
 * t(pi, mu) for a dense grid of masses by brute force: every ordered tuple of
 * k cells, every x tie-break order and every y tie-break order, each equally
 * likely. Exponential; only for tiny grids.
 */
inline std::vector<Rational> brute_grid_densities(int n, const std::vector<Rational>& masses, int k)
{
    const std::uint64_t kf = permlim::factorial(k);
    std::vector<Rational> out(kf);
    std::vector<int> tie(static_cast<std::size_t>(k));
    std::vector<std::vector<int>> orders;
    std::iota(tie.begin(), tie.end(), 0);
    do orders.push_back(tie);
    while (std::next_permutation(tie.begin(), tie.end()));

    const std::size_t cells = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    std::vector<std::size_t> pick(static_cast<std::size_t>(k), 0);
    const Rational share{1, static_cast<unsigned long>(kf * kf)};
    while (true) {
        Rational w = 1;
        for (auto c : pick) w *= masses[c];
        if (w != 0) {
            for (const auto& xo : orders)
                for (const auto& yo : orders) {
                    std::vector<std::pair<std::size_t, int>> xs, ys;
                    for (std::size_t p = 0; p < pick.size(); ++p) {
                        xs.emplace_back(pick[p] / static_cast<std::size_t>(n), xo[p]);
                        ys.emplace_back(pick[p] % static_cast<std::size_t>(n), yo[p]);
                    }
                    std::vector<std::size_t> by_x(pick.size());
                    std::iota(by_x.begin(), by_x.end(), 0);
                    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
                    std::vector<std::pair<std::size_t, int>> y_in_order;
                    for (auto p : by_x) y_in_order.push_back(ys[p]);
                    out[rank_of(ranks_of(y_in_order))] += w * share;
                }
        }
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == cells) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

inline std::vector<Rational> perm_masses(const Perm& tau)
{
    const int n = tau.size();
    std::vector<Rational> m(static_cast<std::size_t>(n * n));
    for (int i = 1; i <= n; ++i) m[static_cast<std::size_t>((i - 1) * n + tau.value(i) - 1)] = Rational{1, static_cast<unsigned long>(n)};
    return m;
}

inline Perm random_perm(int n, permlim::Rng& rng)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    std::shuffle(v.begin(), v.end(), rng);
    return Perm{v};
}

}  // namespace oracle

#endif
