#include "permlim/discrepancy.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace permlim {

namespace {

// With G(a, b) = n * #{i <= a : tau(i) <= b} - a * b, every interval pair
// (a1, a2] x (b1, b2] has scaled deviation G(a2,b2) - G(a1,b2) - G(a2,b1) + G(a1,b1).
// range[a] = max_b G(a, b) - min_b G(a, b); prefix = max |G|.
struct RowRanges {
    std::vector<std::int64_t> range;
    std::int64_t prefix = 0;
};

RowRanges row_ranges(const Perm& tau)
{
    const int n = tau.size();
    const std::int64_t sn = n;
    RowRanges rr;
    rr.range.assign(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::int64_t> count(static_cast<std::size_t>(n) + 1, 0);  // count[b] = #{i <= a : tau(i) <= b}
    for (int a = 1; a <= n; ++a) {
        const int va = tau.value(a);
        std::int64_t hi = 0, lo = 0;
        for (int b = 1; b <= n; ++b) {
            count[static_cast<std::size_t>(b)] += (b >= va);
            const std::int64_t g = sn * count[static_cast<std::size_t>(b)] - static_cast<std::int64_t>(a) * b;
            hi = std::max(hi, g);
            lo = std::min(lo, g);
        }
        rr.range[static_cast<std::size_t>(a)] = hi - lo;
        rr.prefix = std::max({rr.prefix, hi, -lo});
    }
    return rr;
}

// Largest |sum over B| of the weights n * 1[tau^{-1}(b) in (a1, a2]] - (a2 - a1),
// i.e. the max-minus-min of the running prefix sums.
std::int64_t column_range(const std::vector<int>& inverse, int a1, int a2)
{
    const auto n = static_cast<std::int64_t>(inverse.size()) - 1;
    const std::int64_t len = a2 - a1;
    std::int64_t h = 0, hi = 0, lo = 0;
    for (std::size_t b = 1; b < inverse.size(); ++b) {
        const int p = inverse[b];
        h += (p > a1 && p <= a2) ? n - len : -len;
        hi = std::max(hi, h);
        lo = std::min(lo, h);
    }
    return hi - lo;
}

}  // namespace

std::int64_t discrepancy_scaled(const Perm& tau)
{
    const int n = tau.size();
    const RowRanges rr = row_ranges(tau);
    std::vector<int> inverse(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) inverse[static_cast<std::size_t>(tau.value(i))] = i;

    // Intervals anchored at 0 are already covered by range[a].
    std::int64_t best = *std::max_element(rr.range.begin(), rr.range.end());

    // The pair (a1, a2) can only beat `best` if range[a1] + range[a2] > best.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return rr.range[static_cast<std::size_t>(x)] > rr.range[static_cast<std::size_t>(y)];
    });
    for (std::size_t p = 0; p < order.size(); ++p) {
        const std::int64_t rp = rr.range[static_cast<std::size_t>(order[p])];
        if (2 * rp <= best) break;
        for (std::size_t q = p + 1; q < order.size(); ++q) {
            if (rp + rr.range[static_cast<std::size_t>(order[q])] <= best) break;
            const int a1 = std::min(order[p], order[q]);
            const int a2 = std::max(order[p], order[q]);
            best = std::max(best, column_range(inverse, a1, a2));
        }
    }
    return best;
}

Rational discrepancy_exact(const Perm& tau)
{
    const auto n = static_cast<std::uint64_t>(tau.size());
    Rational r{BigInt{std::to_string(discrepancy_scaled(tau))}, big(n * n)};
    r.canonicalize();
    return r;
}

PrefixDeviation prefix_deviation(const Perm& tau)
{
    const double n2 = static_cast<double>(tau.size()) * static_cast<double>(tau.size());
    const RowRanges rr = row_ranges(tau);
    PrefixDeviation pd;
    pd.prefix = static_cast<double>(rr.prefix) / n2;
    pd.anchored = static_cast<double>(*std::max_element(rr.range.begin(), rr.range.end())) / n2;
    pd.upper = std::min(4.0 * pd.prefix, 2.0 * pd.anchored);

    // Exact best B for a bounded set of interior pairs (a1, a2]: the rows with
    // the largest ranges plus an even grid of cut points.
    const int n = tau.size();
    std::vector<int> inverse(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) inverse[static_cast<std::size_t>(tau.value(i))] = i;
    std::vector<int> cuts(static_cast<std::size_t>(n) + 1);
    std::iota(cuts.begin(), cuts.end(), 0);
    const std::size_t top = std::min<std::size_t>(cuts.size(), kLowerBoundCuts);
    std::partial_sort(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(top), cuts.end(), [&](int x, int y) {
        return rr.range[static_cast<std::size_t>(x)] > rr.range[static_cast<std::size_t>(y)];
    });
    cuts.resize(top);
    for (std::size_t g = 0; g <= kLowerBoundCuts; ++g)
        cuts.push_back(static_cast<int>(static_cast<std::size_t>(n) * g / kLowerBoundCuts));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::int64_t best = *std::max_element(rr.range.begin(), rr.range.end());
    for (std::size_t p = 0; p < cuts.size(); ++p)
        for (std::size_t q = p + 1; q < cuts.size(); ++q)
            best = std::max(best, column_range(inverse, cuts[p], cuts[q]));
    pd.lower = static_cast<double>(best) / n2;
    return pd;
}

double discrepancy(const Perm& tau, DiscrepancyMode mode)
{
    if (mode == DiscrepancyMode::prefix_bound) return prefix_deviation(tau).prefix;
    const double n = tau.size();
    return static_cast<double>(discrepancy_scaled(tau)) / (n * n);
}

}  // namespace permlim
