#ifndef PERMLIM_PATTERN_COUNT_HPP
#define PERMLIM_PATTERN_COUNT_HPP

#include "permlim/perm.hpp"
#include "permlim/rational.hpp"

#include <cstdint>
#include <vector>

namespace permlim {

/// Largest pattern length with an exact counting path.
inline constexpr int kMaxExactK = 6;
/// Largest |tau| for which the k = 5, 6 enumeration path is allowed.
inline constexpr int kMaxEnumerationN = 60;

/**
 * Occurrence counts of every pattern of length k in tau, indexed by the
 * lexicographic rank of the pattern in S_k.
 *
 * k = 1, 2 run in O(n log n); k = 3, 4 in O(n^2) time and O(n) memory;
 * k = 5, 6 enumerate all k-subsets and require n <= 60.
 */
std::vector<std::uint64_t> count_patterns(const Perm& tau, int k);

std::uint64_t count_occurrences(const Perm& pattern, const Perm& tau);

/// t(pi, tau): occurrences over binomial(|tau|, |pi|).
Rational density_exact(const Perm& pattern, const Perm& tau);

struct DensityReport {
    int k = 0;
    bool exact = false;
    std::vector<Perm> patterns;          // S_k in lexicographic order
    std::vector<Rational> exact_values;  // only when exact
    std::vector<double> values;
    std::vector<double> ci99;            // per-pattern half-widths (zeros when exact)
    double error_radius = 0.0;
    double defect = 0.0;                 // max |value - 1/k!|
    Rational exact_defect;               // only when exact
    std::size_t witness = 0;             // index of the pattern attaining the defect
};

/// Exact densities of every pattern of length k (1 <= k <= min(6, |tau|)).
DensityReport all_densities(int k, const Perm& tau);

/// Builds a report from exact values (fills defect and witness).
DensityReport make_exact_report(int k, std::vector<Rational> values);
/// Builds a report from estimates with per-pattern ci99.
DensityReport make_estimate_report(int k, std::vector<double> values, std::vector<double> ci99);

struct Estimate {
    double estimate = 0.0;
    double ci99 = 0.0;
};

/// Binomial estimate of a frequency with its 99% normal half-width.
Estimate binomial_estimate(std::uint64_t hits, std::uint64_t samples);

/// Monte-Carlo estimate of t(pi, tau) from uniformly random |pi|-subsets.
Estimate density_sampled(const Perm& pattern, const Perm& tau, std::uint64_t samples,
                         std::uint64_t seed);

}  // namespace permlim

#endif
