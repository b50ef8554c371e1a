#ifndef PERMLIM_DISCREPANCY_HPP
#define PERMLIM_DISCREPANCY_HPP

#include "permlim/perm.hpp"
#include "permlim/rational.hpp"

#include <cstddef>
#include <cstdint>

namespace permlim {

enum class DiscrepancyMode { exact, prefix_bound };

/**
 * Normalized discrepancy d(tau): the maximum over non-empty intervals A, B of
 * | |A||B|/n^2 - |tau(A) ∩ B|/n |.
 *
 * In exact mode the true maximum is returned. In prefix_bound mode the value
 * is the prefix deviation s (intervals anchored at 1), which satisfies
 * s <= d(tau) <= 4 s.
 */
double discrepancy(const Perm& tau, DiscrepancyMode mode = DiscrepancyMode::exact);

/// n^2 * d(tau) as an exact integer.
std::int64_t discrepancy_scaled(const Perm& tau);

Rational discrepancy_exact(const Perm& tau);

struct PrefixDeviation {
    double prefix = 0.0;       // s
    double anchored = 0.0;     // max over prefixes A of the best interval B; s <= anchored <= d
    double upper = 0.0;        // min(4 s, 2 anchored) >= d
    double lower = 0.0;        // exact best B over a bounded set of A intervals; anchored <= lower <= d
};

/// Number of high-range rows (and of even grid cuts) scanned for PrefixDeviation::lower.
inline constexpr std::size_t kLowerBoundCuts = 128;

PrefixDeviation prefix_deviation(const Perm& tau);

}  // namespace permlim

#endif
