#ifndef PERMLIM_SYMMETRY_HPP
#define PERMLIM_SYMMETRY_HPP

#include "permlim/permuton.hpp"

#include <string>
#include <vector>

namespace permlim {

struct SymmetryVerdict {
    int k = 0;
    bool exact = false;
    Rational exact_defect;       // only when exact
    double defect = 0.0;         // max over S_k of |t(pi, mu) - 1/k!|
    double ci99 = 0.0;           // half-width at the witness (Monte-Carlo verdicts)
    Perm witness = Perm::identity(1);
    DensityReport densities;
};

struct SymmetryOptions {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

/**
 * k-symmetry defect. Grid measures with k <= 4 are decided exactly; all other
 * inputs (and k = 5, 6) are estimated by Monte Carlo.
 */
SymmetryVerdict symmetry_defect(const Permuton& mu, int k, const SymmetryOptions& options = {});

/// Exact defect of mu_tau (k <= 6; k >= 5 needs |tau| <= 60).
SymmetryVerdict perm_symmetry_defect(const Perm& tau, int k);

struct InflatableResult {
    bool inflatable = false;
    SymmetryVerdict verdict;
};

/// |tau| > 1 and mu_tau is exactly k-symmetric (k <= 4).
InflatableResult is_inflatable(const Perm& tau, int k);

/// Integer-only test used by the search: N(pi) == n^k for every pi in S_k.
bool inflatable_fast(const Perm& tau, int k);

/// The 8 images of tau under the group generated by reverse, complement and inverse.
std::vector<Perm> symmetry_orbit(const Perm& tau);

/**
 * Every k-inflatable permutation of length n (k in {3, 4}, 1 <= n <= 10),
 * sorted lexicographically. With prune, only orbit-minimal candidates are
 * tested and positive verdicts are expanded to their orbits.
 */
std::vector<Perm> search_inflatable(int n, int k, bool prune = true, int threads = 0);

/// "tau --op--> image" facts among a set of permutations (op is reverse, complement or inverse).
struct ReflectionLink {
    Perm from;
    std::string op;
    Perm to;
};

std::vector<ReflectionLink> reflection_links(const std::vector<Perm>& perms);

}  // namespace permlim

#endif
