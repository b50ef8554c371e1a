#ifndef PERMLIM_PERMUTON_HPP
#define PERMLIM_PERMUTON_HPP

#include "permlim/pattern_count.hpp"
#include "permlim/perm.hpp"
#include "permlim/rational.hpp"
#include "permlim/rng.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace permlim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// A nonzero cell of a grid measure; i indexes the x-strip, j the y-strip (1-based).
struct GridCell {
    int i = 0;
    int j = 0;
    Rational mass;
};

/**
 * Measure on [0,1]^2 that is uniform within each cell of the n x n subdivision.
 * Stored sparsely (nonzero cells only), so permutation grids of length 10^4
 * are cheap. The checked constructor requires every row and column sum to be
 * exactly 1/n.
 */
class GridPermuton {
public:
    GridPermuton(int n, std::vector<GridCell> cells);

    /// Skips the marginal validation; used for negative controls.
    static GridPermuton unchecked(int n, std::vector<GridCell> cells);

    /// Row-major dense masses: entry (i-1)*n + (j-1) is the mass of cell (i, j).
    static GridPermuton from_dense(int n, const std::vector<Rational>& masses);

    int n() const { return n_; }
    const std::vector<GridCell>& cells() const { return cells_; }
    Rational mass(int i, int j) const;

    /// The permutation tau if this is mu_tau (one cell of mass 1/n per row and column).
    const std::optional<Perm>& as_perm() const { return perm_; }

    /// F(a, b) = mu([0,a] x [0,b]) exactly.
    Rational cdf_exact(const Rational& a, const Rational& b) const;
    double cdf(double a, double b) const;

    Point sample(Rng& rng) const;

private:
    GridPermuton(int n, std::vector<GridCell> cells, bool validate);

    int n_ = 0;
    std::vector<GridCell> cells_;
    std::vector<double> mass_d_;
    std::vector<double> cumulative_;
    std::optional<Perm> perm_;
};

struct Segment {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    double length() const;
};

/// Absolute tolerance used for segment clipping and degeneracy tests.
inline constexpr double kSegmentTolerance = 1e-12;

/**
 * Measure supported on finitely many segments, uniform along each segment.
 * By default segment masses are proportional to length; explicit masses are
 * used for flattened mixtures. Degenerate (point) segments are dropped.
 */
class SegmentPermuton {
public:
    explicit SegmentPermuton(std::vector<Segment> segments);
    SegmentPermuton(std::vector<Segment> segments, std::vector<double> masses);

    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<double>& masses() const { return masses_; }

    double cdf(double a, double b) const;
    Point sample(Rng& rng) const;

private:
    std::vector<Segment> segments_;
    std::vector<double> masses_;
    std::vector<double> cumulative_;
};

/// Fraction of the segment's parameter range with x <= a and y <= b.
double segment_fraction_below(const Segment& s, double a, double b);

class Permuton;

class MixturePermuton {
public:
    MixturePermuton(std::vector<Permuton> components, std::vector<Rational> weights);

    const std::vector<Permuton>& components() const { return components_; }
    const std::vector<Rational>& weights() const { return weights_; }
    const std::vector<double>& weights_d() const { return weights_d_; }

private:
    std::vector<Permuton> components_;
    std::vector<Rational> weights_;
    std::vector<double> weights_d_;
};

/// A measure on [0,1]^2 with uniform marginals.
class Permuton {
public:
    using Variant = std::variant<GridPermuton, SegmentPermuton, MixturePermuton>;

    Permuton(GridPermuton g) : v_(std::move(g)) {}
    Permuton(SegmentPermuton s) : v_(std::move(s)) {}
    Permuton(MixturePermuton m) : v_(std::move(m)) {}

    const Variant& variant() const { return v_; }
    const GridPermuton* grid() const { return std::get_if<GridPermuton>(&v_); }
    const SegmentPermuton* segments() const { return std::get_if<SegmentPermuton>(&v_); }
    const MixturePermuton* mixture() const { return std::get_if<MixturePermuton>(&v_); }

private:
    Variant v_;
};

// ---- constructors -------------------------------------------------------

/// mu_tau: mass 1/n on each cell (i, tau(i)).
GridPermuton from_perm(const Perm& tau);

/// The uniform measure lambda (a single cell).
GridPermuton uniform_permuton();

/**
 * Uniform measure on M(a): the lines x + y in {1-a/2, 1+a/2, a/2, 2-a/2} and
 * y - x in {-a/2, a/2, 1-a/2, a/2-1} clipped to the unit square. Coincident
 * lines are kept once and point-like pieces are dropped.
 */
SegmentPermuton m_set(double a);

/// Flattens a segment measure or a mixture of segment measures; nullopt otherwise.
std::optional<SegmentPermuton> flatten_segments(const Permuton& mu);

// ---- evaluation ---------------------------------------------------------

/// F(a, b) = mu([0,a] x [0,b]); throws std::invalid_argument outside the square.
double cdf(const Permuton& mu, double a, double b);

Point sample_point(const Permuton& mu, Rng& rng);

/// Maximum number of full-batch resamples when sampled coordinates tie.
inline constexpr int kMaxTieRetries = 100;

/// sigma(k, mu): the pattern of k independent mu-points sorted by x.
Perm sample_perm(const Permuton& mu, int k, Rng& rng);

/**
 * Exact t(pi, mu) for a grid measure, k = |pi| <= 4. Permutation grids use the
 * pattern-count decomposition; other grids enumerate cell multisets.
 */
Rational density_exact_grid(const Perm& pattern, const GridPermuton& mu);

/// Exact densities of all of S_k (k <= 4) on a grid measure, lexicographic order.
std::vector<Rational> grid_densities(int k, const GridPermuton& mu);

/// The cell-multiset enumeration path (any grid, k <= 4).
std::vector<Rational> grid_densities_enumeration(int k, const GridPermuton& mu);

/**
 * For mu_tau: integers N(pi) with t(pi, mu_tau) = N(pi) / (k! n^k), from the
 * occurrence counts of pi's block-deflations in tau. Exact for k <= 6 (k >= 5
 * requires |tau| <= 60).
 */
std::vector<BigInt> perm_grid_numerators(int k, const Perm& tau);

/// Monte-Carlo estimate of t(pi, mu). Deterministic for a given seed and any thread count.
Estimate density_mc(const Perm& pattern, const Permuton& mu, std::uint64_t samples, std::uint64_t seed,
                    int threads = 0);

/// Monte-Carlo estimates of all of S_k from one sample stream.
DensityReport densities_mc(int k, const Permuton& mu, std::uint64_t samples, std::uint64_t seed,
                           int threads = 0);

struct MarginalReport {
    double max_deviation = 0.0;
    bool pass = false;
    char axis = 'x';
    int strip = 0;  // 1-based index of the worst strip
    bool exact = false;
};

/// Worst |strip mass - strip width| over `resolution` x- and y-strips.
MarginalReport marginal_check(const Permuton& mu, int resolution, double tol);

/// Integral of x^p y^q dmu.
double moment(const Permuton& mu, int p, int q);
Rational moment_exact(const GridPermuton& mu, int p, int q);

struct PermutonDiscrepancy {
    double lower = 0.0;    // max over grid-interval pairs of |lambda(AxB) - mu(AxB)|
    double sup_dev = 0.0;  // max over grid points of |F(a,b) - ab|
    double upper = 0.0;    // 4 * sup_dev
};

PermutonDiscrepancy discrepancy_permuton(const Permuton& mu, int resolution);

/// Runs fn(shard) for shard in [0, shards) on up to `threads` workers (0 = all cores).
void run_sharded(std::size_t shards, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace permlim

#endif
