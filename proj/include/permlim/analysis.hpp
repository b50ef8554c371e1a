#ifndef PERMLIM_ANALYSIS_HPP
#define PERMLIM_ANALYSIS_HPP

#include "permlim/permuton.hpp"

#include <optional>
#include <string>
#include <vector>

namespace permlim {

enum class IntegralMethod { exact, quadrature, mc };

std::string to_string(IntegralMethod m);

struct Budget {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = kDefaultSeed;
    int resolution = 2000;  // midpoint grid for the quadrature fallback
    int threads = 0;
    std::optional<IntegralMethod> method;  // default: exact when available, otherwise quadrature
};

/// A computed number with an explicit error radius (rounding floor for exact paths).
struct Value {
    double value = 0.0;
    double error_radius = 0.0;
    std::optional<Rational> exact;
};

/// Absolute radius attached to closed-form values evaluated in floating point.
inline constexpr double kRoundoffRadius = 1e-12;

/// Largest grid size for which the exact cell-by-cell integrals are used.
inline constexpr int kMaxExactGridIntegrals = 200;

struct IntegralReport {
    IntegralMethod method = IntegralMethod::exact;
    Value f2_mu;       // ∫ F(X,Y)^2 dmu
    Value fxy_mu;      // ∫ F(X,Y) X Y dmu
    Value f2_lambda;   // ∫ F(x,y)^2 dlambda
    Value fxy_lambda;  // ∫ F(x,y) x y dlambda
    Value m20, m02, m22;
};

/// True when the exact method applies (small grids, segment measures and their mixtures).
bool exact_integrals_available(const Permuton& mu);

IntegralReport lemma_integrals(const Permuton& mu, const Budget& budget = {});

struct IdentityCheck {
    Value lhs;  // ∫ F(x,y) x y dlambda
    Value rhs;  // (1 - m20 - m02 + m22) / 4
    double slack = 0.0;
    double error_radius = 0.0;
    bool pass = false;
};

IdentityCheck identity_check(const Permuton& mu, const Budget& budget = {});
IdentityCheck identity_check(const IntegralReport& report);

struct ChainStep {
    std::string relation;  // "=" or "<="
    double slack = 0.0;    // right-hand quantity minus left-hand quantity
    double error_radius = 0.0;
    bool holds = false;
};

/**
 * The six quantities of the Cauchy-Schwarz chain, with 1/81 at both ends:
 *   1/81, (∫F XY dmu)^2, ∫F^2 dmu ∫X^2Y^2 dmu, ∫F^2 dmu (4∫Fxy dlambda - ∫(1-X^2-Y^2) dmu),
 *   ∫F^2 dmu (4∫Fxy dlambda - 1/3), ∫F^2 dmu ((4/3) sqrt(∫F^2 dlambda) - 1/3), 1/81.
 * Steps 1->2 and 4->5 are inequalities valid for every measure; the others
 * are equalities for every measure except the two that involve the 1/81 ends.
 */
struct ChainReport {
    std::vector<Value> quantities;  // 7 entries
    std::vector<ChainStep> steps;   // 6 entries
    IntegralReport integrals;
};

ChainReport cs_chain(const Permuton& mu, const Budget& budget = {});

enum class EvalMode { exact, mc };

/// The mixture nu_a: weight a on M(0) and 1 - a on M(1).
Permuton nu_mixture(double a);

Value t_id3_segment(double a, EvalMode mode = EvalMode::exact, const Budget& budget = {});
Value t_id3_nu(double a, EvalMode mode = EvalMode::exact, const Budget& budget = {});

struct RootResult {
    double root = 0.0;
    Value t;  // t(id_3, .) at the root
    std::vector<std::pair<double, double>> scan;
    int iterations = 0;
};

/// Scans 101 points of [0,1] for a sign change of t - 1/6, then bisects 60 times.
RootResult find_b(double tol, EvalMode mode = EvalMode::exact, const Budget& budget = {});
RootResult find_nu(double tol, EvalMode mode = EvalMode::exact, const Budget& budget = {});

/// Exact discrepancy is used up to this length; longer permutations get certified bounds.
inline constexpr int kExactDiscrepancyLimit = 1000;

struct ConvergenceRow {
    int n = 0;
    Perm pattern = Perm::identity(1);
    double density = 0.0;
    double disc_lower = 0.0;
    double disc_upper = 0.0;
};

/// For each n: tau_n = sigma(n, mu), its exact k-pattern densities and discrepancy bounds.
std::vector<ConvergenceRow> convergence_experiment(const Permuton& mu, int k, const std::vector<int>& sizes,
                                                   std::uint64_t seed);

struct PrefixBoundCheck {
    double sup_dev = 0.0;
    double d_lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

PrefixBoundCheck prefix_bound_check(const Permuton& mu, int resolution, double tol = 1e-9);

}  // namespace permlim

#endif
