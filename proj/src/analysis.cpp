#include "permlim/analysis.hpp"

#include "permlim/discrepancy.hpp"
#include "permlim/segment_integrals.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace permlim {

std::string to_string(IntegralMethod m)
{
    switch (m) {
    case IntegralMethod::exact: return "exact";
    case IntegralMethod::quadrature: return "quadrature";
    case IntegralMethod::mc: return "mc";
    }
    return "?";
}

namespace {

Value exact_value(const Rational& r) { return {r.get_d(), 0.0, r}; }
Value float_value(double v, double radius = kRoundoffRadius) { return {v, radius, std::nullopt}; }

// Polynomial in (u, v) with degree at most 2 in each variable.
struct Poly2 {
    std::array<std::array<Rational, 3>, 3> c{};

    static Poly2 bilinear(const Rational& c00, const Rational& c10, const Rational& c01, const Rational& c11)
    {
        Poly2 p;
        p.c[0][0] = c00;
        p.c[1][0] = c10 - c00;
        p.c[0][1] = c01 - c00;
        p.c[1][1] = c11 - c10 - c01 + c00;
        return p;
    }

    Poly2 operator*(const Poly2& o) const
    {
        Poly2 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (c[i][j] == 0) continue;
                for (int k = 0; i + k < 3; ++k)
                    for (int l = 0; j + l < 3; ++l)
                        if (o.c[k][l] != 0) r.c[i + k][j + l] += c[i][j] * o.c[k][l];
            }
        return r;
    }

    // Integral over the unit square.
    Rational integral() const
    {
        Rational total;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (c[i][j] != 0) total += c[i][j] / ((i + 1) * (j + 1));
        return total;
    }
};

struct GridExact {
    Rational f2_mu, fxy_mu, f2_lambda, fxy_lambda;
};

// On cell (p, q) the CDF is bilinear, hence the bilinear interpolant of its corner values.
GridExact grid_integrals(const GridPermuton& g)
{
    const int n = g.n();
    const auto un = static_cast<std::size_t>(n);
    std::vector<Rational> corner((un + 1) * (un + 1));
    auto at = [&](int p, int q) -> Rational& {
        return corner[static_cast<std::size_t>(p) * (un + 1) + static_cast<std::size_t>(q)];
    };
    for (const auto& c : g.cells()) at(c.i, c.j) += c.mass;
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) {
            Rational v = at(p, q);
            if (p > 0) v += at(p - 1, q);
            if (q > 0) v += at(p, q - 1);
            if (p > 0 && q > 0) v -= at(p - 1, q - 1);
            at(p, q) = v;
        }

    const Rational inv_n{1, static_cast<unsigned long>(n)};
    auto cell_polys = [&](int p, int q) {
        const Poly2 f = Poly2::bilinear(at(p - 1, q - 1), at(p, q - 1), at(p - 1, q), at(p, q));
        Poly2 xy;  // ((p-1+u)/n) * ((q-1+v)/n)
        xy.c[0][0] = Rational(p - 1) * (q - 1) * inv_n * inv_n;
        xy.c[1][0] = Rational(q - 1) * inv_n * inv_n;
        xy.c[0][1] = Rational(p - 1) * inv_n * inv_n;
        xy.c[1][1] = inv_n * inv_n;
        return std::pair{(f * f).integral(), (f * xy).integral()};
    };

    GridExact out;
    for (int p = 1; p <= n; ++p)
        for (int q = 1; q <= n; ++q) {
            auto [f2, fxy] = cell_polys(p, q);
            out.f2_lambda += f2;
            out.fxy_lambda += fxy;
        }
    out.f2_lambda *= inv_n * inv_n;
    out.fxy_lambda *= inv_n * inv_n;
    for (const auto& c : g.cells()) {
        auto [f2, fxy] = cell_polys(c.i, c.j);
        out.f2_mu += c.mass * f2;
        out.fxy_mu += c.mass * fxy;
    }
    return out;
}

constexpr std::size_t kShards = 64;

struct Moments {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t count = 0;
};

Value mean_value(const Moments& m)
{
    const double n = static_cast<double>(m.count);
    const double mean = m.sum / n;
    const double var = m.count > 1 ? std::max(0.0, (m.sum_sq / n - mean * mean) * n / (n - 1)) : 0.0;
    return {mean, kZ99 * std::sqrt(var / n), std::nullopt};
}

// Monte-Carlo means of f(point) over `samples` draws, sharded deterministically.
template <class Draw, class Eval>
std::vector<Value> mc_means(std::size_t outputs, const Budget& budget, Draw&& draw, Eval&& eval)
{
    if (budget.samples == 0) throw std::invalid_argument("samples must be positive");
    std::vector<std::vector<Moments>> parts(kShards, std::vector<Moments>(outputs));
    run_sharded(kShards, budget.threads, [&](std::size_t s) {
        const std::uint64_t count = budget.samples / kShards + (s < budget.samples % kShards ? 1 : 0);
        Rng rng(derive_seed(budget.seed, s));
        std::vector<double> vals(outputs);
        for (std::uint64_t t = 0; t < count; ++t) {
            eval(draw(rng), vals);
            for (std::size_t o = 0; o < outputs; ++o) {
                parts[s][o].sum += vals[o];
                parts[s][o].sum_sq += vals[o] * vals[o];
                ++parts[s][o].count;
            }
        }
    });
    std::vector<Value> out;
    for (std::size_t o = 0; o < outputs; ++o) {
        Moments total;
        for (const auto& p : parts) {
            total.sum += p[o].sum;
            total.sum_sq += p[o].sum_sq;
            total.count += p[o].count;
        }
        out.push_back(mean_value(total));
    }
    return out;
}

void fill_moments(const Permuton& mu, IntegralReport& rep)
{
    if (const auto* g = mu.grid()) {
        rep.m20 = exact_value(moment_exact(*g, 2, 0));
        rep.m02 = exact_value(moment_exact(*g, 0, 2));
        rep.m22 = exact_value(moment_exact(*g, 2, 2));
    } else {
        rep.m20 = float_value(moment(mu, 2, 0));
        rep.m02 = float_value(moment(mu, 0, 2));
        rep.m22 = float_value(moment(mu, 2, 2));
    }
}

}  // namespace

bool exact_integrals_available(const Permuton& mu)
{
    if (const auto* g = mu.grid()) return g->n() <= kMaxExactGridIntegrals;
    return flatten_segments(mu).has_value();
}

IntegralReport lemma_integrals(const Permuton& mu, const Budget& budget)
{
    IntegralReport rep;
    const bool exact_ok = exact_integrals_available(mu);
    rep.method = budget.method.value_or(exact_ok ? IntegralMethod::exact : IntegralMethod::quadrature);
    fill_moments(mu, rep);

    if (rep.method == IntegralMethod::exact) {
        if (!exact_ok) throw std::invalid_argument("exact integrals need a grid (n <= 200) or a segment measure");
        if (const auto* g = mu.grid()) {
            const GridExact e = grid_integrals(*g);
            rep.f2_mu = exact_value(e.f2_mu);
            rep.fxy_mu = exact_value(e.fxy_mu);
            rep.f2_lambda = exact_value(e.f2_lambda);
            rep.fxy_lambda = exact_value(e.fxy_lambda);
        } else {
            const SegmentIntegrals s = segment_integrals(*flatten_segments(mu));
            rep.f2_mu = float_value(s.f2_mu);
            rep.fxy_mu = float_value(s.fxy_mu);
            rep.f2_lambda = float_value(s.f2_lambda);
            rep.fxy_lambda = float_value(s.fxy_lambda);
        }
        return rep;
    }

    // F(X,Y)^2 and F(X,Y) X Y under mu.
    const auto along_mu = mc_means(
        2, budget, [&](Rng& rng) { return sample_point(mu, rng); },
        [&](const Point& p, std::vector<double>& out) {
            const double f = cdf(mu, p.x, p.y);
            out[0] = f * f;
            out[1] = f * p.x * p.y;
        });
    rep.f2_mu = along_mu[0];
    rep.fxy_mu = along_mu[1];

    if (rep.method == IntegralMethod::mc) {
        const auto along_lambda = mc_means(
            2, Budget{budget.samples, derive_seed(budget.seed, 1000), budget.resolution, budget.threads, {}},
            [](Rng& rng) { return Point{uniform01(rng), uniform01(rng)}; },
            [&](const Point& p, std::vector<double>& out) {
                const double f = cdf(mu, p.x, p.y);
                out[0] = f * f;
                out[1] = f * p.x * p.y;
            });
        rep.f2_lambda = along_lambda[0];
        rep.fxy_lambda = along_lambda[1];
        return rep;
    }

    // Midpoint rule: both integrands are 2-Lipschitz in each coordinate, so the error is at most h.
    if (budget.resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    const int r = budget.resolution;
    const double h = 1.0 / r;
    std::vector<std::array<double, 2>> rows(static_cast<std::size_t>(r));
    run_sharded(static_cast<std::size_t>(r), budget.threads, [&](std::size_t i) {
        const double a = (static_cast<double>(i) + 0.5) * h;
        double f2 = 0.0, fxy = 0.0;
        for (int j = 0; j < r; ++j) {
            const double b = (j + 0.5) * h;
            const double f = cdf(mu, a, b);
            f2 += f * f;
            fxy += f * a * b;
        }
        rows[i] = {f2, fxy};
    });
    double f2 = 0.0, fxy = 0.0;
    for (const auto& row : rows) {
        f2 += row[0];
        fxy += row[1];
    }
    rep.f2_lambda = float_value(f2 * h * h, h);
    rep.fxy_lambda = float_value(fxy * h * h, h);
    return rep;
}

IdentityCheck identity_check(const IntegralReport& rep)
{
    IdentityCheck out;
    out.lhs = rep.fxy_lambda;
    if (rep.m20.exact && rep.m02.exact && rep.m22.exact) {
        const Rational r = (1 - *rep.m20.exact - *rep.m02.exact + *rep.m22.exact) / 4;
        out.rhs = exact_value(r);
    } else {
        out.rhs = float_value(0.25 * (1 - rep.m20.value - rep.m02.value + rep.m22.value));
    }
    if (out.lhs.exact && out.rhs.exact) {
        out.slack = Rational{abs(*out.lhs.exact - *out.rhs.exact)}.get_d();
        out.error_radius = 0.0;
    } else {
        out.slack = std::abs(out.lhs.value - out.rhs.value);
        out.error_radius = out.lhs.error_radius + out.rhs.error_radius;
    }
    out.pass = out.slack <= out.error_radius;
    return out;
}

IdentityCheck identity_check(const Permuton& mu, const Budget& budget)
{
    return identity_check(lemma_integrals(mu, budget));
}

ChainReport cs_chain(const Permuton& mu, const Budget& budget)
{
    ChainReport rep;
    rep.integrals = lemma_integrals(mu, budget);
    const auto& I = rep.integrals;
    auto rad = [](const Value& v) { return std::max(v.error_radius, v.exact ? 0.0 : kRoundoffRadius); };

    const double i1 = I.f2_mu.value, r1 = rad(I.f2_mu);
    const double i2 = I.fxy_mu.value, r2 = rad(I.fxy_mu);
    const double i3 = I.f2_lambda.value, r3 = rad(I.f2_lambda);
    const double J = I.fxy_lambda.value, rJ = rad(I.fxy_lambda);
    const double m20 = I.m20.value, m02 = I.m02.value, m22 = I.m22.value;
    const double rm = rad(I.m20) + rad(I.m02) + rad(I.m22);

    const double e3 = 4 * J - (1 - m20 - m02);
    const double e4 = 4 * J - 1.0 / 3.0;
    const double e5 = 4.0 / 3.0 * std::sqrt(std::max(i3, 0.0)) - 1.0 / 3.0;
    const double r_sqrt = i3 > 0 ? 2.0 / 3.0 * r3 / std::sqrt(i3) : 4.0 / 3.0 * std::sqrt(r3);

    const double floor = kRoundoffRadius;
    rep.quantities = {
        Value{1.0 / 81.0, 0.0, Rational{1, 81}},
        float_value(i2 * i2, 2 * std::abs(i2) * r2 + r2 * r2 + floor),
        float_value(i1 * m22, m22 * r1 + i1 * rm + floor),
        float_value(i1 * e3, std::abs(e3) * r1 + i1 * (4 * rJ + rm) + floor),
        float_value(i1 * e4, std::abs(e4) * r1 + i1 * 4 * rJ + floor),
        float_value(i1 * e5, std::abs(e5) * r1 + i1 * r_sqrt + floor),
        Value{1.0 / 81.0, 0.0, Rational{1, 81}},
    };
    const bool inequality[6] = {false, true, false, false, true, false};
    for (std::size_t s = 0; s < 6; ++s) {
        ChainStep step;
        step.relation = inequality[s] ? "<=" : "=";
        step.slack = rep.quantities[s + 1].value - rep.quantities[s].value;
        step.error_radius = rep.quantities[s].error_radius + rep.quantities[s + 1].error_radius;
        step.holds = inequality[s] ? step.slack >= -step.error_radius : std::abs(step.slack) <= step.error_radius;
        rep.steps.push_back(step);
    }
    return rep;
}

// ---- counterexample pipeline ---------------------------------------------

Permuton nu_mixture(double a)
{
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("mixture weight must lie in [0,1]");
    const Rational w{a};
    return MixturePermuton({Permuton(m_set(0.0)), Permuton(m_set(1.0))}, {w, 1 - w});
}

namespace {

Value t_id3_of(const Permuton& mu, EvalMode mode, const Budget& budget)
{
    if (mode == EvalMode::exact) return float_value(segment_t_id3(*flatten_segments(mu)), 1e-10);
    const Estimate e = density_mc(Perm::identity(3), mu, budget.samples, budget.seed, budget.threads);
    return float_value(e.estimate, e.ci99);
}

template <class Eval>
RootResult find_root(double tol, Eval&& eval, const char* what)
{
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const double target = 1.0 / 6.0;
    RootResult out;
    for (int i = 0; i <= 100; ++i) {
        const double a = i / 100.0;
        out.scan.emplace_back(a, eval(a).value);
    }
    std::size_t hit = out.scan.size();
    for (std::size_t i = 0; i + 1 < out.scan.size(); ++i) {
        const double g0 = out.scan[i].second - target, g1 = out.scan[i + 1].second - target;
        if (g0 == 0.0 || g0 * g1 < 0.0) {
            hit = i;
            break;
        }
    }
    if (hit == out.scan.size()) {
        std::ostringstream msg;
        msg << "no sign change of t(id3) - 1/6 found for " << what << "; scan:";
        for (const auto& [a, t] : out.scan) msg << ' ' << a << ':' << t;
        throw std::runtime_error(msg.str());
    }
    double lo = out.scan[hit].first, hi = out.scan[hit + 1].first;
    const bool decreasing = out.scan[hit].second > target;
    if (out.scan[hit].second == target) {
        hi = lo;
    } else {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double g = eval(mid).value - target;
            if ((g > 0.0) == decreasing) lo = mid;
            else hi = mid;
            ++out.iterations;
        }
    }
    out.root = 0.5 * (lo + hi);
    out.t = eval(out.root);
    if (std::abs(out.t.value - target) > tol + out.t.error_radius) {
        std::ostringstream msg;
        msg << "bisection for " << what << " ended at " << out.root << " with t = " << out.t.value
            << ", outside the tolerance";
        throw std::runtime_error(msg.str());
    }
    return out;
}

}  // namespace

Value t_id3_segment(double a, EvalMode mode, const Budget& budget)
{
    return t_id3_of(Permuton(m_set(a)), mode, budget);
}

Value t_id3_nu(double a, EvalMode mode, const Budget& budget)
{
    return t_id3_of(nu_mixture(a), mode, budget);
}

RootResult find_b(double tol, EvalMode mode, const Budget& budget)
{
    return find_root(tol, [&](double a) { return t_id3_segment(a, mode, budget); }, "mu_a");
}

RootResult find_nu(double tol, EvalMode mode, const Budget& budget)
{
    return find_root(tol, [&](double a) { return t_id3_nu(a, mode, budget); }, "nu_a");
}

// ---- convergence and the prefix bound --------------------------------------

std::vector<ConvergenceRow> convergence_experiment(const Permuton& mu, int k, const std::vector<int>& sizes,
                                                   std::uint64_t seed)
{
    if (sizes.empty()) throw std::invalid_argument("size list is empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < k) throw std::invalid_argument("every size must be at least k");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("sizes must be increasing");
    }
    std::vector<ConvergenceRow> rows;
    for (int n : sizes) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
        const Perm tau = sample_perm(mu, n, rng);
        const DensityReport dens = all_densities(k, tau);
        double lower, upper;
        if (n <= kExactDiscrepancyLimit) {
            lower = upper = discrepancy(tau, DiscrepancyMode::exact);
        } else {
            const PrefixDeviation p = prefix_deviation(tau);
            lower = p.lower;
            upper = p.upper;
        }
        for (std::size_t r = 0; r < dens.patterns.size(); ++r)
            rows.push_back({n, dens.patterns[r], dens.values[r], lower, upper});
    }
    return rows;
}

PrefixBoundCheck prefix_bound_check(const Permuton& mu, int resolution, double tol)
{
    const PermutonDiscrepancy d = discrepancy_permuton(mu, resolution);
    PrefixBoundCheck out;
    out.sup_dev = d.sup_dev;
    out.d_lower = d.lower;
    out.upper = d.upper;
    out.pass = d.lower <= 4.0 * d.sup_dev + tol;
    return out;
}

}  // namespace permlim
