#include "doctest.h"

#include "permlim/analysis.hpp"
#include "permlim/discrepancy.hpp"

#include <cmath>

using namespace permlim;

namespace {

// Two estimates agree when their gap is within five combined standard deviations.
// Radii are 99% half-widths, so sigma = radius / kZ99.
bool within_sigmas(const Value& a, const Value& b, double sigmas = 5.0)
{
    const double sa = a.error_radius / kZ99;
    const double sb = b.error_radius / kZ99;
    return std::abs(a.value - b.value) <= sigmas * std::sqrt(sa * sa + sb * sb) + 1e-12;
}

Budget mc_budget(std::uint64_t samples, std::uint64_t seed)
{
    Budget b;
    b.samples = samples;
    b.seed = seed;
    b.method = IntegralMethod::mc;
    return b;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("F-integrals on lambda are all 1/9")
{
    const IntegralReport r = lemma_integrals(uniform_permuton());
    CHECK(r.method == IntegralMethod::exact);
    for (const Value* v : {&r.f2_mu, &r.fxy_mu, &r.f2_lambda, &r.fxy_lambda, &r.m22}) {
        REQUIRE(v->exact);
        CHECK(*v->exact == Rational(1, 9));
    }
    CHECK(*r.m20.exact == Rational(1, 3));
    CHECK(*r.m02.exact == Rational(1, 3));
}

TEST_CASE("exact and monte-carlo integrals agree")
{
    for (const Permuton& mu : {Permuton(from_perm(Perm({2, 1}))), Permuton(from_perm(Perm({2, 4, 1, 3}))),
                               Permuton(m_set(0.4))}) {
        const IntegralReport ex = lemma_integrals(mu);
        const IntegralReport mc = lemma_integrals(mu, mc_budget(400'000, 5));
        CHECK(ex.method == IntegralMethod::exact);
        CHECK(mc.method == IntegralMethod::mc);
        CHECK(within_sigmas(ex.f2_mu, mc.f2_mu));
        CHECK(within_sigmas(ex.fxy_mu, mc.fxy_mu));
        CHECK(within_sigmas(ex.f2_lambda, mc.f2_lambda));
        CHECK(within_sigmas(ex.fxy_lambda, mc.fxy_lambda));
        CHECK(within_sigmas(ex.m22, mc.m22));
    }
}

TEST_CASE("quadrature fallback stays within its radius")
{
    Budget b;
    b.method = IntegralMethod::quadrature;
    b.resolution = 400;
    const Permuton mu = m_set(0.3);
    const IntegralReport q = lemma_integrals(mu, b);
    const IntegralReport ex = lemma_integrals(mu);
    CHECK(q.method == IntegralMethod::quadrature);
    CHECK(std::abs(q.f2_lambda.value - ex.f2_lambda.value) <= q.f2_lambda.error_radius);
    CHECK(std::abs(q.fxy_lambda.value - ex.fxy_lambda.value) <= q.fxy_lambda.error_radius);
}

TEST_CASE("moment rewrite of the identity holds")
{
    for (const Permuton& mu : {Permuton(uniform_permuton()), Permuton(from_perm(Perm({2, 1}))),
                               Permuton(from_perm(Perm({3, 1, 4, 2}))), Permuton(m_set(1.0)),
                               Permuton(m_set(0.0)), Permuton(m_set(0.7)), nu_mixture(0.3)}) {
        const IdentityCheck c = identity_check(mu);
        CHECK(c.pass);
        CHECK(std::abs(c.slack) <= c.error_radius);
    }
    const IdentityCheck mc = identity_check(Permuton(m_set(0.6)), mc_budget(400'000, 11));
    CHECK(mc.pass);
}

TEST_CASE("left side of the identity against direct sampling")
{
    // J = ∫F(x,y) x y dlambda = E[1{X <= U, Y <= V} U V] with (X,Y) ~ mu and (U,V) uniform.
    const Permuton mu = m_set(0.45);
    Rng rng(2024);
    const int samples = 400'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Point p = sample_point(mu, rng);
        const double u = uniform01(rng), v = uniform01(rng);
        const double z = (p.x <= u && p.y <= v) ? u * v : 0.0;
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / samples;
    const double sd = std::sqrt((sum2 / samples - mean * mean) / samples);
    const IntegralReport r = lemma_integrals(mu);
    CHECK(std::abs(r.fxy_lambda.value - mean) <= 5 * sd);
}

TEST_CASE("chain on lambda and a permutation grid is tight at every equality")
{
    const ChainReport lam = cs_chain(uniform_permuton());
    REQUIRE(lam.quantities.size() == 7);
    REQUIRE(lam.steps.size() == 6);
    for (const ChainStep& s : lam.steps) {
        CHECK(s.holds);
        CHECK(std::abs(s.slack) <= s.error_radius);
    }
    CHECK(lam.steps[1].relation == "<=");
    CHECK(lam.steps[4].relation == "<=");
    CHECK(lam.steps[0].relation == "=");

    const ChainReport g = cs_chain(from_perm(Perm({2, 1})));
    for (int s : {1, 4}) CHECK(g.steps[static_cast<std::size_t>(s)].holds);
    for (int s : {2, 3}) CHECK(g.steps[static_cast<std::size_t>(s)].holds);
}

TEST_CASE("chain on mu_b has genuinely positive slack")
{
    const double b = find_b(1e-9).root;
    const ChainReport r = cs_chain(m_set(b));
    bool strict = false;
    for (const ChainStep& s : r.steps)
        if (std::abs(s.slack) > 10 * s.error_radius) strict = true;
    CHECK(strict);
    // The two inequalities hold for every measure.
    CHECK(r.steps[1].holds);
    CHECK(r.steps[4].holds);
    CHECK(r.steps[4].slack > 10 * r.steps[4].error_radius);
}

TEST_CASE("t(123) on M(a) and nu_a at known points")
{
    CHECK(t_id3_segment(0.0).value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t_id3_segment(1.0).value == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(t_id3_nu(0.0).value == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(t_id3_nu(1.0).value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(t_id3_segment(1.0 / 3).value - 41.0 / 216) <= 1e-9);
}

TEST_CASE("exact and monte-carlo t(123) agree")
{
    Budget b;
    b.samples = 400'000;
    b.seed = 17;
    for (double a : {0.2, 0.5, 0.8}) {
        const Value ex = t_id3_segment(a);
        const Value mc = t_id3_segment(a, EvalMode::mc, b);
        CHECK(within_sigmas(ex, mc));
        CHECK(within_sigmas(t_id3_nu(a), t_id3_nu(a, EvalMode::mc, b)));
    }
}

TEST_CASE("root finding")
{
    const RootResult rb = find_b(1e-5);
    CHECK(rb.root > 0.0);
    CHECK(rb.root < 1.0);
    CHECK(std::abs(rb.t.value - 1.0 / 6) <= 1e-5);
    CHECK(rb.scan.size() == 101);
    CHECK(rb.root == doctest::Approx(0.481701970511).epsilon(1e-9));
    const RootResult again = find_b(1e-5);
    CHECK(again.root == rb.root);

    const RootResult rn = find_nu(1e-5);
    CHECK(std::abs(rn.t.value - 1.0 / 6) <= 1e-5);
    CHECK(rn.root == doctest::Approx(0.457427107756).epsilon(1e-9));
}

TEST_CASE("monte-carlo root is reproducible")
{
    Budget b;
    b.samples = 20'000;
    b.seed = 3;
    const RootResult x = find_b(1e-2, EvalMode::mc, b);
    const RootResult y = find_b(1e-2, EvalMode::mc, b);
    CHECK(x.root == y.root);
    CHECK(std::abs(x.root - 0.4817) < 0.1);
}

TEST_CASE("prefix deviation sandwiches the discrepancy")
{
    for (const Permuton& mu : {Permuton(uniform_permuton()), Permuton(from_perm(Perm({2, 1}))),
                               Permuton(m_set(1.0)), Permuton(m_set(0.48))}) {
        const PrefixBoundCheck c = prefix_bound_check(mu, 120);
        CHECK(c.pass);
        CHECK(c.sup_dev <= c.d_lower + 1e-9);
        CHECK(c.d_lower <= c.upper + 1e-9);
    }
    const PrefixBoundCheck g = prefix_bound_check(from_perm(Perm({2, 1})), 100);
    CHECK(g.sup_dev == doctest::Approx(0.25));
    CHECK(g.d_lower == doctest::Approx(0.25));
}

TEST_CASE("small convergence experiment")
{
    const Permuton mu = m_set(0.48);
    const auto rows = convergence_experiment(mu, 3, {50, 400}, 8);
    REQUIRE(rows.size() == 2 * 6);
    for (const ConvergenceRow& r : rows) {
        CHECK(r.disc_lower <= r.disc_upper + 1e-12);
        CHECK(r.density >= 0.0);
        CHECK(r.density <= 1.0);
    }
    // For n <= 1000 the discrepancy is exact.
    CHECK(rows[0].disc_lower == rows[0].disc_upper);
    CHECK(convergence_experiment(mu, 3, {50, 400}, 8)[7].density == rows[7].density);
}

}  // TEST_SUITE
