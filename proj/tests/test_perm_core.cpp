#include "doctest.h"
#include "oracles.hpp"

#include "permlim/discrepancy.hpp"
#include "permlim/pattern_count.hpp"

#include <cmath>
#include <stdexcept>

using namespace permlim;

TEST_SUITE("perm-core") {

TEST_CASE("perm validation names the offending values")
{
    CHECK_THROWS_WITH_AS(Perm({1, 1, 3}), doctest::Contains("value 1 is duplicated"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(Perm({1, 1, 3}), doctest::Contains("value 2 is missing"), std::invalid_argument);
    CHECK_THROWS_AS(Perm(std::vector<int>{}), std::invalid_argument);
    CHECK_THROWS_AS(Perm({0, 1}), std::invalid_argument);
}

TEST_CASE("text format")
{
    CHECK(parse_perm("# a comment\n4 3,8 9 5 1 2 7 6\n") == Perm({4, 3, 8, 9, 5, 1, 2, 7, 6}));
    CHECK(parse_perm("2,1") == Perm({2, 1}));
    CHECK_THROWS_AS(parse_perm("1,2\n3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_perm("1,x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_perm("2,2"), std::invalid_argument);
}

TEST_CASE("lexicographic ranks")
{
    const auto all = all_perms(4);
    REQUIRE(all.size() == 24);
    for (std::size_t r = 0; r < all.size(); ++r) {
        CHECK(all[r].lex_rank() == r);
        CHECK(Perm::unrank(4, r) == all[r]);
        if (r > 0) CHECK(all[r - 1] < all[r]);
    }
}

TEST_CASE("induce")
{
    const Perm t{1, 3, 2};
    const int full[] = {1, 2, 3}, tail[] = {2, 3}, bad[] = {2, 2}, out_of_range[] = {0, 1};
    CHECK(induce(t, full) == t);
    CHECK(induce(t, tail) == Perm({2, 1}));
    const int picks[] = {1, 4, 6};
    CHECK(induce(Perm({4, 3, 8, 9, 5, 1, 2, 7, 6}), picks) == Perm({2, 3, 1}));
    CHECK_THROWS_AS(induce(t, bad), std::invalid_argument);
    CHECK_THROWS_AS(induce(t, out_of_range), std::invalid_argument);
}

TEST_CASE("exact densities")
{
    for (const Perm& tau : {Perm({1}), Perm({3, 1, 2}), Perm({4, 3, 8, 9, 5, 1, 2, 7, 6})})
        CHECK(density_exact(Perm({1}), tau) == 1);
    CHECK(density_exact(Perm({1, 2}), Perm({2, 1})) == 0);
    CHECK(density_exact(Perm({1, 2}), Perm({1, 3, 2})) == Rational(2, 3));
    CHECK_THROWS_AS(density_exact(Perm({1, 2, 3}), Perm({2, 1})), std::invalid_argument);

    const auto rep = all_densities(2, Perm({2, 1, 4, 3}));
    CHECK(rep.exact_values[0] == make_rational(4, 6));
    CHECK(rep.exact_values[1] == make_rational(2, 6));
    const auto one = all_densities(1, Perm({3, 1, 2}));
    REQUIRE(one.exact_values.size() == 1);
    CHECK(one.exact_values[0] == 1);
    CHECK_THROWS_AS(all_densities(0, Perm({1})), std::invalid_argument);
    CHECK_THROWS_AS(all_densities(3, Perm({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(all_densities(7, Perm::identity(8)), std::invalid_argument);
}

TEST_CASE("3-pattern counts of (4,3,8,9,5,1,2,7,6) follow the brute-force count")
{
    // Equal counts (14 each) would make every 3-density 1/6; the subset count says otherwise.
    const Perm tau{4, 3, 8, 9, 5, 1, 2, 7, 6};
    const auto counts = count_patterns(tau, 3);
    CHECK(counts == oracle::naive_counts(tau, 3));
    CHECK(counts == std::vector<std::uint64_t>{8, 17, 17, 17, 17, 8});
}

TEST_CASE("densities sum to one and respect symmetries")
{
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const Perm tau = oracle::random_perm(1 + static_cast<int>(rng() % 30), rng);
        for (int k = 1; k <= std::min(4, tau.size()); ++k) {
            const auto rep = all_densities(k, tau);
            Rational total;
            for (const auto& v : rep.exact_values) total += v;
            CHECK(total == 1);
            for (const Perm& pi : all_perms(k)) {
                CHECK(density_exact(pi.complement(), tau.complement()) == density_exact(pi, tau));
                CHECK(density_exact(pi.reverse(), tau.reverse()) == density_exact(pi, tau));
            }
        }
    }
}

TEST_CASE("optimized counting matches subset enumeration")
{
    Rng rng(5);
    for (int trial = 0; trial < 150; ++trial) {
        const Perm tau = oracle::random_perm(1 + static_cast<int>(rng() % 30), rng);
        for (int k = 1; k <= std::min(4, tau.size()); ++k) CHECK(count_patterns(tau, k) == oracle::naive_counts(tau, k));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const Perm tau = oracle::random_perm(6 + static_cast<int>(rng() % 8), rng);
        for (int k = 5; k <= 6; ++k) CHECK(count_patterns(tau, k) == oracle::naive_counts(tau, k));
    }
    CHECK_THROWS_AS(count_patterns(Perm::identity(61), 5), std::invalid_argument);
}

TEST_CASE("sampled densities")
{
    const Perm tau{3, 1, 2};
    const Estimate one = density_sampled(Perm({1}), tau, 100, 1);
    CHECK(one.estimate == 1.0);
    CHECK(one.ci99 == 0.0);
    CHECK(density_sampled(Perm({1, 2}), Perm({2, 1}), 1000, 1).estimate == 0.0);
    const Estimate id = density_sampled(Perm({1, 2, 3}), Perm::identity(1000), 100000, 3);
    CHECK(std::abs(id.estimate - 1.0) <= id.ci99);
    CHECK_THROWS_AS(density_sampled(Perm({1, 2}), tau, 0, 1), std::invalid_argument);

    // Coverage over a fixed seed set: |estimate - exact| < 5 ci99 in at least 99% of runs.
    Rng rng(77);
    const Perm big = oracle::random_perm(40, rng);
    const Perm pi{2, 1, 3};
    const double exact = density_exact(pi, big).get_d();
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Estimate e = density_sampled(pi, big, 1'000'000, seed);
        good += std::abs(e.estimate - exact) < 5 * e.ci99;
    }
    CHECK(good >= 20);
}

TEST_CASE("reflections")
{
    const auto r = reflections(Perm({1, 2, 3}));
    CHECK(r.reverse == Perm({3, 2, 1}));
    CHECK(r.complement == Perm({3, 2, 1}));
    CHECK(r.inverse == Perm({1, 2, 3}));
    CHECK(reflections(Perm({2, 1, 3})).inverse == Perm({2, 1, 3}));
    CHECK(reflections(Perm({4, 3, 8, 9, 5, 1, 2, 7, 6})).complement == Perm({6, 7, 2, 1, 5, 9, 8, 3, 4}));
}

TEST_CASE("discrepancy")
{
    CHECK(discrepancy(Perm({1})) == 0.0);
    CHECK(discrepancy_exact(Perm::identity(4)) == Rational(1, 4));
    CHECK(discrepancy(Perm::identity(1000)) >= 0.24);

    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const Perm tau = oracle::random_perm(1 + static_cast<int>(rng() % 200), rng);
        const double d = discrepancy(tau);
        const PrefixDeviation p = prefix_deviation(tau);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(p.prefix <= d + 1e-15);
        CHECK(p.anchored <= d + 1e-15);
        CHECK(p.anchored <= p.lower);
        CHECK(p.lower <= d + 1e-15);
        CHECK(d <= 4 * p.prefix + 1e-15);
        CHECK(d <= p.upper + 1e-15);
        CHECK(discrepancy(tau, DiscrepancyMode::prefix_bound) == p.prefix);
    }
    for (int trial = 0; trial < 40; ++trial) {
        const Perm tau = oracle::random_perm(1 + static_cast<int>(rng() % 30), rng);
        CHECK(discrepancy_scaled(tau) == oracle::brute_discrepancy_scaled(tau));
    }
}

}
