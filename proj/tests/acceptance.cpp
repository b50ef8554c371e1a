// Acceptance run: one PASS/FAIL line per criterion, with the numbers behind it.
// Exit status is nonzero when any criterion fails.
#include "oracles.hpp"

#include "permlim/analysis.hpp"
#include "permlim/discrepancy.hpp"
#include "permlim/pattern_count.hpp"
#include "permlim/permuton_io.hpp"
#include "permlim/symmetry.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace permlim;

namespace {

// Pinned tolerances.
constexpr double kIntegralCiMultiple = 3.0;      // criterion 4
constexpr std::uint64_t kBigSamples = 10'000'000;  // criteria 4 and 6
constexpr double kEndpointTolExact = 1e-9;       // criterion 6
constexpr double kRootTol = 1e-5;                // criterion 6
constexpr double kSymSigmas = 4.0;               // criterion 6, 3-patterns
constexpr double kAsymSigmas = 5.0;              // criterion 6, some 4-pattern
constexpr int kLargeN = 10'000;                  // criterion 8
constexpr double kLambdaP4Defect = 0.01;         // criterion 8
constexpr double kLambdaDisc = 0.03;             // criterion 8
constexpr double kMuBDiscFraction = 0.5;         // criterion 8
constexpr int kPermutonResolution = 400;         // criteria 8 and 9
constexpr double kSandwichSlack = 1e-9;          // criterion 9

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fixture(const std::string& name) { return std::string(PERMLIM_FIXTURES) + "/" + name; }

double sigma(double ci99) { return ci99 / kZ99; }

Outcome search9()
{
    const auto found = search_inflatable(9, 3, true);
    std::ostringstream d;
    d << "search-inflatable 9 3 returned " << found.size() << " permutation(s)";
    const Perm a({4, 3, 8, 9, 5, 1, 2, 7, 6});
    const Perm b({4, 7, 2, 9, 5, 1, 8, 3, 6});
    for (const Perm& p : {a, b}) {
        const SymmetryVerdict v = perm_symmetry_defect(p, 3);
        d << "; (" << p.str() << ") exact 3-defect " << to_string(v.exact_defect);
    }
    std::vector<Perm> listed{a, b, a.reverse(), b.reverse()};
    d << "; reflection links among listed:";
    for (const ReflectionLink& l : reflection_links(listed))
        d << " " << l.from.str() << " --" << l.op << "--> " << l.to.str() << ";";
    const bool has_a = std::find(found.begin(), found.end(), a) != found.end();
    const bool has_b = std::find(found.begin(), found.end(), b) != found.end();
    return {found.size() == 4 && has_a && has_b, d.str()};
}

Outcome empty_searches(int k, int from, int to)
{
    std::ostringstream d;
    bool ok = true;
    for (int n = from; n <= to; ++n) {
        const auto found = search_inflatable(n, k, true);
        d << "n=" << n << ":" << found.size() << " ";
        ok = ok && found.empty();
    }
    return {ok, d.str()};
}

Outcome lambda_integrals()
{
    const Permuton lambda = uniform_permuton();
    const IntegralReport ex = lemma_integrals(lambda);
    bool ok = true;
    for (const Value* v : {&ex.f2_mu, &ex.fxy_mu, &ex.f2_lambda})
        ok = ok && v->exact && *v->exact == Rational(1, 9);
    Budget b;
    b.samples = kBigSamples;
    b.method = IntegralMethod::mc;
    const IntegralReport mc = lemma_integrals(lambda, b);
    std::ostringstream d;
    d << "exact " << to_string(*ex.f2_mu.exact) << "," << to_string(*ex.fxy_mu.exact) << ","
      << to_string(*ex.f2_lambda.exact) << "; mc";
    for (const Value* v : {&mc.f2_mu, &mc.fxy_mu, &mc.f2_lambda}) {
        const double gap = std::abs(v->value - 1.0 / 9);
        d << " " << v->value << " (gap/ci99 " << gap / v->error_radius << ")";
        ok = ok && gap <= kIntegralCiMultiple * v->error_radius;
    }
    return {ok, d.str()};
}

Outcome lambda_chain()
{
    const ChainReport r = cs_chain(uniform_permuton());
    bool ok = true;
    std::ostringstream d;
    d << "slacks";
    for (const ChainStep& s : r.steps) {
        d << " " << s.slack;
        ok = ok && std::abs(s.slack) <= s.error_radius;
    }
    for (std::size_t i : {std::size_t{0}, r.quantities.size() - 1})
        ok = ok && std::abs(r.quantities[i].value - 1.0 / 81) <= r.quantities[i].error_radius;
    d << "; q1=" << r.quantities[1].value << " q5=" << r.quantities[5].value;
    return {ok, d.str()};
}

Outcome counterexample()
{
    std::ostringstream d;
    const double t0 = t_id3_segment(0.0).value;
    const double t1 = t_id3_segment(1.0).value;
    bool ok = std::abs(t0 - 0.25) <= kEndpointTolExact && std::abs(t1 - 0.125) <= kEndpointTolExact;
    d.precision(12);
    d << "t(mu_0)=" << t0 << " t(mu_1)=" << t1;

    const RootResult root = find_b(kRootTol);
    ok = ok && std::abs(root.t.value - 1.0 / 6) <= kRootTol;
    d << "; b=" << root.root << " |t-1/6|=" << std::abs(root.t.value - 1.0 / 6);

    const Permuton mu = m_set(root.root);
    const DensityReport d3 = densities_mc(3, mu, kBigSamples, kDefaultSeed);
    double worst3 = 0.0;
    for (std::size_t i = 0; i < d3.values.size(); ++i)
        worst3 = std::max(worst3, std::abs(d3.values[i] - 1.0 / 6) / sigma(d3.ci99[i]));
    const DensityReport d4 = densities_mc(4, mu, kBigSamples, derive_seed(kDefaultSeed, 4));
    double best4 = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < d4.values.size(); ++i) {
        const double z = std::abs(d4.values[i] - 1.0 / 24) / sigma(d4.ci99[i]);
        if (z > best4) best4 = z, at = i;
    }
    d.precision(4);
    d << "; max 3-pattern z=" << worst3 << "; max 4-pattern z=" << best4 << " at " << d4.patterns[at].str();
    ok = ok && worst3 <= kSymSigmas && best4 > kAsymSigmas;
    return {ok, d.str()};
}

Outcome collision_bound()
{
    Rng rng(derive_seed(kDefaultSeed, 7));
    int checked = 0;
    bool ok = true;
    Rational worst_ratio = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 5 + static_cast<int>(uniform_index(rng, 56));
        const Perm tau = oracle::random_perm(n, rng);
        const GridPermuton g = from_perm(tau);
        for (int k = 1; k <= 4; ++k) {
            const std::vector<Rational> grid = grid_densities(k, g);
            const DensityReport perm = all_densities(k, tau);
            const Rational bound = make_rational(k * (k - 1), 2 * n);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Rational gap = abs(Rational{grid[i] - perm.exact_values[i]});
                ++checked;
                if (gap > bound) ok = false;
                if (bound > 0 && gap / bound > worst_ratio) worst_ratio = gap / bound;
            }
        }
    }
    std::ostringstream d;
    d << checked << " (tau, pi) instances; largest gap/bound " << worst_ratio.get_d();
    return {ok, d.str()};
}

Outcome desk_scale()
{
    std::ostringstream d;
    Rng rl(derive_seed(kDefaultSeed, 8));
    const Perm lam = sample_perm(uniform_permuton(), kLargeN, rl);
    const DensityReport p4 = all_densities(4, lam);
    const PrefixDeviation dl = prefix_deviation(lam);
    bool ok = p4.defect <= kLambdaP4Defect && dl.upper <= kLambdaDisc;
    d << "lambda: P(4) defect " << p4.defect << ", d in [" << dl.lower << ", " << dl.upper << "]";

    const double b = find_b(1e-9).root;
    const Permuton mu = m_set(b);
    const double d_lower = discrepancy_permuton(mu, kPermutonResolution).lower;
    Rng rb(derive_seed(kDefaultSeed, 9));
    const Perm tb = sample_perm(mu, kLargeN, rb);
    const PrefixDeviation db = prefix_deviation(tb);
    ok = ok && db.lower >= kMuBDiscFraction * d_lower;
    d << "; mu_b: d >= " << db.lower << " vs 0.5*d_lower(mu_b) = " << kMuBDiscFraction * d_lower;
    return {ok, d.str()};
}

Outcome sandwich()
{
    const char* files[] = {"lambda.json",     "perm21.json",      "grid21.json", "perm_s9_listed.json",
                           "perm2143.json",   "m_set_0.json",     "m_set_third.json", "m_set_1.json",
                           "nu_half.json"};
    bool ok = true;
    std::ostringstream d;
    for (const char* f : files) {
        const Permuton mu = load_permuton(fixture(f));
        const PrefixBoundCheck c = prefix_bound_check(mu, kPermutonResolution, kSandwichSlack);
        ok = ok && c.pass && c.d_lower <= 4 * c.sup_dev + kSandwichSlack;
        d << f << " " << c.d_lower << "<=" << 4 * c.sup_dev << "; ";
    }
    return {ok, d.str()};
}

Outcome oracle_suite()
{
    int cases = 0;
    bool ok = true;
    auto compare = [&](const Perm& tau) {
        for (int k = 1; k <= std::min(4, tau.size()); ++k) {
            ++cases;
            if (count_patterns(tau, k) != oracle::naive_counts(tau, k)) ok = false;
        }
    };
    for (int n = 1; n <= 7; ++n)
        for (const Perm& tau : all_perms(n)) compare(tau);
    Rng rng(derive_seed(kDefaultSeed, 10));
    for (int i = 0; i < 500; ++i) compare(oracle::random_perm(1 + static_cast<int>(uniform_index(rng, 12)), rng));
    int disc = 0;
    for (int n = 1; n <= 50; ++n)
        for (int rep = 0; rep < 4; ++rep) {
            const Perm tau = oracle::random_perm(n, rng);
            ++disc;
            if (discrepancy_scaled(tau) != oracle::brute_discrepancy_scaled(tau)) ok = false;
        }
    std::ostringstream d;
    d << cases << " counting comparisons, " << disc << " discrepancy comparisons";
    return {ok, d.str()};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"length-9 3-inflatable search", search9},
        {"no 3-inflatable of length 2..8", [] { return empty_searches(3, 2, 8); }},
        {"no 4-inflatable of length 2..9", [] { return empty_searches(4, 2, 9); }},
        {"F-integrals on lambda", lambda_integrals},
        {"Cauchy-Schwarz chain on lambda", lambda_chain},
        {"M(a) counterexample pipeline", counterexample},
        {"collision bound", collision_bound},
        {"desk-scale quasirandomness", desk_scale},
        {"sandwich bound on fixtures", sandwich},
        {"oracle equivalence", oracle_suite},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("%s %2zu %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
