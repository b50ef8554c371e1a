#include "permlim/symmetry.hpp"

#include <algorithm>
#include <stdexcept>

namespace permlim {

namespace {

SymmetryVerdict from_report(DensityReport rep)
{
    SymmetryVerdict v;
    v.k = rep.k;
    v.exact = rep.exact;
    v.defect = rep.defect;
    if (rep.exact) v.exact_defect = rep.exact_defect;
    else v.ci99 = rep.ci99[rep.witness];
    v.witness = rep.patterns[rep.witness];
    v.densities = std::move(rep);
    return v;
}

BigInt power(std::uint64_t base, int e)
{
    BigInt r = 1;
    for (int i = 0; i < e; ++i) r *= big(base);
    return r;
}

}  // namespace

SymmetryVerdict perm_symmetry_defect(const Perm& tau, int k)
{
    if (k < 1 || k > kMaxExactK) throw std::invalid_argument("k must be within 1..6");
    if (k >= 5 && tau.size() > kMaxEnumerationN)
        throw std::invalid_argument("k >= 5 requires |tau| <= 60");
    const auto num = perm_grid_numerators(k, tau);
    const BigInt denom = big(factorial(k)) * power(static_cast<std::uint64_t>(tau.size()), k);
    std::vector<Rational> values;
    for (const auto& x : num) {
        Rational r{x, denom};
        r.canonicalize();
        values.push_back(std::move(r));
    }
    return from_report(make_exact_report(k, std::move(values)));
}

SymmetryVerdict symmetry_defect(const Permuton& mu, int k, const SymmetryOptions& options)
{
    if (k < 1 || k > kMaxExactK) throw std::invalid_argument("k must be within 1..6");
    if (const auto* g = mu.grid(); g && k <= 4) return from_report(make_exact_report(k, grid_densities(k, *g)));
    return from_report(densities_mc(k, mu, options.samples, options.seed, options.threads));
}

InflatableResult is_inflatable(const Perm& tau, int k)
{
    if (k < 1 || k > 4) throw std::invalid_argument("inflatability is decided for 1 <= k <= 4");
    InflatableResult out;
    out.verdict = perm_symmetry_defect(tau, k);
    out.inflatable = tau.size() > 1 && out.verdict.exact_defect == 0;
    return out;
}

bool inflatable_fast(const Perm& tau, int k)
{
    if (tau.size() <= 1) return false;
    const BigInt target = power(static_cast<std::uint64_t>(tau.size()), k);
    for (const auto& x : perm_grid_numerators(k, tau))
        if (x != target) return false;
    return true;
}

std::vector<Perm> symmetry_orbit(const Perm& tau)
{
    // The group is dihedral of order 8: {id, r, c, rc} composed with {id, inverse}.
    std::vector<Perm> out;
    for (const Perm& base : {tau, tau.inverse()}) {
        out.push_back(base);
        out.push_back(base.reverse());
        out.push_back(base.complement());
        out.push_back(base.reverse().complement());
    }
    return out;
}

std::vector<Perm> search_inflatable(int n, int k, bool prune, int threads)
{
    if (n < 1 || n > 10) throw std::invalid_argument("search length must be within 1..10");
    if (k != 3 && k != 4) throw std::invalid_argument("search supports k = 3 or k = 4");
    perm_grid_numerators(k, Perm::identity(1));  // builds the shared tables before the parallel phase

    const std::uint64_t total = factorial(n);
    const std::size_t shards = static_cast<std::size_t>(std::min<std::uint64_t>(total, 256));
    std::vector<std::vector<Perm>> found(shards);
    run_sharded(shards, threads, [&](std::size_t s) {
        const std::uint64_t begin = total * s / shards, end = total * (s + 1) / shards;
        if (begin == end) return;
        const Perm first = Perm::unrank(n, begin);
        std::vector<int> v(first.images().begin(), first.images().end());
        for (std::uint64_t r = begin; r < end; ++r) {
            Perm tau{v};
            bool test = true;
            if (prune) {
                for (const auto& img : symmetry_orbit(tau))
                    if (img < tau) {
                        test = false;
                        break;
                    }
            }
            if (test && inflatable_fast(tau, k)) {
                if (prune)
                    for (auto& img : symmetry_orbit(tau)) found[s].push_back(std::move(img));
                else
                    found[s].push_back(tau);
            }
            std::next_permutation(v.begin(), v.end());
        }
    });
    std::vector<Perm> out;
    for (auto& part : found) out.insert(out.end(), part.begin(), part.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<ReflectionLink> reflection_links(const std::vector<Perm>& perms)
{
    std::vector<ReflectionLink> out;
    auto contains = [&](const Perm& p) { return std::find(perms.begin(), perms.end(), p) != perms.end(); };
    for (const auto& p : perms) {
        const auto r = reflections(p);
        const std::pair<const char*, const Perm*> ops[] = {
            {"reverse", &r.reverse}, {"complement", &r.complement}, {"inverse", &r.inverse}};
        for (const auto& [name, img] : ops)
            if (*img != p && contains(*img)) out.push_back({p, name, *img});
    }
    return out;
}

}  // namespace permlim
