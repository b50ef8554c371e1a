#include "permlim/permuton.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace permlim {

// ---- sharding -------------------------------------------------------------

void run_sharded(std::size_t shards, int threads, const std::function<void(std::size_t)>& fn)
{
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, shards);
    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) fn(s);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t s = next++; s < shards; s = next++) fn(s);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---- grid -----------------------------------------------------------------

namespace {

Rational clamp01(const Rational& r)
{
    if (r < 0) return Rational{0};
    if (r > 1) return Rational{1};
    return r;
}

double clamp01(double r) { return std::clamp(r, 0.0, 1.0); }

void check_unit(double a, double b)
{
    if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
        throw std::invalid_argument("cdf arguments must lie in [0,1]^2");
}

}  // namespace

GridPermuton::GridPermuton(int n, std::vector<GridCell> cells) : GridPermuton(n, std::move(cells), true) {}

GridPermuton GridPermuton::unchecked(int n, std::vector<GridCell> cells)
{
    return GridPermuton(n, std::move(cells), false);
}

GridPermuton GridPermuton::from_dense(int n, const std::vector<Rational>& masses)
{
    if (n < 1) throw std::invalid_argument("grid size must be positive");
    if (masses.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("grid needs n*n masses, got " + std::to_string(masses.size()));
    std::vector<GridCell> cells;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            const Rational& m = masses[static_cast<std::size_t>((i - 1) * n + (j - 1))];
            if (m != 0) cells.push_back({i, j, m});
            else if (m < 0) throw std::invalid_argument("negative mass");
        }
    return GridPermuton(n, std::move(cells));
}

GridPermuton::GridPermuton(int n, std::vector<GridCell> cells, bool validate) : n_(n)
{
    if (n < 1) throw std::invalid_argument("grid size must be positive");
    for (auto& c : cells) {
        if (c.i < 1 || c.i > n || c.j < 1 || c.j > n)
            throw std::invalid_argument("grid cell (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                                        ") outside 1.." + std::to_string(n));
        if (c.mass < 0) throw std::invalid_argument("negative mass in grid cell");
        if (c.mass != 0) cells_.push_back(std::move(c));
    }
    std::sort(cells_.begin(), cells_.end(),
              [](const GridCell& p, const GridCell& q) { return std::tie(p.i, p.j) < std::tie(q.i, q.j); });
    for (std::size_t k = 1; k < cells_.size(); ++k)
        if (cells_[k].i == cells_[k - 1].i && cells_[k].j == cells_[k - 1].j)
            throw std::invalid_argument("grid cell listed twice");

    if (validate) {
        const Rational strip{1, static_cast<unsigned long>(n)};
        std::vector<Rational> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
        for (const auto& c : cells_) {
            rows[static_cast<std::size_t>(c.i - 1)] += c.mass;
            cols[static_cast<std::size_t>(c.j - 1)] += c.mass;
        }
        for (int k = 0; k < n; ++k) {
            if (rows[static_cast<std::size_t>(k)] != strip)
                throw std::invalid_argument("x-strip " + std::to_string(k + 1) + " has mass " +
                                            to_string(rows[static_cast<std::size_t>(k)]) + ", expected " +
                                            to_string(strip));
            if (cols[static_cast<std::size_t>(k)] != strip)
                throw std::invalid_argument("y-strip " + std::to_string(k + 1) + " has mass " +
                                            to_string(cols[static_cast<std::size_t>(k)]) + ", expected " +
                                            to_string(strip));
        }
    }

    double run = 0.0;
    for (const auto& c : cells_) {
        mass_d_.push_back(c.mass.get_d());
        run += mass_d_.back();
        cumulative_.push_back(run);
    }

    if (static_cast<int>(cells_.size()) == n) {
        const Rational strip{1, static_cast<unsigned long>(n)};
        std::vector<int> images(static_cast<std::size_t>(n), 0);
        bool ok = true;
        for (const auto& c : cells_) {
            if (c.mass != strip || images[static_cast<std::size_t>(c.i - 1)] != 0) {
                ok = false;
                break;
            }
            images[static_cast<std::size_t>(c.i - 1)] = c.j;
        }
        if (ok) {
            try {
                perm_ = Perm{std::move(images)};
            } catch (const std::invalid_argument&) {
            }
        }
    }
}

Rational GridPermuton::mass(int i, int j) const
{
    auto it = std::lower_bound(cells_.begin(), cells_.end(), std::pair{i, j},
                               [](const GridCell& c, const std::pair<int, int>& key) {
                                   return std::tie(c.i, c.j) < std::tie(key.first, key.second);
                               });
    if (it != cells_.end() && it->i == i && it->j == j) return it->mass;
    return Rational{0};
}

Rational GridPermuton::cdf_exact(const Rational& a, const Rational& b) const
{
    if (a < 0 || a > 1 || b < 0 || b > 1) throw std::invalid_argument("cdf arguments must lie in [0,1]^2");
    const Rational an = a * n_, bn = b * n_;
    Rational total;
    for (const auto& c : cells_) {
        if (an <= c.i - 1 || bn <= c.j - 1) continue;
        total += c.mass * clamp01(Rational{an - (c.i - 1)}) * clamp01(Rational{bn - (c.j - 1)});
    }
    return total;
}

double GridPermuton::cdf(double a, double b) const
{
    check_unit(a, b);
    const double an = a * n_, bn = b * n_;
    double total = 0.0;
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        const auto& c = cells_[k];
        const double ox = clamp01(an - (c.i - 1));
        const double oy = clamp01(bn - (c.j - 1));
        total += mass_d_[k] * ox * oy;
    }
    return total;
}

Point GridPermuton::sample(Rng& rng) const
{
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    const auto& c = cells_[static_cast<std::size_t>(it - cumulative_.begin())];
    return {(c.i - 1 + uniform01(rng)) / n_, (c.j - 1 + uniform01(rng)) / n_};
}

GridPermuton from_perm(const Perm& tau)
{
    const int n = tau.size();
    const Rational m{1, static_cast<unsigned long>(n)};
    std::vector<GridCell> cells;
    cells.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) cells.push_back({i, tau.value(i), m});
    return GridPermuton(n, std::move(cells));
}

GridPermuton uniform_permuton() { return GridPermuton(1, {{1, 1, Rational{1}}}); }

// ---- segments -------------------------------------------------------------

double Segment::length() const { return std::hypot(x2 - x1, y2 - y1); }

namespace {

// Intersects [lo, hi] with {t : c0 + c1 t <= bound}.
void restrict_param(double& lo, double& hi, double c0, double c1, double bound)
{
    if (c1 == 0.0) {
        if (c0 > bound) hi = lo - 1.0;
        return;
    }
    const double t = (bound - c0) / c1;
    if (c1 > 0.0) hi = std::min(hi, t);
    else lo = std::max(lo, t);
}

}  // namespace

double segment_fraction_below(const Segment& s, double a, double b)
{
    double lo = 0.0, hi = 1.0;
    restrict_param(lo, hi, s.x1, s.x2 - s.x1, a);
    restrict_param(lo, hi, s.y1, s.y2 - s.y1, b);
    return std::max(0.0, hi - lo);
}

SegmentPermuton::SegmentPermuton(std::vector<Segment> segments)
{
    std::vector<double> masses;
    masses.reserve(segments.size());
    for (const auto& s : segments) masses.push_back(s.length());
    *this = SegmentPermuton(std::move(segments), std::move(masses));
}

SegmentPermuton::SegmentPermuton(std::vector<Segment> segments, std::vector<double> masses)
{
    if (segments.size() != masses.size()) throw std::invalid_argument("one mass per segment required");
    double total = 0.0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        for (double c : {s.x1, s.y1, s.x2, s.y2})
            if (!(c >= -kSegmentTolerance && c <= 1.0 + kSegmentTolerance))
                throw std::invalid_argument("segment endpoint outside [0,1]^2");
        if (!(masses[k] >= 0.0) || !std::isfinite(masses[k])) throw std::invalid_argument("invalid segment mass");
        if (s.length() <= kSegmentTolerance || masses[k] == 0.0) continue;
        Segment c{std::clamp(s.x1, 0.0, 1.0), std::clamp(s.y1, 0.0, 1.0), std::clamp(s.x2, 0.0, 1.0),
                  std::clamp(s.y2, 0.0, 1.0)};
        segments_.push_back(c);
        masses_.push_back(masses[k]);
        total += masses[k];
    }
    if (segments_.empty() || total <= 0.0) throw std::invalid_argument("segment measure has no mass");
    double run = 0.0;
    for (double& m : masses_) {
        m /= total;
        run += m;
        cumulative_.push_back(run);
    }
}

double SegmentPermuton::cdf(double a, double b) const
{
    check_unit(a, b);
    double total = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) total += masses_[k] * segment_fraction_below(segments_[k], a, b);
    return total;
}

Point SegmentPermuton::sample(Rng& rng) const
{
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    const auto& s = segments_[static_cast<std::size_t>(it - cumulative_.begin())];
    const double t = uniform01(rng);
    return {s.x1 + t * (s.x2 - s.x1), s.y1 + t * (s.y2 - s.y1)};
}

SegmentPermuton m_set(double a)
{
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("m_set parameter must lie in [0,1]");
    auto dedupe = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::vector<double> out;
        for (double x : v)
            if (out.empty() || std::abs(x - out.back()) > kSegmentTolerance) out.push_back(x);
        return out;
    };
    std::vector<Segment> segs;
    for (double c : dedupe({1 - a / 2, 1 + a / 2, a / 2, 2 - a / 2})) {
        const double x0 = std::max(0.0, c - 1.0), x1 = std::min(1.0, c);
        if (x1 - x0 > kSegmentTolerance) segs.push_back({x0, c - x0, x1, c - x1});
    }
    for (double d : dedupe({-a / 2, a / 2, 1 - a / 2, a / 2 - 1})) {
        const double x0 = std::max(0.0, -d), x1 = std::min(1.0, 1.0 - d);
        if (x1 - x0 > kSegmentTolerance) segs.push_back({x0, x0 + d, x1, x1 + d});
    }
    return SegmentPermuton(std::move(segs));
}

// ---- mixtures -------------------------------------------------------------

MixturePermuton::MixturePermuton(std::vector<Permuton> components, std::vector<Rational> weights)
    : components_(std::move(components)), weights_(std::move(weights))
{
    if (components_.empty() || components_.size() != weights_.size())
        throw std::invalid_argument("mixture needs one weight per component");
    Rational total;
    for (const auto& w : weights_) {
        if (w < 0) throw std::invalid_argument("mixture weights must be nonnegative");
        total += w;
    }
    if (total != 1) throw std::invalid_argument("mixture weights must sum to 1, got " + to_string(total));
    for (const auto& w : weights_) weights_d_.push_back(w.get_d());
}

std::optional<SegmentPermuton> flatten_segments(const Permuton& mu)
{
    if (const auto* s = mu.segments()) return *s;
    const auto* m = mu.mixture();
    if (!m) return std::nullopt;
    std::vector<Segment> segs;
    std::vector<double> masses;
    for (std::size_t c = 0; c < m->components().size(); ++c) {
        if (m->weights_d()[c] == 0.0) continue;
        auto part = flatten_segments(m->components()[c]);
        if (!part) return std::nullopt;
        for (std::size_t k = 0; k < part->segments().size(); ++k) {
            segs.push_back(part->segments()[k]);
            masses.push_back(part->masses()[k] * m->weights_d()[c]);
        }
    }
    return SegmentPermuton(std::move(segs), std::move(masses));
}

// ---- evaluation -----------------------------------------------------------

double cdf(const Permuton& mu, double a, double b)
{
    check_unit(a, b);
    if (const auto* g = mu.grid()) return g->cdf(a, b);
    if (const auto* s = mu.segments()) return s->cdf(a, b);
    const auto& m = *mu.mixture();
    double total = 0.0;
    for (std::size_t c = 0; c < m.components().size(); ++c)
        total += m.weights_d()[c] * cdf(m.components()[c], a, b);
    return total;
}

Point sample_point(const Permuton& mu, Rng& rng)
{
    if (const auto* g = mu.grid()) return g->sample(rng);
    if (const auto* s = mu.segments()) return s->sample(rng);
    const auto& m = *mu.mixture();
    const double u = uniform01(rng);
    double run = 0.0;
    for (std::size_t c = 0; c < m.components().size(); ++c) {
        run += m.weights_d()[c];
        if (u < run) return sample_point(m.components()[c], rng);
    }
    for (std::size_t c = m.components().size(); c-- > 0;)
        if (m.weights_d()[c] > 0.0) return sample_point(m.components()[c], rng);
    throw std::logic_error("mixture without positive weight");
}

namespace {

// Fills `order` with the indices of pts sorted by x; false on a tie in x or y.
bool order_points(std::span<const Point> pts, std::span<int> order, std::span<double> ys)
{
    const std::size_t k = pts.size();
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return pts[static_cast<std::size_t>(a)].x < pts[static_cast<std::size_t>(b)].x;
    });
    for (std::size_t i = 0; i < k; ++i) ys[i] = pts[static_cast<std::size_t>(order[i])].y;
    for (std::size_t i = 1; i < k; ++i)
        if (pts[static_cast<std::size_t>(order[i])].x == pts[static_cast<std::size_t>(order[i - 1])].x) return false;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (ys[i] == ys[j]) return false;
    return true;
}

constexpr int kFastK = 8;

// Lexicographic rank of sigma(k, mu) without heap allocation (k <= kFastK).
std::uint64_t sample_pattern_rank(const Permuton& mu, int k, Rng& rng)
{
    std::array<Point, kFastK> pts;
    std::array<int, kFastK> order;
    std::array<double, kFastK> ys;
    const auto uk = static_cast<std::size_t>(k);
    for (int attempt = 0; attempt <= kMaxTieRetries; ++attempt) {
        for (std::size_t i = 0; i < uk; ++i) pts[i] = sample_point(mu, rng);
        if (!order_points(std::span(pts.data(), uk), std::span(order.data(), uk), std::span(ys.data(), uk)))
            continue;
        std::uint64_t rank = 0;
        for (std::size_t i = 0; i < uk; ++i) {
            std::uint64_t smaller = 0;
            for (std::size_t j = i + 1; j < uk; ++j) smaller += ys[j] < ys[i];
            rank = rank * (uk - i) + smaller;
        }
        return rank;
    }
    throw std::runtime_error("sampling kept producing tied coordinates; degenerate permuton input");
}

}  // namespace

Perm sample_perm(const Permuton& mu, int k, Rng& rng)
{
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (k <= kFastK) return Perm::unrank(k, sample_pattern_rank(mu, k, rng));
    std::vector<Point> pts(static_cast<std::size_t>(k));
    std::vector<int> order(pts.size());
    std::vector<double> ys(pts.size());
    for (int attempt = 0; attempt <= kMaxTieRetries; ++attempt) {
        for (auto& p : pts) p = sample_point(mu, rng);
        if (order_points(pts, order, ys)) return pattern_of(std::span<const double>(ys));
    }
    throw std::runtime_error("sampling kept producing tied coordinates; degenerate permuton input");
}

// ---- exact grid densities -------------------------------------------------

namespace {

struct Deflation {
    std::uint64_t pattern;  // rank of pi in S_k
    int blocks;             // length of the deflated pattern rho
    std::uint64_t rho;      // rank of rho in S_blocks
    std::uint64_t weight;   // (k!)^2 / prod(m_c!)^2
};

// All ways to write each pi in S_k as rho[alpha_1, ..., alpha_m] with
// consecutive position blocks that are also value intervals.
std::vector<Deflation> build_deflations(int k)
{
    std::vector<Deflation> out;
    const auto perms = all_perms(k);
    const std::uint64_t kf = factorial(k);
    for (std::uint32_t mask = 0; mask < (1u << (k - 1)); ++mask) {
        std::vector<int> sizes;
        int run = 1;
        for (int b = 0; b < k - 1; ++b) {
            if (mask & (1u << b)) {
                sizes.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        sizes.push_back(run);
        std::uint64_t denom = 1;
        for (int s : sizes) denom *= factorial(s);
        const std::uint64_t weight = (kf / denom) * (kf / denom);
        for (std::size_t r = 0; r < perms.size(); ++r) {
            const auto v = perms[r].images();
            std::vector<int> minima;
            bool ok = true;
            std::size_t pos = 0;
            for (int s : sizes) {
                const auto [lo, hi] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(pos),
                                                          v.begin() + static_cast<std::ptrdiff_t>(pos) + s);
                if (*hi - *lo + 1 != s) {
                    ok = false;
                    break;
                }
                minima.push_back(*lo);
                pos += static_cast<std::size_t>(s);
            }
            if (!ok) continue;
            out.push_back({r, static_cast<int>(sizes.size()),
                           pattern_of(std::span<const int>(minima)).lex_rank(), weight});
        }
    }
    return out;
}

const std::vector<Deflation>& deflations(int k)
{
    static const std::array<std::vector<Deflation>, kMaxExactK + 1> tables = [] {
        std::array<std::vector<Deflation>, kMaxExactK + 1> t;
        for (int k = 1; k <= kMaxExactK; ++k) t[static_cast<std::size_t>(k)] = build_deflations(k);
        return t;
    }();
    return tables[static_cast<std::size_t>(k)];
}

void check_grid_k(int k)
{
    if (k < 1 || k > 4) throw std::invalid_argument("exact grid densities support 1 <= k <= 4");
}

BigInt pow_big(std::uint64_t base, int e)
{
    BigInt r = 1;
    for (int i = 0; i < e; ++i) r *= big(base);
    return r;
}

}  // namespace

std::vector<BigInt> perm_grid_numerators(int k, const Perm& tau)
{
    if (k < 1 || k > kMaxExactK) throw std::invalid_argument("k out of range");
    const int n = tau.size();
    std::vector<std::vector<std::uint64_t>> occ(static_cast<std::size_t>(k) + 1);
    for (int m = 1; m <= k; ++m)
        occ[static_cast<std::size_t>(m)] =
            m <= n ? count_patterns(tau, m) : std::vector<std::uint64_t>(factorial(m), 0);
    std::vector<BigInt> num(factorial(k), BigInt{0});
    for (const auto& d : deflations(k)) {
        const std::uint64_t c = occ[static_cast<std::size_t>(d.blocks)][d.rho];
        if (c) num[d.pattern] += big(d.weight) * big(c);
    }
    return num;
}

std::vector<Rational> grid_densities(int k, const GridPermuton& mu)
{
    check_grid_k(k);
    if (!mu.as_perm()) return grid_densities_enumeration(k, mu);
    const auto num = perm_grid_numerators(k, *mu.as_perm());
    const BigInt denom = big(factorial(k)) * pow_big(static_cast<std::uint64_t>(mu.n()), k);
    std::vector<Rational> out;
    out.reserve(num.size());
    for (const auto& x : num) {
        Rational r{x, denom};
        r.canonicalize();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Rational> grid_densities_enumeration(int k, const GridPermuton& mu)
{
    check_grid_k(k);
    const auto& cells = mu.cells();
    const std::size_t m = cells.size();
    const auto uk = static_cast<std::size_t>(k);

    // Integer cell weights over a common denominator.
    BigInt common = 1;
    for (const auto& c : cells) mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), c.mass.get_den_mpz_t());
    std::vector<BigInt> w;
    for (const auto& c : cells) w.push_back(c.mass.get_num() * (common / c.mass.get_den()));

    const std::uint64_t kf = factorial(k);
    const std::uint64_t kf2 = kf * kf;
    std::vector<BigInt> num(kf, BigInt{0});
    std::vector<std::size_t> pick(uk, 0);  // nondecreasing cell indices

    auto tie_orders = [&](auto key) {
        // All orders of the k points consistent with `key`, ties in any order.
        std::vector<int> base(uk);
        std::iota(base.begin(), base.end(), 0);
        std::stable_sort(base.begin(), base.end(), [&](int a, int b) { return key(a) < key(b); });
        std::vector<std::pair<std::size_t, std::size_t>> groups;
        for (std::size_t s = 0; s < uk;) {
            std::size_t e = s + 1;
            while (e < uk && key(base[e]) == key(base[s])) ++e;
            groups.emplace_back(s, e);
            s = e;
        }
        std::vector<std::vector<int>> orders;
        std::vector<int> cur = base;
        std::function<void(std::size_t)> rec = [&](std::size_t g) {
            if (g == groups.size()) {
                orders.push_back(cur);
                return;
            }
            auto [s, e] = groups[g];
            std::sort(cur.begin() + static_cast<std::ptrdiff_t>(s), cur.begin() + static_cast<std::ptrdiff_t>(e));
            do {
                rec(g + 1);
            } while (std::next_permutation(cur.begin() + static_cast<std::ptrdiff_t>(s),
                                           cur.begin() + static_cast<std::ptrdiff_t>(e)));
        };
        rec(0);
        return orders;
    };

    std::vector<std::uint64_t> tally(kf);
    std::vector<int> pattern(uk), yrank(uk);
    while (true) {
        // Multiset weight: k!/prod(mult!) * prod(w).
        BigInt weight = 1;
        std::uint64_t mult_den = 1;
        for (std::size_t s = 0; s < uk;) {
            std::size_t e = s + 1;
            while (e < uk && pick[e] == pick[s]) ++e;
            mult_den *= factorial(static_cast<int>(e - s));
            s = e;
        }
        for (std::size_t p = 0; p < uk; ++p) weight *= w[pick[p]];
        weight *= big(kf / mult_den);

        const auto xs = tie_orders([&](int p) { return cells[pick[static_cast<std::size_t>(p)]].i; });
        const auto ys = tie_orders([&](int p) { return cells[pick[static_cast<std::size_t>(p)]].j; });
        std::fill(tally.begin(), tally.end(), 0);
        for (const auto& yo : ys) {
            for (std::size_t r = 0; r < uk; ++r) yrank[static_cast<std::size_t>(yo[r])] = static_cast<int>(r) + 1;
            for (const auto& xo : xs) {
                for (std::size_t r = 0; r < uk; ++r) pattern[r] = yrank[static_cast<std::size_t>(xo[r])];
                std::uint64_t rank = 0;
                for (std::size_t i = 0; i < uk; ++i) {
                    std::uint64_t smaller = 0;
                    for (std::size_t j = i + 1; j < uk; ++j) smaller += pattern[j] < pattern[i];
                    rank = rank * (uk - i) + smaller;
                }
                ++tally[rank];
            }
        }
        const std::uint64_t combos = xs.size() * ys.size();
        for (std::size_t r = 0; r < kf; ++r)
            if (tally[r]) num[r] += weight * big(tally[r] * (kf2 / combos));

        std::size_t i = uk;
        while (i > 0 && pick[i - 1] == m - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < uk; ++j) pick[j] = pick[i - 1];
    }

    BigInt denom = big(kf2);
    for (int e = 0; e < k; ++e) denom *= common;
    std::vector<Rational> out;
    for (auto& x : num) {
        Rational r{x, denom};
        r.canonicalize();
        out.push_back(std::move(r));
    }
    return out;
}

Rational density_exact_grid(const Perm& pattern, const GridPermuton& mu)
{
    check_grid_k(pattern.size());
    return grid_densities(pattern.size(), mu)[pattern.lex_rank()];
}

// ---- Monte Carlo ----------------------------------------------------------

namespace {

constexpr std::size_t kShards = 64;

std::vector<std::uint64_t> pattern_histogram(int k, const Permuton& mu, std::uint64_t samples, std::uint64_t seed,
                                             int threads)
{
    if (samples == 0) throw std::invalid_argument("samples must be positive");
    if (k < 1 || k > kFastK) throw std::invalid_argument("Monte-Carlo pattern length must be within 1..8");
    const std::uint64_t kf = factorial(k);
    std::vector<std::vector<std::uint64_t>> parts(kShards, std::vector<std::uint64_t>(kf, 0));
    run_sharded(kShards, threads, [&](std::size_t s) {
        const std::uint64_t count = samples / kShards + (s < samples % kShards ? 1 : 0);
        Rng rng(derive_seed(seed, s));
        auto& h = parts[s];
        for (std::uint64_t t = 0; t < count; ++t) ++h[sample_pattern_rank(mu, k, rng)];
    });
    std::vector<std::uint64_t> total(kf, 0);
    for (const auto& h : parts)
        for (std::size_t r = 0; r < kf; ++r) total[r] += h[r];
    return total;
}

}  // namespace

Estimate density_mc(const Perm& pattern, const Permuton& mu, std::uint64_t samples, std::uint64_t seed, int threads)
{
    const auto hist = pattern_histogram(pattern.size(), mu, samples, seed, threads);
    return binomial_estimate(hist[pattern.lex_rank()], samples);
}

DensityReport densities_mc(int k, const Permuton& mu, std::uint64_t samples, std::uint64_t seed, int threads)
{
    const auto hist = pattern_histogram(k, mu, samples, seed, threads);
    std::vector<double> values, ci;
    for (std::uint64_t h : hist) {
        const Estimate e = binomial_estimate(h, samples);
        values.push_back(e.estimate);
        ci.push_back(e.ci99);
    }
    return make_estimate_report(k, std::move(values), std::move(ci));
}

// ---- marginals, moments, discrepancy --------------------------------------

MarginalReport marginal_check(const Permuton& mu, int resolution, double tol)
{
    if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    MarginalReport rep;
    if (const auto* g = mu.grid()) {
        // Exact strip masses from the per-strip sums of the grid.
        const int n = g->n();
        std::vector<Rational> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
        for (const auto& c : g->cells()) {
            rows[static_cast<std::size_t>(c.i - 1)] += c.mass;
            cols[static_cast<std::size_t>(c.j - 1)] += c.mass;
        }
        Rational worst;
        const Rational width{1, static_cast<unsigned long>(resolution)};
        for (int axis = 0; axis < 2; ++axis) {
            const auto& sums = axis == 0 ? rows : cols;
            for (int s = 0; s < resolution; ++s) {
                // Strip [s/r, (s+1)/r] overlaps grid strips floor(s n / r) .. ceil((s+1) n / r) - 1.
                const Rational lo{s, static_cast<unsigned long>(resolution)};
                const Rational hi{s + 1, static_cast<unsigned long>(resolution)};
                const long first = static_cast<long>(s) * n / resolution;
                const long last = (static_cast<long>(s + 1) * n + resolution - 1) / resolution;
                Rational strip_mass;
                for (long c = first; c < last && c < n; ++c) {
                    const Rational cl{c, static_cast<unsigned long>(n)};
                    const Rational ch{c + 1, static_cast<unsigned long>(n)};
                    const Rational overlap = std::min(hi, ch) - std::max(lo, cl);
                    if (overlap > 0) strip_mass += sums[static_cast<std::size_t>(c)] * overlap * n;
                }
                const Rational dev = abs(strip_mass - width);
                if (dev > worst) {
                    worst = dev;
                    rep.axis = axis == 0 ? 'x' : 'y';
                    rep.strip = s + 1;
                }
            }
        }
        rep.exact = true;
        rep.max_deviation = worst.get_d();
        rep.pass = rep.max_deviation <= tol;
        return rep;
    }
    const double width = 1.0 / resolution;
    double worst = -1.0;
    for (int axis = 0; axis < 2; ++axis) {
        double prev = 0.0;
        for (int s = 0; s < resolution; ++s) {
            const double edge = s + 1 == resolution ? 1.0 : (s + 1) * width;
            const double f = axis == 0 ? cdf(mu, edge, 1.0) : cdf(mu, 1.0, edge);
            const double dev = std::abs((f - prev) - width);
            if (dev > worst) {
                worst = dev;
                rep.axis = axis == 0 ? 'x' : 'y';
                rep.strip = s + 1;
            }
            prev = f;
        }
    }
    rep.max_deviation = worst;
    rep.pass = worst <= tol;
    return rep;
}

Rational moment_exact(const GridPermuton& mu, int p, int q)
{
    if (p < 0 || q < 0) throw std::invalid_argument("moment exponents must be nonnegative");
    const int n = mu.n();
    // Average of x^p over [(i-1)/n, i/n] is n * ((i/n)^{p+1} - ((i-1)/n)^{p+1}) / (p+1).
    auto strip_mean = [n](int i, int e) {
        Rational hi = 1, lo = 1;
        const Rational a{i, static_cast<unsigned long>(n)}, b{i - 1, static_cast<unsigned long>(n)};
        for (int t = 0; t <= e; ++t) {
            hi *= a;
            lo *= b;
        }
        return Rational{(hi - lo) * n / (e + 1)};
    };
    Rational total;
    for (const auto& c : mu.cells()) total += c.mass * strip_mean(c.i, p) * strip_mean(c.j, q);
    return total;
}

namespace {

// Integral over t in [0,1] of (x0 + t dx)^p (y0 + t dy)^q.
double segment_monomial(const Segment& s, int p, int q)
{
    auto expand = [](double c0, double c1, int e) {
        std::vector<double> coef(static_cast<std::size_t>(e) + 1, 0.0);
        double binom = 1.0;
        for (int r = 0; r <= e; ++r) {
            coef[static_cast<std::size_t>(r)] = binom * std::pow(c0, e - r) * std::pow(c1, r);
            binom = binom * (e - r) / (r + 1);
        }
        return coef;
    };
    const auto px = expand(s.x1, s.x2 - s.x1, p);
    const auto py = expand(s.y1, s.y2 - s.y1, q);
    double total = 0.0;
    for (std::size_t a = 0; a < px.size(); ++a)
        for (std::size_t b = 0; b < py.size(); ++b) total += px[a] * py[b] / static_cast<double>(a + b + 1);
    return total;
}

}  // namespace

double moment(const Permuton& mu, int p, int q)
{
    if (p < 0 || q < 0) throw std::invalid_argument("moment exponents must be nonnegative");
    if (const auto* g = mu.grid()) return moment_exact(*g, p, q).get_d();
    if (const auto* s = mu.segments()) {
        double total = 0.0;
        for (std::size_t k = 0; k < s->segments().size(); ++k)
            total += s->masses()[k] * segment_monomial(s->segments()[k], p, q);
        return total;
    }
    const auto& m = *mu.mixture();
    double total = 0.0;
    for (std::size_t c = 0; c < m.components().size(); ++c) total += m.weights_d()[c] * moment(m.components()[c], p, q);
    return total;
}

PermutonDiscrepancy discrepancy_permuton(const Permuton& mu, int resolution)
{
    if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    const auto r = static_cast<std::size_t>(resolution);
    std::vector<double> dev((r + 1) * (r + 1));
    PermutonDiscrepancy out;
    for (std::size_t a = 0; a <= r; ++a)
        for (std::size_t b = 0; b <= r; ++b) {
            const double x = a == r ? 1.0 : static_cast<double>(a) / resolution;
            const double y = b == r ? 1.0 : static_cast<double>(b) / resolution;
            const double d = cdf(mu, x, y) - x * y;
            dev[a * (r + 1) + b] = d;
            out.sup_dev = std::max(out.sup_dev, std::abs(d));
        }
    for (std::size_t a1 = 0; a1 <= r; ++a1)
        for (std::size_t a2 = a1 + 1; a2 <= r; ++a2) {
            double hi = 0.0, lo = 0.0;
            for (std::size_t b = 1; b <= r; ++b) {
                const double h = dev[a2 * (r + 1) + b] - dev[a1 * (r + 1) + b];
                hi = std::max(hi, h);
                lo = std::min(lo, h);
            }
            out.lower = std::max(out.lower, hi - lo);
        }
    out.upper = 4.0 * out.sup_dev;
    return out;
}

}  // namespace permlim
