#include "permlim/segment_integrals.hpp"

#include "permlim/polytope.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace permlim {

namespace {

constexpr std::array<double, 5> kGaussNode = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                              0.9061798459386640};
constexpr std::array<double, 5> kGaussWeight = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                0.4786286704993665, 0.2369268850561891};

// Sorted, de-duplicated breakpoints clipped to [lo, hi], endpoints included.
std::vector<double> normalize_breaks(std::vector<double> b, double lo, double hi)
{
    b.push_back(lo);
    b.push_back(hi);
    for (double& v : b) v = std::clamp(v, lo, hi);
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double v : b)
        if (out.empty() || v - out.back() > 1e-15) out.push_back(v);
    return out;
}

template <class Fn>
double integrate_pieces(const std::vector<double>& breaks, Fn&& f)
{
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        double piece = 0.0;
        for (std::size_t g = 0; g < kGaussNode.size(); ++g) piece += kGaussWeight[g] * f(mid + half * kGaussNode[g]);
        total += half * piece;
    }
    return total;
}

// Parameter values t in [0,1] where the affine map c0 + c1 t equals c.
void add_crossing(std::vector<double>& out, double c0, double c1, double c)
{
    if (std::abs(c1) > 1e-15) out.push_back((c - c0) / c1);
}

// x on the line through segment r at height y (nullopt for horizontal lines).
bool line_x_at(const Segment& r, double y, double& x)
{
    const double dy = r.y2 - r.y1;
    if (std::abs(dy) < 1e-15) return false;
    x = r.x1 + (y - r.y1) / dy * (r.x2 - r.x1);
    return true;
}

// Height of the intersection of two segment lines, if they cross in a point.
bool line_crossing_y(const Segment& r, const Segment& s, double& y)
{
    const double rdx = r.x2 - r.x1, rdy = r.y2 - r.y1, sdx = s.x2 - s.x1, sdy = s.y2 - s.y1;
    const double det = rdx * sdy - rdy * sdx;
    if (std::abs(det) < 1e-15) return false;
    const double t = ((s.x1 - r.x1) * sdy - (s.y1 - r.y1) * sdx) / det;
    y = r.y1 + t * rdy;
    return true;
}

}  // namespace

SegmentIntegrals segment_integrals(const SegmentPermuton& mu)
{
    const auto& segs = mu.segments();
    const auto& mass = mu.masses();
    auto F = [&](double a, double b) {
        double total = 0.0;
        for (std::size_t r = 0; r < segs.size(); ++r) total += mass[r] * segment_fraction_below(segs[r], a, b);
        return total;
    };

    SegmentIntegrals out;

    // Along each segment.
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const Segment& g = segs[s];
        const double dx = g.x2 - g.x1, dy = g.y2 - g.y1;
        std::vector<double> breaks;
        for (const auto& r : segs) {
            for (double c : {r.x1, r.x2}) add_crossing(breaks, g.x1, dx, c);
            for (double c : {r.y1, r.y2}) add_crossing(breaks, g.y1, dy, c);
            // Where g crosses the line through r.
            const double rdx = r.x2 - r.x1, rdy = r.y2 - r.y1;
            const double det = dx * rdy - dy * rdx;
            if (std::abs(det) > 1e-15) breaks.push_back(((r.x1 - g.x1) * rdy - (r.y1 - g.y1) * rdx) / det);
        }
        breaks = normalize_breaks(std::move(breaks), 0.0, 1.0);
        const double f2 = integrate_pieces(breaks, [&](double t) {
            const double v = F(g.x1 + t * dx, g.y1 + t * dy);
            return v * v;
        });
        const double fxy = integrate_pieces(breaks, [&](double t) {
            const double x = g.x1 + t * dx, y = g.y1 + t * dy;
            return F(x, y) * x * y;
        });
        out.f2_mu += mass[s] * f2;
        out.fxy_mu += mass[s] * fxy;
    }

    // Over the unit square: outer in b, inner in a.
    std::vector<double> xs, ys;
    for (const auto& r : segs) {
        xs.insert(xs.end(), {r.x1, r.x2});
        ys.insert(ys.end(), {r.y1, r.y2});
    }
    std::vector<double> bbreaks = ys;
    for (std::size_t r = 0; r < segs.size(); ++r) {
        // Kink a = x_r(b) against constant kinks and against other kinks.
        const Segment& sr = segs[r];
        const double rdx = sr.x2 - sr.x1, rdy = sr.y2 - sr.y1;
        if (std::abs(rdx) > 1e-15)
            for (double c : xs) bbreaks.push_back(sr.y1 + (c - sr.x1) / rdx * rdy);
        for (std::size_t s = r + 1; s < segs.size(); ++s) {
            double y;
            if (line_crossing_y(sr, segs[s], y)) bbreaks.push_back(y);
        }
    }
    bbreaks = normalize_breaks(std::move(bbreaks), 0.0, 1.0);

    auto inner = [&](double b, bool with_xy) {
        std::vector<double> abreaks = xs;
        for (const auto& r : segs) {
            double x;
            if (line_x_at(r, b, x)) abreaks.push_back(x);
        }
        abreaks = normalize_breaks(std::move(abreaks), 0.0, 1.0);
        return integrate_pieces(abreaks, [&](double a) {
            const double v = F(a, b);
            return with_xy ? v * a * b : v * v;
        });
    };
    out.f2_lambda = integrate_pieces(bbreaks, [&](double b) { return inner(b, false); });
    out.fxy_lambda = integrate_pieces(bbreaks, [&](double b) { return inner(b, true); });
    return out;
}

double segment_t_id3(const SegmentPermuton& mu)
{
    const auto& segs = mu.segments();
    const auto& mass = mu.masses();
    const std::size_t m = segs.size();
    double total = 0.0;
    std::vector<HalfSpace> hs(4);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) {
                const Segment &p = segs[a], &q = segs[b], &r = segs[c];
                // x_p(t1) <= x_q(t2), x_q(t2) <= x_r(t3), and the same for y.
                hs[0] = {{p.x2 - p.x1, -(q.x2 - q.x1), 0.0}, q.x1 - p.x1};
                hs[1] = {{0.0, q.x2 - q.x1, -(r.x2 - r.x1)}, r.x1 - q.x1};
                hs[2] = {{p.y2 - p.y1, -(q.y2 - q.y1), 0.0}, q.y1 - p.y1};
                hs[3] = {{0.0, q.y2 - q.y1, -(r.y2 - r.y1)}, r.y1 - q.y1};
                const double w = mass[a] * mass[b] * mass[c];
                if (w > 0.0) total += w * clipped_cube_volume(hs);
            }
    return 6.0 * total;
}

}  // namespace permlim
