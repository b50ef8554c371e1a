#include "permlim/polytope.hpp"

#include <algorithm>
#include <cmath>

namespace permlim {

namespace {

constexpr double kEps = 1e-14;

using Polygon = std::vector<Vec3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::vector<Polygon> unit_cube()
{
    const Vec3 v[8] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    return {{v[0], v[3], v[2], v[1]}, {v[4], v[5], v[6], v[7]}, {v[0], v[1], v[5], v[4]},
            {v[2], v[3], v[7], v[6]}, {v[1], v[2], v[6], v[5]}, {v[0], v[4], v[7], v[3]}};
}

// Sutherland-Hodgman on one face; points created on the plane go to `cut`.
Polygon clip_face(const Polygon& face, const HalfSpace& h, std::vector<Vec3>& cut)
{
    Polygon out;
    const std::size_t m = face.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec3& p = face[i];
        const Vec3& q = face[(i + 1) % m];
        const double dp = dot(h.normal, p) - h.offset;
        const double dq = dot(h.normal, q) - h.offset;
        if (dp <= kEps) out.push_back(p);
        if (std::abs(dp) <= kEps) cut.push_back(p);
        if ((dp < -kEps && dq > kEps) || (dp > kEps && dq < -kEps)) {
            const double t = dp / (dp - dq);
            const Vec3 r{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
            out.push_back(r);
            cut.push_back(r);
        }
    }
    return out;
}

// Orders coplanar points around their centroid, dropping near-duplicates.
Polygon cap_polygon(std::vector<Vec3> pts, const Vec3& normal)
{
    Polygon unique;
    for (const auto& p : pts) {
        bool seen = false;
        for (const auto& u : unique)
            if (std::abs(p[0] - u[0]) + std::abs(p[1] - u[1]) + std::abs(p[2] - u[2]) < 1e-12) {
                seen = true;
                break;
            }
        if (!seen) unique.push_back(p);
    }
    if (unique.size() < 3) return {};
    Vec3 c{0, 0, 0};
    for (const auto& p : unique)
        for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)] / unique.size();
    // In-plane basis.
    const Vec3 helper = std::abs(normal[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 e1 = cross(normal, helper);
    const Vec3 e2 = cross(normal, e1);
    std::sort(unique.begin(), unique.end(), [&](const Vec3& a, const Vec3& b) {
        const Vec3 da = sub(a, c), db = sub(b, c);
        return std::atan2(dot(da, e2), dot(da, e1)) < std::atan2(dot(db, e2), dot(db, e1));
    });
    return unique;
}

}  // namespace

double clipped_cube_volume(const std::vector<HalfSpace>& constraints)
{
    std::vector<Polygon> faces = unit_cube();
    for (const auto& h : constraints) {
        const double norm = std::sqrt(dot(h.normal, h.normal));
        if (norm < kEps) {
            if (h.offset < 0) return 0.0;
            continue;
        }
        const HalfSpace unit{{h.normal[0] / norm, h.normal[1] / norm, h.normal[2] / norm}, h.offset / norm};
        std::vector<Polygon> next;
        std::vector<Vec3> cut;
        bool face_on_plane = false;
        for (const auto& f : faces) {
            face_on_plane = face_on_plane || std::all_of(f.begin(), f.end(), [&](const Vec3& p) {
                                return std::abs(dot(unit.normal, p) - unit.offset) <= kEps;
                            });
            Polygon p = clip_face(f, unit, cut);
            if (p.size() >= 3) next.push_back(std::move(p));
        }
        // A face already lying in the plane is the cap; adding another would double count.
        if (!face_on_plane) {
            Polygon cap = cap_polygon(std::move(cut), unit.normal);
            if (cap.size() >= 3) next.push_back(std::move(cap));
        }
        faces = std::move(next);
        if (faces.size() < 4) return 0.0;
    }

    // Cone decomposition from an interior reference point.
    Vec3 ref{0, 0, 0};
    std::size_t count = 0;
    for (const auto& f : faces)
        for (const auto& p : f) {
            for (int k = 0; k < 3; ++k) ref[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
            ++count;
        }
    for (auto& r : ref) r /= static_cast<double>(count);
    double volume = 0.0;
    for (const auto& f : faces) {
        for (std::size_t i = 1; i + 1 < f.size(); ++i) {
            const Vec3 a = sub(f[0], ref), b = sub(f[i], ref), c = sub(f[i + 1], ref);
            volume += std::abs(dot(a, cross(b, c))) / 6.0;
        }
    }
    return volume;
}

}  // namespace permlim
