#ifndef PERMLIM_POLYTOPE_HPP
#define PERMLIM_POLYTOPE_HPP

#include <array>
#include <vector>

namespace permlim {

using Vec3 = std::array<double, 3>;

/// Half-space {p : normal . p <= offset}.
struct HalfSpace {
    Vec3 normal{};
    double offset = 0.0;
};

/**
 * Volume of the unit cube [0,1]^3 intersected with the given half-spaces.
 * The cube is clipped face by face; degenerate pieces give volume 0.
 * A half-space with a zero normal either keeps everything or nothing.
 */
double clipped_cube_volume(const std::vector<HalfSpace>& constraints);

}  // namespace permlim

#endif
