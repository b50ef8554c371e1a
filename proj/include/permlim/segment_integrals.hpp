#ifndef PERMLIM_SEGMENT_INTEGRALS_HPP
#define PERMLIM_SEGMENT_INTEGRALS_HPP

#include "permlim/permuton.hpp"

namespace permlim {

/**
 * Integrals of the CDF F of a segment measure, computed piecewise: F is
 * affine between breakpoints (segment endpoints and line crossings), so a
 * five-point Gauss rule per piece is exact up to floating-point rounding.
 */
struct SegmentIntegrals {
    double f2_mu = 0.0;    // ∫ F(X,Y)^2 dmu
    double fxy_mu = 0.0;   // ∫ F(X,Y) X Y dmu
    double f2_lambda = 0.0;   // ∫ F(x,y)^2 dx dy
    double fxy_lambda = 0.0;  // ∫ F(x,y) x y dx dy
};

SegmentIntegrals segment_integrals(const SegmentPermuton& mu);

/// t(id_3, mu) from the volumes of the ordered-triple polytopes in parameter space.
double segment_t_id3(const SegmentPermuton& mu);

}  // namespace permlim

#endif
