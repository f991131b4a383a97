#pragma once

#include <array>

#include "chebpade/complex.hpp"

namespace chebpade {

// Anchor triple together with the similarity (and optional conjugation)
// that puts it into the normal form (0, e^{i alpha}, rho^2 e^{-i alpha})
// with alpha in (0, pi/2) and 0 < rho <= 1.  rho = 1 occurs only for
// equilateral input where every anchor choice ties.
struct Triple {
    std::array<Cplx, 3> a;     // anchors exactly as given
    std::array<int, 3> perm;   // perm[j] = input index of normalized slot j
    bool conjugated = false;   // true if a reflection was needed
    Cplx scale;                // normalized = scale * (C(z) - shift)
    Cplx shift;                // C = conj when conjugated, identity otherwise
    Real alpha;
    Real rho;

    Cplx to_normalized(const Cplx& z) const {
        Cplx w = conjugated ? conj(z) : z;
        return scale * (w - shift);
    }
    Cplx from_normalized(const Cplx& zeta) const {
        Cplx w = zeta / scale + shift;
        return conjugated ? conj(w) : w;
    }
    std::array<Cplx, 3> normalized() const {
        Cplx e = polar(Real(1), alpha);
        return {Cplx(0), e, Real(rho * rho) * conj(e)};
    }
};

// Validates the anchors (distinct, non-collinear with the relative area
// tolerance 1e-10) and computes the normal form.  The origin slot is the
// first input index, in order, whose two incident sides have distinct
// lengths; exact ties at every anchor mean equilateral input.
Triple normalize_triple(const std::array<Cplx, 3>& anchors, const PrecisionCtx& ctx);

} // namespace chebpade
