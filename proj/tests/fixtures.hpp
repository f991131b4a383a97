#pragma once

#include <array>

#include "chebpade/chebotarev.hpp"
#include "chebpade/precision.hpp"

namespace fixtures {

using namespace chebpade;

inline const PrecisionCtx ctx30{30, 5};

struct Solved {
    Triple T;
    ChebotarevData d;
};

inline Solved solve_full(const std::array<Cplx, 3>& anchors, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    Solved r{normalize_triple(anchors, ctx), ChebotarevData{}};
    r.d = solve_center(r.T, ctx);
    r.d.arcs = trace_arcs(r.T, r.d.a0, ctx);
    r.d.capacity = capacity(r.d, ctx);
    return r;
}

// Anchors at the cube roots of unity: the fully symmetric configuration with
// closed-form invariants.
inline const Solved& cube_roots_case() {
    static const Solved s = [] {
        PrecisionScope scope(ctx30);
        Real h = sqrt(Real(3)) / 2, mh = Real(-1) / 2;
        return solve_full({Cplx(Real(1)), Cplx(mh, h), Cplx(mh, -h)}, ctx30);
    }();
    return s;
}

// An asymmetric configuration used for regression pins.
inline const Solved& generic_case() {
    static const Solved s = [] {
        PrecisionScope scope(ctx30);
        return solve_full({Cplx(Real(0)), Cplx(Real(0), Real(1)),
                           Cplx(Real("0.4"), Real("0.3"))},
                          ctx30);
    }();
    return s;
}

}  // namespace fixtures
