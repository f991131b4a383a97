#include "chebpade/triple.hpp"

#include "chebpade/errors.hpp"

namespace chebpade {

namespace {

// Area-based collinearity check, relative to the squared diameter.
void validate_geometry(const std::array<Cplx, 3>& a) {
    Real d01 = abs(a[1] - a[0]);
    Real d02 = abs(a[2] - a[0]);
    Real d12 = abs(a[2] - a[1]);
    Real diam = d01;
    if (d02 > diam) diam = d02;
    if (d12 > diam) diam = d12;
    if (diam == 0)
        fail_geometry("anchors coincide");
    Cplx u = a[1] - a[0];
    Cplx v = a[2] - a[0];
    Real area2 = u.re * v.im - u.im * v.re; // twice the signed area
    if (area2 < 0) area2 = -area2;
    if (area2 < Real(2e-10) * diam * diam)
        fail_geometry("anchors are collinear or nearly so (area below tolerance)");
}

} // namespace

Triple normalize_triple(const std::array<Cplx, 3>& anchors, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    validate_geometry(anchors);

    Triple T;
    T.a = anchors;

    // Scan origin candidates in index order; accept the first whose two
    // incident sides differ in length (the longer one is sent to e^{i alpha},
    // giving rho < 1).  Exact ties at every origin mean equilateral input.
    int origin = -1, far = -1, near = -1;
    bool tie_everywhere = true;
    for (int o = 0; o < 3 && origin < 0; ++o) {
        int x = (o + 1) % 3, y = (o + 2) % 3;
        if (o == 1) std::swap(x, y); // keep candidates in ascending input order
        Real lu = abs(anchors[x] - anchors[o]);
        Real lv = abs(anchors[y] - anchors[o]);
        if (lu == lv) continue;
        tie_everywhere = false;
        if (lu < lv) std::swap(x, y);
        origin = o;
        far = x;
        near = y;
    }
    if (origin < 0) {
        if (!tie_everywhere)
            fail_internal("origin scan inconsistency");
        origin = 0;
        far = 1;
        near = 2;
    }

    Cplx u = anchors[far] - anchors[origin];
    Cplx v = anchors[near] - anchors[origin];
    Real t = arg(u * conj(v)); // angle from v to u, in (-pi, pi]
    if (t == 0 || abs(u * conj(v)) == 0)
        fail_geometry("anchors are collinear");
    T.conjugated = (t < 0);
    if (T.conjugated) t = -t;
    T.alpha = t / 2;
    T.rho = sqrt(abs(v) / abs(u));

    T.perm = {origin, far, near};
    if (T.conjugated) {
        u = conj(u);
        T.shift = conj(anchors[origin]);
    } else {
        T.shift = anchors[origin];
    }
    // scale maps the far side onto e^{i alpha}.
    T.scale = polar(Real(1), T.alpha) / u;
    return T;
}

} // namespace chebpade
