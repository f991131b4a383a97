#include <algorithm>
#include <utility>
#include <vector>

#include "chebpade/chebotarev.hpp"
#include "chebpade/quadrature.hpp"

namespace chebpade {

namespace {

Real rmin(const Real& a, const Real& b) { return a < b ? a : b; }
Real rmax(const Real& a, const Real& b) { return a > b ? a : b; }

Real triple_diameter(const std::array<Cplx, 3>& a) {
    Real d = abs(a[0] - a[1]);
    d = rmax(d, abs(a[0] - a[2]));
    d = rmax(d, abs(a[1] - a[2]));
    return d;
}

Cplx anchor_poly(const std::array<Cplx, 3>& a, const Cplx& z) {
    return (z - a[0]) * (z - a[1]) * (z - a[2]);
}

// g(z) = sqrt((z - a0)/prod_k(z - a_k)) on the branch nearest ref.  This is
// dG/dz; the trajectory field and the Green increments both derive from it.
Cplx eval_g(const std::array<Cplx, 3>& anch, const Cplx& a0, const Cplx& z, const Cplx& ref) {
    Cplx g = sqrt((z - a0) / anchor_poly(anch, z));
    if (abs(g - ref) > abs(g + ref)) return -g;
    return g;
}

Cplx unit_tangent(const Cplx& g) {
    // dG/ds = g * u must be +i|g| so that Im G grows monotonically along the
    // march; that forces u = i conj(g)/|g|.
    return Cplx(0, 1) * conj(g) / abs(g);
}

// Derivative at x0 of the degree-4 interpolant through (x_i, z_i).
Cplx lagrange5_deriv(const Real* x, const Cplx* z, const Real& x0) {
    Cplx acc(0);
    for (int j = 0; j < 5; ++j) {
        Real denom(1);
        for (int i = 0; i < 5; ++i)
            if (i != j) denom *= x[j] - x[i];
        Real num(0);
        for (int k = 0; k < 5; ++k) {
            if (k == j) continue;
            Real p(1);
            for (int i = 0; i < 5; ++i)
                if (i != j && i != k) p *= x0 - x[i];
            num += p;
        }
        acc += z[j] * (num / denom);
    }
    return acc;
}

struct Tracer {
    const std::array<Cplx, 3>& anch;
    Cplx a0;
    Real diam;
    Real qtol;

    Arc run(int k) const {
        const Cplx ak = anch[k];
        const Real dk = abs(ak - a0);
        if (!(dk > Real("3e-6") * diam))
            fail_solver("arc tracing: anchor indistinguishable from the junction point");

        // Unique incoming trajectory at the simple pole a_k: departure
        // direction phi with 2*phi = 2*pi + 2*arg(C_k), C_k = m'(a_k)/(a_k-a0).
        Cplx Ck(1);
        for (int j = 0; j < 3; ++j)
            if (j != k) Ck *= ak - anch[j];
        Ck /= ak - a0;
        const Real phi = real_pi() + arg(Ck);
        const Cplx dep = polar(Real(1), phi);

        const Real r0 = rmin(Real("1e-5") * diam, dk / 8);
        Cplx z = ak + polar(r0, phi);

        Cplx w_seed;
        Cplx G = green_chord(a0, anch, z, qtol, &w_seed);
        Cplx g = (z - a0) / w_seed;  // same branch as the chord integral
        if (unit_tangent(g).re * dep.re + unit_tangent(g).im * dep.im < 0) {
            g = -g;
            G = -G;
        }
        // Im G climbs to 0 at the junction, so it must start negative, and the
        // seed sits essentially on the critical level set Re G = 0.
        if (!(G.im < 0) || abs(G.re) > abs(G.im) / 8)
            fail_solver("arc tracing: seed data inconsistent with the supplied center");
        {
            // The straight-ray seed sits O(r0^{3/2}) off the trajectory; one
            // transverse Newton step puts it on the critical level set like
            // every later sample.
            Cplx delta = conj(g) * (-G.re / norm(g));
            if (abs(delta) > r0 / 4)
                fail_solver("arc tracing: seed data inconsistent with the supplied center");
            z += delta;
            G += g * delta;
            g = eval_g(anch, a0, z, g);
        }
        const Real T = -G.im + 2 * r0 * abs(g);  // Green parameter at a_k itself

        std::vector<Cplx> zs;
        std::vector<Real> taus;
        zs.reserve(8192);
        taus.reserve(8192);
        zs.push_back(z);
        taus.push_back(-G.im);

        const Real cstep = Real(1) / 200;
        const Real rstop = Real("1e-6") * diam;
        long budget = 200000;
        while (true) {
            Real da0 = abs(z - a0);
            if (da0 <= rstop) break;
            Real dmin = da0;
            for (const Cplx& p : anch) dmin = rmin(dmin, abs(z - p));
            Real h = cstep * dmin;

            Cplx u1 = unit_tangent(g);
            Cplx z2 = z + u1 * (h / 2);
            Cplx g2 = eval_g(anch, a0, z2, g);
            Cplx u2 = unit_tangent(g2);
            Cplx z3 = z + u2 * (h / 2);
            Cplx g3 = eval_g(anch, a0, z3, g2);
            Cplx u3 = unit_tangent(g3);
            Cplx z4 = z + u3 * h;
            Cplx g4 = eval_g(anch, a0, z4, g3);
            Cplx u4 = unit_tangent(g4);
            Cplx zn = z + (u1 + (u2 + u3) * Real(2) + u4) * (h / 6);

            // Green increment along the chord z -> zn (path independence of
            // the analytic integrand makes the chord as good as the curve).
            Cplx gm = eval_g(anch, a0, (z + zn) / Real(2), g2);
            Cplx ge = eval_g(anch, a0, zn, g4);
            G += (zn - z) * (g + gm * Real(4) + ge) / Real(6);

            // One transverse Newton step back onto Re G = 0 kills the secular
            // drift of the path error near the junction.
            Cplx delta = conj(ge) * (-G.re / norm(ge));
            if (abs(delta) > h / 2)
                fail_solver("arc tracing: trajectory left the critical level set (wrong center?)");
            zn += delta;
            G += ge * delta;
            ge = eval_g(anch, a0, zn, ge);

            z = zn;
            g = ge;
            zs.push_back(z);
            taus.push_back(-G.im);
            if (--budget < 0)
                fail_solver("arc tracing: step budget exhausted before reaching the center");
            if (-G.im < Real("-0.02") * T)
                fail_solver("arc tracing: Green parameter overshot the junction value");
        }

        // Residual Green parameter at the stopping radius must match the local
        // sqrt model tau = (2/3)|g||z - a0|; a mismatch means the march did not
        // actually close in on the junction point.
        Real tau_last = taus.back();
        Real pred = Real(2) / 3 * abs(g) * abs(z - a0);
        if (abs(tau_last - pred) > rmax(pred, Real("1e-5") * T))
            fail_solver("arc tracing: Green parameter did not close at the center");

        Arc arc;
        arc.index = k + 1;
        size_t n = zs.size();
        arc.samples.resize(n + 2);
        arc.chord_param.resize(n + 2);
        arc.samples[0] = a0;
        arc.chord_param[0] = Real(0);
        for (size_t i = 0; i < n; ++i) {
            arc.samples[1 + i] = zs[n - 1 - i];
            Real t = taus[n - 1 - i] / T;
            if (t < 0) t = Real(0);
            if (t > 1) t = Real(1);
            arc.chord_param[1 + i] = t;
        }
        arc.samples[n + 1] = ak;
        arc.chord_param[n + 1] = Real(1);
        // z(arclength) is analytic at the junction end, so a one-sided 5-point
        // derivative is accurate there.  The stencil nodes are spread
        // geometrically (not the nearest samples, which cluster 200x tighter
        // than their distance to the junction and amplify the residual march
        // noise); at a_k the incoming direction is the closed-form departure
        // direction reversed.
        Cplx t0;
        if (n + 2 >= 5) {
            Real ell[5];
            Cplx zp[5];
            ell[0] = Real(0);
            zp[0] = arc.samples[0];
            Real run(0), target = Real(64) * abs(arc.samples[1] - arc.samples[0]);
            size_t idx = 0;
            bool distinct = true;
            for (int j = 1; j < 5; ++j) {
                while (idx + 1 < n + 1 && run < target) {
                    ++idx;
                    run += abs(arc.samples[idx] - arc.samples[idx - 1]);
                }
                if (run <= ell[j - 1]) distinct = false;
                ell[j] = run;
                zp[j] = arc.samples[idx];
                target *= 2;
            }
            t0 = distinct ? lagrange5_deriv(ell, zp, Real(0))
                          : arc.samples[1] - arc.samples[0];
        } else {
            t0 = arc.samples[1] - arc.samples[0];
        }
        arc.endpoint_tangents = {t0 / abs(t0), -dep};
        return arc;
    }
};

Real wrap_angle(Real x) {
    const Real two_pi = 2 * real_pi();
    while (x > real_pi()) x -= two_pi;
    while (x <= -real_pi()) x += two_pi;
    return x;
}

} // namespace

std::array<Arc, 3> trace_arcs(const Triple& T, const Cplx& center, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    Real diam = triple_diameter(T.a);
    Real qtol = pow(Real(10), -static_cast<int>(ctx.digits + ctx.guard));
    Tracer tr{T.a, center, diam, qtol};
    std::array<Arc, 3> arcs = {tr.run(0), tr.run(1), tr.run(2)};

    // The three arcs must leave the junction at mutual angles 2*pi/3; used as
    // a cheap cross-validation of the supplied center, not as the real test.
    for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3;
        Real di = arg(arcs[i].endpoint_tangents.first);
        Real dj = arg(arcs[j].endpoint_tangents.first);
        Real gap = abs(wrap_angle(di - dj));
        if (abs(gap - 2 * real_pi() / 3) > Real("5e-3"))
            fail_solver("arc tracing: arcs do not meet the center at equal angles");
    }
    return arcs;
}

Real capacity(const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    std::array<Cplx, 3> anch;
    for (int k = 0; k < 3; ++k) {
        const Arc& arc = data.arcs[static_cast<size_t>(k)];
        if (arc.samples.size() < 2 || arc.index < 1 || arc.index > 3)
            fail_domain("capacity: arcs must be traced first");
        anch[static_cast<size_t>(arc.index - 1)] = arc.samples.back();
    }
    const Cplx a0 = data.a0;
    const Real diam = triple_diameter(anch);
    const Real qtol = pow(Real(10), -static_cast<int>(ctx.digits + ctx.guard));

    // Arc tangent directions at the junction are base + j*2pi/3; send the ray
    // through one of the three bisectors, picking the one with the most room
    // from the branch points (the integrand is analytic across the arcs
    // themselves, so only the four points constrain the path).
    const Real base = (real_pi() + arg(anchor_poly(anch, a0))) / 3;
    Real best_phi(0), best_score(-1);
    for (int j = 0; j < 3; ++j) {
        Real phi = base + real_pi() / 3 + Real(2 * j) * real_pi() / 3;
        Cplx e = polar(Real(1), phi);
        Real score = diam * 1000;
        for (const Cplx& p : anch) {
            Cplx v = p - a0;
            Real proj = v.re * e.re + v.im * e.im;
            Real dist = proj <= 0 ? abs(v) : abs(v.im * e.re - v.re * e.im);
            score = rmin(score, dist);
        }
        if (score > best_score) {
            best_score = score;
            best_phi = phi;
        }
    }
    if (!(best_score > Real("0.02") * diam))
        fail_solver("capacity: no ray from the junction clears the branch points");

    const Real R = 64 * (diam + abs(a0));
    const Cplx zfar = a0 + polar(R, best_phi);

    Cplx w_end;
    Cplx G = green_chord(a0, anch, zfar, qtol, &w_end);
    // Align the continued branch with the determination w/z^2 -> 1 at zfar.
    Cplx wfar = zfar * zfar * sqrt(Cplx(1) - a0 / zfar);
    Cplx bsum = a0;
    for (const Cplx& p : anch) {
        wfar *= sqrt(Cplx(1) - p / zfar);
        bsum += p;
    }
    Cplx ratio = w_end / wfar;
    if (abs(abs(ratio) - 1) > Real("1e-6"))
        fail_precision("capacity: branch alignment failed at the far point");
    if (abs(ratio + Cplx(1)) < abs(ratio - Cplx(1))) G = -G;
    if (!(G.re > 0)) fail_solver("capacity: non-positive Green potential at the far point");

    // Tail: int over t from zfar to infinity of (dG - dt/t), mapped to
    // u = 1/t and integrated along the straight u-segment (valid: the
    // integrand is analytic in the disk |u| <= 1/(R - |a0|)).
    auto ft = [&](const Real& x, const Real&) -> Cplx {
        if (x == 0) return (bsum / Real(2) - a0) / zfar;
        Cplx u = Cplx(x) / zfar;
        Cplx sig = sqrt(Cplx(1) - a0 * u);
        for (const Cplx& p : anch) sig *= sqrt(Cplx(1) - p * u);
        return ((Cplx(1) - a0 * u) / sig - Cplx(1)) / x;
    };
    Real tail_scale = (abs(bsum / Real(2) - a0) + diam) / R;
    Cplx tail = tanh_sinh01(ft, qtol, tail_scale);

    Real logcp = log(abs(zfar)) - G.re - tail.re;
    return exp(logcp);
}

} // namespace chebpade
