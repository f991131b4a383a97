#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "chebpade/errors.hpp"
#include "chebpade/quadrature.hpp"
#include "chebpade/surface.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace chebpade;
using testutil::C;
using testutil::check_close;
using testutil::R;

TEST_SUITE_BEGIN("surface");

namespace {

using fixtures::ctx30;
using fixtures::cube_roots_case;
using fixtures::generic_case;
using fixtures::Solved;
using testutil::kind_of;

// Frozen reference values in this file were pinned from a 50-digit run of
// the full pipeline; the cube-roots configuration has closed forms that
// confirm the same code paths independently.

const Periods& periods_of(const Solved& s) {
    static const Periods pc = [] {
        PrecisionScope sc(ctx30);
        return compute_periods(cube_roots_case().d, ctx30);
    }();
    static const Periods pg = [] {
        PrecisionScope sc(ctx30);
        return compute_periods(generic_case().d, ctx30);
    }();
    return (&s == &cube_roots_case()) ? pc : pg;
}

std::array<Cplx, 3> anchors_of(const Solved& s) {
    std::array<Cplx, 3> a;
    for (const Arc& arc : s.d.arcs)
        a[static_cast<size_t>(arc.index - 1)] = arc.samples.back();
    return a;
}

Real diam_of(const Solved& s) {
    auto a = anchors_of(s);
    Real d = abs(a[0] - a[1]);
    Real d2 = abs(a[0] - a[2]), d3 = abs(a[1] - a[2]);
    if (d2 > d) d = d2;
    if (d3 > d) d = d3;
    return d;
}

// Coarse distance from z to the sampled continuum, for rejection sampling.
Real cut_gap(const Solved& s, const Cplx& z) {
    Real best(-1);
    for (const Arc& arc : s.d.arcs) {
        size_t stride = arc.samples.size() / 256 + 1;
        for (size_t i = 0; i < arc.samples.size(); i += stride) {
            Real dq = abs(z - arc.samples[i]);
            if (best < 0 || dq < best) best = dq;
        }
        Real dl = abs(z - arc.samples.back());
        if (dl < best) best = dl;
    }
    return best;
}

// 24 uniform bits; identical on every platform for a fixed seed.
double urand(std::mt19937& rng) {
    return static_cast<double>(rng() & 0xFFFFFFu) / 16777216.0;
}

std::vector<SheetPoint> admissible_points(const Solved& s, int n, unsigned seed) {
    std::mt19937 rng(seed);
    Real D = diam_of(s);
    std::vector<SheetPoint> out;
    while (static_cast<int>(out.size()) < n) {
        double x = urand(rng) * 2.6 - 1.3;
        double y = urand(rng) * 2.6 - 1.3;
        Cplx z = s.d.a0 + Cplx(Real(x), Real(y)) * D;
        if (cut_gap(s, z) < D * R("0.02")) continue;
        out.push_back(SheetPoint::finite(z, static_cast<int>(out.size() % 2) + 1));
    }
    return out;
}

// Equilibrium mass of one arc: the t-chart density integrated by
// Gauss-Legendre (interior nodes only; the density is smooth in t).
Real arc_mass(const Solved& s, int arc_index) {
    const GaussRule& g = gauss_legendre(32);
    const Real pi = real_pi();
    Real m(0);
    for (size_t j = 0; j < g.x.size(); ++j) {
        const Real& t = g.x[j];
        Cplx wp = trace_eval(arc_index, t, +1, s.d, ctx30);
        Cplx zt = arc_point(arc_index, t, s.d, ctx30);
        Cplx zv = arc_velocity(arc_index, t, s.d, ctx30);
        Cplx dens = Cplx(Real(0), Real(1)) * (zt - s.d.a0) * zv / (pi * wp);
        m += dens.re * g.w[j];
    }
    return m;
}

}  // namespace

TEST_CASE("sheet points, conjugation, and lattice reduction") {
    PrecisionScope scope(ctx30);
    SheetPoint p = SheetPoint::finite(C("1", "2"), 1);
    CHECK(p.conjugated().sheet == 2);
    CHECK(p.conjugated().z == p.z);
    CHECK(p.conjugated().conjugated().sheet == 1);
    CHECK(SheetPoint::infinity(2).conjugated().sheet == 1);
    CHECK(SheetPoint::infinity(2).conjugated().infinite);

    const Periods& P = periods_of(generic_case());
    const Cplx& tau = P.tau_ratio;
    check_close(lattice_reduce(C("0"), P), C("0"), R("1e-30"), "reduce 0");
    check_close(lattice_reduce(C("1"), P), C("0"), R("1e-30"), "reduce 1");
    check_close(lattice_reduce(tau, P), C("0"), R("1e-28"), "reduce tau");
    Cplx v = C("2.3") + tau * C("1.7");
    check_close(lattice_reduce(v, P), C("0.3") + tau * C("0.7"), R("1e-28"),
                "reduce 2.3 + 1.7 tau");
    CHECK(lattice_distance(C("1") + tau, P) <= R("1e-28"));
    CHECK(lattice_distance(C("0.5"), P) > R("0.4"));

    Periods bad = P;
    bad.tau_ratio = C("0.5");
    CHECK(kind_of([&] { (void)lattice_reduce(C("1"), bad); }) == ErrorKind::domain);
    CHECK(kind_of([&] { (void)lattice_distance(C("1"), bad); }) == ErrorKind::domain);
}

TEST_CASE("the two-sheeted square root") {
    PrecisionScope scope(ctx30);
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        auto a = anchors_of(s);
        Real D = diam_of(s);

        // far field: w/z^2 -> 1 on sheet 1
        Cplx zf = C("1000000");
        Cplx wf = w_eval(SheetPoint::finite(zf, 1), s.d, ctx30);
        check_close(wf / (zf * zf), C("1"), R("1e-6"), "w/z^2 at 1e6");

        // exact zeros at the branch points
        CHECK(abs(w_eval(SheetPoint::finite(a[1], 1), s.d, ctx30)) == Real(0));
        CHECK(abs(w_eval(SheetPoint::finite(s.d.a0, 2), s.d, ctx30)) == Real(0));

        // the two sheets carry opposite values
        Cplx z0 = C("5", "2");
        Cplx w1 = w_eval(SheetPoint::finite(z0, 1), s.d, ctx30);
        Cplx w2 = w_eval(SheetPoint::finite(z0, 2), s.d, ctx30);
        CHECK(abs(w1 + w2) == Real(0));

        // w^2 reproduces the quartic at a nearby interior point
        Cplx zi = s.d.a0 + C("0.9", "-1.1") * D;
        Cplx wi = w_eval(SheetPoint::finite(zi, 1), s.d, ctx30);
        Cplx quartic = (zi - s.d.a0) * (zi - a[0]) * (zi - a[1]) * (zi - a[2]);
        check_close(wi * wi / quartic, C("1"), R("1e-25"), "w^2 / quartic");

        // cut interior and infinity are outside the domain
        Cplx zc = arc_point(1, R("0.5"), s.d, ctx30);
        CHECK(kind_of([&] { (void)w_eval(SheetPoint::finite(zc, 1), s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)w_eval(SheetPoint::infinity(1), s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)w_eval(SheetPoint::finite(z0, 3), s.d, ctx30); }) ==
              ErrorKind::domain);
    }
}

TEST_CASE("one-sided traces carry the equilibrium density") {
    PrecisionScope scope(ctx30);
    const Real pi = real_pi();
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        Real D = diam_of(s);
        Real total(0);
        for (int k = 1; k <= 3; ++k) {
            // the two banks are glued with opposite values
            Cplx wp = trace_eval(k, R("0.5"), +1, s.d, ctx30);
            Cplx wm = trace_eval(k, R("0.5"), -1, s.d, ctx30);
            CHECK(abs(wp + wm) == Real(0));

            // the left-bank trace continues the sheet-1 branch from the left
            Cplx zt = arc_point(k, R("0.5"), s.d, ctx30);
            Cplx tv = arc_velocity(k, R("0.5"), s.d, ctx30);
            Cplx nu = Cplx(Real(0), Real(1)) * (tv / abs(tv));
            Cplx wl = w_eval(SheetPoint::finite(zt + nu * (D * R("2e-5")), 1), s.d, ctx30);
            CHECK(abs(wl - wp) < abs(wl + wp) / 100);

            // in the trace chart the measure has constant density: the arc's
            // equilibrium weight
            const Real& want = s.d.weights[static_cast<size_t>(k - 1)];
            for (const char* ts : {"0.12", "0.5", "0.88"}) {
                Cplx w0 = trace_eval(k, R(ts), +1, s.d, ctx30);
                Cplx z0 = arc_point(k, R(ts), s.d, ctx30);
                Cplx v0 = arc_velocity(k, R(ts), s.d, ctx30);
                Cplx dens = Cplx(Real(0), Real(1)) * (z0 - s.d.a0) * v0 / (pi * w0);
                CHECK(abs(dens.im) <= R("1e-6"));
                CHECK(dens.re > Real(0));
                check_close(dens.re, want, R("1e-6"), "density vs weight");
            }

            Real mk = arc_mass(s, k);
            check_close(mk, want, R("1e-6"), "arc mass vs weight");
            total += mk;
        }
        check_close(total, Real(1), R("1e-6"), "total mass");

        CHECK(kind_of([&] { (void)trace_eval(1, R("0"), +1, s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)trace_eval(1, R("1"), +1, s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)trace_eval(1, R("0.5"), 0, s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)trace_eval(7, R("0.5"), 1, s.d, ctx30); }) ==
              ErrorKind::domain);
        CHECK(kind_of([&] { (void)arc_point(1, R("1.5"), s.d, ctx30); }) ==
              ErrorKind::domain);
    }
}

TEST_CASE("periods, harmonic measures, and the far-field normalization") {
    PrecisionScope scope(ctx30);
    const Cplx two_pi_i = Cplx(Real(0), real_pi() * 2);
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto order = clockwise_arc_order(s.d, ctx30);
        CHECK(order[0] == 1);

        Cplx sum_b = P.beta[0] + P.beta[1] + P.beta[2];
        Cplx sum_b1 = P.beta1[0] + P.beta1[1] + P.beta1[2];
        CHECK(abs(sum_b) <= R("1e-10"));
        check_close(sum_b1, C("-1"), R("1e-10"), "sum of second-kind sums");
        CHECK(P.tau_ratio.im > Real(0));
        check_close(P.tau_ratio, P.beta[2] / P.beta[1], R("1e-25"), "tau from beta");

        // the loop periods of the potential measure the arcs
        for (size_t k = 0; k < 3; ++k) {
            const Real& want = s.d.weights[static_cast<size_t>(order[k] - 1)];
            check_close(P.omega[k] / two_pi_i, Cplx(want), R("1e-6"), "omega vs weight");
            Cplx gl = green_loop(order[k], s.d, ctx30);
            check_close(gl / (-two_pi_i), Cplx(want), R("1e-10"), "green loop vs weight");
        }

        check_close(P.capacity, s.d.capacity, R("1e-18"), "capacity, two routes");
        check_close(abs(P.xi_a1), Real(1), R("1e-20"), "|xi| = 1");
    }

    // closed forms at the cube roots of unity
    {
        const Solved& s = cube_roots_case();
        const Periods& P = periods_of(s);
        auto order = clockwise_arc_order(s.d, ctx30);
        CHECK(order[1] == 3);
        CHECK(order[2] == 2);
        Real h = sqrt(Real(3)) / 2;
        check_close(P.tau_ratio, Cplx(Real(-1) / 2, h), R("1e-25"), "tau = exp(2 pi i/3)");
        check_close(P.capacity, exp(-log(Real(4)) / 3), R("1e-25"), "capacity = 4^(-1/3)");
        check_close(P.xi_a1, C("1"), R("1e-25"), "xi = 1");
        // |beta| on the real arc against a gamma-function evaluation
        double lg = std::lgamma(1.0 / 6.0) + std::lgamma(0.5) - std::lgamma(2.0 / 3.0);
        double bmag = std::exp(lg) / (3.0 * 3.14159265358979323846);
        CHECK(abs(P.beta[0].im) <= R("1e-25"));
        CHECK(P.beta[0].re < Real(0));
        check_close(abs(P.beta[0]), Real(bmag), R("1e-12"), "|beta_1| vs gamma values");
    }

    // regression pins for the asymmetric configuration
    {
        const Periods& P = periods_of(generic_case());
        auto order = clockwise_arc_order(generic_case().d, ctx30);
        CHECK(order[1] == 2);
        CHECK(order[2] == 3);
        check_close(P.tau_ratio,
                    C("-0.41356063859554561103100497541564063603530",
                      "0.76724189335513801552302476545295699697904"),
                    R("1e-24"), "tau pin");
        check_close(P.beta[0],
                    C("1.0755730908771072792937903527388982971398",
                      "-1.6241970914320559792227495404683533005043"),
                    R("1e-24"), "beta[0] pin");
        check_close(P.capacity, R("0.28190594725236900184819177931428391763129"),
                    R("1e-24"), "capacity pin");
        check_close(P.xi_a1,
                    C("-0.33117259866166390028721201538777053965140",
                      "-0.94357019341206433100549731520829124227390"),
                    R("1e-24"), "xi pin");
    }
}

TEST_CASE("the normalized first-kind integral and its cycles") {
    PrecisionScope scope(ctx30);
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto order = clockwise_arc_order(s.d, ctx30);
        auto a = anchors_of(s);

        // normalization at the base anchor and the three cycle periods
        Cplx om_a1 = abel_map(SheetPoint::finite(a[0], 1), s.d, P, ctx30);
        CHECK(abs(om_a1) == Real(0));
        check_close(first_kind_loop(order[1], s.d, P, ctx30), C("1"), R("1e-12"),
                    "a-cycle period");
        check_close(first_kind_loop(order[2], s.d, P, ctx30), P.tau_ratio, R("1e-12"),
                    "b-cycle period");
        check_close(first_kind_loop(order[0], s.d, P, ctx30), -(C("1") + P.tau_ratio),
                    R("1e-12"), "balancing cycle period");

        // the sheet involution negates the map
        Cplx zt = s.d.a0 + C("0.55", "-0.4") * diam_of(s);
        Cplx o1 = abel_map(SheetPoint::finite(zt, 1), s.d, P, ctx30);
        Cplx o2 = abel_map(SheetPoint::finite(zt, 2), s.d, P, ctx30);
        CHECK(lattice_distance(o1 + o2, P) <= R("1e-12"));

        // the two points over infinity are opposite, and their difference is
        // fixed by the clockwise masses
        Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, P, ctx30);
        Cplx oi2 = abel_map(SheetPoint::infinity(2), s.d, P, ctx30);
        CHECK(lattice_distance(oi1 + oi2, P) <= R("1e-12"));
        const Real& m2 = s.d.weights[static_cast<size_t>(order[1] - 1)];
        const Real& m3 = s.d.weights[static_cast<size_t>(order[2] - 1)];
        CHECK(lattice_distance(oi2 - oi1 - (P.tau_ratio * m2 - Cplx(m3)), P) <=
              R("1e-10"));

        // branch points sit at the four half-periods: distinct, each doubling
        // to zero, and together summing to zero against the divisor of w
        std::array<Cplx, 4> ob;
        std::array<Cplx, 4> bp{s.d.a0, a[0], a[1], a[2]};
        Cplx sum_bp(Real(0), Real(0));
        for (size_t i = 0; i < 4; ++i) {
            ob[i] = abel_map(SheetPoint::finite(bp[i], 1), s.d, P, ctx30);
            CHECK(lattice_distance(ob[i] * Real(2), P) <= R("1e-12"));
            sum_bp = sum_bp + ob[i];
        }
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = i + 1; j < 4; ++j)
                CHECK(lattice_distance(ob[i] - ob[j], P) > R("0.1"));
        CHECK(lattice_distance(sum_bp - (oi1 + oi2) * Real(2), P) <= R("1e-10"));
    }

    // closed form and pin for the value over infinity on sheet 1
    {
        const Solved& s = cube_roots_case();
        Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, periods_of(s), ctx30);
        check_close(oi1, Cplx(Real(1) / 4, -sqrt(Real(3)) / 12), R("1e-20"),
                    "cube-roots value over infinity");
    }
    {
        const Solved& s = generic_case();
        Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, periods_of(s), ctx30);
        check_close(oi1,
                    C("0.19301999408507244643138175122597759363232",
                      "-0.19155281406032039732876002734995442256590"),
                    R("1e-24"), "infinity pin");
    }
}

TEST_CASE("third-kind integrals: residues and factor representations") {
    PrecisionScope scope(ctx30);
    const Cplx two_pi_i = Cplx(Real(0), real_pi() * 2);
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto a = anchors_of(s);

        // residue -1 over infinity on sheet 1, read off a large circle
        for (SheetPoint pole : {SheetPoint::finite(C("0.2", "-0.15"), 1),
                                SheetPoint::finite(C("-0.3", "0.35"), 2),
                                SheetPoint::infinity(2)}) {
            Cplx rl = residue_loop(pole, s.d, P, ctx30);
            check_close(rl, -two_pi_i, R("1e-10"), "residue loop");
        }

        // the pole over infinity on sheet 2 ties the integral to the
        // conformal map and the first-kind integral
        for (int sh : {1, 2}) {
            SheetPoint zp = SheetPoint::finite(C("0.45", "-0.3"), sh);
            Cplx I = third_kind_integral(SheetPoint::infinity(2), zp, s.d, P, ctx30);
            Cplx rhs = green_map(zp, s.d, ctx30) *
                       exp(P.omega[1] * abel_map(zp, s.d, P, ctx30));
            check_close(exp(I) / rhs, C("1"), R("1e-8"), "far-pole identity");
        }

        // summing over the two points above z gives a rational factor
        SheetPoint pa = SheetPoint::finite(C("0.3", "-0.2"), 1);
        for (int sh : {1, 2}) {
            SheetPoint q1 = SheetPoint::finite(C("-0.1", "0.5"), sh);
            SheetPoint q2 = q1.conjugated();
            Cplx lhs = exp(third_kind_integral(pa, q1, s.d, P, ctx30) +
                           third_kind_integral(pa, q2, s.d, P, ctx30));
            Cplx rhs = (q1.z - pa.z) / (a[0] - pa.z);
            check_close(lhs / rhs, C("1"), R("1e-8"), "pair representation");
        }

        // same identity with the pole at a branch point (its w-value is 0)
        {
            SheetPoint pb = SheetPoint::finite(a[1], 1);
            SheetPoint q1 = SheetPoint::finite(C("-0.1", "0.5"), 1);
            Cplx lhs = exp(third_kind_integral(pb, q1, s.d, P, ctx30) +
                           third_kind_integral(pb, q1.conjugated(), s.d, P, ctx30));
            Cplx rhs = (q1.z - a[1]) / (a[0] - a[1]);
            check_close(lhs / rhs, C("1"), R("1e-8"), "pair representation, branch pole");
        }
    }
}

TEST_CASE("reciprocity and the cycle law for third-kind periods") {
    PrecisionScope scope(ctx30);
    const Cplx two_pi_i = Cplx(Real(0), real_pi() * 2);

    struct Quad {
        const Solved* s;
        SheetPoint b1, b2, b3, b4;
    };
    std::vector<Quad> quads;
    quads.push_back({&generic_case(), SheetPoint::finite(C("0.6", "-0.1"), 1),
                     SheetPoint::finite(C("-0.3", "-0.25"), 1),
                     SheetPoint::finite(C("0.55", "0.6"), 1),
                     SheetPoint::finite(C("-0.45", "0.7"), 1)});
    quads.push_back({&generic_case(), SheetPoint::finite(C("0.8", "0.4"), 2),
                     SheetPoint::finite(C("-0.2", "-0.5"), 1),
                     SheetPoint::finite(C("1.0", "-0.35"), 1),
                     SheetPoint::finite(C("0.3", "1.1"), 2)});
    quads.push_back({&cube_roots_case(), SheetPoint::finite(C("0.3", "0.55"), 1),
                     SheetPoint::finite(C("-0.7", "-0.1"), 1),
                     SheetPoint::finite(C("0.2", "-0.6"), 2),
                     SheetPoint::finite(C("-0.1", "0.8"), 2)});

    // swapping the pole pair with the endpoint pair preserves the integral
    for (const Quad& q : quads) {
        const Periods& P = periods_of(*q.s);
        Cplx lhs = third_kind_between(q.b3, q.b1, q.b2, q.s->d, P, ctx30) -
                   third_kind_between(q.b4, q.b1, q.b2, q.s->d, P, ctx30);
        Cplx rhs = third_kind_between(q.b1, q.b3, q.b4, q.s->d, P, ctx30) -
                   third_kind_between(q.b2, q.b3, q.b4, q.s->d, P, ctx30);
        check_close(exp(lhs - rhs), C("1"), R("1e-8"), "reciprocity");
    }

    // the b-cycle period of a third-kind differential is the first-kind
    // integral between its poles
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto order = clockwise_arc_order(s.d, ctx30);
        Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, P, ctx30);

        SheetPoint pb = SheetPoint::finite(C("0.5", "0.45"), 1);
        Cplx lp = third_kind_loop(order[2], pb, s.d, P, ctx30) / (-two_pi_i);
        Cplx om_pb = abel_map(pb, s.d, P, ctx30);
        CHECK(lattice_distance(lp - (oi1 - om_pb), P) <= R("1e-8"));

        SheetPoint pc = SheetPoint::finite(C("-0.35", "-0.3"), 2);
        Cplx lpc = third_kind_loop(order[2], pc, s.d, P, ctx30) / (-two_pi_i);
        Cplx om_pc = abel_map(pc, s.d, P, ctx30);
        // a finite pole pair, assembled as a difference of far-pole kernels
        CHECK(lattice_distance((lp - lpc) - (om_pc - om_pb), P) <= R("1e-8"));
    }
}

TEST_CASE("the conformal map and the linear factor representation") {
    PrecisionScope scope(ctx30);
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto a = anchors_of(s);
        Real D = diam_of(s);

        // the two sheets multiply to 1; sheet 1 is the outside of the disk
        SheetPoint z1 = SheetPoint::finite(C("3", "3"), 1);
        Cplx p1 = green_map(z1, s.d, ctx30);
        Cplx p2 = green_map(z1.conjugated(), s.d, ctx30);
        check_close(p1 * p2, C("1"), R("1e-8"), "product over the two sheets");
        CHECK(abs(p1) > Real(1));
        CHECK(abs(p2) < Real(1));

        // modulus 1 on the boundary traces and at a branch point
        for (int k = 1; k <= 3; ++k) {
            for (const char* ts : {"0.35", "0.7"}) {
                Cplx zt = arc_point(k, R(ts), s.d, ctx30);
                Cplx tv = arc_velocity(k, R(ts), s.d, ctx30);
                Cplx nu = Cplx(Real(0), Real(1)) * (tv / abs(tv));
                for (int side : {1, -1}) {
                    Cplx zb = zt + nu * (D * R("2e-5") * side);
                    Cplx ph = green_map(SheetPoint::finite(zb, 1), s.d, ctx30);
                    check_close(abs(ph), Real(1), R("1e-4"), "boundary modulus");
                }
            }
        }
        Cplx ph_bp = green_map(SheetPoint::finite(a[2], 1), s.d, ctx30);
        check_close(abs(ph_bp), Real(1), R("1e-10"), "modulus at a branch point");

        // far-field normalization: z / phi -> xi * capacity
        Cplx zf = C("1000000");
        Cplx phf = green_map(SheetPoint::finite(zf, 1), s.d, ctx30);
        Cplx want = P.xi_a1 * P.capacity;
        check_close(zf / phf / want, C("1"), R("1e-5"), "far-field limit");

        CHECK(kind_of([&] { (void)green_map(SheetPoint::infinity(1), s.d, ctx30); }) ==
              ErrorKind::domain);
    }

    // the distance to the base anchor factors through the surface functions
    for (const Solved* sp : {&cube_roots_case(), &generic_case()}) {
        const Solved& s = *sp;
        const Periods& P = periods_of(s);
        auto a = anchors_of(s);
        SheetPoint a1pt = SheetPoint::finite(a[0], 1);
        Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, P, ctx30);
        Cplx cstar = P.xi_a1 * P.capacity * exp(-(P.omega[1] * oi1));
        int idx = 0;
        for (const SheetPoint& zq : admissible_points(s, 10, 20260819u)) {
            Cplx B = third_kind_between(a1pt, SheetPoint::infinity(2), zq, s.d, P, ctx30);
            Cplx omq = abel_map(zq, s.d, P, ctx30);
            Cplx phq = green_map(zq, s.d, ctx30);
            Cplx pred = cstar * exp(B * Real(2) - P.omega[1] * omq) / phq;
            INFO("point ", idx, " sheet ", zq.sheet);
            check_close(pred / (zq.z - a[0]), C("1"), R("1e-6"), "linear factor");
            ++idx;
        }
    }
}

TEST_CASE("Jacobi inversion round trips") {
    PrecisionScope scope(ctx30);
    const Solved& s = generic_case();
    const Periods& P = periods_of(s);
    auto a = anchors_of(s);
    Real D = diam_of(s);

    // the lattice origin is the base anchor
    SheetPoint r0 = jacobi_invert(C("0"), P, s.d, ctx30);
    CHECK(!r0.infinite);
    CHECK(r0.sheet == 1);
    CHECK(abs(r0.z - a[0]) <= D * R("1e-20"));

    // the two points over infinity
    Cplx oi1 = abel_map(SheetPoint::infinity(1), s.d, P, ctx30);
    Cplx oi2 = abel_map(SheetPoint::infinity(2), s.d, P, ctx30);
    CHECK(jacobi_invert(oi1, P, s.d, ctx30).infinite);
    CHECK(jacobi_invert(oi1, P, s.d, ctx30).sheet == 1);
    CHECK(jacobi_invert(oi2, P, s.d, ctx30).infinite);
    CHECK(jacobi_invert(oi2, P, s.d, ctx30).sheet == 2);

    // lattice translates target the same point
    SheetPoint z0 = SheetPoint::finite(C("0.3", "0.4"), 2);
    Cplx om0 = abel_map(z0, s.d, P, ctx30);
    SheetPoint rs = jacobi_invert(om0 + C("1") + P.tau_ratio, P, s.d, ctx30);
    CHECK(rs.sheet == 2);
    CHECK(abs(rs.z - z0.z) <= D * R("1e-10"));

    // half-period targets resolve to branch points on sheet 1
    std::array<Cplx, 4> bp{s.d.a0, a[0], a[1], a[2]};
    for (const Cplx& h : {C("0.5"), P.tau_ratio / Real(2),
                          (C("1") + P.tau_ratio) / Real(2)}) {
        SheetPoint rb = jacobi_invert(h, P, s.d, ctx30);
        CHECK(!rb.infinite);
        CHECK(rb.sheet == 1);
        Real dmin = abs(rb.z - bp[0]);
        for (size_t i = 1; i < 4; ++i) {
            Real dq = abs(rb.z - bp[i]);
            if (dq < dmin) dmin = dq;
        }
        CHECK(dmin <= D * R("1e-10"));
        Cplx back = abel_map(rb, s.d, P, ctx30);
        CHECK(lattice_distance(back - h, P) <= R("1e-8"));
    }

    // fifty random surface points on both sheets
    int idx = 0;
    for (const SheetPoint& pt : admissible_points(s, 50, 7u)) {
        Cplx om = abel_map(pt, s.d, P, ctx30);
        SheetPoint res = jacobi_invert(om, P, s.d, ctx30);
        INFO("point ", idx, " sheet ", pt.sheet, " z=", to_string(pt.z, 20));
        CHECK(!res.infinite);
        CHECK(res.sheet == pt.sheet);
        CHECK(abs(res.z - pt.z) <= D * R("1e-8"));
        ++idx;
    }

    CHECK(kind_of([&] {
              (void)jacobi_invert(Cplx(Real(1) / Real(0)), P, s.d, ctx30);
          }) == ErrorKind::domain);
}

TEST_CASE("inversion of a boundary target is displaced and flagged") {
    PrecisionScope scope(ctx30);
    const Solved& s = generic_case();
    const Periods& P = periods_of(s);
    Real D = diam_of(s);

    // left-bank boundary value of the first-kind integral by quadratic
    // extrapolation in the offset
    Real t = R("0.45");
    Cplx zc = arc_point(1, t, s.d, ctx30);
    Cplx tv = arc_velocity(1, t, s.d, ctx30);
    Cplx nu = Cplx(Real(0), Real(1)) * (tv / abs(tv));
    Real e1 = D * R("1e-4");
    Cplx f1 = abel_map(SheetPoint::finite(zc + nu * e1, 1), s.d, P, ctx30);
    Cplx f2 = abel_map(SheetPoint::finite(zc + nu * (e1 * 2), 1), s.d, P, ctx30);
    Cplx f4 = abel_map(SheetPoint::finite(zc + nu * (e1 * 4), 1), s.d, P, ctx30);
    Cplx f0 = (f1 * Real(8) - f2 * Real(6) + f4) / Real(3);

    SheetPoint res = jacobi_invert(f0, P, s.d, ctx30);
    CHECK(res.nudged);
    CHECK(!res.infinite);
    CHECK(abs(res.z - zc) <= D * R("1e-5"));
}

TEST_CASE("typed failures across the surface operations") {
    PrecisionScope scope(ctx30);
    const Solved& s = generic_case();
    const Periods& P = periods_of(s);
    auto a = anchors_of(s);
    auto order = clockwise_arc_order(s.d, ctx30);

    SheetPoint fin = SheetPoint::finite(C("0.6", "-0.2"), 1);

    // first-kind map needs a valid sheet
    CHECK(kind_of([&] {
              (void)abel_map(SheetPoint::finite(C("2", "1"), 3), s.d, P, ctx30);
          }) == ErrorKind::domain);

    // third-kind differential: excluded poles and endpoints
    CHECK(kind_of([&] {
              (void)third_kind_integral(SheetPoint::infinity(1), fin, s.d, P, ctx30);
          }) == ErrorKind::domain);
    CHECK(kind_of([&] {
              (void)third_kind_integral(fin, SheetPoint::infinity(1), s.d, P, ctx30);
          }) == ErrorKind::domain);
    CHECK(kind_of([&] { (void)third_kind_integral(fin, fin, s.d, P, ctx30); }) ==
          ErrorKind::domain);
    CHECK(kind_of([&] {
              (void)third_kind_integral(SheetPoint::finite(a[0], 1), fin, s.d, P, ctx30);
          }) == ErrorKind::domain);
    CHECK(kind_of([&] {
              (void)third_kind_between(fin, fin, SheetPoint::finite(C("1", "1"), 1),
                                       s.d, P, ctx30);
          }) == ErrorKind::domain);

    // a pole on top of the normalizing cycle's arc cannot be integrated
    {
        int a2 = order[1];
        Cplx zm = arc_point(a2, R("0.5"), s.d, ctx30);
        Cplx tv = arc_velocity(a2, R("0.5"), s.d, ctx30);
        Cplx nu = Cplx(Real(0), Real(1)) * (tv / abs(tv));
        SheetPoint pole = SheetPoint::finite(zm + nu * (diam_of(s) * R("0.01")), 1);
        CHECK(kind_of([&] {
                  (void)third_kind_integral(pole, fin, s.d, P, ctx30);
              }) == ErrorKind::geometry);
    }

    // a pole on top of the loop's own arc
    {
        int a3 = order[2];
        Cplx zm = arc_point(a3, R("0.5"), s.d, ctx30);
        Cplx tv = arc_velocity(a3, R("0.5"), s.d, ctx30);
        Cplx nu = Cplx(Real(0), Real(1)) * (tv / abs(tv));
        SheetPoint pole = SheetPoint::finite(zm + nu * (diam_of(s) * R("0.01")), 1);
        CHECK(kind_of([&] {
                  (void)third_kind_loop(a3, pole, s.d, P, ctx30);
              }) == ErrorKind::geometry);
    }

    // the residue circle cannot enclose a pole far outside the continuum
    CHECK(kind_of([&] {
              (void)residue_loop(SheetPoint::finite(C("40", "0"), 1), s.d, P, ctx30);
          }) == ErrorKind::geometry);
}

TEST_CASE("period export and the Abel-image grid") {
    PrecisionScope scope(ctx30);
    const Solved& s = generic_case();
    const Periods& P = periods_of(s);

    // the JSON snapshot round-trips its values as decimal strings
    auto j = nlohmann::json::parse(periods_to_json(P));
    REQUIRE(j["beta"].size() == 3);
    REQUIRE(j["beta"][0].size() == 2);
    REQUIRE(j["beta1"].size() == 3);
    REQUIRE(j["omega"].size() == 3);
    Cplx tau_back(Real(j["tau_ratio"][0].get<std::string>().c_str()),
                  Real(j["tau_ratio"][1].get<std::string>().c_str()));
    check_close(tau_back, P.tau_ratio, R("1e-22"), "tau round trip");
    Real cap_back(j["capacity"].get<std::string>().c_str());
    check_close(cap_back, P.capacity, R("1e-22"), "capacity round trip");

    // the CSV grid pairs the sheets and stays inside the fundamental domain
    std::ostringstream os;
    write_abel_grid_csv(os, s.d, P, 6, 5, ctx30);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "re_z,im_z,sheet,re_omega1,im_omega1");
    std::vector<std::array<double, 4>> rows;
    std::vector<int> sheets;
    while (std::getline(is, line)) {
        double x, y, u, v;
        int sh;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%d,%lf,%lf", &x, &y, &sh, &u, &v) == 5);
        CHECK((sh == 1 || sh == 2));
        CHECK(std::isfinite(u));
        CHECK(std::isfinite(v));
        rows.push_back({x, y, u, v});
        sheets.push_back(sh);
    }
    REQUIRE(rows.size() >= 2);
    REQUIRE(rows.size() % 2 == 0);
    for (size_t i = 0; i < rows.size(); i += 2) {
        CHECK(rows[i][0] == rows[i + 1][0]);
        CHECK(rows[i][1] == rows[i + 1][1]);
        CHECK(sheets[i] == 1);
        CHECK(sheets[i + 1] == 2);
        Cplx v1(Real(rows[i][2]), Real(rows[i][3]));
        Cplx v2(Real(rows[i + 1][2]), Real(rows[i + 1][3]));
        // both entries are reduced representatives and the pair is opposite
        CHECK(abs(lattice_reduce(v1, P) - v1) <= R("1e-12"));
        CHECK(lattice_distance(v1 + v2, P) <= R("1e-10"));
    }

    std::ostringstream bad;
    CHECK(kind_of([&] { write_abel_grid_csv(bad, s.d, P, 1, 5, ctx30); }) ==
          ErrorKind::domain);
    CHECK(kind_of([&] { write_abel_grid_csv(bad, s.d, P, 6, 600, ctx30); }) ==
          ErrorKind::domain);
}

TEST_SUITE_END();
