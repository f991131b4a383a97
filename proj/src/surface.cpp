#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chebpade/surface.hpp"

#include "surface_detail.hpp"

namespace chebpade {

using namespace surface_detail;

namespace {

Dbl dd(const Cplx& z) { return Dbl(static_cast<double>(z.re), static_cast<double>(z.im)); }

// Frames are expensive to build (skeleton traces run continuations), so the
// most recent ones are kept per thread, validated against the live data.
struct FrameSlot {
    const ChebotarevData* key = nullptr;
    unsigned digits = 0, guard = 0;
    Cplx a0;
    std::array<size_t, 3> sizes{};
    std::array<Cplx, 3> tips;
    std::shared_ptr<const Frame> frame;
};

bool same_cplx(const Cplx& a, const Cplx& b) { return a.re == b.re && a.im == b.im; }

std::shared_ptr<const Frame> frame_for(const ChebotarevData& data, const PrecisionCtx& ctx) {
    thread_local std::vector<FrameSlot> slots;
    for (size_t i = 0; i < slots.size(); ++i) {
        FrameSlot& s = slots[i];
        if (s.key != &data || s.digits != ctx.digits || s.guard != ctx.guard) continue;
        if (data.arcs.size() != 3 || !same_cplx(s.a0, data.a0)) continue;
        bool ok = true;
        for (size_t k = 0; k < 3; ++k)
            if (data.arcs[k].samples.size() != s.sizes[k] ||
                !same_cplx(data.arcs[k].samples.back(), s.tips[k]))
                ok = false;
        if (!ok) continue;
        if (i != 0) std::swap(slots[0], slots[i]);
        return slots[0].frame;
    }
    FrameSlot s;
    s.frame = std::make_shared<const Frame>(build_frame(data, ctx));
    s.key = &data;
    s.digits = ctx.digits;
    s.guard = ctx.guard;
    s.a0 = data.a0;
    for (size_t k = 0; k < 3; ++k) {
        s.sizes[k] = data.arcs[k].samples.size();
        s.tips[k] = data.arcs[k].samples.back();
    }
    slots.insert(slots.begin(), std::move(s));
    if (slots.size() > 4) slots.pop_back();
    return slots.front().frame;
}

Cplx two_pi_i() { return Cplx(Real(0), real_pi() * 2); }

// Endpoint of a surface path, with branch points snapped and cut interiors
// rejected.
struct EndPt {
    enum Kind { FIN, INF, BP } kind = FIN;
    Cplx z;
    int sheet = 1;
};

EndPt classify(const Frame& f, const SheetPoint& p, const char* which) {
    if (p.sheet != 1 && p.sheet != 2)
        fail_domain(std::string(which) + ": sheet must be 1 or 2");
    EndPt e;
    if (p.infinite) {
        e.kind = EndPt::INF;
        e.sheet = p.sheet;
        e.z = f.z_far;
        return e;
    }
    if (!isfinite(p.z)) fail_domain(std::string(which) + ": coordinate is not finite");
    for (const Cplx& b : branch_list(f)) {
        if (abs(p.z - b) < f.diam * Real(1e-12)) {
            e.kind = EndPt::BP;
            e.z = b;
            e.sheet = 1;
            return e;
        }
    }
    if (dist_to_cuts(f, dd(p.z)) < static_cast<double>(f.on_cut_tol))
        fail_domain(std::string(which) +
                    " lies on the cut, where the surface point is ambiguous");
    e.kind = EndPt::FIN;
    e.z = p.z;
    e.sheet = p.sheet;
    return e;
}

struct PathSpec {
    std::vector<Cplx> punctures;
    bool force_midcut = false;  // cross over the interior of arc 1 instead of
                                // passing through anchor 1
};

// Integral of g along the canonical path between two surface points: legs
// in the cut plane, with sheet changes through anchor 1 (or across the
// interior of arc 1 when the pole blocks the anchor).
Cplx path_integral(const Frame& f, const SheetPoint& from, const SheetPoint& to,
                   const Integrand& g, const PathSpec& spec) {
    EndPt A = classify(f, from, "the start point");
    EndPt B = classify(f, to, "the end point");

    Cplx zero(Real(0), Real(0));
    if (A.kind == B.kind) {
        if (A.kind == EndPt::INF && A.sheet == B.sheet) return zero;
        if (A.kind == EndPt::BP && abs(A.z - B.z) < f.diam * Real(1e-12)) return zero;
        if (A.kind == EndPt::FIN && A.sheet == B.sheet &&
            abs(A.z - B.z) < f.diam * Real(1e-25))
            return zero;
    }

    bool cross = (A.kind != EndPt::BP && B.kind != EndPt::BP && A.sheet != B.sheet);
    int s_start = (A.kind == EndPt::BP) ? ((B.kind == EndPt::BP) ? 1 : B.sheet) : A.sheet;

    LegOpts lo;
    if (!spec.punctures.empty()) lo.punctures = &spec.punctures;
    const Cplx* avoid = spec.punctures.empty() ? nullptr : &spec.punctures.front();

    Chain st;
    Cplx I = zero;

    if (A.kind == EndPt::INF) {
        st.z = f.z_far;
        st.w = (s_start == 1) ? f.w_far : -f.w_far;
        I = I + leg_tail(f, st, g, -1);
    } else if (A.kind == EndPt::BP) {
        Real h(0);
        Cplx dir = depart_dir(f, A.z, h, avoid);
        Cplx q = A.z + dir * h;
        Cplx wq = w_routed(f, q);
        if (s_start == 2) wq = -wq;
        I = I + sqrt_leg_out(f, A.z, q, wq, g);
        st.z = q;
        st.w = wq;
    } else {
        st.z = A.z;
        Cplx w0 = w_routed(f, A.z);
        st.w = (s_start == 1) ? w0 : -w0;
    }

    if (cross) {
        if (spec.force_midcut) {
            int pos1 = f.label_pos[0];
            bool crossed = false;
            for (double tcd : {0.5, 0.35, 0.65}) {
                Cplx zc = chart_point(f, pos1, Real(tcd));
                Cplx tv = chart_velocity(f, pos1, Real(tcd));
                Cplx nu = (tv / abs(tv)) * Cplx(Real(0), Real(1));
                Real dlt = f.diam * Real("0.002");
                Cplx pA = zc + nu * dlt, pB = zc - nu * dlt;
                if (abs(pB - st.z) < abs(pA - st.z)) std::swap(pA, pB);
                if (count_crossings(f, pos1, dd(pA), dd(pB)) % 2 == 0) continue;
                if (!segment_clear(f, dd(pA), dd(pB), pos1)) continue;
                bool blocked = false;
                for (const Cplx& p : spec.punctures)
                    if (abs(p - zc) < dlt * 6) blocked = true;
                if (blocked) continue;
                I = I + leg_polyline(f, st, route(f, st.z, pA, spec.punctures), g, lo);
                I = I + leg_segment(f, st, pB, g, lo);
                crossed = true;
                break;
            }
            if (!crossed) fail_geometry("no clean crossing of the cut over arc 1 was found");
        } else {
            Cplx base = f.arcs[static_cast<size_t>(pos_of_index(f, 1))].anchor;
            Real h(0);
            Cplx dir = depart_dir(f, base, h, avoid);
            Cplx q = base + dir * h;
            I = I + leg_polyline(f, st, route(f, st.z, q, spec.punctures), g, lo);
            I = I + leg_branch_pass(f, st, base, g);
        }
    }

    if (B.kind == EndPt::INF) {
        I = I + leg_polyline(f, st, route(f, st.z, f.z_far, spec.punctures), g, lo);
        int sg = match_sign(st.w, f.w_far, "arrival sheet");
        if (((sg > 0) ? 1 : 2) != B.sheet)
            fail_internal("sheet bookkeeping failed on the way to infinity");
        I = I + leg_tail(f, st, g, +1);
    } else if (B.kind == EndPt::BP) {
        Real h(0);
        Cplx dir = depart_dir(f, B.z, h, avoid);
        Cplx q = B.z + dir * h;
        I = I + leg_polyline(f, st, route(f, st.z, q, spec.punctures), g, lo);
        I = I - sqrt_leg_out(f, B.z, q, st.w, g);
        st.z = B.z;
        st.w = zero;
    } else {
        I = I + leg_polyline(f, st, route(f, st.z, B.z, spec.punctures), g, lo);
        Cplx wt = w_routed(f, B.z);
        if (B.sheet == 2) wt = -wt;
        if (abs(st.w - wt) > abs(wt) * Real(1e-6))
            fail_internal("sheet bookkeeping failed along the path");
    }
    return I;
}

SheetPoint base_point(const Frame& f) {
    return SheetPoint::finite(f.arcs[static_cast<size_t>(pos_of_index(f, 1))].anchor, 1);
}

Integrand first_kind_density(const Periods& periods) {
    Cplx c1 = Cplx(Real(1), Real(0)) / (two_pi_i() * periods.beta[1]);
    return [c1](const Cplx&, const Cplx& w) { return c1 / w; };
}

Integrand green_density(const Frame& f) {
    Cplx a0 = f.a0;
    return [a0](const Cplx& z, const Cplx& w) { return (z - a0) / w; };
}

// The third-kind kernel: pole data, the even-part normalization constant,
// and the resulting density against dz.
struct ThirdKind {
    bool inf2 = false;  // pole above infinity on sheet 2
    Cplx za, wa;        // projection and w at a finite pole
    Cplx A;             // half sum of the branch points
    Cplx c;             // a-cycle period normalization
};

ThirdKind make_third_kind(const Frame& f, const SheetPoint& a, const Periods& periods) {
    ThirdKind tk;
    tk.A = f.half_sum;
    if (a.infinite) {
        if (a.sheet == 1)
            fail_domain("the third-kind differential vanishes identically when its pole "
                        "coincides with the point over infinity on sheet 1");
        tk.inf2 = true;
    } else {
        EndPt ea = classify(f, a, "the pole location");
        tk.za = ea.z;
        tk.wa = (ea.kind == EndPt::BP)
                    ? Cplx(Real(0), Real(0))
                    : ((ea.sheet == 1) ? w_routed(f, ea.z) : -w_routed(f, ea.z));
    }
    // vanishing a-cycle period: only the w-even part of the kernel survives
    // the two banks, so one trace integral fixes the constant
    int pos2 = f.label_pos[1];
    if (!tk.inf2 && !(tk.wa.re == 0 && tk.wa.im == 0) &&
        dist_to_arc(f, pos2, dd(tk.za)) < 0.05 * static_cast<double>(f.diam))
        fail_geometry("the pole sits too close to the normalizing cycle's arc for "
                      "the trace quadrature");
    Integrand even = [&tk](const Cplx& z, const Cplx& w) {
        if (tk.inf2) return (z * Real(2)) / w;
        return (tk.wa / (z - tk.za) + (z - tk.za) + tk.A) / w;
    };
    Cplx loop = arc_trace_integral(f, pos2, even, "third-kind normalization");
    tk.c = -(loop / (two_pi_i() * periods.beta[1]));
    return tk;
}

Integrand third_kind_density(const ThirdKind& tk) {
    ThirdKind k = tk;
    return [k](const Cplx& z, const Cplx& w) {
        Cplx r = k.inf2 ? z : ((w + k.wa) / (z - k.za) + (z - k.za) + k.A) / Real(2);
        return (r + k.c) / w;
    };
}

Cplx reduce_imag_2pi(const Cplx& v) {
    Real two_pi = real_pi() * 2;
    Real k = ceil(v.im / two_pi - Real(1) / 2);
    return Cplx(v.re, v.im - two_pi * k);
}

Cplx centered_reduce(const Cplx& v, const Cplx& tau) {
    Real y = v.im / tau.im;
    Real x = v.re - y * tau.re;
    x -= floor(x + Real(1) / 2);
    y -= floor(y + Real(1) / 2);
    return Cplx(x, Real(0)) + tau * y;
}

}  // namespace

Cplx w_eval(const SheetPoint& pt, const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (pt.sheet != 1 && pt.sheet != 2) fail_domain("sheet must be 1 or 2");
    if (pt.infinite) fail_domain("w grows like z^2 and has no value over infinity");
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    if (!isfinite(pt.z)) fail_domain("the point coordinate is not finite");
    for (const Cplx& b : branch_list(f))
        if (abs(pt.z - b) < f.diam * Real(1e-20)) return Cplx(Real(0), Real(0));
    if (dist_to_cuts(f, dd(pt.z)) < static_cast<double>(f.on_cut_tol))
        fail_domain("the point lies on the cut, where w has two opposite traces; "
                    "use trace_eval for one-sided values");
    Cplx w = w_routed(f, pt.z);
    return (pt.sheet == 1) ? w : -w;
}

Cplx trace_eval(int arc_index, const Real& t, int side, const ChebotarevData& data,
                const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (side != 1 && side != -1) fail_domain("side must be +1 (left bank) or -1 (right bank)");
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    int pos = pos_of_index(f, arc_index);
    if (!(t > 0) || !(t < 1))
        fail_domain("the trace parameter must lie strictly inside (0, 1); the arc "
                    "endpoints are branch points where w vanishes");
    Cplx w = trace_w_plus(f, pos, t);
    return (side > 0) ? w : -w;
}

Cplx arc_point(int arc_index, const Real& t, const ChebotarevData& data,
               const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    if (t < 0 || t > 1) fail_domain("the arc parameter must lie in [0, 1]");
    return chart_point(f, pos_of_index(f, arc_index), t);
}

Cplx arc_velocity(int arc_index, const Real& t, const ChebotarevData& data,
                  const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    if (t < 0 || t > 1) fail_domain("the arc parameter must lie in [0, 1]");
    return chart_velocity(f, pos_of_index(f, arc_index), t);
}

std::array<int, 3> clockwise_arc_order(const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    return {f.arcs[static_cast<size_t>(f.label_pos[0])].input_index,
            f.arcs[static_cast<size_t>(f.label_pos[1])].input_index,
            f.arcs[static_cast<size_t>(f.label_pos[2])].input_index};
}

Periods compute_periods(const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    Periods P;
    Cplx pi_i(Real(0), real_pi());
    Cplx sum_b(Real(0), Real(0)), sum_b1(Real(0), Real(0));
    Real scale_b(0);
    for (int k = 0; k < 3; ++k) {
        int pos = f.label_pos[static_cast<size_t>(k)];
        std::string which = "arc " + std::to_string(f.arcs[static_cast<size_t>(pos)].input_index);
        Cplx I0 = arc_trace_integral(
            f, pos, [](const Cplx&, const Cplx& w) { return Cplx(Real(1), Real(0)) / w; },
            ("first-kind period over " + which).c_str());
        Cplx I1 = arc_trace_integral(
            f, pos, [](const Cplx& z, const Cplx& w) { return z / w; },
            ("second-kind period over " + which).c_str());
        P.beta[static_cast<size_t>(k)] = I0 / pi_i;
        P.beta1[static_cast<size_t>(k)] = I1 / pi_i;
        Cplx mass = f.a0 * P.beta[static_cast<size_t>(k)] - P.beta1[static_cast<size_t>(k)];
        P.omega[static_cast<size_t>(k)] = mass * (pi_i * Real(2));
        sum_b = sum_b + P.beta[static_cast<size_t>(k)];
        sum_b1 = sum_b1 + P.beta1[static_cast<size_t>(k)];
        scale_b += abs(P.beta[static_cast<size_t>(k)]);
        if (abs(mass.im) > Real(1e-8))
            fail_precision("the harmonic mass of " + which + " came out non-real");
        Real wref = data.weights[static_cast<size_t>(
            f.arcs[static_cast<size_t>(pos)].input_index - 1)];
        if (abs(mass.re - wref) > Real(1e-6))
            fail_precision("the harmonic mass of " + which +
                           " disagrees with the traced weight");
    }
    Real tol_sum = Real(1e-12) * ((scale_b > 1) ? scale_b : Real(1));
    if (abs(sum_b) > tol_sum)
        fail_precision("arc quadrature violated the zero-sum law of the periods");
    if (abs(sum_b1 + Cplx(Real(1), Real(0))) > tol_sum)
        fail_precision("arc quadrature violated the normalization of the second-kind sums");
    P.tau_ratio = P.beta[2] / P.beta[1];
    if (!(P.tau_ratio.im > 0))
        fail_internal("cycle labeling did not produce a lattice ratio in the upper half plane");

    Cplx G_far = path_integral(f, base_point(f), SheetPoint::finite(f.z_far, 1),
                               green_density(f), {});
    Cplx L = log(f.z_far - f.a0) - G_far - green_tail_defect(f);
    P.capacity = exp(L.re);
    P.xi_a1 = Cplx(cos(L.im), sin(L.im));
    return P;
}

Cplx green_map(const SheetPoint& pt, const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (pt.infinite)
        fail_domain("the potential has a logarithmic pole over infinity; green_map is "
                    "finite only at finite points");
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    Cplx G = path_integral(f, base_point(f), pt, green_density(f), {});
    return exp(G);
}

Cplx abel_map(const SheetPoint& pt, const ChebotarevData& data, const Periods& periods,
              const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    return path_integral(f, base_point(f), pt, first_kind_density(periods), {});
}

Cplx third_kind_integral(const SheetPoint& a, const SheetPoint& pt, const ChebotarevData& data,
                         const Periods& periods, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    Cplx anchor1 = f.arcs[static_cast<size_t>(pos_of_index(f, 1))].anchor;
    if (!a.infinite) {
        if (!isfinite(a.z)) fail_domain("the pole location is not finite");
        if (abs(a.z - anchor1) < f.diam * Real("0.08"))
            fail_domain("the pole is at or too close to the base anchor, where the "
                        "integral has its own logarithmic pole; use third_kind_between");
    }
    if (pt.infinite && pt.sheet == 1)
        fail_domain("the integral diverges logarithmically at infinity on sheet 1");
    if (pt.infinite && a.infinite && pt.sheet == a.sheet)
        fail_domain("the end point coincides with the pole");
    if (!pt.infinite && !a.infinite && pt.sheet == a.sheet &&
        abs(pt.z - a.z) < f.diam * Real(1e-10))
        fail_domain("the end point coincides with the pole");
    ThirdKind tk = make_third_kind(f, a, periods);
    PathSpec spec;
    if (!a.infinite) spec.punctures.push_back(tk.za);
    Cplx I = path_integral(f, base_point(f), pt, third_kind_density(tk), spec);
    return reduce_imag_2pi(I);
}

Cplx third_kind_between(const SheetPoint& a, const SheetPoint& from, const SheetPoint& to,
                        const ChebotarevData& data, const Periods& periods,
                        const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    Cplx anchor1 = f.arcs[static_cast<size_t>(pos_of_index(f, 1))].anchor;
    for (const SheetPoint* e : {&from, &to}) {
        if (e->infinite && e->sheet == 1)
            fail_domain("the integral diverges logarithmically at infinity on sheet 1");
        if (e->infinite && a.infinite && e->sheet == a.sheet)
            fail_domain("a path endpoint coincides with the pole");
        if (!e->infinite && !a.infinite && e->sheet == a.sheet &&
            abs(e->z - a.z) < f.diam * Real(1e-10))
            fail_domain("a path endpoint coincides with the pole");
    }
    ThirdKind tk = make_third_kind(f, a, periods);
    PathSpec spec;
    if (!a.infinite) {
        spec.punctures.push_back(tk.za);
        spec.force_midcut = abs(tk.za - anchor1) < f.diam * Real("0.08");
    }
    Cplx I = path_integral(f, from, to, third_kind_density(tk), spec);
    return reduce_imag_2pi(I);
}

Cplx first_kind_loop(int arc_index, const ChebotarevData& data, const Periods& periods,
                     const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    int pos = pos_of_index(f, arc_index);
    std::vector<Cplx> poly = dogbone(f, pos);
    Cplx w0 = w_routed(f, poly.front());
    return loop_closed(f, poly, w0, first_kind_density(periods), "first-kind cycle");
}

Cplx green_loop(int arc_index, const ChebotarevData& data, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    int pos = pos_of_index(f, arc_index);
    std::vector<Cplx> poly = dogbone(f, pos);
    Cplx w0 = w_routed(f, poly.front());
    return loop_closed(f, poly, w0, green_density(f), "potential cycle");
}

Cplx third_kind_loop(int arc_index, const SheetPoint& a, const ChebotarevData& data,
                     const Periods& periods, const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    int pos = pos_of_index(f, arc_index);
    if (!a.infinite && dist_to_arc(f, pos, dd(a.z)) < 0.05 * static_cast<double>(f.diam))
        fail_geometry("the pole sits too close to the loop's arc");
    ThirdKind tk = make_third_kind(f, a, periods);
    std::vector<Cplx> poly = dogbone(f, pos);
    Cplx w0 = w_routed(f, poly.front());
    return loop_closed(f, poly, w0, third_kind_density(tk), "third-kind cycle");
}

Cplx residue_loop(const SheetPoint& a, const ChebotarevData& data, const Periods& periods,
                  const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    if (!a.infinite && abs(a.z - f.a0) > f.rho * Real("1.3"))
        fail_geometry("the residue circle cannot separate the pole from infinity");
    ThirdKind tk = make_third_kind(f, a, periods);
    std::vector<Cplx> poly = big_circle(f, true);
    return loop_closed(f, poly, f.w_far, third_kind_density(tk), "residue circle");
}

Cplx lattice_reduce(const Cplx& v, const Periods& periods) {
    const Cplx& tau = periods.tau_ratio;
    if (!(tau.im > 0)) fail_domain("the periods carry a degenerate lattice");
    Real y = v.im / tau.im;
    Real x = v.re - y * tau.re;
    x -= floor(x);
    y -= floor(y);
    return Cplx(x, Real(0)) + tau * y;
}

Real lattice_distance(const Cplx& v, const Periods& periods) {
    const Cplx& tau = periods.tau_ratio;
    if (!(tau.im > 0)) fail_domain("the periods carry a degenerate lattice");
    return abs(centered_reduce(v, tau));
}

SheetPoint jacobi_invert(const Cplx& target, const Periods& periods, const ChebotarevData& data,
                         const PrecisionCtx& ctx) {
    PrecisionScope scope(ctx);
    if (!isfinite(target)) fail_domain("the inversion target is not finite");
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    const Cplx tau = periods.tau_ratio;
    if (!(tau.im > 0)) fail_domain("the periods carry a degenerate lattice");
    Cplx denom = two_pi_i() * periods.beta[1];
    Integrand g = first_kind_density(periods);
    auto latdist = [&](const Cplx& v) { return abs(centered_reduce(v, tau)); };

    const Real tolN(1e-12), tolV(1e-10);
    Cplx anchor1 = f.arcs[static_cast<size_t>(pos_of_index(f, 1))].anchor;

    if (latdist(target) < tolV) return SheetPoint::finite(anchor1, 1);
    Cplx om_inf1 =
        path_integral(f, base_point(f), SheetPoint::infinity(1), g, {});
    if (latdist(target - om_inf1) < tolV) return SheetPoint::infinity(1);
    if (latdist(target + om_inf1) < tolV) return SheetPoint::infinity(2);

    // serpentine seed sweep, continuing w and the integral across the grid
    struct Seed {
        Cplx z, w, om;
        Real score;
    };
    std::vector<Seed> seeds;
    {
        const int N = 6;
        Real R = f.rho * Real("1.1");
        const double offs[5][2] = {{0, 0}, {0.05, 0.03}, {-0.04, 0.06}, {0.07, -0.05},
                                   {-0.06, -0.07}};
        Chain st;
        bool have = false;
        Cplx om(Real(0), Real(0));
        for (int iy = 0; iy < N; ++iy) {
            for (int jx = 0; jx < N; ++jx) {
                int ix = (iy % 2 == 0) ? jx : N - 1 - jx;
                Cplx nominal = f.a0 + Cplx(R * (Real(2 * ix) / (N - 1) - 1),
                                           R * (Real(2 * iy) / (N - 1) - 1));
                bool placed = false;
                for (int tr = 0; tr < 5 && !placed; ++tr) {
                    Cplx cand = nominal + Cplx(R * Real(offs[tr][0]), R * Real(offs[tr][1]));
                    if (dist_to_cuts(f, dd(cand)) < 0.03 * static_cast<double>(R)) continue;
                    if (have) {
                        // the connecting leg may cross cuts but not branch points
                        bool ok = true;
                        for (const Cplx& b : branch_list(f)) {
                            Dbl bd = dd(b);
                            Dbl sa = dd(st.z), sb = dd(cand);
                            Dbl dv = sb - sa;
                            double n2 = std::norm(dv);
                            double t = n2 > 0
                                           ? ((bd.real() - sa.real()) * dv.real() +
                                              (bd.imag() - sa.imag()) * dv.imag()) / n2
                                           : 0.0;
                            t = std::clamp(t, 0.0, 1.0);
                            Dbl ft = sa + t * dv;
                            if (std::hypot(ft.real() - bd.real(), ft.imag() - bd.imag()) <
                                0.03 * static_cast<double>(R)) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) continue;
                        om = om + leg_segment(f, st, cand, g);
                    } else {
                        om = path_integral(f, base_point(f), SheetPoint::finite(cand, 1), g, {});
                        st.z = cand;
                        st.w = w_routed(f, cand);
                        have = true;
                    }
                    placed = true;
                }
                if (placed) seeds.push_back({st.z, st.w, om, latdist(om - target)});
            }
        }
        size_t n1 = seeds.size();
        for (size_t i = 0; i < n1; ++i)
            seeds.push_back({seeds[i].z, -seeds[i].w, -seeds[i].om,
                             latdist(-seeds[i].om - target)});
    }
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& a, const Seed& b) { return a.score < b.score; });

    for (const Seed& sd : seeds) {
        Chain st{sd.z, sd.w};
        Cplx om = sd.om;
        bool converged = false;
        bool gave_up = false;
        for (int it = 0; it < 60 && !gave_up; ++it) {
            Cplx F = centered_reduce(om - target, tau);
            if (abs(F) <= tolN) {
                converged = true;
                break;
            }
            Cplx dz = -(F * denom) * st.w;
            Real db = dist_branch_r(f, st.z);
            Real cap = db * Real("0.6") + f.diam * Real("0.001");
            Real adz = abs(dz);
            if (adz > cap) dz = dz * (cap / adz);
            Cplx znew = st.z + dz;
            for (const Cplx& b : branch_list(f)) {
                if (abs(znew - b) < f.diam * Real(1e-12)) {
                    Cplx d0 = znew - b;
                    Real L = abs(d0);
                    d0 = (L > 0) ? d0 / L : Cplx(Real(1), Real(0));
                    znew = b + d0 * (f.diam * Real(1e-9));
                }
            }
            if (abs(znew - f.a0) > f.diam * 50) {
                // walked out toward infinity: accept it or abandon the seed
                Cplx wref = w_far_eval(f, st.z);
                Real d1 = abs(st.w - wref), d2 = abs(st.w + wref);
                int sheet = (d1 < d2) ? 1 : 2;
                Cplx omi = (sheet == 1) ? om_inf1 : -om_inf1;
                if (latdist(target - omi) < tolV)
                    return SheetPoint::infinity(sheet);
                gave_up = true;
                break;
            }
            om = om + leg_segment(f, st, znew, g);
            // a branch point may be the solution itself: close the gap exactly
            Real dnb = dist_branch_r(f, st.z);
            if (dnb < f.diam * Real("0.02")) {
                Cplx bnear = f.bp[0];
                for (const Cplx& b : branch_list(f))
                    if (abs(st.z - b) < abs(st.z - bnear)) bnear = b;
                Cplx om_bp = om - sqrt_leg_out(f, bnear, st.z, st.w, g);
                if (latdist(om_bp - target) < tolV) return SheetPoint::finite(bnear, 1);
            }
        }
        if (!converged) continue;

        // nearest arc chart frame: parameter, foot point, and left normal
        auto arc_frame = [&](const Cplx& z, int npos, Real& t_out, Cplx& zc_out,
                             Cplx& nu_out) {
            const auto& cp = f.arcs[static_cast<size_t>(npos)].arc->chord_param;
            const auto& sm = f.arcs[static_cast<size_t>(npos)].arc->samples;
            size_t ib = 1;
            Real dbst = abs(z - sm[1]);
            for (size_t i = 2; i + 1 < sm.size(); ++i) {
                Real dq = abs(z - sm[i]);
                if (dq < dbst) {
                    dbst = dq;
                    ib = i;
                }
            }
            t_out = cp[ib];
            Cplx tv = chart_velocity(f, npos, t_out);
            zc_out = chart_point(f, npos, t_out);
            nu_out = (tv / abs(tv)) * Cplx(Real(0), Real(1));
        };

        bool nudged = false;
        int npos = -1;
        double dcut = dist_to_cuts(f, dd(st.z), &npos);
        double floor_d = static_cast<double>(f.route_floor);
        if (dcut < 1e-8 * static_cast<double>(f.diam)) {
            // the solution sits on the cut: displace it into the nearer sheet
            // and flag it
            Real tb(0);
            Cplx zc, nu;
            arc_frame(st.z, npos, tb, zc, nu);
            Real side = ((st.z - zc).re * nu.re + (st.z - zc).im * nu.im >= 0) ? Real(1)
                                                                               : Real(-1);
            Cplx znudge = st.z + nu * (side * f.diam * Real(1e-8));
            om = om + leg_segment(f, st, znudge, g);
            nudged = true;
            dcut = dist_to_cuts(f, dd(st.z), &npos);
        }
        int sheet;
        if (dcut < 5 * floor_d) {
            // too close to the cut for a routed continuation: read the sheet
            // off the one-sided trace instead
            Real tb(0);
            Cplx zc, nu;
            arc_frame(st.z, npos, tb, zc, nu);
            Cplx v1 = trace_w_plus(f, npos, tb);
            Real side = ((st.z - zc).re * nu.re + (st.z - zc).im * nu.im >= 0) ? Real(1)
                                                                               : Real(-1);
            if (side < 0) v1 = -v1;
            sheet = (abs(st.w - v1) < abs(st.w + v1)) ? 1 : 2;
        } else {
            Cplx wref = w_routed(f, st.z);
            sheet = (abs(st.w - wref) < abs(st.w + wref)) ? 1 : 2;
        }
        SheetPoint res = SheetPoint::finite(st.z, sheet);
        res.nudged = nudged;
        // near-cut results cannot be re-anchored by a fresh routed path; their
        // integral was already continued exactly along the accepted legs
        if (!nudged && dcut >= 5 * floor_d) {
            Cplx ver = path_integral(f, base_point(f), res, g, {});
            if (latdist(ver - target) >= tolV) continue;
        }
        return res;
    }
    fail_solver("Jacobi inversion did not converge: no seed reached the target");
}

std::string periods_to_json(const Periods& periods, unsigned sig_digits) {
    auto num = [&](const Real& x) { return "\"" + to_decimal(x, sig_digits) + "\""; };
    auto pair = [&](const Cplx& z) { return "[" + num(z.re) + ", " + num(z.im) + "]"; };
    auto triple = [&](const std::array<Cplx, 3>& a) {
        return "[" + pair(a[0]) + ", " + pair(a[1]) + ", " + pair(a[2]) + "]";
    };
    std::string s = "{\n";
    s += "  \"beta\": " + triple(periods.beta) + ",\n";
    s += "  \"beta1\": " + triple(periods.beta1) + ",\n";
    s += "  \"tau_ratio\": " + pair(periods.tau_ratio) + ",\n";
    s += "  \"omega\": " + triple(periods.omega) + ",\n";
    s += "  \"xi_a1\": " + pair(periods.xi_a1) + ",\n";
    s += "  \"capacity\": " + num(periods.capacity) + "\n";
    s += "}\n";
    return s;
}

void write_abel_grid_csv(std::ostream& os, const ChebotarevData& data, const Periods& periods,
                         int nx, int ny, const PrecisionCtx& ctx) {
    if (nx < 2 || ny < 2 || nx > 512 || ny > 512)
        fail_domain("the grid must have between 2 and 512 nodes per side");
    PrecisionScope scope(ctx);
    auto fp = frame_for(data, ctx);
    const Frame& f = *fp;
    Integrand g = first_kind_density(periods);
    os << "re_z,im_z,sheet,re_omega1,im_omega1\n";
    Real R = f.rho * Real("1.15");
    Chain st;
    bool have = false;
    Cplx om(Real(0), Real(0));
    for (int iy = 0; iy < ny; ++iy) {
        for (int jx = 0; jx < nx; ++jx) {
            int ix = (iy % 2 == 0) ? jx : nx - 1 - jx;
            Cplx z = f.a0 + Cplx(R * (Real(2 * ix) / (nx - 1) - 1),
                                 R * (Real(2 * iy) / (ny - 1) - 1));
            if (dist_to_cuts(f, dd(z)) < 0.005 * static_cast<double>(f.diam)) continue;
            try {
                if (!have) {
                    om = path_integral(f, base_point(f), SheetPoint::finite(z, 1), g, {});
                    st.z = z;
                    st.w = w_routed(f, z);
                    have = true;
                } else {
                    om = om + leg_polyline(f, st, route(f, st.z, z), g);
                }
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::geometry) continue;
                throw;
            }
            for (int sheet : {1, 2}) {
                Cplx v = lattice_reduce((sheet == 1) ? om : -om, periods);
                os << to_decimal(z.re, 17) << ',' << to_decimal(z.im, 17) << ',' << sheet << ','
                   << to_decimal(v.re, 17) << ',' << to_decimal(v.im, 17) << '\n';
            }
        }
    }
}

}  // namespace chebpade
