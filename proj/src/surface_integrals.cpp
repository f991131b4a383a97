#include <algorithm>
#include <string>

#include "surface_detail.hpp"

namespace chebpade::surface_detail {

namespace {

constexpr int kPlainOrder = 20;  // straight pieces, length <= 0.35 of gap
constexpr int kSqrtOrder = 32;   // endpoint-singular legs after s^2
constexpr int kTailOrder = 24;   // per panel of the six-panel tail

// Straight piece with branch continuation; st.w anchors the branch at the
// start, and is replaced by the value at the end.
Cplx gl_piece(const Frame& f, Chain& st, const Cplx& B, const Integrand& g, int order) {
    SegmentRoot sr(st.z, B, branch_list(f));
    int sg = match_sign(st.w, sr(Real(0), Real(1)), "path continuation");
    const GaussRule& rule = gauss_legendre(order);
    Cplx d = B - st.z;
    Cplx acc(Real(0), Real(0));
    for (size_t j = 0; j < rule.x.size(); ++j) {
        const Real& x = rule.x[j];
        Cplx w = sr(x, 1 - x);
        if (sg < 0) w = -w;
        acc = acc + g(st.z + d * x, w) * rule.w[j];
    }
    Cplx wend = sr(Real(1), Real(0));
    st.w = (sg < 0) ? -wend : wend;
    st.z = B;
    return acc * d;
}

// Longest admissible piece through P, Q given the branch points and any
// punctures: a fixed fraction of the nearest singularity gap, relaxed far
// from the continuum where the geometry only grows.
Real allowed_len(const Frame& f, const Cplx& P, const Cplx& Q, const LegOpts& opts) {
    Real dP = dist_branch_r(f, P), dQ = dist_branch_r(f, Q);
    Real cap = ((dP < dQ) ? dP : dQ) * Real("0.35");
    Real rP = abs(P - f.a0), rQ = abs(Q - f.a0);
    Real far1 = ((rP < rQ) ? rP : rQ) / 2;
    if (rP > f.rho * Real("2.5") && rQ > f.rho * Real("2.5") && far1 > cap) cap = far1;
    if (opts.punctures) {
        for (const Cplx& p : *opts.punctures) {
            Real dp = abs(P - p), dq = abs(Q - p);
            Real c2 = ((dp < dq) ? dp : dq) * Real("0.6");
            if (c2 < cap) cap = c2;
        }
    }
    return cap;
}

void split_piece(const Frame& f, const Cplx& P, const Cplx& Q, const LegOpts& opts,
                 std::vector<Cplx>& out, int depth) {
    Real len = abs(Q - P);
    if (len <= allowed_len(f, P, Q, opts) || len < f.diam * Real(1e-15) || depth > 60) {
        out.push_back(Q);
        return;
    }
    Cplx mid = (P + Q) / Real(2);
    split_piece(f, P, mid, opts, out, depth + 1);
    split_piece(f, mid, Q, opts, out, depth + 1);
}

}  // namespace

Cplx leg_segment(const Frame& f, Chain& st, const Cplx& B, const Integrand& g,
                 const LegOpts& opts) {
    if (abs(B - st.z) < f.diam * Real(1e-25)) {
        st.z = B;
        return Cplx(Real(0), Real(0));
    }
    std::vector<Cplx> pieces;
    split_piece(f, st.z, B, opts, pieces, 0);
    Cplx acc(Real(0), Real(0));
    for (const Cplx& q : pieces) acc = acc + gl_piece(f, st, q, g, kPlainOrder);
    return acc;
}

Cplx leg_polyline(const Frame& f, Chain& st, const std::vector<Cplx>& pts, const Integrand& g,
                  const LegOpts& opts) {
    if (pts.empty()) return Cplx(Real(0), Real(0));
    if (abs(pts.front() - st.z) > f.diam * Real(1e-10))
        fail_internal("leg_polyline: chain does not start at the path head");
    Cplx acc(Real(0), Real(0));
    for (size_t i = 1; i < pts.size(); ++i) acc = acc + leg_segment(f, st, pts[i], g, opts);
    return acc;
}

Cplx sqrt_leg_out(const Frame& f, const Cplx& bpz, const Cplx& q, const Cplx& w_q,
                  const Integrand& g) {
    SegmentRoot sr(bpz, q, branch_list(f));
    int sg = match_sign(w_q, sr(Real(1), Real(0)), "branch point leg");
    const GaussRule& rule = gauss_legendre(kSqrtOrder);
    Cplx d = q - bpz;
    Cplx acc(Real(0), Real(0));
    for (size_t j = 0; j < rule.x.size(); ++j) {
        const Real& s = rule.x[j];
        Real x = s * s, xc = (1 - s) * (1 + s);
        Cplx w = sr(x, xc);
        if (sg < 0) w = -w;
        acc = acc + g(bpz + d * x, w) * (rule.w[j] * 2 * s);
    }
    return acc * d;
}

Cplx leg_branch_pass(const Frame& f, Chain& st, const Cplx& bpz, const Integrand& g) {
    Cplx q = st.z;
    Cplx w_in = st.w;
    Integrand flipped = [&g](const Cplx& z, const Cplx& w) { return g(z, -w) - g(z, w); };
    Cplx acc = sqrt_leg_out(f, bpz, q, w_in, flipped);
    st.w = -st.w;
    return acc;
}

Cplx leg_tail(const Frame& f, const Chain& st, const Integrand& g, int direction) {
    if (abs(st.z - f.z_far) > f.diam * Real(1e-10))
        fail_internal("leg_tail: chain must sit at the far anchor");
    int sg = match_sign(st.w, f.w_far, "tail sheet");
    Cplx zeta_f = f.z_far - f.a0;
    std::array<Cplx, 3> b;
    for (int k = 0; k < 3; ++k) b[static_cast<size_t>(k)] = f.arcs[static_cast<size_t>(k)].anchor - f.a0;
    const GaussRule& rule = gauss_legendre(kTailOrder);
    Cplx acc(Real(0), Real(0));
    for (int panel = 0; panel < 6; ++panel) {
        Real u0 = Real(panel) / 6, u1 = Real(panel + 1) / 6;
        for (size_t j = 0; j < rule.x.size(); ++j) {
            Real u = u0 + (u1 - u0) * rule.x[j];
            Cplx zeta = zeta_f / u;
            Cplx W(Real(1), Real(0));
            for (int k = 0; k < 3; ++k)
                W = W * sqrt(Cplx(Real(1), Real(0)) - b[static_cast<size_t>(k)] * (u / zeta_f));
            Cplx w = zeta * zeta * W;
            if (sg < 0) w = -w;
            Cplx dz_du = zeta_f / (u * u);
            acc = acc + g(f.a0 + zeta, w) * dz_du * ((u1 - u0) * rule.w[j]);
        }
    }
    return (direction > 0) ? acc : -acc;
}

Cplx green_tail_defect(const Frame& f) {
    Cplx zeta_f = f.z_far - f.a0;
    std::array<Cplx, 3> b;
    for (int k = 0; k < 3; ++k) b[static_cast<size_t>(k)] = f.arcs[static_cast<size_t>(k)].anchor - f.a0;
    const GaussRule& rule = gauss_legendre(kTailOrder);
    Cplx one(Real(1), Real(0));
    Cplx acc(Real(0), Real(0));
    for (int panel = 0; panel < 6; ++panel) {
        Real u0 = Real(panel) / 6, u1 = Real(panel + 1) / 6;
        for (size_t j = 0; j < rule.x.size(); ++j) {
            Real u = u0 + (u1 - u0) * rule.x[j];
            Cplx W = one;
            for (int k = 0; k < 3; ++k)
                W = W * sqrt(one - b[static_cast<size_t>(k)] * (u / zeta_f));
            acc = acc + (one / W - one) * ((u1 - u0) * rule.w[j] / u);
        }
    }
    return acc;
}

Real ctx_tol(const Frame& f) {
    Real t = f.ctx.series_tol() * 1000;
    Real floor_t = Real(1e-24);
    return (t > floor_t) ? t : floor_t;
}

Cplx loop_closed(const Frame& f, const std::vector<Cplx>& poly, const Cplx& w_start,
                 const Integrand& g, const char* what) {
    if (poly.size() < 3) fail_internal("loop_closed: degenerate loop");
    Chain st{poly.front(), w_start};
    Cplx acc(Real(0), Real(0));
    for (size_t i = 1; i < poly.size(); ++i) acc = acc + leg_segment(f, st, poly[i], g);
    acc = acc + leg_segment(f, st, poly.front(), g);
    if (abs(st.w - w_start) > abs(w_start) * Real(1e-8))
        fail_internal(std::string(what) + ": branch continuation did not close around the loop");
    return acc;
}

Cplx arc_trace_integral(const Frame& f, int pos, const Integrand& g, const char* what) {
    const ArcInfo& ai = f.arcs[static_cast<size_t>(pos)];
    const auto& s = ai.arc->samples;
    size_t m = ai.skel.size();

    auto sqrt_panel = [&](bool at_start, int order) {
        const GaussRule& rule = gauss_legendre(order);
        Cplx bpz = at_start ? s[ai.skel[0]] : s[ai.skel[m - 1]];
        Cplx q = at_start ? s[ai.skel[1]] : s[ai.skel[m - 2]];
        const Cplx& wq = at_start ? ai.skel_w[1] : ai.skel_w[m - 2];
        SegmentRoot sr(bpz, q, branch_list(f));
        int sg = match_sign(wq, sr(Real(1), Real(0)), what);
        Cplx d = q - bpz;
        Cplx acc(Real(0), Real(0));
        for (size_t j = 0; j < rule.x.size(); ++j) {
            const Real& t = rule.x[j];
            Real x = t * t, xc = (1 - t) * (1 + t);
            Cplx w = sr(x, xc);
            if (sg < 0) w = -w;
            acc = acc + g(bpz + d * x, w) * (rule.w[j] * 2 * t);
        }
        // outward from the branch point; flip when the panel ends the arc
        return at_start ? acc * d : -(acc * d);
    };

    auto plain_panel = [&](size_t j, int order, bool check_far_end) {
        SegmentRoot sr(s[ai.skel[j]], s[ai.skel[j + 1]], branch_list(f));
        int sg = match_sign(ai.skel_w[j], sr(Real(0), Real(1)), what);
        if (check_far_end) {
            Cplx wend = sr(Real(1), Real(0));
            if (sg < 0) wend = -wend;
            if (abs(wend - ai.skel_w[j + 1]) > abs(ai.skel_w[j + 1]) / 5)
                fail_internal(std::string(what) + ": skeleton trace is inconsistent");
        }
        const GaussRule& rule = gauss_legendre(order);
        Cplx d = s[ai.skel[j + 1]] - s[ai.skel[j]];
        Cplx acc(Real(0), Real(0));
        for (size_t k = 0; k < rule.x.size(); ++k) {
            const Real& x = rule.x[k];
            Cplx w = sr(x, 1 - x);
            if (sg < 0) w = -w;
            acc = acc + g(s[ai.skel[j]] + d * x, w) * rule.w[k];
        }
        return acc * d;
    };

    Cplx base(Real(0), Real(0)), high(Real(0), Real(0));
    Real scale(0);
    {
        Cplx p = sqrt_panel(true, 32);
        base = base + p;
        scale += abs(p);
    }
    for (size_t j = 1; j + 2 < m; ++j) {
        Cplx p = plain_panel(j, 16, true);
        base = base + p;
        scale += abs(p);
    }
    {
        Cplx p = sqrt_panel(false, 32);
        base = base + p;
        scale += abs(p);
    }
    high = sqrt_panel(true, 48) + sqrt_panel(false, 48);
    for (size_t j = 1; j + 2 < m; ++j) high = high + plain_panel(j, 32, false);

    Real tol = ctx_tol(f) * scale;
    if (abs(base - high) > tol)
        fail_precision(std::string(what) +
                       ": arc quadrature failed to converge at the requested precision");
    return high;
}

}  // namespace chebpade::surface_detail
