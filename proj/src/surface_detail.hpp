#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "chebpade/chebotarev.hpp"
#include "chebpade/precision.hpp"
#include "chebpade/quadrature.hpp"
#include "chebpade/surface.hpp"

// Shared geometry and continuation machinery for the surface operations.
// Everything here works on a Frame: the traced arcs re-indexed by clockwise
// label, double-precision obstacle polylines for routing, and a coarse
// panel skeleton per arc carrying the left-bank trace of w at its vertices.

namespace chebpade::surface_detail {

using std::size_t;
using Dbl = std::complex<double>;

struct ArcInfo {
    const Arc* arc = nullptr;
    int input_index = 0;
    Cplx anchor;
    Cplx v_out;  // unit tangent at the anchor, pointing away from the arc

    // Panel skeleton: sample indices with chord length bounded by a fixed
    // fraction of the distance to the nearest branch point, plus the
    // left-bank sheet-1 trace of w at each interior vertex (zero at ends).
    std::vector<size_t> skel;
    std::vector<Cplx> skel_w;

    // Routing obstacles: the full sample polyline in double, with bounding
    // boxes over fixed-stride chunks for quick rejection.
    std::vector<Dbl> pd;
    struct Chunk {
        double x0, y0, x1, y1;
        size_t i0, i1;  // samples [i0, i1] inclusive
    };
    std::vector<Chunk> chunks;
};

struct Frame {
    const ChebotarevData* data = nullptr;
    PrecisionCtx ctx;
    Cplx a0;
    std::array<ArcInfo, 3> arcs;     // in data->arcs order
    std::array<int, 3> label_pos;    // label k (1..3) -> position in arcs
    std::array<Cplx, 4> bp;          // a0 then anchors in arcs order
    Real diam;                       // max pairwise branch point distance
    Real rho;                        // max sample distance from a0
    Real r_route;                    // detour circle radius, 1.5 rho
    Cplx far_dir;                    // unit bisector of the widest anchor gap
    Cplx z_far;                      // a0 + r_route * far_dir
    Cplx w_far;                      // sheet-1 w at z_far
    Cplx half_sum;                   // half the sum of the branch points
    Real on_cut_tol;                 // ambiguity radius around the cut
    Real route_floor;                // below this distance routing is refused
};

Frame build_frame(const ChebotarevData& data, const PrecisionCtx& ctx);

int pos_of_index(const Frame& f, int arc_index);

// Piecewise-polynomial chart of an arc in its traced parameter.
Cplx chart_point(const Frame& f, int pos, const Real& t);
Cplx chart_velocity(const Frame& f, int pos, const Real& t);

// Left-bank sheet-1 trace of w at the chart point (one continuation step
// from the nearest skeleton vertex).  Optionally returns the chart point.
Cplx trace_w_plus(const Frame& f, int pos, const Real& t, Cplx* z_out = nullptr);

// Distance from a double-precision point to the sampled cut system, or to
// the polyline of one arc.
double dist_to_cuts(const Frame& f, Dbl p, int* pos_out = nullptr);
double dist_to_arc(const Frame& f, int pos, Dbl p);

// True when the open segment (P, Q) meets no obstacle polyline.  skip_pos
// excludes one arc; segments attached to a branch point should pass it in
// skip_bp so the shared endpoint does not count as a crossing.
bool segment_clear(const Frame& f, Dbl P, Dbl Q, int skip_pos = -1, const Dbl* skip_bp = nullptr,
                   double skip_r = 0.0);

// Number of polyline segments of the arc at position pos that the segment
// [P, Q] meets.
int count_crossings(const Frame& f, int pos, Dbl P, Dbl Q);

// Piecewise-straight path between cut-avoiding endpoints: direct when
// clear, otherwise out to the detour circle, around it, and back in, with
// small circular detours around any listed puncture.
std::vector<Cplx> route(const Frame& f, const Cplx& A, const Cplx& B,
                        const std::vector<Cplx>& punctures = {});

// Sheet-1 w far from the continuum (|z - a0| >= 1.25 rho) in closed form.
Cplx w_far_eval(const Frame& f, const Cplx& z);

// Sign carrying a known branch value onto a SegmentRoot evaluation; the two
// candidates must be well separated or the continuation aborts.
int match_sign(const Cplx& ref, const Cplx& val, const char* what);

// The four branch points, and the distance from z to the nearest one.
std::vector<Cplx> branch_list(const Frame& f);
Real dist_branch_r(const Frame& f, const Cplx& z);

// Sheet-1 w anywhere off the cut, by continuation along a routed path from
// the far anchor when the closed form does not apply.
Cplx w_routed(const Frame& f, const Cplx& z);

// A direction at a branch point along which a short straight leg leaves the
// cut system cleanly; h_out receives the usable length.  avoid, when given,
// is a point the leg should also stay away from.
Cplx depart_dir(const Frame& f, const Cplx& bpz, Real& h_out, const Cplx* avoid = nullptr);

// Integrands are densities against dz, fed the current (z, w) of the chain.
using Integrand = std::function<Cplx(const Cplx&, const Cplx&)>;

// Continuation state along a path: current point and sheet-resolved w.
struct Chain {
    Cplx z, w;
};

struct LegOpts {
    const std::vector<Cplx>* punctures = nullptr;  // shrink steps near these
};

// Straight leg from st.z to B; subdivides on branch point (and puncture)
// proximity, continues w across each piece, accumulates the integral.
Cplx leg_segment(const Frame& f, Chain& st, const Cplx& B, const Integrand& g,
                 const LegOpts& opts = {});

// Chained legs through every vertex of a routed path (pts.front() == st.z).
Cplx leg_polyline(const Frame& f, Chain& st, const std::vector<Cplx>& pts, const Integrand& g,
                  const LegOpts& opts = {});

// Square-root-adapted leg between a branch point and a nearby waypoint q,
// oriented from the branch point outward; w_q anchors the branch at q.
Cplx sqrt_leg_out(const Frame& f, const Cplx& bpz, const Cplx& q, const Cplx& w_q,
                  const Integrand& g);

// Into the branch point at bpz and back out on the other sheet; st.z must
// already be the waypoint and is preserved, st.w flips sign.
Cplx leg_branch_pass(const Frame& f, Chain& st, const Cplx& bpz, const Integrand& g);

// Tail along the ray from z_far through infinity: direction +1 integrates
// outward from st.z == z_far, -1 inward to it.  st.w must match the sheet.
Cplx leg_tail(const Frame& f, const Chain& st, const Integrand& g, int direction);

// Closed polyline with full continuation of w; checks that w returns to its
// start value and returns the accumulated integral.
Cplx loop_closed(const Frame& f, const std::vector<Cplx>& poly, const Cplx& w_start,
                 const Integrand& g, const char* what);

// Hug-the-arc loop (left bank outward first, so the enclosed cycle is run
// with sheet 1 on its left), and the large clockwise circle at r_route.
std::vector<Cplx> dogbone(const Frame& f, int pos);
std::vector<Cplx> big_circle(const Frame& f, bool clockwise, int nseg = 64);

// One-sided trace integral over a whole arc: the sum over skeleton panels
// of g(z, w_plus) dz with endpoint-adapted quadrature, verified at doubled
// order.  `what` labels precision failures.
Cplx arc_trace_integral(const Frame& f, int pos, const Integrand& g, const char* what);

// Regularized far-field integral: int_0^1 (1/W(u) - 1) du / u for the tail
// of the Green potential, where W(u) is the normalized root product along
// the far ray.
Cplx green_tail_defect(const Frame& f);

// Quadrature agreement tolerance derived from the working precision.
Real ctx_tol(const Frame& f);

}  // namespace chebpade::surface_detail
