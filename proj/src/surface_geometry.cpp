#include <algorithm>
#include <cmath>
#include <limits>

#include "surface_detail.hpp"

namespace chebpade::surface_detail {

namespace {

double wrap_pi(double a) {
    while (a > 3.14159265358979323846) a -= 2 * 3.14159265358979323846;
    while (a <= -3.14159265358979323846) a += 2 * 3.14159265358979323846;
    return a;
}

double dabs(Dbl z) { return std::hypot(z.real(), z.imag()); }

double dist_point_segment(Dbl p, Dbl a, Dbl b) {
    Dbl d = b - a;
    double n2 = std::norm(d);
    if (n2 == 0.0) return dabs(p - a);
    double t = ((p.real() - a.real()) * d.real() + (p.imag() - a.imag()) * d.imag()) / n2;
    t = std::clamp(t, 0.0, 1.0);
    return dabs(p - (a + t * d));
}

double cross2(Dbl o, Dbl a, Dbl b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}

// Closed-segment intersection with a small relative slack so that grazing
// contact counts as a crossing.
bool segments_meet(Dbl p1, Dbl p2, Dbl q1, Dbl q2) {
    double scale = dabs(p2 - p1) + dabs(q2 - q1) + dabs(p1 - q1);
    double eps = 1e-15 * scale * scale;
    double d1 = cross2(q1, q2, p1), d2 = cross2(q1, q2, p2);
    double d3 = cross2(p1, p2, q1), d4 = cross2(p1, p2, q2);
    if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
        ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
        return true;
    auto on = [&](Dbl a, Dbl b, Dbl c, double d) {
        if (std::fabs(d) > eps) return false;
        return std::min(a.real(), b.real()) - 1e-14 * scale <= c.real() &&
               c.real() <= std::max(a.real(), b.real()) + 1e-14 * scale &&
               std::min(a.imag(), b.imag()) - 1e-14 * scale <= c.imag() &&
               c.imag() <= std::max(a.imag(), b.imag()) + 1e-14 * scale;
    };
    return on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4);
}

bool bbox_overlaps_segment(const ArcInfo::Chunk& c, Dbl p, Dbl q, double pad) {
    double x0 = std::min(p.real(), q.real()) - pad, x1 = std::max(p.real(), q.real()) + pad;
    double y0 = std::min(p.imag(), q.imag()) - pad, y1 = std::max(p.imag(), q.imag()) + pad;
    return !(c.x1 < x0 || x1 < c.x0 || c.y1 < y0 || y1 < c.y0);
}

Dbl to_dbl(const Cplx& z) {
    return Dbl(static_cast<double>(z.re), static_cast<double>(z.im));
}

// Distance from z to the nearest of the four branch points, in double.
double dist_branch(const Frame& f, Dbl z) {
    double d = std::numeric_limits<double>::max();
    for (const auto& b : f.bp) d = std::min(d, dabs(z - to_dbl(b)));
    return d;
}

Cplx unit(const Cplx& z) { return z / abs(z); }

// Unit tangent of an arc at sample i by central differences.
Cplx sample_tangent(const Arc& arc, size_t i) {
    size_t n = arc.samples.size();
    size_t lo = (i == 0) ? 0 : i - 1;
    size_t hi = (i + 1 >= n) ? n - 1 : i + 1;
    return unit(arc.samples[hi] - arc.samples[lo]);
}

int own_arc_of_branch(const Frame& f, const Cplx& bpz, bool* is_junction) {
    Real snap = f.diam * 1e-10;
    if (abs(bpz - f.a0) < snap) {
        if (is_junction) *is_junction = true;
        return -1;
    }
    if (is_junction) *is_junction = false;
    for (int i = 0; i < 3; ++i)
        if (abs(bpz - f.arcs[static_cast<size_t>(i)].anchor) < snap) return i;
    fail_internal("depart_dir: point is not a branch point");
}

}  // namespace

int pos_of_index(const Frame& f, int arc_index) {
    for (int i = 0; i < 3; ++i)
        if (f.arcs[static_cast<size_t>(i)].input_index == arc_index) return i;
    fail_domain("unknown arc index " + std::to_string(arc_index) + "; expected 1, 2 or 3");
}

double dist_to_cuts(const Frame& f, Dbl p, int* pos_out) {
    double best = std::numeric_limits<double>::max();
    for (int a = 0; a < 3; ++a) {
        const ArcInfo& ai = f.arcs[static_cast<size_t>(a)];
        for (const auto& c : ai.chunks) {
            double bx = std::clamp(p.real(), c.x0, c.x1) - p.real();
            double by = std::clamp(p.imag(), c.y0, c.y1) - p.imag();
            if (std::hypot(bx, by) >= best) continue;
            for (size_t i = c.i0; i < c.i1; ++i) {
                double d = dist_point_segment(p, ai.pd[i], ai.pd[i + 1]);
                if (d < best) {
                    best = d;
                    if (pos_out) *pos_out = a;
                }
            }
        }
    }
    return best;
}

bool segment_clear(const Frame& f, Dbl P, Dbl Q, int skip_pos, const Dbl* skip_bp,
                   double skip_r) {
    for (int a = 0; a < 3; ++a) {
        if (a == skip_pos) continue;
        const ArcInfo& ai = f.arcs[static_cast<size_t>(a)];
        for (const auto& c : ai.chunks) {
            if (!bbox_overlaps_segment(c, P, Q, 0.0)) continue;
            for (size_t i = c.i0; i < c.i1; ++i) {
                if (skip_bp && dabs(ai.pd[i] - *skip_bp) <= skip_r &&
                    dabs(ai.pd[i + 1] - *skip_bp) <= skip_r)
                    continue;
                if (segments_meet(P, Q, ai.pd[i], ai.pd[i + 1])) return false;
            }
        }
    }
    return true;
}

double dist_to_arc(const Frame& f, int pos, Dbl p) {
    const ArcInfo& ai = f.arcs[static_cast<size_t>(pos)];
    double best = std::numeric_limits<double>::max();
    for (const auto& c : ai.chunks) {
        double bx = std::clamp(p.real(), c.x0, c.x1) - p.real();
        double by = std::clamp(p.imag(), c.y0, c.y1) - p.imag();
        if (std::hypot(bx, by) >= best) continue;
        for (size_t i = c.i0; i < c.i1; ++i) {
            double d = dist_point_segment(p, ai.pd[i], ai.pd[i + 1]);
            if (d < best) best = d;
        }
    }
    return best;
}

int count_crossings(const Frame& f, int pos, Dbl P, Dbl Q) {
    const ArcInfo& ai = f.arcs[static_cast<size_t>(pos)];
    int n = 0;
    for (const auto& c : ai.chunks) {
        if (!bbox_overlaps_segment(c, P, Q, 0.0)) continue;
        for (size_t i = c.i0; i < c.i1; ++i)
            if (segments_meet(P, Q, ai.pd[i], ai.pd[i + 1])) ++n;
    }
    return n;
}

Cplx w_far_eval(const Frame& f, const Cplx& z) {
    Cplx zeta = z - f.a0;
    if (abs(zeta) < f.rho * Real("1.2499"))
        fail_internal("w_far_eval called inside the near zone");
    Cplx prod(Real(1), Real(0));
    for (int k = 0; k < 3; ++k) {
        Cplx b = f.arcs[static_cast<size_t>(k)].anchor - f.a0;
        prod = prod * sqrt(Cplx(Real(1), Real(0)) - b / zeta);
    }
    return zeta * zeta * prod;
}

// Sign that carries a known branch value onto a SegmentRoot evaluation.
int match_sign(const Cplx& ref, const Cplx& val, const char* what) {
    Real dp = abs(val - ref), dm = abs(val + ref);
    Real lo = (dp < dm) ? dp : dm, hi = (dp < dm) ? dm : dp;
    if (!(lo <= hi / 4))
        fail_internal(std::string(what) + ": square-root continuation became ambiguous");
    return (dp < dm) ? 1 : -1;
}

std::vector<Cplx> branch_list(const Frame& f) {
    return {f.bp[0], f.bp[1], f.bp[2], f.bp[3]};
}

Real dist_branch_r(const Frame& f, const Cplx& z) {
    Real best = abs(z - f.bp[0]);
    for (int k = 1; k < 4; ++k) {
        Real d = abs(z - f.bp[static_cast<size_t>(k)]);
        if (d < best) best = d;
    }
    return best;
}

Cplx w_routed(const Frame& f, const Cplx& z) {
    if (abs(z - f.a0) >= f.rho * Real("1.3")) return w_far_eval(f, z);
    std::vector<Cplx> path = route(f, f.z_far, z);
    Cplx w = f.w_far;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        SegmentRoot sr(path[i], path[i + 1], branch_list(f));
        int s = match_sign(w, sr(Real(0), Real(1)), "w_routed");
        w = sr(Real(1), Real(0));
        if (s < 0) w = -w;
    }
    return w;
}

Cplx chart_point(const Frame& f, int pos, const Real& t) {
    const Arc& arc = *f.arcs[static_cast<size_t>(pos)].arc;
    const auto& cp = arc.chord_param;
    size_t n = cp.size();
    size_t hi = static_cast<size_t>(std::upper_bound(cp.begin(), cp.end(), t) - cp.begin());
    size_t lo = (hi >= 4) ? hi - 4 : 0;
    if (lo + 8 > n) lo = n - 8;
    // barycentric interpolation over an 8-point window
    Cplx num(Real(0), Real(0));
    Real den(0);
    for (size_t j = lo; j < lo + 8; ++j) {
        Real d = t - cp[j];
        if (abs(d) < Real(1e-30)) return arc.samples[j];
        Real w(1);
        for (size_t i = lo; i < lo + 8; ++i)
            if (i != j) w *= (cp[j] - cp[i]);
        w = 1 / (w * d);
        num = num + arc.samples[j] * w;
        den += w;
    }
    return num / den;
}

Cplx chart_velocity(const Frame& f, int pos, const Real& t) {
    const Arc& arc = *f.arcs[static_cast<size_t>(pos)].arc;
    const auto& cp = arc.chord_param;
    size_t n = cp.size();
    size_t hi = static_cast<size_t>(std::upper_bound(cp.begin(), cp.end(), t) - cp.begin());
    size_t lo = (hi >= 4) ? hi - 4 : 0;
    if (lo + 8 > n) lo = n - 8;
    std::array<Real, 8> bw;
    for (size_t j = 0; j < 8; ++j) {
        Real w(1);
        for (size_t i = 0; i < 8; ++i)
            if (i != j) w *= (cp[lo + j] - cp[lo + i]);
        bw[j] = 1 / w;
    }
    // node coincidence: differentiate the Lagrange form at the node itself
    for (size_t j = 0; j < 8; ++j) {
        if (abs(t - cp[lo + j]) < Real(1e-25)) {
            Cplx d(Real(0), Real(0));
            for (size_t k = 0; k < 8; ++k) {
                if (k == j) continue;
                d = d + (arc.samples[lo + k] - arc.samples[lo + j]) *
                            (bw[k] / (bw[j] * (cp[lo + j] - cp[lo + k])));
            }
            return d;
        }
    }
    // p'(t) = p(t) * [sum w_j/(t-t_j) * (z_j - p(t)) ... ] via quotient rule
    Cplx num(Real(0), Real(0));
    Real den(0);
    std::array<Real, 8> inv;
    for (size_t j = 0; j < 8; ++j) {
        inv[j] = bw[j] / (t - cp[lo + j]);
        num = num + arc.samples[lo + j] * inv[j];
        den += inv[j];
    }
    Cplx p = num / den;
    Cplx dnum(Real(0), Real(0));
    Real dden(0);
    for (size_t j = 0; j < 8; ++j) {
        Real q = inv[j] / (t - cp[lo + j]);
        dnum = dnum - arc.samples[lo + j] * q;
        dden -= q;
    }
    return (dnum - p * dden) / den;
}

Cplx trace_w_plus(const Frame& f, int pos, const Real& t, Cplx* z_out) {
    const ArcInfo& ai = f.arcs[static_cast<size_t>(pos)];
    const Arc& arc = *ai.arc;
    Cplx z = chart_point(f, pos, t);
    if (z_out) *z_out = z;
    const auto& cp = arc.chord_param;
    size_t is = static_cast<size_t>(std::upper_bound(cp.begin(), cp.end(), t) - cp.begin());
    // nearest interior skeleton vertex (the end vertices carry w = 0)
    size_t best = 1;
    for (size_t k = 1; k + 1 < ai.skel.size(); ++k)
        if (ai.skel[k] <= is || k == 1) best = k;
    if (best + 1 < ai.skel.size() - 1 &&
        ai.skel[best + 1] - is < is - ai.skel[best])
        ++best;
    Cplx zv = arc.samples[ai.skel[best]];
    SegmentRoot sr(zv, z, branch_list(f));
    int s = match_sign(ai.skel_w[best], sr(Real(0), Real(1)), "trace_w_plus");
    Cplx w = sr(Real(1), Real(0));
    return (s < 0) ? -w : w;
}

Cplx depart_dir(const Frame& f, const Cplx& bpz, Real& h_out, const Cplx* avoid) {
    bool junction = false;
    int own = own_arc_of_branch(f, bpz, &junction);
    Dbl bd = to_dbl(bpz);

    std::vector<double> cands;
    if (junction) {
        // bisectors of adjacent departure angles, widest gap first
        std::array<double, 3> dep;
        for (int i = 0; i < 3; ++i) {
            Cplx tg = f.arcs[static_cast<size_t>(i)].arc->endpoint_tangents.first;
            dep[static_cast<size_t>(i)] = std::atan2(static_cast<double>(tg.im),
                                                     static_cast<double>(tg.re));
        }
        std::sort(dep.begin(), dep.end());
        std::array<std::pair<double, double>, 3> gaps;
        for (int i = 0; i < 3; ++i) {
            double a = dep[static_cast<size_t>(i)];
            double b = (i == 2) ? dep[0] + 2 * 3.14159265358979323846
                                : dep[static_cast<size_t>(i + 1)];
            gaps[static_cast<size_t>(i)] = {b - a, a + (b - a) / 2};
        }
        std::sort(gaps.begin(), gaps.end(),
                  [](const auto& x, const auto& y) { return x.first > y.first; });
        for (const auto& g : gaps) cands.push_back(g.second);
    } else {
        const Cplx& v = f.arcs[static_cast<size_t>(own)].v_out;
        double base = std::atan2(static_cast<double>(v.im), static_cast<double>(v.re));
        for (double r : {0.0, 0.5, -0.5, 1.0, -1.0, 1.45, -1.45}) cands.push_back(base + r);
    }

    Real h0 = f.diam * Real("0.07");
    Real other = f.diam * 10;
    for (const auto& b : f.bp) {
        Real d = abs(b - bpz);
        if (d > f.diam * 1e-9 && d < other) other = d;
    }
    if (h0 > other / 5) h0 = other / 5;
    for (double th : cands) {
        Real h = h0;
        for (int halve = 0; halve < 5; ++halve, h /= 2) {
            Cplx dir(cos(Real(th)), sin(Real(th)));
            Cplx q = bpz + dir * h;
            double skip_r = std::min(static_cast<double>(h), 0.02 * static_cast<double>(f.diam));
            if (!segment_clear(f, bd, to_dbl(q), -1, &bd, skip_r)) continue;
            if (avoid) {
                double da = dist_point_segment(to_dbl(*avoid), bd, to_dbl(q));
                if (da < 0.3 * static_cast<double>(h)) continue;
            }
            h_out = h;
            return dir;
        }
    }
    fail_geometry("no clear direction out of a branch point; the cut system is too crowded");
}

std::vector<Cplx> route(const Frame& f, const Cplx& A, const Cplx& B,
                        const std::vector<Cplx>& punctures) {
    Dbl Ad = to_dbl(A), Bd = to_dbl(B);
    double floor = static_cast<double>(f.route_floor);
    for (const Dbl* p : {&Ad, &Bd}) {
        if (dabs(*p - to_dbl(f.a0)) > static_cast<double>(f.rho) * 1.05) continue;
        if (dist_to_cuts(f, *p) < floor)
            fail_geometry("path endpoint is too close to the cut system to route around it");
    }

    std::vector<Cplx> path;
    if (segment_clear(f, Ad, Bd)) {
        path = {A, B};
    } else {
        double rr = static_cast<double>(f.r_route);
        Dbl c = to_dbl(f.a0);
        auto exit_ray = [&](Dbl P, double& theta) -> Cplx {
            double base;
            if (dabs(P - c) >= 0.02 * static_cast<double>(f.diam)) {
                base = std::atan2(P.imag() - c.imag(), P.real() - c.real());
            } else {
                Real hdum;
                Cplx d0 = depart_dir(f, f.a0, hdum);
                base = std::atan2(static_cast<double>(d0.im), static_cast<double>(d0.re));
            }
            for (int k = 0; k <= 20; ++k) {
                for (int sg : {1, -1}) {
                    if (k == 0 && sg < 0) continue;
                    double th = base + sg * k * 3.14159265358979323846 / 36;
                    Dbl E(c.real() + rr * std::cos(th), c.imag() + rr * std::sin(th));
                    if (segment_clear(f, P, E)) {
                        theta = th;
                        return f.a0 + Cplx(cos(Real(th)), sin(Real(th))) * f.r_route;
                    }
                }
            }
            fail_geometry("no clear ray from a path endpoint to the detour circle");
        };

        double thA = 0, thB = 0;
        Cplx EA = exit_ray(Ad, thA);
        Cplx EB = exit_ray(Bd, thB);
        path.push_back(A);
        if (abs(EA - A) > f.diam * 1e-12) path.push_back(EA);
        double d = wrap_pi(thB - thA);
        int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(d) / (3.14159265358979323846 / 16))));
        for (int j = 1; j < steps; ++j) {
            double th = thA + d * j / steps;
            path.push_back(f.a0 + Cplx(cos(Real(th)), sin(Real(th))) * f.r_route);
        }
        if (abs(EB - B) > f.diam * 1e-12) path.push_back(EB);
        path.push_back(B);
    }

    // small circular detours around punctures the path passes too close to
    for (int pass = 0; pass < 8; ++pass) {
        // locate the first offending (puncture, segment) pair
        const Cplx* pp = nullptr;
        size_t seg = 0;
        double rp = 0;
        for (const Cplx& p : punctures) {
            Dbl pd = to_dbl(p);
            double r = std::min(0.01 * static_cast<double>(f.diam), 0.45 * dist_to_cuts(f, pd));
            if (r <= 0) continue;
            for (size_t i = 0; i + 1 < path.size() && !pp; ++i) {
                Dbl sa = to_dbl(path[i]), sb = to_dbl(path[i + 1]);
                if (dabs(sa - pd) <= r * 0.9 || dabs(sb - pd) <= r * 0.9)
                    fail_geometry("a required path endpoint sits on a pole of the integrand");
                // strictly below the detour radius, so a detour's own chords pass
                if (dist_point_segment(pd, sa, sb) < 0.88 * r) {
                    pp = &p;
                    seg = i;
                    rp = r;
                }
            }
            if (pp) break;
        }
        if (!pp) break;

        Dbl pd = to_dbl(*pp);
        Dbl sa = to_dbl(path[seg]), sb = to_dbl(path[seg + 1]);
        Dbl dseg = sb - sa;
        double n2 = std::norm(dseg);
        double tf = ((pd.real() - sa.real()) * dseg.real() +
                     (pd.imag() - sa.imag()) * dseg.imag()) / n2;
        double half = rp / dabs(dseg);
        double t1 = std::max(0.0, tf - half * 1.6), t2 = std::min(1.0, tf + half * 1.6);
        double a1 = std::atan2((sa + t1 * dseg - pd).imag(), (sa + t1 * dseg - pd).real());
        double a2 = std::atan2((sa + t2 * dseg - pd).imag(), (sa + t2 * dseg - pd).real());
        bool fixed = false;
        for (int side : {1, -1}) {
            double dth = wrap_pi(a2 - a1);
            if ((dth >= 0) != (side > 0))
                dth += (side > 0) ? 2 * 3.14159265358979323846 : -2 * 3.14159265358979323846;
            std::vector<Cplx> arcpts;
            bool ok = true;
            int m = std::max(3, static_cast<int>(std::ceil(std::fabs(dth) / 0.8)));
            Dbl prev = sa + t1 * dseg;
            for (int j = 0; j <= m && ok; ++j) {
                double th = a1 + dth * j / m;
                Dbl v(pd.real() + rp * std::cos(th), pd.imag() + rp * std::sin(th));
                if (!segment_clear(f, prev, v)) ok = false;
                else {
                    arcpts.push_back(*pp + Cplx(cos(Real(th)), sin(Real(th))) * Real(rp));
                    prev = v;
                }
            }
            if (!ok || !segment_clear(f, prev, sb)) continue;
            std::vector<Cplx> np(path.begin(), path.begin() + static_cast<long>(seg) + 1);
            np.push_back(path[seg] + (path[seg + 1] - path[seg]) * Real(t1));
            np.insert(np.end(), arcpts.begin(), arcpts.end());
            np.push_back(path[seg] + (path[seg + 1] - path[seg]) * Real(t2));
            np.insert(np.end(), path.begin() + static_cast<long>(seg) + 1, path.end());
            path = std::move(np);
            fixed = true;
            break;
        }
        if (!fixed) fail_geometry("cannot detour the path around a pole of the integrand");
    }

    // drop degenerate vertices
    std::vector<Cplx> out;
    for (const Cplx& v : path)
        if (out.empty() || abs(v - out.back()) > f.diam * 1e-14) out.push_back(v);
    if (out.size() < 2) out = {A, B};
    return out;
}

std::vector<Cplx> dogbone(const Frame& f, int pos) {
    const ArcInfo& ai = f.arcs[static_cast<size_t>(pos)];
    const auto& s = ai.arc->samples;
    size_t n = s.size();
    Real delta = f.diam * Real("0.001");
    Real arm = abs(ai.anchor - f.a0);
    Real r_end = f.diam * Real("0.02");
    if (r_end < delta * 3) r_end = delta * 3;
    if (r_end > arm / 8) r_end = arm / 8;

    size_t i0 = 1;
    while (i0 + 1 < n && abs(s[i0] - f.a0) < r_end) ++i0;
    size_t i1 = n - 2;
    while (i1 > i0 && abs(ai.anchor - s[i1]) < r_end) --i1;
    if (i1 <= i0 + 4) fail_internal("dogbone: arc too short for the end radii");

    auto bank_pt = [&](size_t i, int side) {
        Cplx nu = sample_tangent(*ai.arc, i) * Cplx(Real(0), Real(1));
        return s[i] + nu * (delta * side);
    };

    // adaptive stride keeping the chord within 0.3 delta of the bank
    auto build_bank = [&](int side, std::vector<Cplx>& outp) {
        std::vector<size_t> idx;
        size_t j = i0;
        idx.push_back(j);
        double dmax = 0.3 * static_cast<double>(delta);
        while (j < i1) {
            size_t e = j + 1, good = j + 1;
            while (e <= i1) {
                Dbl a = to_dbl(bank_pt(j, side)), b = to_dbl(bank_pt(e, side));
                bool ok = true;
                size_t step = std::max<size_t>(1, (e - j) / 8);
                for (size_t m = j + 1; m < e && ok; m += step)
                    if (dist_point_segment(to_dbl(bank_pt(m, side)), a, b) > dmax) ok = false;
                if (!ok) break;
                good = e;
                e += std::max<size_t>(1, (e - j));
                if (e > i1) e = i1;
                if (good == i1) break;
            }
            idx.push_back(good);
            j = good;
        }
        if (side > 0)
            for (size_t k : idx) outp.push_back(bank_pt(k, side));
        else
            for (auto it = idx.rbegin(); it != idx.rend(); ++it) outp.push_back(bank_pt(*it, side));
    };

    std::vector<Cplx> poly;
    build_bank(+1, poly);

    // tip arc around the anchor, swinging through the outward direction
    {
        Cplx Pp = bank_pt(i1, +1), Pm = bank_pt(i1, -1);
        Real rp = abs(Pp - ai.anchor), rm = abs(Pm - ai.anchor);
        double tp = std::atan2(static_cast<double>((Pp - ai.anchor).im),
                               static_cast<double>((Pp - ai.anchor).re));
        double tm = std::atan2(static_cast<double>((Pm - ai.anchor).im),
                               static_cast<double>((Pm - ai.anchor).re));
        double vo = std::atan2(static_cast<double>(ai.v_out.im),
                               static_cast<double>(ai.v_out.re));
        double d = wrap_pi(tm - tp);
        if (std::cos(tp + d / 2 - vo) < 0) d += (d >= 0) ? -2 * 3.14159265358979323846
                                                         : 2 * 3.14159265358979323846;
        int m = std::max(4, static_cast<int>(std::ceil(std::fabs(d) / (3.14159265358979323846 / 12))));
        for (int jj = 1; jj < m; ++jj) {
            double th = tp + d * jj / m;
            Real r = rp + (rm - rp) * Real(jj) / m;
            poly.push_back(ai.anchor + Cplx(cos(Real(th)), sin(Real(th))) * r);
        }
    }

    build_bank(-1, poly);

    // junction arc around a0 the long way, avoiding this arc's departure
    {
        Cplx Qm = bank_pt(i0, -1), Qp = bank_pt(i0, +1);
        Real rm = abs(Qm - f.a0), rp2 = abs(Qp - f.a0);
        double tm = std::atan2(static_cast<double>((Qm - f.a0).im),
                               static_cast<double>((Qm - f.a0).re));
        double tp = std::atan2(static_cast<double>((Qp - f.a0).im),
                               static_cast<double>((Qp - f.a0).re));
        double dep = std::atan2(static_cast<double>((s[i0] - f.a0).im),
                                static_cast<double>((s[i0] - f.a0).re));
        double d = wrap_pi(tp - tm);
        double rel = wrap_pi(dep - tm);
        bool inside = (d >= 0) ? (rel > 0 && rel < d) : (rel < 0 && rel > d);
        if (inside) d += (d >= 0) ? -2 * 3.14159265358979323846 : 2 * 3.14159265358979323846;
        int m = std::max(6, static_cast<int>(std::ceil(std::fabs(d) / (3.14159265358979323846 / 12))));
        for (int jj = 1; jj < m; ++jj) {
            double th = tm + d * jj / m;
            Real r = rm + (rp2 - rm) * Real(jj) / m;
            poly.push_back(f.a0 + Cplx(cos(Real(th)), sin(Real(th))) * r);
        }
    }
    return poly;
}

std::vector<Cplx> big_circle(const Frame& f, bool clockwise, int nseg) {
    std::vector<Cplx> poly;
    poly.push_back(f.z_far);
    double th0 = std::atan2(static_cast<double>(f.far_dir.im), static_cast<double>(f.far_dir.re));
    for (int j = 1; j < nseg; ++j) {
        double th = th0 + (clockwise ? -1 : 1) * 2 * 3.14159265358979323846 * j / nseg;
        poly.push_back(f.a0 + Cplx(cos(Real(th)), sin(Real(th))) * f.r_route);
    }
    return poly;
}

Frame build_frame(const ChebotarevData& data, const PrecisionCtx& ctx) {
    if (data.arcs.size() != 3) fail_domain("surface operations need all three traced arcs");
    for (const Arc& a : data.arcs)
        if (a.samples.size() < 16 || a.chord_param.size() != a.samples.size())
            fail_domain("surface operations need densely traced arcs");

    Frame f;
    f.data = &data;
    f.ctx = ctx;
    f.a0 = data.a0;
    f.bp[0] = data.a0;
    for (size_t i = 0; i < 3; ++i) {
        ArcInfo& ai = f.arcs[i];
        ai.arc = &data.arcs[i];
        ai.input_index = data.arcs[i].index;
        ai.anchor = data.arcs[i].samples.back();
        ai.v_out = data.arcs[i].endpoint_tangents.second;
        f.bp[i + 1] = ai.anchor;
        ai.pd.reserve(data.arcs[i].samples.size());
        for (const Cplx& z : data.arcs[i].samples) ai.pd.push_back(to_dbl(z));
        for (size_t j = 0; j + 1 < ai.pd.size(); j += 64) {
            ArcInfo::Chunk c;
            c.i0 = j;
            c.i1 = std::min(j + 64, ai.pd.size() - 1);
            c.x0 = c.x1 = ai.pd[j].real();
            c.y0 = c.y1 = ai.pd[j].imag();
            for (size_t k = j; k <= c.i1; ++k) {
                c.x0 = std::min(c.x0, ai.pd[k].real());
                c.x1 = std::max(c.x1, ai.pd[k].real());
                c.y0 = std::min(c.y0, ai.pd[k].imag());
                c.y1 = std::max(c.y1, ai.pd[k].imag());
            }
            ai.chunks.push_back(c);
        }
    }

    f.diam = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Real d = abs(f.bp[static_cast<size_t>(i)] - f.bp[static_cast<size_t>(j)]);
            if (d > f.diam) f.diam = d;
        }
    double rho = 0;
    Dbl a0d = to_dbl(f.a0);
    for (const ArcInfo& ai : f.arcs)
        for (const Dbl& p : ai.pd) rho = std::max(rho, dabs(p - a0d));
    f.rho = Real(rho);
    f.r_route = f.rho * Real("1.5");
    f.half_sum = (f.bp[0] + f.bp[1] + f.bp[2] + f.bp[3]) / Real(2);
    f.on_cut_tol = f.diam * Real(1e-11);
    f.route_floor = f.diam * Real(4e-6);

    // cycle labels: label 1 over input arc 1, then clockwise by departure angle
    int p1 = -1;
    for (int i = 0; i < 3; ++i)
        if (f.arcs[static_cast<size_t>(i)].input_index == 1) p1 = i;
    if (p1 < 0) fail_domain("arc indices must cover 1, 2, 3");
    std::array<double, 3> dep;
    for (int i = 0; i < 3; ++i) {
        Cplx tg = f.arcs[static_cast<size_t>(i)].arc->endpoint_tangents.first;
        dep[static_cast<size_t>(i)] = std::atan2(static_cast<double>(tg.im),
                                                 static_cast<double>(tg.re));
    }
    int q1 = -1, q2 = -1;
    double best = 10;
    for (int i = 0; i < 3; ++i) {
        if (i == p1) continue;
        double d = dep[static_cast<size_t>(p1)] - dep[static_cast<size_t>(i)];
        while (d <= 0) d += 2 * 3.14159265358979323846;
        while (d > 2 * 3.14159265358979323846) d -= 2 * 3.14159265358979323846;
        if (d < best) {
            best = d;
            q1 = i;
        }
    }
    for (int i = 0; i < 3; ++i)
        if (i != p1 && i != q1) q2 = i;
    f.label_pos = {p1, q1, q2};

    // far anchor in the widest angular gap between the anchors
    std::array<double, 3> ang;
    for (int i = 0; i < 3; ++i) {
        Cplx d = f.arcs[static_cast<size_t>(i)].anchor - f.a0;
        ang[static_cast<size_t>(i)] = std::atan2(static_cast<double>(d.im),
                                                 static_cast<double>(d.re));
    }
    std::sort(ang.begin(), ang.end());
    double bestgap = -1, bestmid = 0;
    for (int i = 0; i < 3; ++i) {
        double a = ang[static_cast<size_t>(i)];
        double b = (i == 2) ? ang[0] + 2 * 3.14159265358979323846 : ang[static_cast<size_t>(i + 1)];
        if (b - a > bestgap) {
            bestgap = b - a;
            bestmid = a + (b - a) / 2;
        }
    }
    f.far_dir = Cplx(cos(Real(bestmid)), sin(Real(bestmid)));
    f.z_far = f.a0 + f.far_dir * f.r_route;
    f.w_far = w_far_eval(f, f.z_far);

    // panel skeleton with left-bank w at interior vertices
    for (size_t a = 0; a < 3; ++a) {
        ArcInfo& ai = f.arcs[a];
        const auto& s = ai.arc->samples;
        size_t n = s.size();
        auto dbp = [&](size_t i) { return dist_branch(f, ai.pd[i]); };
        double cap0 = 0, cap1 = 0;
        {
            double mn0 = std::numeric_limits<double>::max(), mn1 = mn0;
            for (int k = 0; k < 4; ++k) {
                double d0 = dabs(to_dbl(f.bp[static_cast<size_t>(k)]) - ai.pd.front());
                double d1 = dabs(to_dbl(f.bp[static_cast<size_t>(k)]) - ai.pd.back());
                if (d0 > 1e-12) mn0 = std::min(mn0, d0);
                if (d1 > 1e-12) mn1 = std::min(mn1, d1);
            }
            cap0 = 0.2 * mn0;
            cap1 = 0.2 * mn1;
        }
        size_t i1 = 1;
        while (i1 + 1 < n && dabs(ai.pd[i1 + 1] - ai.pd.front()) <= cap0) ++i1;
        size_t i2 = n - 2;
        while (i2 > 1 && dabs(ai.pd.back() - ai.pd[i2 - 1]) <= cap1) --i2;
        if (i2 <= i1) {
            size_t m = n / 2;
            i1 = std::min(i1, m - 1);
            i2 = std::max(i2, m);
        }
        ai.skel.push_back(0);
        ai.skel.push_back(i1);
        size_t j = i1;
        while (j < i2) {
            size_t e = j + 1;
            while (e + 1 <= i2 &&
                   dabs(ai.pd[e + 1] - ai.pd[j]) <= 0.25 * std::min(dbp(j), dbp(e + 1)))
                ++e;
            ai.skel.push_back(e);
            j = e;
        }
        if (ai.skel.back() != i2) ai.skel.push_back(i2);
        ai.skel.push_back(n - 1);
        ai.skel_w.assign(ai.skel.size(), Cplx(Real(0), Real(0)));

        // anchor the branch at the mid vertex from a left-side reference
        size_t km = 1;
        {
            size_t mid = n / 2;
            size_t bd = n;
            for (size_t k = 1; k + 1 < ai.skel.size(); ++k) {
                size_t d = (ai.skel[k] > mid) ? ai.skel[k] - mid : mid - ai.skel[k];
                if (d < bd) {
                    bd = d;
                    km = k;
                }
            }
        }
        Cplx zm = s[ai.skel[km]];
        Cplx nu = sample_tangent(*ai.arc, ai.skel[km]) * Cplx(Real(0), Real(1));
        Cplx zref = zm + nu * (f.diam * Real("0.001"));
        Cplx wref = w_routed(f, zref);
        {
            SegmentRoot sr(zref, zm, branch_list(f));
            int sg = match_sign(wref, sr(Real(0), Real(1)), "skeleton anchor");
            Cplx wv = sr(Real(1), Real(0));
            ai.skel_w[km] = (sg < 0) ? -wv : wv;
        }
        for (size_t k = km; k + 2 < ai.skel.size(); ++k) {
            SegmentRoot sr(s[ai.skel[k]], s[ai.skel[k + 1]], branch_list(f));
            int sg = match_sign(ai.skel_w[k], sr(Real(0), Real(1)), "skeleton chain");
            Cplx wv = sr(Real(1), Real(0));
            ai.skel_w[k + 1] = (sg < 0) ? -wv : wv;
        }
        for (size_t k = km; k >= 2; --k) {
            SegmentRoot sr(s[ai.skel[k]], s[ai.skel[k - 1]], branch_list(f));
            int sg = match_sign(ai.skel_w[k], sr(Real(0), Real(1)), "skeleton chain");
            Cplx wv = sr(Real(1), Real(0));
            ai.skel_w[k - 1] = (sg < 0) ? -wv : wv;
        }
    }
    return f;
}

}  // namespace chebpade::surface_detail
