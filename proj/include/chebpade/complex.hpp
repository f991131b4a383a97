#pragma once

#include <string>

#include "chebpade/precision.hpp"

namespace chebpade {

// Complex number over Real.  std::complex is not usable with a
// variable-precision backend, so the handful of operations we need are
// spelled out here.  sqrt and log take the principal branch (cut along
// the negative real axis); division uses Smith's scaling.
struct Cplx {
    Real re, im;

    Cplx() : re(0), im(0) {}
    Cplx(const Real& r) : re(r), im(0) {}
    Cplx(long r) : re(r), im(0) {}
    Cplx(int r) : re(r), im(0) {}
    Cplx(double r) : re(r), im(0) {}
    Cplx(const Real& r, const Real& i) : re(r), im(i) {}
    Cplx(double r, double i) : re(r), im(i) {}

    Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
    Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }
    Cplx& operator*=(const Cplx& o) { *this = *this * o; return *this; }
    Cplx& operator/=(const Cplx& o) { *this = *this / o; return *this; }

    friend Cplx operator+(const Cplx& a, const Cplx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cplx operator-(const Cplx& a, const Cplx& b) { return {a.re - b.re, a.im - b.im}; }
    friend Cplx operator-(const Cplx& a) { return {-a.re, -a.im}; }
    friend Cplx operator*(const Cplx& a, const Cplx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cplx operator*(const Cplx& a, const Real& s) { return {a.re * s, a.im * s}; }
    friend Cplx operator*(const Real& s, const Cplx& a) { return a * s; }
    friend Cplx operator/(const Cplx& a, const Real& s) { return {a.re / s, a.im / s}; }

    friend Cplx operator/(const Cplx& a, const Cplx& b) {
        if (abs(b.re) >= abs(b.im)) {
            Real t = b.im / b.re;
            Real den = b.re + b.im * t;
            return {(a.re + a.im * t) / den, (a.im - a.re * t) / den};
        }
        Real t = b.re / b.im;
        Real den = b.re * t + b.im;
        return {(a.re * t + a.im) / den, (a.im * t - a.re) / den};
    }

    friend bool operator==(const Cplx& a, const Cplx& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Cplx& a, const Cplx& b) { return !(a == b); }
};

inline Real abs(const Cplx& z) { return hypot(z.re, z.im); }
inline Real norm(const Cplx& z) { return z.re * z.re + z.im * z.im; }
inline Real arg(const Cplx& z) { return atan2(z.im, z.re); }
inline Cplx conj(const Cplx& z) { return {z.re, -z.im}; }

inline Cplx sqrt(const Cplx& z) {
    if (z.re == 0 && z.im == 0) return Cplx(0);
    Real m = abs(z);
    if (z.re >= 0) {
        Real t = sqrt((m + z.re) / 2);
        return {t, z.im / (2 * t)};
    }
    Real t = sqrt((m - z.re) / 2);  // takes the sign of im, +i for im == 0
    if (z.im >= 0) return {z.im / (2 * t), t};
    return {-z.im / (2 * t), -t};
}

inline Cplx exp(const Cplx& z) {
    Real m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

inline Cplx log(const Cplx& z) { return {log(abs(z)), arg(z)}; }

inline Cplx polar(const Real& r, const Real& theta) {
    return {r * cos(theta), r * sin(theta)};
}

inline Cplx pow_int(Cplx base, long e) {
    if (e < 0) return Cplx(1) / pow_int(base, -e);
    Cplx acc(1);
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

inline bool isfinite(const Cplx& z) {
    return boost::math::isfinite(z.re) && boost::math::isfinite(z.im);
}

inline std::string to_string(const Cplx& z, unsigned sig_digits) {
    return "(" + to_decimal(z.re, sig_digits) + ", " + to_decimal(z.im, sig_digits) + ")";
}

} // namespace chebpade
