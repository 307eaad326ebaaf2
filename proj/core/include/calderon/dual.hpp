#pragma once

#include <cmath>

namespace calderon {

/// First-order forward-mode dual number: value plus one tangent.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double tangent) : v(value), d(tangent) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  const double q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
inline Dual& operator+=(Dual& a, Dual b) { return a = a + b; }
inline Dual& operator-=(Dual& a, Dual b) { return a = a - b; }
inline Dual& operator*=(Dual& a, Dual b) { return a = a * b; }
inline Dual& operator/=(Dual& a, Dual b) { return a = a / b; }

inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }

inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, a.d * e};
}
inline Dual sqrt(Dual a) {
  const double s = std::sqrt(a.v);
  return {s, 0.5 * a.d / s};
}
inline Dual abs(Dual a) { return a.v < 0.0 ? -a : a; }

/// Second-order dual with two independent seed directions: value, the two
/// first derivatives, and the mixed second derivative along the seeds.
struct Dual2 {
  double v = 0.0;
  double da = 0.0;
  double db = 0.0;
  double dab = 0.0;

  Dual2() = default;
  Dual2(double value) : v(value) {}
  Dual2(double value, double a, double b, double ab)
      : v(value), da(a), db(b), dab(ab) {}
};

inline Dual2 operator+(Dual2 a, Dual2 b) {
  return {a.v + b.v, a.da + b.da, a.db + b.db, a.dab + b.dab};
}
inline Dual2 operator-(Dual2 a, Dual2 b) {
  return {a.v - b.v, a.da - b.da, a.db - b.db, a.dab - b.dab};
}
inline Dual2 operator-(Dual2 a) { return {-a.v, -a.da, -a.db, -a.dab}; }
inline Dual2 operator*(Dual2 a, Dual2 b) {
  return {a.v * b.v, a.da * b.v + a.v * b.da, a.db * b.v + a.v * b.db,
          a.dab * b.v + a.da * b.db + a.db * b.da + a.v * b.dab};
}
inline Dual2 operator/(Dual2 a, Dual2 b) {
  Dual2 q;
  q.v = a.v / b.v;
  q.da = (a.da - q.v * b.da) / b.v;
  q.db = (a.db - q.v * b.db) / b.v;
  q.dab = (a.dab - q.da * b.db - q.db * b.da - q.v * b.dab) / b.v;
  return q;
}
inline Dual2& operator+=(Dual2& a, Dual2 b) { return a = a + b; }
inline Dual2& operator-=(Dual2& a, Dual2 b) { return a = a - b; }
inline Dual2& operator*=(Dual2& a, Dual2 b) { return a = a * b; }
inline Dual2& operator/=(Dual2& a, Dual2 b) { return a = a / b; }

inline bool operator<(Dual2 a, Dual2 b) { return a.v < b.v; }
inline bool operator>(Dual2 a, Dual2 b) { return a.v > b.v; }
inline bool operator<=(Dual2 a, Dual2 b) { return a.v <= b.v; }
inline bool operator>=(Dual2 a, Dual2 b) { return a.v >= b.v; }

inline Dual2 log(Dual2 a) {
  Dual2 r;
  r.v = std::log(a.v);
  r.da = a.da / a.v;
  r.db = a.db / a.v;
  r.dab = (a.dab - r.da * a.db) / a.v;
  return r;
}
inline Dual2 exp(Dual2 a) {
  const double e = std::exp(a.v);
  return {e, e * a.da, e * a.db, e * (a.dab + a.da * a.db)};
}
inline Dual2 sqrt(Dual2 a) {
  Dual2 r;
  r.v = std::sqrt(a.v);
  r.da = 0.5 * a.da / r.v;
  r.db = 0.5 * a.db / r.v;
  r.dab = (0.5 * a.dab - r.da * r.db) / r.v;
  return r;
}
inline Dual2 abs(Dual2 a) { return a.v < 0.0 ? -a : a; }

/// Plain-double shims so generic numeric code can call value()/unqualified
/// overloads uniformly.
inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }
inline double value_of(Dual2 x) { return x.v; }

} // namespace calderon
