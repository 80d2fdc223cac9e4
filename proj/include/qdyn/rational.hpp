#pragma once

// Exact-degree rational functions on the Riemann sphere.
//
// Everything downstream (quadrature domains, Schwarz reflections, the
// exemplar maps) is expressed through the types in this header: SpherePoint
// for points of the extended plane, Polynomial for ascending coefficient
// lists, RationalMap for reduced quotients, and RootSet for fibers counted
// with multiplicity.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "qdyn/errors.hpp"

namespace qdyn {

using cplx = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Default clustering tolerance for root finding, relative to max(1, |root|).
inline constexpr double kRootTol = 1e-8;

/// Largest degree accepted for user-supplied maps.
inline constexpr int kMaxDegree = 16;

// ---------------------------------------------------------------------------
// SpherePoint

/// A point of the Riemann sphere. Infinity is a tagged sentinel rather than an
/// IEEE infinity, so arithmetic never silently produces NaN pairs; a
/// non-finite complex value converts to the sentinel.
class SpherePoint {
 public:
  constexpr SpherePoint() = default;
  SpherePoint(cplx z) {  // NOLINT(google-explicit-constructor)
    if (std::isfinite(z.real()) && std::isfinite(z.imag())) {
      z_ = z;
    } else {
      inf_ = true;
    }
  }
  SpherePoint(double x) : SpherePoint(cplx(x, 0.0)) {}  // NOLINT

  static SpherePoint infinity() {
    SpherePoint p;
    p.inf_ = true;
    return p;
  }

  bool is_infinite() const noexcept { return inf_; }
  bool is_finite() const noexcept { return !inf_; }

  /// Finite coordinate; zero for the sentinel.
  cplx value() const noexcept { return z_; }

  /// |z|, +inf for the sentinel.
  double modulus() const noexcept {
    return inf_ ? std::numeric_limits<double>::infinity() : std::abs(z_);
  }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) noexcept {
    return a.inf_ == b.inf_ && (a.inf_ || a.z_ == b.z_);
  }

 private:
  cplx z_{};
  bool inf_ = false;
};

/// Chordal metric on the unit-diameter-2 sphere; infinity is a point like any
/// other.
inline double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite()) return 2.0 / std::hypot(1.0, std::abs(b.value()));
  if (b.is_infinite()) return 2.0 / std::hypot(1.0, std::abs(a.value()));
  const double ra = std::hypot(1.0, std::abs(a.value()));
  const double rb = std::hypot(1.0, std::abs(b.value()));
  return 2.0 * std::abs(a.value() - b.value()) / ra / rb;
}

/// Reflection in the unit circle, w -> 1/conj(w), extended to the sphere.
inline SpherePoint kappa(const SpherePoint& w) {
  if (w.is_infinite()) return SpherePoint(0.0);
  if (w.value() == cplx(0.0)) return SpherePoint::infinity();
  return SpherePoint(1.0 / std::conj(w.value()));
}

// ---------------------------------------------------------------------------
// Polynomial

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim_exact(); }
  Polynomial(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim_exact(); }

  static Polynomial constant(cplx a) { return Polynomial(std::vector<cplx>{a}); }

  static Polynomial monomial(cplx a, int k) {
    std::vector<cplx> c(static_cast<std::size_t>(k) + 1, cplx(0.0));
    c.back() = a;
    return Polynomial(std::move(c));
  }

  /// lead * prod (z - r) over the given roots.
  static Polynomial from_roots(cplx lead, std::span<const cplx> roots) {
    std::vector<cplx> c{lead};
    for (const cplx r : roots) {
      std::vector<cplx> next(c.size() + 1, cplx(0.0));
      for (std::size_t k = 0; k < c.size(); ++k) {
        next[k + 1] += c[k];
        next[k] -= r * c[k];
      }
      c = std::move(next);
    }
    return Polynomial(std::move(c));
  }

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  const std::vector<cplx>& coeffs() const noexcept { return c_; }

  cplx operator[](int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : cplx(0.0);
  }
  cplx leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }

  cplx operator()(cplx z) const {
    cplx acc(0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// sum |a_k| r^k: the scale against which evaluation residuals are judged.
  double magnitude(double r) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }

  /// max |a_k|, zero for the zero polynomial.
  double max_coeff() const {
    double m = 0.0;
    for (const cplx a : c_) m = std::max(m, std::abs(a));
    return m;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  /// z^deg * P(1/z).
  Polynomial reversed() const { return Polynomial(std::vector<cplx>(c_.rbegin(), c_.rend())); }

  /// Quotient of synthetic division by (z - r); the remainder is dropped.
  Polynomial deflate(cplx r) const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> q(c_.size() - 1);
    cplx acc(0.0);
    for (std::size_t k = c_.size() - 1; k >= 1; --k) {
      acc = acc * r + c_[k];
      q[k - 1] = acc;
    }
    return Polynomial(std::move(q));
  }

  Polynomial scaled(cplx s) const {
    std::vector<cplx> c(c_);
    for (cplx& a : c) a *= s;
    return Polynomial(std::move(c));
  }

  /// Drops trailing coefficients below rel * max|a_k|.
  Polynomial trimmed(double rel) const {
    const double m = max_coeff();
    std::vector<cplx> c(c_);
    while (!c.empty() && std::abs(c.back()) <= rel * m) c.pop_back();
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), cplx(0.0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b.scaled(-1.0); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

 private:
  void trim_exact() {
    while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
  }

  std::vector<cplx> c_;
};

// ---------------------------------------------------------------------------
// RootSet

struct Root {
  SpherePoint location;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;

  int total_multiplicity() const {
    int m = 0;
    for (const Root& r : roots) m += r.multiplicity;
    return m;
  }
  std::size_t size() const { return roots.size(); }
  bool empty() const { return roots.empty(); }
};

namespace detail {

struct NewtonStep {
  cplx ratio;        // p / p'
  bool negligible;   // |p| is at the rounding-error level
  double log_abs_p;  // log(|p| + rounding bound)
};

// p/p' for ascending coefficients a[0..n] (absa holds |a_k|), evaluated in
// the chart that keeps Horner well scaled: directly for |z| <= 1, through the
// reversed polynomial otherwise.
inline NewtonStep newton_step(const cplx* a, const double* absa, int n, cplx z, bool want_log = false) {
  const double bound_factor = kEps * (4.0 * n + 2.0);
  const double az = std::abs(z);
  cplx v(0.0), dv(0.0);
  double mag = 0.0;
  if (az <= 1.0) {
    for (int k = n; k >= 0; --k) {
      dv = dv * z + v;
      v = v * z + a[k];
      mag = mag * az + absa[k];
    }
    const double bound = bound_factor * mag;
    const bool small = std::norm(v) <= bound * bound;
    const cplx ratio = (dv == cplx(0.0)) ? cplx(0.0) : v / dv;
    return {ratio, small, want_log ? std::log(std::abs(v) + bound) : 0.0};
  }
  const cplx t = 1.0 / z;
  const double at = 1.0 / az;
  for (int k = 0; k <= n; ++k) {
    dv = dv * t + v;
    v = v * t + a[k];
    mag = mag * at + absa[k];
  }
  const double bound = bound_factor * mag;
  const bool small = std::norm(v) <= bound * bound;
  const cplx denom = static_cast<double>(n) - t * dv / v;
  const cplx ratio = (v == cplx(0.0) || denom == cplx(0.0)) ? cplx(0.0) : z / denom;
  return {ratio, small, want_log ? n * std::log(az) + std::log(std::abs(v) + bound) : 0.0};
}

inline void abs_coeffs(const cplx* a, int n, double* out) {
  for (int k = 0; k <= n; ++k) out[k] = std::abs(a[k]);
}

// Initial approximations from the upper convex hull of (k, log|a_k|), which
// places starting circles at the right radii even when root moduli differ
// by many orders of magnitude. a[0] and a[n] must be nonzero.
inline void initial_guesses(const cplx* a, int n, cplx* z) {
  std::array<int, kMaxDegree + 1> idx{};
  std::array<double, kMaxDegree + 1> lg{};
  int cnt = 0;
  for (int k = 0; k <= n; ++k) {
    if (a[k] != cplx(0.0)) {
      idx[cnt] = k;
      lg[cnt] = std::log(std::abs(a[k]));
      ++cnt;
    }
  }
  std::array<int, kMaxDegree + 1> hull{};
  int hs = 0;
  for (int i = 0; i < cnt; ++i) {
    while (hs >= 2) {
      const int p = hull[hs - 2];
      const int q = hull[hs - 1];
      const double cross = (idx[q] - idx[p]) * (lg[i] - lg[p]) - (lg[q] - lg[p]) * (idx[i] - idx[p]);
      if (cross >= 0.0) {
        --hs;
      } else {
        break;
      }
    }
    hull[hs++] = i;
  }
  constexpr double kOffset = 0.7;
  int out = 0;
  for (int h = 0; h + 1 < hs; ++h) {
    const int m = idx[hull[h + 1]] - idx[hull[h]];
    const double radius = std::exp((lg[hull[h]] - lg[hull[h + 1]]) / m);
    for (int j = 0; j < m; ++j) {
      const double ang = 2.0 * kPi * j / m + 2.0 * kPi * static_cast<double>(h) / n + kOffset;
      z[out++] = std::polar(radius, ang);
    }
  }
}

// Aberth-Ehrlich with Gauss-Seidel updates; a[0] and a[n] nonzero, n >= 2.
// Returns false when the iteration budget runs out.
inline bool aberth(const cplx* a, int n, cplx* z) {
  initial_guesses(a, n, z);
  std::array<double, kMaxDegree + 1> absa{};
  abs_coeffs(a, n, absa.data());
  std::array<char, kMaxDegree> done{};
  constexpr int kMaxIter = 800;
  for (int it = 0; it < kMaxIter; ++it) {
    bool converged = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto step = newton_step(a, absa.data(), n, z[i]);
      if (step.negligible) {
        done[i] = 1;
        continue;
      }
      converged = false;
      cplx s(0.0);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cplx d = z[i] - z[j];
        if (d == cplx(0.0)) d = cplx(kEps * (1.0 + std::abs(z[i])), 0.0);
        s += 1.0 / d;
      }
      cplx corr = step.ratio / (1.0 - step.ratio * s);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) {
        corr = cplx(1e-3 * (1.0 + std::abs(z[i])), 1e-3);
      }
      z[i] -= corr;
      if (std::norm(corr) <= 4.0 * kEps * kEps * std::norm(z[i])) done[i] = 1;
    }
    if (converged) return true;
  }
  return false;
}

/// Unclustered root approximations of a[0..n] (a[n] != 0) written to z,
/// repeated roots appearing once per multiplicity. Allocation-free; used by
/// the per-pixel membership path.
inline void fast_roots(const cplx* a, int n, cplx* z) {
  int zeros = 0;
  while (zeros < n && a[zeros] == cplx(0.0)) z[zeros++] = cplx(0.0);
  const cplx* q = a + zeros;
  const int m = n - zeros;
  if (m == 0) return;
  if (m == 1) {
    z[zeros] = -q[0] / q[1];
    return;
  }
  if (!aberth(q, m, z + zeros)) throw Error(ErrorKind::ConvergenceFailure, "roots: Aberth iteration budget exhausted");
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// All complex roots of p (degree >= 1) by Aberth-Ehrlich simultaneous
/// iteration. Approximations whose Gerschgorin-type inclusion disks overlap,
/// or that lie within tol * max(1, |z|) of each other, are merged into one
/// root whose multiplicity is the cluster size. Exact zero low-order
/// coefficients are peeled off as an exact root at the origin.
inline RootSet roots(const Polynomial& p, double tol = kRootTol) {
  if (p.degree() < 1) throw Error(ErrorKind::InvalidArgument, "roots: polynomial degree must be >= 1");

  int zeros = 0;
  while (p[zeros] == cplx(0.0)) ++zeros;
  const Polynomial q(std::vector<cplx>(p.coeffs().begin() + zeros, p.coeffs().end()));
  const int n = q.degree();

  std::vector<cplx> z;
  std::vector<double> log_rad;
  if (n == 1) {
    z.push_back(-q[0] / q[1]);
    log_rad.push_back(-std::numeric_limits<double>::infinity());
  } else if (n > 1) {
    z.resize(static_cast<std::size_t>(n));
    if (!detail::aberth(q.coeffs().data(), n, z.data()))
      throw Error(ErrorKind::ConvergenceFailure, "roots: Aberth iteration budget exhausted");

    std::vector<double> absq(static_cast<std::size_t>(n) + 1);
    detail::abs_coeffs(q.coeffs().data(), n, absq.data());
    const double log_lead = std::log(std::abs(q.leading()));
    log_rad.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto step = detail::newton_step(q.coeffs().data(), absq.data(), n, z[i], true);
      double lp = 0.0;
      bool coincident = false;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j == i) continue;
        const double d = std::abs(z[i] - z[j]);
        if (d == 0.0) {
          coincident = true;
          continue;
        }
        lp += std::log(d);
      }
      log_rad[i] = std::log(static_cast<double>(n)) + step.log_abs_p - log_lead - lp;
      if (coincident) log_rad[i] = std::max(log_rad[i], std::log(kEps * (1.0 + std::abs(z[i]))));
    }
  }

  // Cluster: overlapping inclusion disks or tol-close approximations.
  detail::DisjointSets sets(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double d = std::abs(z[i] - z[j]);
      const double scale = std::max({1.0, std::abs(z[i]), std::abs(z[j])});
      const double overlap = std::exp(log_rad[i]) + std::exp(log_rad[j]);
      if (d <= tol * scale || d <= 2.0 * overlap) sets.unite(i, j);
    }
  }
  std::vector<cplx> sum(z.size(), cplx(0.0));
  std::vector<int> count(z.size(), 0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t r = sets.find(i);
    sum[r] += z[i];
    ++count[r];
  }

  RootSet out;
  int zero_mult = zeros;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (count[i] == 0) continue;
    cplx c = sum[i] / static_cast<double>(count[i]);
    const int m = count[i];
    // Schroeder steps polish the cluster mean of a multiple root.
    for (int k = 0; k < 3; ++k) {
      const cplx v = q(c);
      const cplx dv = q.derivative()(c);
      if (v == cplx(0.0) || dv == cplx(0.0)) break;
      const cplx next = c - static_cast<double>(m) * v / dv;
      if (std::abs(q(next)) < std::abs(v)) {
        c = next;
      } else {
        break;
      }
    }
    if (zeros > 0 && std::abs(c) <= tol) {
      zero_mult += m;
      continue;
    }
    const double resid = std::abs(q(c)) / std::max(q.magnitude(std::abs(c)), std::numeric_limits<double>::min());
    if (!(resid < 1e-10)) throw Error(ErrorKind::ConvergenceFailure, "roots: residual check failed after clustering");
    out.roots.push_back({SpherePoint(c), m});
  }
  if (zero_mult > 0) out.roots.insert(out.roots.begin(), Root{SpherePoint(0.0), zero_mult});
  return out;
}

// ---------------------------------------------------------------------------
// RationalMap

/// num/den with common roots removed numerically. A map may be constant
/// (degree 0) only when produced as a derivative; domain constructions
/// demand degree >= 1.
class RationalMap {
 public:
  RationalMap() : num_{cplx(0.0), cplx(1.0)}, den_{cplx(1.0)} {}

  RationalMap(Polynomial num, Polynomial den, double tol = kRootTol) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error(ErrorKind::InvalidArgument, "RationalMap: zero denominator");
    if (std::max(num_.degree(), den_.degree()) > kMaxDegree)
      throw Error(ErrorKind::InvalidArgument, "RationalMap: degree exceeds 16");
    cancel_common_roots(tol);
  }

  static RationalMap identity() { return {}; }

  const Polynomial& num() const noexcept { return num_; }
  const Polynomial& den() const noexcept { return den_; }

  int degree() const noexcept { return std::max(std::max(num_.degree(), 0), den_.degree()); }

  /// Order of the value at infinity: deg num - deg den.
  int degree_gap() const noexcept { return num_.degree() - den_.degree(); }

 private:
  void cancel_common_roots(double tol) {
    if (num_.is_zero()) {
      den_ = Polynomial::constant(1.0);
      return;
    }
    if (num_.degree() < 1 || den_.degree() < 1) return;
    const RootSet rd = roots(den_, tol);
    RootSet rn = roots(num_, tol);
    for (const Root& d : rd.roots) {
      const cplx pd = d.location.value();
      for (Root& r : rn.roots) {
        if (r.multiplicity == 0) continue;
        const cplx pn = r.location.value();
        const double scale = std::max({1.0, std::abs(pd), std::abs(pn)});
        if (std::abs(pd - pn) > std::sqrt(tol) * scale) continue;
        // Candidate shared root: confirm it is a root of both to
        // clustering accuracy before deflating.
        const int k = std::min(d.multiplicity, r.multiplicity);
        if (std::abs(pd - pn) > tol * scale * 10.0 && k == 1) continue;
        for (int i = 0; i < k; ++i) {
          num_ = num_.deflate(pd);
          den_ = den_.deflate(pd);
        }
        r.multiplicity -= k;
        break;
      }
    }
  }

  Polynomial num_;
  Polynomial den_;
};

/// Value on the sphere. For |z| > 2 the evaluation switches to the
/// coordinate 1/z.
inline SpherePoint eval(const RationalMap& r, const SpherePoint& z) {
  const Polynomial& n = r.num();
  const Polynomial& d = r.den();
  if (z.is_infinite()) {
    const int gap = r.degree_gap();
    if (gap > 0) return SpherePoint::infinity();
    if (gap < 0 || n.is_zero()) return SpherePoint(0.0);
    return SpherePoint(n.leading() / d.leading());
  }
  const cplx w = z.value();
  if (std::abs(w) <= 2.0) {
    const cplx dv = d(w);
    if (dv == cplx(0.0)) return SpherePoint::infinity();
    return SpherePoint(n(w) / dv);
  }
  const cplx t = 1.0 / w;
  cplx nv(0.0), dv(0.0);
  for (const cplx a : n.coeffs()) nv = nv * t + a;  // reversed Horner
  for (const cplx a : d.coeffs()) dv = dv * t + a;
  if (dv == cplx(0.0)) return SpherePoint::infinity();
  const int gap = r.degree_gap();
  return SpherePoint(std::pow(w, gap) * (nv / dv));
}

/// Finite-plane evaluation for hot loops; poles give a non-finite value.
inline cplx eval_finite(const RationalMap& r, cplx w) { return r.num()(w) / r.den()(w); }

/// Quotient-rule derivative, reduced and with a monic denominator.
inline RationalMap derivative(const RationalMap& r) {
  const Polynomial& n = r.num();
  const Polynomial& d = r.den();
  const Polynomial dn = n.derivative();
  const Polynomial dd = d.derivative();
  Polynomial w = dn * d - n * dd;
  // Leading terms cancel when deg num == deg den; drop what is only noise.
  const double noise = 64.0 * kEps * (dn.max_coeff() * d.max_coeff() + n.max_coeff() * dd.max_coeff());
  {
    std::vector<cplx> c = w.coeffs();
    while (!c.empty() && std::abs(c.back()) <= noise) c.pop_back();
    w = Polynomial(std::move(c));
  }
  Polynomial v = d * d;
  if (w.is_zero()) return RationalMap(Polynomial{}, Polynomial::constant(1.0));
  RationalMap out(w, v);
  const cplx lead = out.den().leading();
  return RationalMap(out.num().scaled(1.0 / lead), out.den().scaled(1.0 / lead), 0.0);
}

/// Solutions of r(w) = z counted with multiplicity, infinity included when
/// the degree bookkeeping demands it. The total is always deg r.
inline RootSet preimages(const RationalMap& r, const SpherePoint& z, double tol = kRootTol) {
  const Polynomial& n = r.num();
  const Polynomial& d = r.den();
  const int deg = r.degree();
  RootSet out;
  if (z.is_infinite()) {
    if (d.degree() >= 1) out = roots(d, tol);
    if (r.degree_gap() > 0) out.roots.push_back({SpherePoint::infinity(), r.degree_gap()});
    return out;
  }
  const cplx zv = z.value();
  std::vector<cplx> c(static_cast<std::size_t>(deg) + 1, cplx(0.0));
  std::vector<double> mag(c.size(), 0.0);
  for (int k = 0; k <= deg; ++k) {
    c[static_cast<std::size_t>(k)] = n[k] - zv * d[k];
    mag[static_cast<std::size_t>(k)] = std::abs(n[k]) + std::abs(zv) * std::abs(d[k]);
  }
  while (!c.empty() && std::abs(c.back()) <= 16.0 * kEps * mag[c.size() - 1]) c.pop_back();
  const Polynomial q(std::move(c));
  if (q.degree() >= 1) out = roots(q, tol);
  const int at_inf = deg - std::max(q.degree(), 0);
  if (at_inf > 0) out.roots.push_back({SpherePoint::infinity(), at_inf});
  return out;
}

struct CriticalPoint {
  SpherePoint location;
  int multiplicity = 1;
};

/// Local degree of r at infinity (1 when r is unramified there).
inline int local_degree_at_infinity(const RationalMap& r) {
  const int gap = r.degree_gap();
  if (gap != 0) return std::abs(gap);
  const Polynomial& n = r.num();
  const Polynomial& d = r.den();
  const cplx a = n.leading() / d.leading();
  const int deg = n.degree();
  std::vector<cplx> c(static_cast<std::size_t>(deg) + 1);
  std::vector<double> mag(c.size());
  for (int k = 0; k <= deg; ++k) {
    c[static_cast<std::size_t>(k)] = n[k] - a * d[k];
    mag[static_cast<std::size_t>(k)] = std::abs(n[k]) + std::abs(a) * std::abs(d[k]);
  }
  c.back() = 0.0;
  while (!c.empty() && std::abs(c.back()) <= 64.0 * kEps * mag[c.size() - 1]) c.pop_back();
  return deg - (static_cast<int>(c.size()) - 1);
}

/// Critical points on the sphere with multiplicity: zeros of the reduced
/// derivative numerator, poles of order m (multiplicity m - 1), and infinity
/// by degree bookkeeping. Multiplicities sum to 2 deg r - 2.
inline std::vector<CriticalPoint> critical_points(const RationalMap& r, double tol = kRootTol) {
  std::vector<CriticalPoint> out;
  const RationalMap dr = derivative(r);
  if (dr.num().degree() >= 1) {
    for (const Root& c : roots(dr.num(), tol).roots) out.push_back({c.location, c.multiplicity});
  }
  if (r.den().degree() >= 1) {
    for (const Root& p : roots(r.den(), tol).roots) {
      if (p.multiplicity > 1) out.push_back({p.location, p.multiplicity - 1});
    }
  }
  const int at_inf = local_degree_at_infinity(r) - 1;
  if (at_inf > 0) out.push_back({SpherePoint::infinity(), at_inf});
  return out;
}

inline int total_multiplicity(std::span<const CriticalPoint> pts) {
  int m = 0;
  for (const auto& c : pts) m += c.multiplicity;
  return m;
}

}  // namespace qdyn
