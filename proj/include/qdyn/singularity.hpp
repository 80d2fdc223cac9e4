#pragma once

// Boundary singularities of Ω: cusps (images of critical points of f on the
// unit circle) and tangential double points (two circle points with a common
// image). Orders come from the power law |σ∘σ(z) - z| ~ r^m along probe rays.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/boundary.hpp"
#include "qdyn/quadrature.hpp"

namespace qdyn {

enum class SingularityKind { Cusp, DoublePoint };

constexpr std::string_view to_string(SingularityKind k) {
  return k == SingularityKind::Cusp ? "Cusp" : "DoublePoint";
}

struct Singularity {
  SingularityKind kind = SingularityKind::Cusp;
  cplx location;
  std::vector<cplx> preimages;  // one circle point (cusp) or two (double point)
  cplx direction;               // unit cusp axis into Ω, or unit tangent at a double point
  int order_n = 0;              // 0 until fitted
  int delta = 0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool fit_unstable = false;
};

/// δ_p: ⌊n/4⌋ for cusps, ⌊n/2⌋ for double points.
inline int delta_weight(SingularityKind kind, int n) {
  if (n % 2 == 0 || n < 1) throw Error(ErrorKind::InvalidArgument, "delta_weight: order must be odd");
  if (kind == SingularityKind::Cusp) {
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "delta_weight: cusp order must be >= 3");
    return n / 4;
  }
  return n / 2;
}

/// One cusp per critical point of f on the unit circle.
inline std::vector<Singularity> find_cusps(const QuadratureDomain& q, double tol = 1e-7) {
  std::vector<Singularity> out;
  const RationalMap fpp = derivative(q.fprime());
  for (const CriticalPoint& c : q.crit_f()) {
    if (c.location.is_infinite()) continue;
    const cplx w = c.location.value();
    if (std::abs(std::abs(w) - 1.0) >= tol) continue;
    if (c.multiplicity >= 2)
      throw Error(ErrorKind::HigherOrderCircleCritical, "find_cusps: critical point of f on the circle has multiplicity >= 2");
    Singularity s;
    s.kind = SingularityKind::Cusp;
    s.location = eval_finite(q.f(), w);
    s.preimages = {w};
    const cplx axis = eval_finite(fpp, w) * w * w;
    s.direction = axis / std::abs(axis);
    out.push_back(s);
  }
  return out;
}

/// Tangential double points of ∂Ω found on a dense boundary sample.
/// Transversal crossings or overlapping arcs raise UnivalenceViolation.
inline std::vector<Singularity> find_double_points(const QuadratureDomain& q, int grid = 1 << 14, double tol = 1e-6) {
  const BoundarySamples b = sample_boundary(q.f(), grid);
  const auto contacts = boundary_contacts(q.f(), q.fprime(), b, q.options().guard, tol * b.scale);
  std::vector<Singularity> out;
  for (const Contact& c : contacts) {
    if (c.overlap) throw Error(ErrorKind::UnivalenceViolation, "find_double_points: boundary arcs overlap");
    if (c.sine >= q.options().tangential_sine)
      throw Error(ErrorKind::UnivalenceViolation, "find_double_points: transversal self-intersection of the boundary");
    const cplx w1 = std::polar(1.0, c.s);
    const cplx w2 = std::polar(1.0, c.t);
    if (std::abs(eval_finite(q.fprime(), w1)) <= 1e-6 || std::abs(eval_finite(q.fprime(), w2)) <= 1e-6) continue;
    bool dup = false;
    for (const Singularity& o : out) dup = dup || std::abs(o.location - c.point) < 1e-6 * b.scale;
    if (dup) continue;
    Singularity s;
    s.kind = SingularityKind::DoublePoint;
    s.location = c.point;
    s.preimages = {w1, w2};
    const cplx tan = eval_finite(q.fprime(), w1) * cplx(0.0, 1.0) * w1;
    s.direction = tan / std::abs(tan);
    out.push_back(s);
  }
  return out;
}

struct PowerFit {
  double slope = 0.0;
  double residual = 0.0;  // RMS deviation in log units
};

/// Least-squares slope of log|g(z) - z| against log r for z = p + r·dir.
inline PowerFit fit_germ_exponent(const std::function<SpherePoint(cplx)>& g, cplx p, cplx dir, const std::vector<double>& radii) {
  if (radii.size() < 3) throw Error(ErrorKind::InvalidArgument, "fit: need at least three radii");
  std::vector<double> xs, ys;
  for (const double r : radii) {
    const cplx z = p + r * dir;
    const SpherePoint gz = g(z);
    if (gz.is_infinite()) throw Error(ErrorKind::FitUnstable, "fit: probe left the finite plane");
    const double d = std::abs(gz.value() - z);
    if (!(d > 0.0)) throw Error(ErrorKind::FitUnstable, "fit: displacement vanished at a probe radius");
    xs.push_back(std::log(r));
    ys.push_back(std::log(d));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  PowerFit fit;
  fit.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (my + fit.slope * (xs[i] - mx));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

/// Nine geometric radii from 1e-2 down to 1e-4.
inline std::vector<double> default_fit_radii() {
  std::vector<double> r;
  for (int k = 0; k < 9; ++k) r.push_back(std::pow(10.0, -2.0 - 0.25 * k));
  return r;
}

struct OrderFit {
  int n = 0;
  double slope = 0.0;
  double residual = 0.0;
};

/// Converts a fitted slope to an odd order: n = round(2m) for cusps,
/// n = round(m) - 1 for double points. Never rounds across parity.
inline OrderFit order_from_slope(SingularityKind kind, const PowerFit& fit) {
  OrderFit o{0, fit.slope, fit.residual};
  if (fit.residual > 0.15) throw Error(ErrorKind::FitUnstable, "fit: residual above 0.15");
  // Admissible slopes: (n/2) for odd n >= 3, or (n + 1) for odd n >= 1.
  const double m = fit.slope;
  int n = 0;
  double admissible = 0.0;
  if (kind == SingularityKind::Cusp) {
    n = static_cast<int>(std::lround(2.0 * m));
    admissible = n / 2.0;
    if (n < 3 || n % 2 == 0) throw Error(ErrorKind::FitUnstable, "fit: cusp order is not an odd integer >= 3");
  } else {
    n = static_cast<int>(std::lround(m)) - 1;
    admissible = n + 1.0;
    if (n < 1 || n % 2 == 0) throw Error(ErrorKind::FitUnstable, "fit: double-point order is not an odd integer >= 1");
  }
  if (std::abs(m - admissible) > 0.2) throw Error(ErrorKind::FitUnstable, "fit: slope too far from an admissible order");
  o.n = n;
  return o;
}

/// σ∘σ, failing with FitUnstable when the first reflection leaves Ω.
inline SpherePoint sigma_twice(const QuadratureDomain& q, cplx z) {
  const SpherePoint zp(z);
  const Membership m1 = membership(q, zp);
  if (m1.tag != Region::OmegaInterior) throw Error(ErrorKind::FitUnstable, "fit: probe point is not in Ω");
  const SpherePoint s1 = reflect_from(q, zp, m1);
  const Membership m2 = membership(q, s1);
  if (m2.tag == Region::DropletInterior) throw Error(ErrorKind::FitUnstable, "fit: first reflection left the closed domain");
  return reflect_from(q, s1, m2);
}

/// Power law of σ∘σ - id along the cusp axis, or along both normals of a
/// double point with the slopes averaged.
inline PowerFit probe_fit(const QuadratureDomain& q, const Singularity& s, const std::vector<double>& radii = default_fit_radii()) {
  const auto g = [&q](cplx z) { return sigma_twice(q, z); };
  PowerFit fit;
  if (s.kind == SingularityKind::Cusp) {
    fit = fit_germ_exponent(g, s.location, s.direction, radii);
  } else {
    const cplx nrm = s.direction * cplx(0.0, 1.0);
    const PowerFit a = fit_germ_exponent(g, s.location, nrm, radii);
    const PowerFit b = fit_germ_exponent(g, s.location, -nrm, radii);
    fit.slope = 0.5 * (a.slope + b.slope);
    fit.residual = std::max(a.residual, b.residual);
  }
  return fit;
}

inline OrderFit fit_order(const QuadratureDomain& q, const Singularity& s, const std::vector<double>& radii = default_fit_radii()) {
  return order_from_slope(s.kind, probe_fit(q, s, radii));
}

/// Fills order, δ and fit diagnostics. An unstable fit leaves δ = 0 and
/// sets the flag rather than throwing.
inline void classify_singularity(const QuadratureDomain& q, Singularity& s) {
  try {
    const PowerFit fit = probe_fit(q, s);
    s.slope = fit.slope;
    s.residual = fit.residual;
    const OrderFit o = order_from_slope(s.kind, fit);
    s.order_n = o.n;
    s.delta = delta_weight(s.kind, o.n);
    s.fit_unstable = false;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FitUnstable) throw;
    s.fit_unstable = true;
    s.delta = 0;
  }
}

/// Cusps and double points of ∂Ω, each classified.
inline std::vector<Singularity> find_singularities(const QuadratureDomain& q, int grid = 1 << 14) {
  std::vector<Singularity> all = find_cusps(q);
  for (Singularity& d : find_double_points(q, grid)) all.push_back(d);
  for (Singularity& s : all) classify_singularity(q, s);
  return all;
}

}  // namespace qdyn
