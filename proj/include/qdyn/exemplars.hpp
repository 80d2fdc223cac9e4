#pragma once

// Worked examples: the two cubic quadrature maps and a quartic cusped one,
// a symmetric pinching family, the Nielsen and anti-Farey circle maps and the
// critically fixed Apollonian anti-rational map.

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/boundary.hpp"
#include "qdyn/dynamics.hpp"
#include "qdyn/quadrature.hpp"
#include "qdyn/rational.hpp"
#include "qdyn/singularity.hpp"

namespace qdyn {

inline const cplx kOmega = std::polar(1.0, 2.0 * kPi / 3.0);

// ---------------------------------------------------------------------------
// Reflections in geodesics of the disk

/// Reflection in a circle orthogonal to the unit circle.
struct GeodesicReflection {
  cplx center;
  double radius = 0.0;

  /// Circle through the ideal points a, b (|a| = |b| = 1, a != ±b):
  /// c = (a + b) / (1 + Re(a b̄)), r² = |c|² - 1.
  static GeodesicReflection from_endpoints(cplx a, cplx b) {
    const double denom = 1.0 + (a * std::conj(b)).real();
    if (std::abs(denom) < 1e-14) throw Error(ErrorKind::InvalidArgument, "geodesic: endpoints are antipodal");
    const cplx c = (a + b) / denom;
    return {c, std::sqrt(std::norm(c) - 1.0)};
  }

  cplx operator()(cplx z) const { return center + radius * radius / std::conj(z - center); }

  /// Negative inside the reflecting disk, zero on the geodesic.
  double side(cplx z) const { return std::norm(z - center) - radius * radius; }
};

/// The three sides of the ideal triangle with vertices 1, ω, ω².
inline const std::array<GeodesicReflection, 3>& triangle_sides() {
  static const std::array<GeodesicReflection, 3> sides = {
      GeodesicReflection::from_endpoints(1.0, kOmega),
      GeodesicReflection::from_endpoints(kOmega, kOmega * kOmega),
      GeodesicReflection::from_endpoints(kOmega * kOmega, 1.0),
  };
  return sides;
}

/// Nielsen map: reflect in the side whose closed disk contains z.
inline cplx nielsen(cplx z) {
  const auto& sides = triangle_sides();
  int best = -1;
  double best_side = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double s = sides[static_cast<std::size_t>(j)].side(z) / (sides[static_cast<std::size_t>(j)].radius * sides[static_cast<std::size_t>(j)].radius);
    if (s <= 1e-15 && (best < 0 || s < best_side)) {
      best = j;
      best_side = s;
    }
  }
  if (best < 0) throw Error(ErrorKind::InsideFundamentalDomain, "nielsen: point is inside the ideal triangle");
  if (std::abs(best_side) <= 1e-15) return z;  // on a side: fixed
  return sides[static_cast<std::size_t>(best)](z);
}

/// Anti-Farey map on the k-th cube-root branch (k = 0 is principal).
inline cplx anti_farey_branch(cplx z, int k) {
  const cplx w = std::pow(z, 1.0 / 3.0) * std::pow(kOmega, k);
  const cplx n = nielsen(w);
  return n * n * n;
}

/// ℱ(z) = 𝒩(w)³ for a cube root w of z.
inline cplx anti_farey(cplx z) {
  if (z == cplx(0.0)) throw Error(ErrorKind::InsideFundamentalDomain, "anti_farey: point is inside the fundamental domain");
  return anti_farey_branch(z, 0);
}

// ---------------------------------------------------------------------------
// Apollonian anti-rational map R(z) = r(conj z), r(u) = 3u² / (2u³ + 1)

inline const RationalMap& apollonian_r() {
  static const RationalMap r(Polynomial{0.0, 0.0, 3.0}, Polynomial{1.0, 0.0, 0.0, 2.0});
  return r;
}

inline SpherePoint apollonian_R(const SpherePoint& z) {
  if (z.is_infinite()) return eval(apollonian_r(), z);
  return eval(apollonian_r(), SpherePoint(std::conj(z.value())));
}

inline cplx apollonian_multiplier_abs_input(cplx z) { return eval_finite(derivative(apollonian_r()), std::conj(z)); }

enum class FixedPointType { Superattracting, Attracting, Indifferent, Repelling };

constexpr std::string_view to_string(FixedPointType t) {
  switch (t) {
    case FixedPointType::Superattracting: return "superattracting";
    case FixedPointType::Attracting: return "attracting";
    case FixedPointType::Indifferent: return "indifferent";
    case FixedPointType::Repelling: return "repelling";
  }
  return "unknown";
}

struct FixedPoint {
  cplx z;
  double multiplier = 0.0;  // |r'(z̄)|; the second iterate has multiplier squared
  FixedPointType type = FixedPointType::Repelling;
};

namespace detail {

// Newton for the antiholomorphic equation r(z̄) = z: with F = r(z̄) - z and
// a = r'(z̄), the step is h = -(F + a F̄) / (|a|² - 1).
inline std::optional<cplx> apollonian_newton(cplx z) {
  const RationalMap& r = apollonian_r();
  static const RationalMap dr = derivative(r);
  for (int it = 0; it < 100; ++it) {
    const cplx zb = std::conj(z);
    const cplx F = eval_finite(r, zb) - z;
    if (!std::isfinite(F.real()) || !std::isfinite(F.imag())) return std::nullopt;
    if (std::abs(F) < 1e-15 * std::max(1.0, std::abs(z))) return z;
    const cplx a = eval_finite(dr, zb);
    const double den = std::norm(a) - 1.0;
    if (std::abs(den) < 1e-300) return std::nullopt;
    const cplx h = -(F + a * std::conj(F)) / den;
    z += h;
    if (std::abs(z) > 1e6) return std::nullopt;
    if (std::abs(h) < 1e-16 * std::max(1.0, std::abs(z))) return z;
  }
  const cplx F = eval_finite(r, std::conj(z)) - z;
  if (std::abs(F) < 1e-12) return z;
  return std::nullopt;
}

}  // namespace detail

/// All solutions of R(z) = z: Newton from a 40×40 grid on [-2, 2]², closed
/// under the rotation and conjugation symmetries of R.
inline std::vector<FixedPoint> apollonian_fixed_points() {
  std::vector<cplx> found;
  auto add = [&](cplx z) {
    const auto pol = detail::apollonian_newton(z);
    if (!pol) return;
    for (const cplx f : found)
      if (std::abs(f - *pol) < 1e-8) return;
    found.push_back(*pol);
  };
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) add({-2.0 + 4.0 * (i + 0.5) / 40.0, -2.0 + 4.0 * (j + 0.5) / 40.0});
  const std::vector<cplx> base = found;
  for (const cplx z : base) {
    add(kOmega * z);
    add(kOmega * kOmega * z);
    add(std::conj(z));
  }
  const RationalMap dr = derivative(apollonian_r());
  std::vector<FixedPoint> out;
  for (const cplx z : found) {
    FixedPoint p;
    p.z = z;
    p.multiplier = std::abs(eval_finite(dr, std::conj(z)));
    if (p.multiplier < 1e-8) {
      p.type = FixedPointType::Superattracting;
    } else if (p.multiplier < 1.0 - 1e-9) {
      p.type = FixedPointType::Attracting;
    } else if (p.multiplier > 1.0 + 1e-9) {
      p.type = FixedPointType::Repelling;
    } else {
      p.type = FixedPointType::Indifferent;
    }
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Pinching family f_c(w) = w - c/(w - q) - c/(w + q)

inline RationalMap pinch_map(double c, double q) {
  const Polynomial den{cplx(-q * q), 0.0, 1.0};
  return RationalMap(den * Polynomial{0.0, 1.0} - Polynomial{0.0, cplx(2.0 * c)}, den);
}

/// Signed boundary gap: the smallest self-distance of f_c(∂𝔻) between
/// well-separated arcs, replaced by minus the crossing sine once two arcs
/// meet. Positive means the boundary is still a Jordan curve.
inline double pinch_signed_gap(double c, double q, int samples = 1 << 14) {
  const RationalMap f = pinch_map(c, q);
  const RationalMap fp = derivative(f);
  const BoundarySamples b = sample_boundary(f, samples);
  const auto contacts = boundary_contacts(f, fp, b, 10, std::numeric_limits<double>::infinity());
  double gap = std::numeric_limits<double>::infinity();
  double worst_sine = -1.0;
  for (const Contact& k : contacts) {
    if (k.residual <= 1e-15 * b.scale) {
      worst_sine = std::max(worst_sine, k.sine);
    } else {
      gap = std::min(gap, k.residual);
    }
  }
  if (worst_sine >= 0.0) return -std::max(worst_sine, 1e-300);
  return gap;
}

struct PinchResult {
  double q = 0.0;
  double c_star = 0.0;  // last parameter with a Jordan boundary
  double c_hi = 0.0;    // first parameter with a self-contact
  int iterations = 0;
  Singularity double_point;
};

/// Bisection on the sign of pinch_signed_gap.
inline PinchResult pinch_search(double q, double c_lo, double c_hi, double tol = 1e-12) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::InvalidArgument, "pinch_search: need 0 < q < 1");
  if (!(c_lo < c_hi)) throw Error(ErrorKind::BadBracket, "pinch_search: empty bracket");
  if (!(pinch_signed_gap(c_lo, q) > 0.0)) throw Error(ErrorKind::BadBracket, "pinch_search: boundary already touches at c_lo");
  if (pinch_signed_gap(c_hi, q) > 0.0) throw Error(ErrorKind::BadBracket, "pinch_search: boundary still a Jordan curve at c_hi");
  PinchResult res;
  res.q = q;
  while (c_hi - c_lo >= tol) {
    const double mid = 0.5 * (c_lo + c_hi);
    if (mid <= c_lo || mid >= c_hi) break;
    if (pinch_signed_gap(mid, q) > 0.0) {
      c_lo = mid;
    } else {
      c_hi = mid;
    }
    ++res.iterations;
  }
  res.c_star = c_lo;
  res.c_hi = c_hi;
  const QuadratureDomain dom = build_domain(pinch_map(c_lo, q));
  const auto dps = find_double_points(dom);
  if (dps.size() != 1) throw Error(ErrorKind::BadBracket, "pinch_search: expected exactly one double point at the transition");
  res.double_point = dps.front();
  classify_singularity(dom, res.double_point);
  return res;
}

/// Pinch transition at q = 0.5 over the bracket (0.01, 0.5), computed once.
inline const PinchResult& pinch_half() {
  static const PinchResult r = pinch_search(0.5, 0.01, 0.5);
  return r;
}

// ---------------------------------------------------------------------------
// Pictures of the circle maps and the Apollonian map

enum class GroupMap { Nielsen, AntiFarey, Apollonian };

inline std::optional<GroupMap> parse_group_map(std::string_view s) {
  if (s == "nielsen") return GroupMap::Nielsen;
  if (s == "anti-farey" || s == "antifarey") return GroupMap::AntiFarey;
  if (s == "apollonian") return GroupMap::Apollonian;
  return std::nullopt;
}

constexpr std::string_view to_string(GroupMap g) {
  switch (g) {
    case GroupMap::Nielsen: return "nielsen";
    case GroupMap::AntiFarey: return "anti-farey";
    case GroupMap::Apollonian: return "apollonian";
  }
  return "unknown";
}

struct GroupRaster {
  Bounds bounds;
  int nx = 0, ny = 0;
  int max_iter = 0;
  std::vector<Rgb> colors;
  std::vector<std::int32_t> label;  // rank to the fundamental domain, basin index, or -1
};

/// Escape-time picture. For the circle maps a pixel is coloured by the
/// number of steps needed to enter the fundamental domain (rank parity as in
/// the quadrature pictures, rank 0 green, outside the disk white). For the
/// Apollonian map pixels are coloured by the fixed critical point attracting
/// them.
inline GroupRaster group_raster(GroupMap g, const Bounds& b, int nx, int ny, int max_iter) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgument, "render: resolution must be positive");
  GroupRaster r;
  r.bounds = b;
  r.nx = nx;
  r.ny = ny;
  r.max_iter = max_iter;
  r.colors.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), Rgb{0, 0, 0});
  r.label.assign(r.colors.size(), -1);
  static const std::array<cplx, 4> crit = {cplx(0.0), cplx(1.0), kOmega, kOmega * kOmega};
  static const std::array<Rgb, 4> basin = {Rgb{200, 60, 60}, Rgb{60, 160, 60}, Rgb{60, 90, 200}, Rgb{220, 180, 40}};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
      cplx z(b.center.real() - 0.5 * b.width + (i + 0.5) * b.width / nx, b.center.imag() + 0.5 * b.height - (j + 0.5) * b.height / ny);
      if (g == GroupMap::Apollonian) {
        SpherePoint p(z);
        int hit = -1;
        for (int k = 0; k <= max_iter && hit < 0; ++k) {
          if (p.is_finite())
            for (std::size_t c = 0; c < crit.size(); ++c)
              if (std::abs(p.value() - crit[c]) < 1e-6) hit = static_cast<int>(c);
          if (hit < 0) p = apollonian_R(p);
        }
        r.label[idx] = hit;
        r.colors[idx] = hit >= 0 ? basin[static_cast<std::size_t>(hit)] : Rgb{128, 128, 128};
        continue;
      }
      if (std::abs(z) > 1.0) {
        r.colors[idx] = Rgb{255, 255, 255};
        continue;
      }
      int rank = -1;
      for (int k = 0; k <= max_iter; ++k) {
        try {
          z = g == GroupMap::Nielsen ? nielsen(z) : anti_farey(z);
        } catch (const Error&) {
          rank = k;
          break;
        }
      }
      r.label[idx] = rank;
      r.colors[idx] = rank < 0 ? palette(Cell::NonEscaping, -1) : rank == 0 ? palette(Cell::DropletInterior, -1) : palette(Cell::Escaping, rank);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Catalog

enum class EntryKind { QuadratureMap, CircleMap, AntiRational };

constexpr std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::QuadratureMap: return "QuadratureMap";
    case EntryKind::CircleMap: return "CircleMap";
    case EntryKind::AntiRational: return "AntiRational";
  }
  return "Unknown";
}

/// Integer invariants an entry is expected to reproduce.
struct Expected {
  std::optional<int> d_f, n_Omega, conn, num_cusps, num_doubles, delta;
  std::optional<bool> node_at_infinity;
};

struct CatalogEntry {
  std::string name;
  EntryKind kind = EntryKind::QuadratureMap;
  std::optional<RationalMap> map;  // uniformizing map, or r for R(z) = r(z̄)
  std::string description;
  Expected expected;
  std::optional<double> parameter;
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    v.push_back({"quarter-cubed", EntryKind::QuadratureMap,
                 RationalMap(Polynomial{1.0, 0.0, 0.0, 4.0}, Polynomial{0.0, 0.0, 4.0}),
                 "f(w) = w + 1/(4w^2): Jordan droplet, superattracting fixed point at infinity",
                 {3, 1, 1, 0, 0, 0, true}, std::nullopt});
    v.push_back({"half-cubed", EntryKind::QuadratureMap,
                 RationalMap(Polynomial{1.0, 0.0, 0.0, 2.0}, Polynomial{0.0, 0.0, 2.0}),
                 "f(w) = w + 1/(2w^2): deltoid droplet with three (3,2) cusps", {3, 1, 1, 3, 0, 0, true}, std::nullopt});
    v.push_back({"quartic-cusped", EntryKind::QuadratureMap,
                 RationalMap(Polynomial{1.0, 0.0, 0.0, 0.0, 3.0}, Polynomial{0.0, 0.0, 0.0, 3.0}),
                 "f(w) = w + 1/(3w^3): astroid-type droplet with four cusps", {4, 1, 1, 4, 0, 0, true}, std::nullopt});
    const PinchResult& p = pinch_half();
    v.push_back({"pinch", EntryKind::QuadratureMap, pinch_map(p.c_star, 0.5),
                 "f(w) = w - c/(w - 1/2) - c/(w + 1/2) at the pinching parameter: one tangential double point",
                 {3, 2, 1, 0, 1, 0, false}, p.c_star});
    v.push_back({"pinch-subcritical", EntryKind::QuadratureMap, pinch_map(0.2, 0.5),
                 "f(w) = w - c/(w - 1/2) - c/(w + 1/2) at c = 0.2: Jordan droplet, two nodes",
                 {3, 2, 1, 0, 0, 0, false}, 0.2});
    v.push_back({"nielsen", EntryKind::CircleMap, std::nullopt, "Nielsen map of the ideal triangle with vertices at the cube roots of unity",
                 {}, std::nullopt});
    v.push_back({"anti-farey", EntryKind::CircleMap, std::nullopt, "anti-Farey map: the Nielsen map modulo rotation by 2pi/3",
                 {}, std::nullopt});
    v.push_back({"apollonian", EntryKind::AntiRational, apollonian_r(),
                 "R(z) = 3 conj(z)^2 / (2 conj(z)^3 + 1): critically fixed anti-rational map of degree 3", {}, std::nullopt});
    return v;
  }();
  return entries;
}

inline std::optional<CatalogEntry> lookup(std::string_view name) {
  for (const CatalogEntry& e : catalog())
    if (e.name == name) return e;
  return std::nullopt;
}

}  // namespace qdyn
