#pragma once

// Boundary curve f(e^{iθ}) as a sampled polyline, with self-contact
// detection. A contact is a parameter pair (s, t) with f(e^{is}) close to
// f(e^{it}) and s, t well apart; contacts are refined on the analytic curve
// by Levenberg-Marquardt, so the reported tangent angle and residual do not
// depend on the sampling density.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "qdyn/rational.hpp"

namespace qdyn {

struct BoundarySamples {
  std::vector<double> theta;
  std::vector<cplx> z;
  double max_step = 0.0;  // longest polyline segment
  double scale = 1.0;     // max(1, max |z|)

  int size() const { return static_cast<int>(z.size()); }
};

inline BoundarySamples sample_boundary(const RationalMap& f, int n) {
  if (n < 8) throw Error(ErrorKind::InvalidArgument, "sample_boundary: need at least 8 samples");
  BoundarySamples b;
  b.theta.resize(static_cast<std::size_t>(n));
  b.z.resize(static_cast<std::size_t>(n));
  double scale = 1.0;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    b.theta[static_cast<std::size_t>(k)] = th;
    const SpherePoint v = eval(f, SpherePoint(std::polar(1.0, th)));
    if (v.is_infinite()) throw Error(ErrorKind::UnivalenceViolation, "sample_boundary: pole of f on the unit circle");
    b.z[static_cast<std::size_t>(k)] = v.value();
    scale = std::max(scale, std::abs(v.value()));
  }
  for (int k = 0; k < n; ++k) {
    b.max_step = std::max(b.max_step, std::abs(b.z[static_cast<std::size_t>((k + 1) % n)] - b.z[static_cast<std::size_t>(k)]));
  }
  b.scale = scale;
  return b;
}

/// Refined contact between two boundary arcs.
struct Contact {
  double s = 0.0;         // parameter on the first arc
  double t = 0.0;         // parameter on the second arc
  cplx point;             // midpoint of f(e^{is}), f(e^{it})
  double residual = 0.0;  // |f(e^{is}) - f(e^{it})|
  double sine = 0.0;      // |sin| of the angle between the two tangents
  bool overlap = false;   // arcs coincide on a neighbourhood
  bool from_crossing = false;
};

inline double cyclic_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

inline int cyclic_index_distance(int i, int j, int n) {
  const int d = std::abs(i - j) % n;
  return std::min(d, n - d);
}

namespace detail {

struct CurvePoint {
  cplx z;
  cplx dz;  // d/dθ f(e^{iθ})
};

inline CurvePoint curve_at(const RationalMap& f, const RationalMap& fp, double th) {
  const cplx w = std::polar(1.0, th);
  return {eval_finite(f, w), eval_finite(fp, w) * cplx(0.0, 1.0) * w};
}

inline std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
  return (cx << 32) ^ (cy & 0xffffffffLL);
}

inline double orient(cplx a, cplx b, cplx c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) - (b.imag() - a.imag()) * (c.real() - a.real());
}

}  // namespace detail

/// Levenberg-Marquardt on min |f(e^{is}) - f(e^{it})|^2. Converges to an
/// exact solution at transversal crossings and to the gap minimum at
/// tangential near-contacts.
inline Contact refine_contact(const RationalMap& f, const RationalMap& fp, double s, double t) {
  auto a = detail::curve_at(f, fp, s);
  auto b = detail::curve_at(f, fp, t);
  cplx r = a.z - b.z;
  double lambda = 1e-6;
  for (int it = 0; it < 300; ++it) {
    const double rr = std::norm(r);
    if (rr == 0.0) break;
    // J = [dz_a, -dz_b] as real 2x2.
    const cplx ja = a.dz;
    const cplx jb = -b.dz;
    const double a11 = std::norm(ja);
    const double a22 = std::norm(jb);
    const double a12 = (std::conj(ja) * jb).real();
    const double g1 = (std::conj(ja) * r).real();
    const double g2 = (std::conj(jb) * r).real();
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      const double m11 = a11 * (1.0 + lambda) + 1e-300;
      const double m22 = a22 * (1.0 + lambda) + 1e-300;
      const double det = m11 * m22 - a12 * a12;
      if (det == 0.0 || !std::isfinite(det)) {
        lambda *= 10.0;
        continue;
      }
      const double ds = -(m22 * g1 - a12 * g2) / det;
      const double dt = -(m11 * g2 - a12 * g1) / det;
      const auto na = detail::curve_at(f, fp, s + ds);
      const auto nb = detail::curve_at(f, fp, t + dt);
      const cplx nr = na.z - nb.z;
      if (std::norm(nr) < rr) {
        s += ds;
        t += dt;
        a = na;
        b = nb;
        r = nr;
        lambda = std::max(lambda / 5.0, 1e-12);
        improved = (std::abs(ds) + std::abs(dt)) > 1e-17;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  Contact c;
  c.s = std::remainder(s, 2.0 * kPi);
  if (c.s < 0) c.s += 2.0 * kPi;
  c.t = std::remainder(t, 2.0 * kPi);
  if (c.t < 0) c.t += 2.0 * kPi;
  c.point = 0.5 * (a.z + b.z);
  c.residual = std::abs(r);
  const double na = std::abs(a.dz);
  const double nb = std::abs(b.dz);
  c.sine = (na > 0 && nb > 0) ? std::abs((std::conj(a.dz) * b.dz).imag()) / (na * nb) : 0.0;
  return c;
}

/// Candidate contacts of the sampled polyline: segment crossings (touching
/// and collinear overlap included) plus close vertex pairs that are interior
/// local minima of |z_i - z_j| over the index grid. Pairs within `guard`
/// samples of each other are ignored.
inline std::vector<std::pair<double, double>> contact_candidates(const BoundarySamples& b, int guard,
                                                                 std::vector<char>* is_crossing = nullptr) {
  const int n = b.size();
  const double h = 2.0 * kPi / n;
  const double cell = std::max(b.max_step, 1e-300);
  std::vector<std::pair<double, double>> out;
  std::vector<char> crossing_flags;

  // Segment crossings via a uniform grid.
  {
    std::vector<std::pair<std::int64_t, int>> entries;
    entries.reserve(static_cast<std::size_t>(n) * 4);
    for (int i = 0; i < n; ++i) {
      const cplx p = b.z[static_cast<std::size_t>(i)];
      const cplx q = b.z[static_cast<std::size_t>((i + 1) % n)];
      const auto x0 = static_cast<std::int64_t>(std::floor(std::min(p.real(), q.real()) / cell));
      const auto x1 = static_cast<std::int64_t>(std::floor(std::max(p.real(), q.real()) / cell));
      const auto y0 = static_cast<std::int64_t>(std::floor(std::min(p.imag(), q.imag()) / cell));
      const auto y1 = static_cast<std::int64_t>(std::floor(std::max(p.imag(), q.imag()) / cell));
      for (auto cx = x0; cx <= x1; ++cx)
        for (auto cy = y0; cy <= y1; ++cy) entries.emplace_back(detail::cell_key(cx, cy), i);
    }
    std::sort(entries.begin(), entries.end());
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t lo = 0; lo < entries.size();) {
      std::size_t hi = lo;
      while (hi < entries.size() && entries[hi].first == entries[lo].first) ++hi;
      for (std::size_t u = lo; u < hi; ++u) {
        for (std::size_t v = u + 1; v < hi; ++v) {
          const int i = entries[u].second;
          const int j = entries[v].second;
          if (cyclic_index_distance(i, j, n) <= guard) continue;
          pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
      }
      lo = hi;
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const auto& [i, j] : pairs) {
      const cplx a = b.z[static_cast<std::size_t>(i)];
      const cplx a2 = b.z[static_cast<std::size_t>((i + 1) % n)];
      const cplx c = b.z[static_cast<std::size_t>(j)];
      const cplx c2 = b.z[static_cast<std::size_t>((j + 1) % n)];
      const double o1 = detail::orient(a, a2, c);
      const double o2 = detail::orient(a, a2, c2);
      const double o3 = detail::orient(c, c2, a);
      const double o4 = detail::orient(c, c2, a2);
      double alpha = 0.5, beta = 0.5;
      if (o1 == 0.0 && o2 == 0.0) {
        // Collinear: overlap of projections.
        const cplx dir = a2 - a;
        const double len2 = std::norm(dir);
        if (len2 == 0.0) continue;
        const double p1 = (std::conj(dir) * (c - a)).real() / len2;
        const double p2 = (std::conj(dir) * (c2 - a)).real() / len2;
        const double lo_p = std::max(0.0, std::min(p1, p2));
        const double hi_p = std::min(1.0, std::max(p1, p2));
        if (lo_p > hi_p) continue;
        alpha = 0.5 * (lo_p + hi_p);
      } else if (o1 * o2 <= 0.0 && o3 * o4 <= 0.0) {
        alpha = (o3 == o4) ? 0.5 : o3 / (o3 - o4);
        beta = (o1 == o2) ? 0.5 : o1 / (o1 - o2);
      } else {
        continue;
      }
      out.emplace_back(b.theta[static_cast<std::size_t>(i)] + alpha * h, b.theta[static_cast<std::size_t>(j)] + beta * h);
      crossing_flags.push_back(1);
    }
  }

  // Close vertex pairs that are local minima of the pair distance.
  {
    const double radius = 1.5 * cell;
    std::vector<std::pair<std::int64_t, int>> entries;
    entries.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const cplx p = b.z[static_cast<std::size_t>(i)];
      entries.emplace_back(detail::cell_key(static_cast<std::int64_t>(std::floor(p.real() / radius)),
                                            static_cast<std::int64_t>(std::floor(p.imag() / radius))),
                           i);
    }
    std::sort(entries.begin(), entries.end());
    auto lookup = [&](std::int64_t key) {
      return std::equal_range(entries.begin(), entries.end(), std::pair<std::int64_t, int>(key, -1),
                              [](const auto& x, const auto& y) { return x.first < y.first; });
    };
    auto dist = [&](int i, int j) {
      return std::abs(b.z[static_cast<std::size_t>(((i % n) + n) % n)] - b.z[static_cast<std::size_t>(((j % n) + n) % n)]);
    };
    for (int i = 0; i < n; ++i) {
      const cplx p = b.z[static_cast<std::size_t>(i)];
      const auto cx = static_cast<std::int64_t>(std::floor(p.real() / radius));
      const auto cy = static_cast<std::int64_t>(std::floor(p.imag() / radius));
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          auto [lo, hi] = lookup(detail::cell_key(cx + dx, cy + dy));
          for (auto it = lo; it != hi; ++it) {
            const int j = it->second;
            if (j <= i) continue;
            if (cyclic_index_distance(i, j, n) <= guard + 1) continue;
            const double d0 = dist(i, j);
            if (d0 >= radius) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di) {
              for (int dj = -1; dj <= 1 && is_min; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (cyclic_index_distance(i + di, j + dj, n) <= guard) {
                  is_min = false;
                  break;
                }
                if (dist(i + di, j + dj) < d0) is_min = false;
              }
            }
            if (is_min) {
              out.emplace_back(b.theta[static_cast<std::size_t>(i)], b.theta[static_cast<std::size_t>(j)]);
              crossing_flags.push_back(0);
            }
          }
        }
      }
    }
  }
  if (is_crossing) *is_crossing = std::move(crossing_flags);
  return out;
}

/// Refined, de-duplicated self-contacts of the boundary curve. Only
/// candidates whose refinement stays apart by more than `guard` samples and
/// whose residual is below `accept` are returned.
inline std::vector<Contact> boundary_contacts(const RationalMap& f, const RationalMap& fp, const BoundarySamples& b,
                                              int guard, double accept) {
  const int n = b.size();
  const double h = 2.0 * kPi / n;
  std::vector<char> flags;
  const auto cands = contact_candidates(b, guard, &flags);
  std::vector<Contact> out;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    Contact c = refine_contact(f, fp, cands[k].first, cands[k].second);
    c.from_crossing = flags[k] != 0;
    if (cyclic_distance(c.s, c.t) <= guard * h) continue;
    if (!(c.residual < accept)) continue;
    bool dup = false;
    for (Contact& o : out) {
      const bool same = (cyclic_distance(o.s, c.s) < 1e-6 && cyclic_distance(o.t, c.t) < 1e-6) ||
                        (cyclic_distance(o.s, c.t) < 1e-6 && cyclic_distance(o.t, c.s) < 1e-6);
      if (same) {
        o.from_crossing = o.from_crossing || c.from_crossing;
        if (c.residual < o.residual) {
          const bool fc = o.from_crossing;
          o = c;
          o.from_crossing = fc;
        }
        dup = true;
        break;
      }
    }
    if (dup) continue;
    // Overlapping arcs: the two branches still agree a few samples away.
    const double step = 8.0 * h;
    const cplx zs = eval_finite(f, std::polar(1.0, c.s + step));
    const double tol = 1e-9 * b.scale;
    const bool fwd = std::abs(zs - eval_finite(f, std::polar(1.0, c.t + step))) < tol;
    const bool bwd = std::abs(zs - eval_finite(f, std::polar(1.0, c.t - step))) < tol;
    c.overlap = fwd || bwd;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Contact& x, const Contact& y) {
    return std::tie(x.s, x.t) < std::tie(y.s, y.t);
  });
  return out;
}

}  // namespace qdyn
