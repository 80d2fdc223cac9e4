#pragma once

// Orbits of the Schwarz reflection and escape-time rasters.
//
// A point escapes at rank k when σ^k(z) is the first iterate in the closed
// droplet. Non-escaping is a budget verdict.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string_view>
#include <thread>
#include <vector>

#include "qdyn/quadrature.hpp"
#include "qdyn/singularity.hpp"

namespace qdyn {

enum class Outcome { EscapedAtRank, NonEscaping, ConvergedToSingular, ConvergedToCycle, LeftNumericRange };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::EscapedAtRank: return "EscapedAtRank";
    case Outcome::NonEscaping: return "NonEscaping";
    case Outcome::ConvergedToSingular: return "ConvergedToSingular";
    case Outcome::ConvergedToCycle: return "ConvergedToCycle";
    case Outcome::LeftNumericRange: return "LeftNumericRange";
  }
  return "Unknown";
}

struct OrbitRecord {
  SpherePoint start;
  std::vector<SpherePoint> points;  // points[0] = start; empty when recording is off
  Outcome outcome = Outcome::NonEscaping;
  int rank = -1;       // EscapedAtRank
  int budget = 0;      // NonEscaping
  int period = 0;      // ConvergedToCycle
  SpherePoint representative;
  int singular = -1;   // index into the dynamics singularity list
  bool landed = false; // ConvergedToSingular by hitting the point exactly
  int steps = 0;
};

struct DynamicsOptions {
  int max_iter = 200;
  double tol = 1e-9;              // successive-point chordal threshold
  double singular_radius = 1e-4;
  double landing_radius = 1e-6;
  int singular_tail = 16;         // trailing iterates that must stay near a singularity
  double infinity_guard = 1e15;   // |z| beyond this converges to a fixed ∞
  double range_guard = 1e100;
  bool record_points = true;
};

/// Domain plus the data the iteration consults on every step.
class Dynamics {
 public:
  explicit Dynamics(const QuadratureDomain& q, std::vector<Singularity> sing = {})
      : q_(&q), sing_(std::move(sing)), infinity_fixed_(eval(q.f(), SpherePoint(0.0)).is_infinite()) {}

  const QuadratureDomain& domain() const { return *q_; }
  const std::vector<Singularity>& singularities() const { return sing_; }
  bool infinity_fixed() const { return infinity_fixed_; }

  int nearest_singularity(const SpherePoint& z, double radius) const {
    if (z.is_infinite()) return -1;
    int best = -1;
    double bd = radius;
    for (std::size_t i = 0; i < sing_.size(); ++i) {
      const double d = std::abs(z.value() - sing_[i].location);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

 private:
  const QuadratureDomain* q_;
  std::vector<Singularity> sing_;
  bool infinity_fixed_;
};

inline OrbitRecord classify(const Dynamics& dyn, const SpherePoint& z0, const DynamicsOptions& opts = {}) {
  const QuadratureDomain& q = dyn.domain();
  OrbitRecord rec;
  rec.start = z0;
  SpherePoint z = z0;
  if (opts.record_points) rec.points.push_back(z);

  // Brent cycle detection state.
  SpherePoint tortoise = z;
  int power = 1, lam = 0;
  // Recent iterates for period reduction and singular tails.
  std::deque<SpherePoint> recent;
  const int keep = std::max(64, opts.singular_tail);
  recent.push_back(z);

  auto finish_cycle = [&](int period, const SpherePoint& rep) {
    const int s = dyn.nearest_singularity(rep, opts.singular_radius);
    if (s >= 0) {
      rec.outcome = Outcome::ConvergedToSingular;
      rec.singular = s;
    } else {
      rec.outcome = Outcome::ConvergedToCycle;
      rec.period = period;
    }
    rec.representative = rep;
  };

  auto singular_tail = [&]() -> int {
    if (static_cast<int>(recent.size()) < opts.singular_tail) return -1;
    const int s = dyn.nearest_singularity(recent.back(), opts.singular_radius);
    if (s < 0) return -1;
    const cplx p = dyn.singularities()[static_cast<std::size_t>(s)].location;
    double prev = std::numeric_limits<double>::infinity();
    for (auto it = recent.end() - opts.singular_tail; it != recent.end(); ++it) {
      if (it->is_infinite()) return -1;
      const double d = std::abs(it->value() - p);
      if (d >= opts.singular_radius || d > prev) return -1;
      prev = d;
    }
    return s;
  };

  for (int k = 0;; ++k) {
    rec.steps = k;
    if (z.is_infinite() && dyn.infinity_fixed()) {
      rec.outcome = Outcome::ConvergedToCycle;
      rec.period = 1;
      rec.representative = z;
      return rec;
    }
    const Membership m = membership(q, z);
    if (m.tag != Region::OmegaInterior) {
      const int s = (m.tag == Region::Boundary) ? dyn.nearest_singularity(z, opts.landing_radius) : -1;
      if (s >= 0) {
        rec.outcome = Outcome::ConvergedToSingular;
        rec.singular = s;
        rec.landed = true;
        rec.representative = z;
      } else {
        rec.outcome = Outcome::EscapedAtRank;
        rec.rank = k;
      }
      return rec;
    }
    if (k >= opts.max_iter) {
      const int s = singular_tail();
      if (s >= 0) {
        rec.outcome = Outcome::ConvergedToSingular;
        rec.singular = s;
        rec.representative = z;
      } else {
        rec.outcome = Outcome::NonEscaping;
        rec.budget = opts.max_iter;
      }
      return rec;
    }
    const SpherePoint next = reflect_from(q, z, m);
    if (opts.record_points) rec.points.push_back(next);

    if (next.is_finite()) {
      const double mod = std::abs(next.value());
      if (dyn.infinity_fixed() && mod > opts.infinity_guard) {
        rec.outcome = Outcome::ConvergedToCycle;
        rec.period = 1;
        rec.representative = SpherePoint::infinity();
        rec.steps = k + 1;
        return rec;
      }
      if (!dyn.infinity_fixed() && mod > opts.range_guard) {
        rec.outcome = Outcome::LeftNumericRange;
        rec.steps = k + 1;
        return rec;
      }
    }

    if (chordal_distance(next, z) < opts.tol) {
      finish_cycle(1, next);
      rec.steps = k + 1;
      return rec;
    }

    recent.push_back(next);
    if (static_cast<int>(recent.size()) > keep) recent.pop_front();

    if (power == lam) {
      tortoise = z;
      power *= 2;
      lam = 0;
    }
    ++lam;
    if (chordal_distance(tortoise, next) < opts.tol) {
      // Smallest period consistent with the recent iterates.
      int period = lam;
      for (int p = 1; p < lam; ++p) {
        if (lam % p != 0 || p >= static_cast<int>(recent.size())) continue;
        if (chordal_distance(recent.back(), recent[recent.size() - 1 - static_cast<std::size_t>(p)]) < opts.tol) {
          period = p;
          break;
        }
      }
      finish_cycle(period, next);
      rec.steps = k + 1;
      return rec;
    }
    z = next;
  }
}

struct CriticalOrbit {
  SpherePoint seed;
  int multiplicity = 1;
  OrbitRecord orbit;
};

/// One orbit per critical point of σ.
inline std::vector<CriticalOrbit> critical_orbits(const Dynamics& dyn, int max_iter = 200) {
  DynamicsOptions opts;
  opts.max_iter = max_iter;
  std::vector<CriticalOrbit> out;
  for (const Root& r : crit_sigma(dyn.domain()).roots) {
    out.push_back({r.location, r.multiplicity, classify(dyn, r.location, opts)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rasters

enum class Cell : std::uint8_t { DropletInterior, Escaping, NonEscaping, BoundaryBand, Failure };

constexpr std::string_view to_string(Cell c) {
  switch (c) {
    case Cell::DropletInterior: return "droplet";
    case Cell::Escaping: return "escaping";
    case Cell::NonEscaping: return "non_escaping";
    case Cell::BoundaryBand: return "boundary_band";
    case Cell::Failure: return "failure";
  }
  return "unknown";
}

struct Bounds {
  cplx center{0.0, 0.0};
  double width = 4.0;
  double height = 4.0;
};

struct Rgb {
  std::uint8_t r, g, b;
};

/// Fixed palette shared by the renderer and the README.
inline Rgb palette(Cell c, int rank) {
  switch (c) {
    case Cell::DropletInterior: return {46, 139, 87};
    case Cell::Escaping: return (rank % 2 == 0) ? Rgb{30, 90, 200} : Rgb{120, 170, 240};
    case Cell::NonEscaping: return {128, 128, 128};
    case Cell::BoundaryBand: return {0, 0, 0};
    case Cell::Failure: return {255, 0, 255};
  }
  return {0, 0, 0};
}

struct EscapeRaster {
  Bounds bounds;
  int nx = 0, ny = 0;
  int max_iter = 0;
  int supersample = 1;
  std::vector<Cell> cells;        // row-major, row 0 at the top
  std::vector<std::int32_t> rank; // escape rank, -1 otherwise
  std::vector<Rgb> colors;

  Cell at(int i, int j) const { return cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)]; }

  cplx pixel_center(int i, int j) const { return point_at(i + 0.5, j + 0.5); }

  cplx point_at(double fi, double fj) const {
    const double x = bounds.center.real() - 0.5 * bounds.width + fi * bounds.width / nx;
    const double y = bounds.center.imag() + 0.5 * bounds.height - fj * bounds.height / ny;
    return {x, y};
  }

  double pixel_size() const { return std::max(bounds.width / nx, bounds.height / ny); }

  std::size_t count(Cell c) const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), c)); }
};

struct RenderOptions {
  int max_iter = 60;
  double band_px = 0.75;
  int supersample = 1;  // colors only; classification stays at pixel centers
  unsigned threads = 0; // 0: hardware concurrency
};

namespace detail {

struct PixelClass {
  Cell cell;
  int rank;
};

inline PixelClass classify_pixel(const Dynamics& dyn, cplx z, double band, const DynamicsOptions& dopts) {
  const QuadratureDomain& q = dyn.domain();
  try {
    const Fiber fib = finite_fiber(q, z);
    double de = std::numeric_limits<double>::infinity();
    for (int k = 0; k < fib.size; ++k) {
      const cplx u = fib.w[static_cast<std::size_t>(k)];
      de = std::min(de, std::abs(std::abs(u) - 1.0) * std::abs(eval_finite(q.fprime(), u)));
    }
    if (de < band) return {Cell::BoundaryBand, -1};
    const OrbitRecord rec = classify(dyn, SpherePoint(z), dopts);
    switch (rec.outcome) {
      case Outcome::EscapedAtRank:
        return rec.rank == 0 ? PixelClass{Cell::DropletInterior, -1} : PixelClass{Cell::Escaping, rec.rank};
      case Outcome::LeftNumericRange: return {Cell::Failure, -1};
      default:
        if (rec.landed) return {Cell::Escaping, rec.steps};
        return {Cell::NonEscaping, -1};
    }
  } catch (const Error&) {
    return {Cell::Failure, -1};
  }
}

}  // namespace detail

inline EscapeRaster render(const Dynamics& dyn, const Bounds& bounds, int nx, int ny, const RenderOptions& ro = {}) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgument, "render: resolution must be positive");
  if (!(bounds.width > 0.0) || !(bounds.height > 0.0)) throw Error(ErrorKind::InvalidArgument, "render: bounds must have positive size");
  EscapeRaster r;
  r.bounds = bounds;
  r.nx = nx;
  r.ny = ny;
  r.max_iter = ro.max_iter;
  r.supersample = std::max(1, ro.supersample);
  const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  r.cells.assign(total, Cell::Failure);
  r.rank.assign(total, -1);
  r.colors.assign(total, Rgb{0, 0, 0});

  DynamicsOptions dopts;
  dopts.max_iter = ro.max_iter;
  dopts.record_points = false;
  const double band = ro.band_px * r.pixel_size();
  const int ss = r.supersample;

  auto work = [&](int row0, int row1) {
    for (int j = row0; j < row1; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
        const auto pc = detail::classify_pixel(dyn, r.pixel_center(i, j), band, dopts);
        r.cells[idx] = pc.cell;
        r.rank[idx] = pc.rank;
        if (ss == 1) {
          r.colors[idx] = palette(pc.cell, pc.rank);
        } else {
          unsigned sr = 0, sg = 0, sb = 0;
          for (int a = 0; a < ss; ++a) {
            for (int b = 0; b < ss; ++b) {
              const cplx z = r.point_at(i + (a + 0.5) / ss, j + (b + 0.5) / ss);
              const auto sc = detail::classify_pixel(dyn, z, band, dopts);
              const Rgb c = palette(sc.cell, sc.rank);
              sr += c.r;
              sg += c.g;
              sb += c.b;
            }
          }
          const unsigned n = static_cast<unsigned>(ss * ss);
          r.colors[idx] = Rgb{static_cast<std::uint8_t>((sr + n / 2) / n), static_cast<std::uint8_t>((sg + n / 2) / n),
                              static_cast<std::uint8_t>((sb + n / 2) / n)};
        }
      }
    }
  };

  unsigned nt = ro.threads ? ro.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = std::min<unsigned>(nt, static_cast<unsigned>(ny));
  if (nt <= 1) {
    work(0, ny);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (ny + static_cast<int>(nt) - 1) / static_cast<int>(nt);
    for (unsigned t = 0; t < nt; ++t) {
      const int a = static_cast<int>(t) * chunk;
      const int b = std::min(ny, a + chunk);
      if (a < b) pool.emplace_back(work, a, b);
    }
    for (auto& th : pool) th.join();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Components

/// 8-connected labels of the cells where mask is true; -1 elsewhere.
inline int label_components(const std::vector<char>& mask, int nx, int ny, std::vector<int>& labels) {
  labels.assign(mask.size(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = j * nx + i;
      if (!mask[static_cast<std::size_t>(idx)] || labels[static_cast<std::size_t>(idx)] >= 0) continue;
      labels[static_cast<std::size_t>(idx)] = count;
      stack.push_back(idx);
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int ci = cur % nx, cj = cur / nx;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ni = ci + di, nj = cj + dj;
            if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
            const int nidx = nj * nx + ni;
            if (mask[static_cast<std::size_t>(nidx)] && labels[static_cast<std::size_t>(nidx)] < 0) {
              labels[static_cast<std::size_t>(nidx)] = count;
              stack.push_back(nidx);
            }
          }
        }
      }
      ++count;
    }
  }
  return count;
}

struct ComponentCounts {
  int droplet_interior = 0;  // DropletInterior cells alone
  int closed_droplet = 0;    // DropletInterior ∪ BoundaryBand
  int non_escaping = 0;
};

inline ComponentCounts count_escape_components(const EscapeRaster& r) {
  ComponentCounts c;
  std::vector<char> mask(r.cells.size());
  std::vector<int> labels;
  for (std::size_t k = 0; k < r.cells.size(); ++k) mask[k] = r.cells[k] == Cell::DropletInterior;
  c.droplet_interior = label_components(mask, r.nx, r.ny, labels);
  // Only band components that touch the droplet interior are closed-droplet
  // components; a band arc with no interior beside it is a boundary sliver.
  for (std::size_t k = 0; k < r.cells.size(); ++k)
    mask[k] = r.cells[k] == Cell::DropletInterior || r.cells[k] == Cell::BoundaryBand;
  const int closed = label_components(mask, r.nx, r.ny, labels);
  std::vector<char> has_interior(static_cast<std::size_t>(closed), 0);
  for (std::size_t k = 0; k < r.cells.size(); ++k)
    if (r.cells[k] == Cell::DropletInterior) has_interior[static_cast<std::size_t>(labels[k])] = 1;
  c.closed_droplet = static_cast<int>(std::count(has_interior.begin(), has_interior.end(), 1));
  if (c.droplet_interior == 0) c.closed_droplet = 0;
  for (std::size_t k = 0; k < r.cells.size(); ++k) mask[k] = r.cells[k] == Cell::NonEscaping;
  c.non_escaping = label_components(mask, r.nx, r.ny, labels);
  return c;
}

/// Smallest Chebyshev pixel distance from any cell of kind `a` to any cell
/// of a kind in `bs`; -1 when either set is empty.
inline int min_cell_distance(const EscapeRaster& r, Cell a, std::initializer_list<Cell> bs) {
  const int nx = r.nx, ny = r.ny;
  std::vector<int> dist(r.cells.size(), -1);
  std::vector<int> frontier;
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    if (std::find(bs.begin(), bs.end(), r.cells[k]) != bs.end()) {
      dist[k] = 0;
      frontier.push_back(static_cast<int>(k));
    }
  }
  if (frontier.empty()) return -1;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const int cur = frontier[head];
    if (r.cells[static_cast<std::size_t>(cur)] == a) return dist[static_cast<std::size_t>(cur)];
    const int ci = cur % nx, cj = cur / nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ni = ci + di, nj = cj + dj;
        if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
        const int nidx = nj * nx + ni;
        if (dist[static_cast<std::size_t>(nidx)] < 0) {
          dist[static_cast<std::size_t>(nidx)] = dist[static_cast<std::size_t>(cur)] + 1;
          frontier.push_back(nidx);
        }
      }
    }
  }
  return -1;
}

}  // namespace qdyn
