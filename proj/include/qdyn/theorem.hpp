#pragma once

// Per-domain verification of the connectivity and singularity bounds, the
// critical-point partition and the per-component critical count.

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdyn/boundary.hpp"
#include "qdyn/droplet_graph.hpp"
#include "qdyn/dynamics.hpp"
#include "qdyn/quadrature.hpp"
#include "qdyn/singularity.hpp"

namespace qdyn {

enum class CritTag { C, T, P, S, Unresolved };

constexpr std::string_view to_string(CritTag t) {
  switch (t) {
    case CritTag::C: return "C";
    case CritTag::T: return "T";
    case CritTag::P: return "P";
    case CritTag::S: return "S";
    case CritTag::Unresolved: return "unresolved";
  }
  return "unresolved";
}

struct TaggedCritical {
  SpherePoint point;         // critical point of f
  int multiplicity = 1;
  CritTag tag = CritTag::Unresolved;
  SpherePoint image;         // f(c), the σ-image of the matching critical point of σ
  std::optional<cplx> witness;  // where the tag was decided (cusp, landing point, singular point)
  int singular = -1;         // singularity index for C and S
  Outcome outcome = Outcome::NonEscaping;
};

/// Tags each critical point of f by what happens to its f-image:
/// a cusp (C), escape to the tile (T), ∞ (P), non-trivial convergence to a
/// singular point (S), or unresolved within the budget.
inline std::vector<TaggedCritical> classify_crit_sets(const Dynamics& dyn, int max_iter = 200) {
  const QuadratureDomain& q = dyn.domain();
  const double tol = q.options().band_tol;
  const auto& sing = dyn.singularities();
  DynamicsOptions opts;
  opts.max_iter = max_iter;
  std::vector<TaggedCritical> out;
  for (const CriticalPoint& c : q.crit_f()) {
    TaggedCritical t;
    t.point = c.location;
    t.multiplicity = c.multiplicity;
    t.image = eval(q.f(), c.location);
    if (c.location.is_finite() && std::abs(std::abs(c.location.value()) - 1.0) < tol) {
      t.tag = CritTag::C;
      for (std::size_t i = 0; i < sing.size(); ++i) {
        if (sing[i].kind == SingularityKind::Cusp && t.image.is_finite() && std::abs(sing[i].location - t.image.value()) < 1e-6) {
          t.singular = static_cast<int>(i);
          t.witness = sing[i].location;
        }
      }
      out.push_back(t);
      continue;
    }
    if (t.image.is_infinite()) {
      t.tag = CritTag::P;
      out.push_back(t);
      continue;
    }
    const OrbitRecord rec = classify(dyn, t.image, opts);
    t.outcome = rec.outcome;
    switch (rec.outcome) {
      case Outcome::EscapedAtRank:
        t.tag = CritTag::T;
        if (!rec.points.empty() && rec.points.back().is_finite()) t.witness = rec.points.back().value();
        break;
      case Outcome::ConvergedToSingular:
        t.singular = rec.singular;
        if (rec.singular >= 0) t.witness = sing[static_cast<std::size_t>(rec.singular)].location;
        t.tag = rec.landed ? CritTag::T : CritTag::S;
        break;
      default: t.tag = CritTag::Unresolved; break;
    }
    out.push_back(t);
  }
  return out;
}

struct ComponentBound {
  int component = 0;
  int doubles = 0;    // #D_K
  int critical = 0;   // tagged critical points associated to K
  bool pass = false;
};

struct TheoremReport {
  std::string name;
  int d_f = 0;
  int d_Omega = 0;
  int n_Omega = 0;
  bool node_at_infinity = false;
  int conn = 0;
  int num_cusps = 0;
  int num_doubles = 0;
  int Delta = 0;
  bool applicable = false;  // d_f >= 3

  int lhs_A = 0, rhs_A = 0;
  bool pass_A = false;
  std::optional<int> lhs_A_infty, rhs_A_infty;
  std::optional<bool> pass_A_infty;
  int lhs_B = 0, rhs_B = 0;
  bool pass_B = false;
  int lhs_41 = 0, rhs_41 = 0;
  bool pass_41 = false;
  bool crit_count_check = false;

  std::vector<Singularity> singularities;
  std::vector<TaggedCritical> crit_tags;
  std::map<CritTag, int> crit_partition;
  std::vector<int> singular_convergence;  // non-trivial critical orbits per singularity
  bool delta_consistent = false;
  std::vector<ComponentBound> components;
  bool components_pass = false;

  // diagnostics
  int interior_components = 0;
  int conn_raster_res = 0;
  double standing_margin = 0.0;
  double injectivity_margin = 0.0;
  int fit_unstable = 0;
  std::vector<std::string> warnings;

  /// True when every applicable check holds.
  bool all_pass() const {
    if (!crit_count_check || !delta_consistent) return false;
    if (!applicable) return true;
    return pass_A && pass_A_infty.value_or(true) && pass_B && pass_41 && components_pass;
  }
};

struct VerifyOptions {
  int conn_res = 512;
  int max_iter = 200;
  double margin = 0.1;  // relative padding of the conn raster around ∂Ω
};

namespace detail {

inline Bounds boundary_box(const QuadratureDomain& q, double margin) {
  const BoundarySamples b = sample_boundary(q.f(), 4096);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const cplx z : b.z) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  const double side = std::max(x1 - x0, y1 - y0) * (1.0 + 2.0 * margin);
  return {cplx(0.5 * (x0 + x1), 0.5 * (y0 + y1)), side, side};
}

}  // namespace detail

/// Runs every check on an accepted domain.
inline TheoremReport verify(const QuadratureDomain& q, std::string name = {}, const VerifyOptions& vo = {}) {
  TheoremReport r;
  r.name = std::move(name);
  r.d_f = q.d_f();
  r.d_Omega = q.d_Omega();
  r.n_Omega = q.n_Omega();
  r.node_at_infinity = q.node_at_infinity();
  r.standing_margin = q.certificate().standing_margin;
  r.injectivity_margin = q.certificate().injectivity_margin;
  r.applicable = r.d_f >= 3;

  r.singularities = find_singularities(q);
  for (const Singularity& s : r.singularities) {
    if (s.kind == SingularityKind::Cusp) ++r.num_cusps;
    else ++r.num_doubles;
    r.Delta += s.delta;
    if (s.fit_unstable) {
      ++r.fit_unstable;
      r.warnings.push_back("order fit unstable at a " + std::string(to_string(s.kind)) + "; delta taken as 0");
    }
  }
  const Dynamics dyn(q, r.singularities);

  // conn from the closed droplet (interior plus boundary band) on a raster
  // framing the whole boundary curve.
  RenderOptions ro;
  ro.max_iter = 0;
  const EscapeRaster raster = render(dyn, detail::boundary_box(q, vo.margin), vo.conn_res, vo.conn_res, ro);
  const ComponentCounts cc = count_escape_components(raster);
  r.conn = cc.closed_droplet;
  r.interior_components = cc.droplet_interior;
  r.conn_raster_res = vo.conn_res;

  r.crit_tags = classify_crit_sets(dyn, vo.max_iter);
  int total = 0;
  for (const TaggedCritical& t : r.crit_tags) {
    r.crit_partition[t.tag] += t.multiplicity;
    total += t.multiplicity;
  }
  r.crit_count_check = total == 2 * r.d_f - 2;

  r.singular_convergence.assign(r.singularities.size(), 0);
  for (const TaggedCritical& t : r.crit_tags)
    if (t.tag == CritTag::S && t.singular >= 0) r.singular_convergence[static_cast<std::size_t>(t.singular)] += t.multiplicity;
  r.delta_consistent = true;
  for (std::size_t i = 0; i < r.singularities.size(); ++i)
    r.delta_consistent = r.delta_consistent && r.singular_convergence[i] == r.singularities[i].delta;

  r.lhs_A = r.conn + r.num_doubles + r.Delta;
  r.rhs_A = std::min(r.d_f + r.n_Omega - 2, 2 * r.d_f - 4);
  r.pass_A = r.lhs_A <= r.rhs_A;
  if (r.node_at_infinity) {
    r.lhs_A_infty = r.lhs_A;
    r.rhs_A_infty = r.d_f + r.n_Omega - 3;
    r.pass_A_infty = *r.lhs_A_infty <= *r.rhs_A_infty;
  }
  r.lhs_B = r.num_cusps + 2 * r.num_doubles + 3 * r.Delta;
  r.rhs_B = r.node_at_infinity ? std::min(3 * r.d_f + 3 * r.n_Omega - 8, 4 * r.d_f + 2 * r.n_Omega - 10)
                               : std::min(3 * r.d_f + 3 * r.n_Omega - 6, 6 * r.d_f - 12);
  r.pass_B = r.lhs_B <= r.rhs_B;
  r.lhs_41 = r.conn + r.num_doubles;
  r.rhs_41 = 2 * r.d_f - 4;
  r.pass_41 = r.lhs_41 <= r.rhs_41;

  // Per-component count: each droplet component K absorbs at least #D_K + 3
  // tagged critical points. Points are assigned by their witness location;
  // with a single component every tagged point belongs to it.
  std::vector<char> mask(raster.cells.size());
  for (std::size_t k = 0; k < mask.size(); ++k)
    mask[k] = raster.cells[k] == Cell::DropletInterior || raster.cells[k] == Cell::BoundaryBand;
  std::vector<int> labels;
  label_components(mask, raster.nx, raster.ny, labels);
  auto component_of = [&](cplx z) -> int {
    const double fi = (z.real() - (raster.bounds.center.real() - 0.5 * raster.bounds.width)) / (raster.bounds.width / raster.nx);
    const double fj = ((raster.bounds.center.imag() + 0.5 * raster.bounds.height) - z.imag()) / (raster.bounds.height / raster.ny);
    const int i = std::clamp(static_cast<int>(fi), 0, raster.nx - 1);
    const int j = std::clamp(static_cast<int>(fj), 0, raster.ny - 1);
    return labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(raster.nx) + static_cast<std::size_t>(i)];
  };
  std::map<int, ComponentBound> comps;
  for (std::size_t k = 0; k < raster.cells.size(); ++k)
    if (raster.cells[k] == Cell::DropletInterior) comps[labels[k]].component = labels[k];
  for (const Singularity& s : r.singularities)
    if (s.kind == SingularityKind::DoublePoint) {
      const int l = component_of(s.location);
      if (comps.count(l)) ++comps[l].doubles;
    }
  for (const TaggedCritical& t : r.crit_tags) {
    if (t.tag == CritTag::Unresolved) continue;
    if (comps.size() == 1) {
      comps.begin()->second.critical += t.multiplicity;
    } else if (t.witness) {
      const int l = component_of(*t.witness);
      if (comps.count(l)) comps[l].critical += t.multiplicity;
    }
  }
  r.components_pass = !comps.empty();
  for (auto& [l, cb] : comps) {
    cb.pass = cb.critical >= cb.doubles + 3;
    r.components_pass = r.components_pass && cb.pass;
    r.components.push_back(cb);
  }
  for (std::size_t i = 0; i < r.components.size(); ++i) r.components[i].component = static_cast<int>(i);
  return r;
}

}  // namespace qdyn
