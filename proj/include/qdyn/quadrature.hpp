#pragma once

// Unbounded simply connected quadrature domains Ω = f(𝔻*) for a rational f
// univalent on the closed exterior disk, with f(∞) = ∞ simple.
//
// The Schwarz reflection is σ(z) = f(κ(w)) where w is the exterior
// f-preimage of z and κ(w) = 1/conj(w). Everything here is read-only after
// build_domain returns.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdyn/boundary.hpp"
#include "qdyn/rational.hpp"

namespace qdyn {

enum class Region { OmegaInterior, Boundary, DropletInterior };

constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::OmegaInterior: return "OmegaInterior";
    case Region::Boundary: return "Boundary";
    case Region::DropletInterior: return "DropletInterior";
  }
  return "Unknown";
}

struct Membership {
  Region tag = Region::OmegaInterior;
  SpherePoint witness;  // exterior (or circle) preimage; unset for droplet points
};

struct Node {
  SpherePoint location;
  int weight = 1;
};

/// Record of the numerical univalence checks run by build_domain.
struct UnivalenceCertificate {
  int samples = 0;
  bool simple_pole_at_infinity = false;
  double max_finite_pole_modulus = 0.0;      // must stay below 1
  double max_critical_modulus = 0.0;         // finite zeros of f', must not exceed 1 + tol
  int transversal_crossings = 0;
  int overlapping_arcs = 0;
  std::vector<Contact> tangential_contacts;  // candidate double points
  int injectivity_samples = 0;
  int injectivity_failures = 0;
  double injectivity_margin = std::numeric_limits<double>::infinity();
  double standing_margin = std::numeric_limits<double>::infinity();
  bool standing_assumption_ok = true;
  std::vector<std::string> violations;

  bool accepted() const { return violations.empty(); }
};

class UnivalenceError : public Error {
 public:
  UnivalenceError(const std::string& what, UnivalenceCertificate cert)
      : Error(ErrorKind::UnivalenceViolation, what), cert_(std::move(cert)) {}
  const UnivalenceCertificate& certificate() const noexcept { return cert_; }

 private:
  UnivalenceCertificate cert_;
};

struct DomainOptions {
  int samples = 4096;
  double band_tol = 1e-7;
  int injectivity_samples = 256;
  double tangential_sine = 1e-3;
  int guard = 10;
  double root_tol = kRootTol;
  double standing_tol = 1e-6;
};

class QuadratureDomain {
 public:
  const RationalMap& f() const noexcept { return f_; }
  const RationalMap& fprime() const noexcept { return fp_; }
  int d_f() const noexcept { return d_f_; }
  int d_Omega() const noexcept { return d_f_ - 1; }
  int n_Omega() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  bool node_at_infinity() const {
    for (const Node& n : nodes_)
      if (n.location.is_infinite()) return true;
    return false;
  }
  const std::vector<CriticalPoint>& crit_f() const noexcept { return crit_; }
  const RootSet& finite_poles() const noexcept { return poles_; }
  const UnivalenceCertificate& certificate() const noexcept { return cert_; }
  const DomainOptions& options() const noexcept { return opts_; }

 private:
  friend QuadratureDomain build_domain(const RationalMap&, const DomainOptions&);
  RationalMap f_;
  RationalMap fp_;
  int d_f_ = 1;
  std::vector<Node> nodes_;
  std::vector<CriticalPoint> crit_;
  RootSet poles_;
  UnivalenceCertificate cert_;
  DomainOptions opts_;
};

/// Finite f-preimages of a finite z, unclustered (repeated roots appear once
/// per multiplicity).
struct Fiber {
  int size = 0;
  std::array<cplx, kMaxDegree> w{};
};

inline Fiber finite_fiber(const QuadratureDomain& q, cplx z) {
  const Polynomial& n = q.f().num();
  const Polynomial& d = q.f().den();
  const int deg = n.degree();
  std::array<cplx, kMaxDegree + 1> c{};
  for (int k = 0; k <= deg; ++k) c[static_cast<std::size_t>(k)] = n[k] - z * d[k];
  Fiber out;
  out.size = deg;
  if (!std::isfinite(std::abs(c[static_cast<std::size_t>(deg)])))
    throw Error(ErrorKind::NumericRange, "finite_fiber: coefficient overflow");
  detail::fast_roots(c.data(), deg, out.w.data());
  return out;
}

/// Classifies z by its f-preimages: one in {|w| > 1 + tol} means Ω, one in
/// the band ||w| - 1| <= tol means ∂Ω, none in either means the droplet.
inline Membership membership(const QuadratureDomain& q, const SpherePoint& z, double tol) {
  if (z.is_infinite()) return {Region::OmegaInterior, SpherePoint::infinity()};
  const Fiber fib = finite_fiber(q, z.value());
  int ext = 0, band = 0;
  cplx ext_w(0.0), band_w(0.0);
  double band_best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < fib.size; ++k) {
    const double m = std::abs(fib.w[static_cast<std::size_t>(k)]);
    if (m > 1.0 + tol) {
      ++ext;
      ext_w = fib.w[static_cast<std::size_t>(k)];
    } else if (m >= 1.0 - tol) {
      ++band;
      if (std::abs(m - 1.0) < band_best) {
        band_best = std::abs(m - 1.0);
        band_w = fib.w[static_cast<std::size_t>(k)];
      }
    }
  }
  if (ext >= 2 || (ext >= 1 && band >= 1))
    throw Error(ErrorKind::AmbiguousBand, "membership: more than one preimage in the closed exterior disk");
  if (ext == 1) return {Region::OmegaInterior, SpherePoint(ext_w)};
  if (band >= 1) return {Region::Boundary, SpherePoint(band_w)};
  return {Region::DropletInterior, SpherePoint()};
}

inline Membership membership(const QuadratureDomain& q, const SpherePoint& z) {
  return membership(q, z, q.options().band_tol);
}

/// σ from a membership already computed for z.
inline SpherePoint reflect_from(const QuadratureDomain& q, const SpherePoint& z, const Membership& m) {
  if (m.tag == Region::DropletInterior) throw Error(ErrorKind::OutsideDomain, "schwarz_reflect: point lies in the droplet");
  if (m.tag == Region::Boundary) return z;
  return eval(q.f(), kappa(m.witness));
}

inline SpherePoint schwarz_reflect(const QuadratureDomain& q, const SpherePoint& z) {
  return reflect_from(q, z, membership(q, z));
}

inline const std::vector<Node>& nodes_of(const QuadratureDomain& q) { return q.nodes(); }

/// Critical points of σ: f∘κ of the critical points of f in the open disk,
/// with multiplicity (poles of f of order m carry m - 1).
inline RootSet crit_sigma(const QuadratureDomain& q) {
  RootSet out;
  const double tol = q.options().band_tol;
  for (const CriticalPoint& c : q.crit_f()) {
    if (c.location.is_infinite() || std::abs(c.location.value()) >= 1.0 - tol) continue;
    const SpherePoint img = eval(q.f(), kappa(c.location));
    bool merged = false;
    for (Root& r : out.roots) {
      if (chordal_distance(r.location, img) < 1e-9) {
        r.multiplicity += c.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) out.roots.push_back({img, c.multiplicity});
  }
  return out;
}

/// Solutions y of σ(y) = z in the closed domain, with multiplicity:
/// y = f(κ(u)) for the f-preimages u of z in the closed unit disk.
inline RootSet sigma_preimages(const QuadratureDomain& q, const SpherePoint& z) {
  const double tol = q.options().band_tol;
  RootSet pre = preimages(q.f(), z, q.options().root_tol);
  RootSet out;
  for (const Root& u : pre.roots) {
    if (u.location.is_infinite() || std::abs(u.location.value()) > 1.0 + tol) continue;
    out.roots.push_back({eval(q.f(), kappa(u.location)), u.multiplicity});
  }
  return out;
}

namespace detail {

inline double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace detail

/// Certifies f numerically and caches degrees, nodes and critical data.
/// Throws UnivalenceError, carrying the certificate, when any check fails.
inline QuadratureDomain build_domain(const RationalMap& f, const DomainOptions& opts = {}) {
  if (f.degree() < 1) throw Error(ErrorKind::InvalidArgument, "build_domain: map must have degree >= 1");
  UnivalenceCertificate cert;
  cert.samples = opts.samples;
  const double tol = opts.band_tol;

  QuadratureDomain q;
  q.f_ = f;
  q.fp_ = derivative(f);
  q.d_f_ = f.degree();
  q.opts_ = opts;

  const int gap = f.degree_gap();
  cert.simple_pole_at_infinity = gap == 1;
  if (gap < 1) cert.violations.push_back("f(inf) is finite: the domain is not unbounded");
  if (gap > 1) cert.violations.push_back("pole of f at infinity is not simple");

  if (f.den().degree() >= 1) q.poles_ = roots(f.den(), opts.root_tol);
  for (const Root& p : q.poles_.roots) {
    const double m = std::abs(p.location.value());
    cert.max_finite_pole_modulus = std::max(cert.max_finite_pole_modulus, m);
    if (m >= 1.0 - tol) cert.violations.push_back("second pole of f in the closed exterior disk");
  }

  q.crit_ = critical_points(f, opts.root_tol);
  for (const CriticalPoint& c : q.crit_) {
    if (c.location.is_infinite()) continue;
    bool is_pole = false;
    for (const Root& p : q.poles_.roots) is_pole = is_pole || (p.location == c.location);
    if (is_pole) continue;
    const double m = std::abs(c.location.value());
    cert.max_critical_modulus = std::max(cert.max_critical_modulus, m);
    if (m > 1.0 + tol) cert.violations.push_back("zero of f' in the open exterior disk");
  }

  double boundary_scale = 1.0;
  BoundarySamples samples;
  bool have_samples = false;
  {
    try {
      samples = sample_boundary(f, opts.samples);
      have_samples = true;
      boundary_scale = samples.scale;
      const auto contacts = boundary_contacts(f, q.fp_, samples, opts.guard, 1e-6 * samples.scale);
      for (const Contact& c : contacts) {
        if (c.overlap) {
          ++cert.overlapping_arcs;
        } else if (c.residual < 1e-10 * samples.scale && c.sine >= opts.tangential_sine) {
          ++cert.transversal_crossings;
        } else {
          cert.tangential_contacts.push_back(c);
        }
      }
      if (cert.overlapping_arcs > 0) cert.violations.push_back("boundary arcs overlap: f covers the circle image more than once");
      if (cert.transversal_crossings > 0) cert.violations.push_back("transversal self-intersection of the boundary");
    } catch (const Error& e) {
      cert.violations.emplace_back(e.what());
    }
  }

  // Quasi-random exterior spot check: each sampled image has exactly one
  // preimage in the closed exterior disk.
  if (gap >= 1) {
    cert.injectivity_samples = opts.injectivity_samples;
    const double log_rmax = std::log(20.0);
    for (int k = 0; k < opts.injectivity_samples; ++k) {
      const double r = (1.0 + 1e-3) * std::exp(detail::halton(k + 1, 2) * log_rmax);
      const cplx w = std::polar(r, 2.0 * kPi * detail::halton(k + 1, 3));
      const cplx z = eval_finite(f, w);
      const Fiber fib = finite_fiber(q, z);
      int self = 0;
      for (int j = 1; j < fib.size; ++j)
        if (std::abs(fib.w[static_cast<std::size_t>(j)] - w) < std::abs(fib.w[static_cast<std::size_t>(self)] - w)) self = j;
      bool bad = false;
      for (int j = 0; j < fib.size; ++j) {
        if (j == self) continue;
        const double m = std::abs(fib.w[static_cast<std::size_t>(j)]);
        cert.injectivity_margin = std::min(cert.injectivity_margin, 1.0 + tol - m);
        if (m > 1.0 + tol) bad = true;
      }
      if (bad) ++cert.injectivity_failures;
    }
    if (cert.injectivity_failures > 0) cert.violations.push_back("f is not injective on the exterior disk (spot check)");
  }

  if (!cert.accepted()) {
    std::string msg = "build_domain:";
    for (const auto& v : cert.violations) msg += " " + v + ";";
    throw UnivalenceError(msg, cert);
  }

  // Critical values of σ are f(c) for critical c in the open disk; the
  // standing assumption wants none of them on the boundary.
  if (have_samples) {
    for (const CriticalPoint& c : q.crit_) {
      if (c.location.is_infinite() || std::abs(c.location.value()) >= 1.0 - tol) continue;
      const SpherePoint v = eval(f, c.location);
      if (v.is_infinite()) continue;
      for (const cplx b : samples.z) cert.standing_margin = std::min(cert.standing_margin, std::abs(b - v.value()));
    }
    cert.standing_assumption_ok = cert.standing_margin >= opts.standing_tol * boundary_scale;
  }

  for (const Root& p : q.poles_.roots) {
    q.nodes_.push_back({eval(f, kappa(p.location)), p.multiplicity});
  }
  q.cert_ = std::move(cert);
  return q;
}

}  // namespace qdyn
