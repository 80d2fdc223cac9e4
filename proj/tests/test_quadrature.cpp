#include <gtest/gtest.h>

#include <random>

#include "qdyn/exemplars.hpp"
#include "qdyn/quadrature.hpp"

using namespace qdyn;

namespace {

RationalMap quarter_cubed() { return RationalMap(Polynomial{1.0, 0.0, 0.0, 4.0}, Polynomial{0.0, 0.0, 4.0}); }
RationalMap half_cubed() { return RationalMap(Polynomial{1.0, 0.0, 0.0, 2.0}, Polynomial{0.0, 0.0, 2.0}); }

const QuadratureDomain& qc() {
  static const QuadratureDomain q = build_domain(quarter_cubed());
  return q;
}

const QuadratureDomain& hc() {
  static const QuadratureDomain q = build_domain(half_cubed());
  return q;
}

// Random point of the requested region, by rejection in a box.
std::vector<cplx> sample_region(const QuadratureDomain& q, Region want, int count, std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < count) {
    const cplx z(u(rng), u(rng));
    if (membership(q, SpherePoint(z)).tag == want) out.push_back(z);
  }
  return out;
}

}  // namespace

TEST(BuildDomain, QuarterCubedAccepted) {
  const QuadratureDomain& q = qc();
  EXPECT_EQ(q.d_f(), 3);
  EXPECT_EQ(q.d_Omega(), 2);
  EXPECT_TRUE(q.certificate().accepted());
  EXPECT_EQ(q.certificate().transversal_crossings, 0);
  EXPECT_EQ(q.certificate().injectivity_failures, 0);
  EXPECT_TRUE(q.certificate().tangential_contacts.empty());
}

TEST(BuildDomain, HalfCubedCriticalPointsOnCircle) {
  const QuadratureDomain& q = hc();
  int on_circle = 0;
  for (const CriticalPoint& c : q.crit_f()) {
    if (c.location.is_infinite()) continue;
    const cplx w = c.location.value();
    if (std::abs(std::abs(w) - 1.0) < 1e-9) {
      ++on_circle;
      EXPECT_NEAR(std::abs(w * w * w - 1.0), 0.0, 1e-9);
    }
  }
  EXPECT_EQ(on_circle, 3);
}

TEST(BuildDomain, SquareMapRejected) {
  try {
    build_domain(RationalMap(Polynomial{0.0, 0.0, 1.0}, Polynomial{1.0}));
    FAIL() << "w^2 accepted";
  } catch (const UnivalenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnivalenceViolation);
    EXPECT_FALSE(e.certificate().simple_pole_at_infinity);
    EXPECT_GT(e.certificate().overlapping_arcs + e.certificate().transversal_crossings, 0);
    EXPECT_GT(e.certificate().injectivity_failures, 0);
  }
}

TEST(BuildDomain, ExteriorCriticalPointRejected) {
  // f(w) = w + 4/w has critical points at ±2.
  EXPECT_THROW(build_domain(RationalMap(Polynomial{4.0, 0.0, 1.0}, Polynomial{0.0, 1.0})), UnivalenceError);
}

TEST(BuildDomain, ExteriorPoleRejected) {
  EXPECT_THROW(build_domain(RationalMap(Polynomial{1.0, -2.0, 1.0}, Polynomial{-2.0, 1.0})), UnivalenceError);
}

TEST(BuildDomain, TransversalPinchRejected) {
  EXPECT_THROW(build_domain(pinch_map(0.5, 0.5)), UnivalenceError);
  EXPECT_THROW(build_domain(pinch_map(0.38, 0.5)), UnivalenceError);
}

TEST(BuildDomain, PinchBelowTransitionAccepted) {
  const QuadratureDomain q = build_domain(pinch_map(0.2, 0.5));
  EXPECT_TRUE(q.certificate().accepted());
  EXPECT_TRUE(q.certificate().tangential_contacts.empty());
}

TEST(BuildDomain, IdentityIsDegenerate) {
  const QuadratureDomain q = build_domain(RationalMap::identity());
  EXPECT_EQ(q.d_f(), 1);
  EXPECT_EQ(q.d_Omega(), 0);
  EXPECT_TRUE(q.nodes().empty());
  EXPECT_TRUE(crit_sigma(q).empty());
}

TEST(Membership, QuarterCubedExamples) {
  const QuadratureDomain& q = qc();
  const Membership inf = membership(q, SpherePoint::infinity());
  EXPECT_EQ(inf.tag, Region::OmegaInterior);
  EXPECT_TRUE(inf.witness.is_infinite());
  EXPECT_EQ(membership(q, SpherePoint(0.0)).tag, Region::DropletInterior);
  const cplx w = std::polar(1.0, 0.7);
  const Membership b = membership(q, SpherePoint(eval_finite(q.f(), w)));
  EXPECT_EQ(b.tag, Region::Boundary);
  EXPECT_LT(std::abs(b.witness.value() - w), 1e-7);
}

TEST(Membership, WitnessReproducesPoint) {
  for (const cplx z : sample_region(qc(), Region::OmegaInterior, 50, 11, 3.0)) {
    const Membership m = membership(qc(), SpherePoint(z));
    EXPECT_LT(std::abs(eval_finite(qc().f(), m.witness.value()) - z), 1e-9 * std::max(1.0, std::abs(z)));
    EXPECT_GT(std::abs(m.witness.value()), 1.0);
  }
}

TEST(Schwarz, FixesInfinityForCubedMaps) {
  EXPECT_TRUE(schwarz_reflect(qc(), SpherePoint::infinity()).is_infinite());
  EXPECT_TRUE(schwarz_reflect(hc(), SpherePoint::infinity()).is_infinite());
}

TEST(Schwarz, IdentityOnBoundary) {
  const cplx z = eval_finite(qc().f(), std::polar(1.0, 1.1));
  EXPECT_LT(std::abs(schwarz_reflect(qc(), SpherePoint(z)).value() - z), 1e-9);
  for (const CatalogEntry& e : catalog()) {
    if (e.kind != EntryKind::QuadratureMap) continue;
    const QuadratureDomain q = build_domain(*e.map);
    double worst = 0.0;
    for (int k = 0; k < 512; ++k) {
      const cplx p = eval_finite(q.f(), std::polar(1.0, 2.0 * kPi * (k + 0.25) / 512.0));
      worst = std::max(worst, std::abs(schwarz_reflect(q, SpherePoint(p)).value() - p));
      // f∘κ at the recovered exterior preimage, not just the boundary shortcut
      worst = std::max(worst, std::abs(eval(q.f(), kappa(membership(q, SpherePoint(p)).witness)).value() - p));
    }
    EXPECT_LT(worst, 1e-8) << e.name;
  }
}

TEST(Schwarz, DropletPointRaises) {
  try {
    schwarz_reflect(qc(), SpherePoint(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutsideDomain);
  }
}

TEST(Schwarz, MatchesClosedFormNearInfinity) {
  // σ(z) = f(1/conj(w)) with w = f^{-1}(z); for large z, σ(z) ≈ conj(z)^2 / 4 .
  const cplx z(300.0, 170.0);
  const cplx s = schwarz_reflect(qc(), SpherePoint(z)).value();
  EXPECT_LT(std::abs(s - std::conj(z) * std::conj(z) / 4.0) / std::abs(s), 1e-2);
}

TEST(Schwarz, ConjugationEquivariance) {
  for (const cplx z : sample_region(qc(), Region::OmegaInterior, 20, 12, 3.0)) {
    const cplx a = schwarz_reflect(qc(), SpherePoint(std::conj(z))).value();
    const cplx b = std::conj(schwarz_reflect(qc(), SpherePoint(z)).value());
    EXPECT_LT(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST(Nodes, QuarterCubedNodeAtInfinity) {
  const auto& nodes = nodes_of(qc());
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_TRUE(nodes[0].location.is_infinite());
  EXPECT_EQ(nodes[0].weight, 2);
  EXPECT_EQ(qc().n_Omega(), 1);
  EXPECT_TRUE(qc().node_at_infinity());
}

TEST(Nodes, PinchFamilySymmetricPair) {
  const double c = 0.2, q = 0.5;
  const QuadratureDomain d = build_domain(pinch_map(c, q));
  ASSERT_EQ(d.n_Omega(), 2);
  EXPECT_FALSE(d.node_at_infinity());
  const double expect = 1.0 / q - c / (1.0 / q - q) - c / (1.0 / q + q);
  double sum = 0.0;
  for (const Node& n : d.nodes()) {
    EXPECT_EQ(n.weight, 1);
    EXPECT_NEAR(std::abs(n.location.value()), expect, 1e-10);
    sum += n.location.value().real();
  }
  EXPECT_NEAR(sum, 0.0, 1e-10);
}

TEST(Nodes, WeightsSumToOrder) {
  for (const CatalogEntry& e : catalog()) {
    if (e.kind != EntryKind::QuadratureMap) continue;
    const QuadratureDomain q = build_domain(*e.map);
    int sum = 0;
    for (const Node& n : q.nodes()) sum += n.weight;
    EXPECT_EQ(sum, q.d_Omega()) << e.name;
  }
}

TEST(CritSigma, QuarterCubed) {
  const RootSet cs = crit_sigma(qc());
  EXPECT_EQ(cs.total_multiplicity(), 4);
  int finite = 0, infinite = 0;
  for (const Root& r : cs.roots) (r.location.is_infinite() ? infinite : finite) += r.multiplicity;
  EXPECT_EQ(infinite, 1);
  EXPECT_EQ(finite, 3);
  // f(κ(c)) for c = 2^{-1/3}: κ(c) = 2^{1/3}, f = 2^{1/3} + 2^{-2/3} / 4.
  const double x = std::cbrt(2.0) + 0.25 / std::cbrt(4.0);
  bool found = false;
  for (const Root& r : cs.roots) found = found || (r.location.is_finite() && std::abs(r.location.value() - x) < 1e-10);
  EXPECT_TRUE(found);
}

TEST(CritSigma, HalfCubedOnlyInfinity) {
  const RootSet cs = crit_sigma(hc());
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_TRUE(cs.roots[0].location.is_infinite());
  EXPECT_EQ(cs.roots[0].multiplicity, hc().d_f() - hc().n_Omega() - 1);
}

TEST(Fibers, DegreeRelations) {
  for (const CatalogEntry& e : catalog()) {
    if (e.kind != EntryKind::QuadratureMap) continue;
    const QuadratureDomain q = build_domain(*e.map);
    for (const cplx z : sample_region(q, Region::DropletInterior, 50, 21, 1.5))
      EXPECT_EQ(sigma_preimages(q, SpherePoint(z)).total_multiplicity(), q.d_f()) << e.name << " droplet " << z;
    for (const cplx z : sample_region(q, Region::OmegaInterior, 50, 22, 3.0))
      EXPECT_EQ(sigma_preimages(q, SpherePoint(z)).total_multiplicity(), q.d_f() - 1) << e.name << " Omega " << z;
  }
}

TEST(Fibers, PreimagesReflectOntoPoint) {
  for (const cplx z : sample_region(qc(), Region::OmegaInterior, 10, 23, 3.0)) {
    for (const Root& y : sigma_preimages(qc(), SpherePoint(z)).roots) {
      const SpherePoint s = schwarz_reflect(qc(), y.location);
      EXPECT_LT(chordal_distance(s, SpherePoint(z)), 1e-8);
    }
  }
}

TEST(CriticalCount, EveryAcceptedDomain) {
  for (const CatalogEntry& e : catalog()) {
    if (e.kind != EntryKind::QuadratureMap) continue;
    const QuadratureDomain q = build_domain(*e.map);
    EXPECT_EQ(total_multiplicity(q.crit_f()), 2 * q.d_f() - 2) << e.name;
  }
}
