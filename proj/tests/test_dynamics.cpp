#include <gtest/gtest.h>

#include <map>
#include <random>

#include "qdyn/dynamics.hpp"
#include "qdyn/exemplars.hpp"

using namespace qdyn;

namespace {

struct Fixture {
  QuadratureDomain q;
  Dynamics dyn;
  explicit Fixture(const std::string& name) : q(build_domain(*lookup(name)->map)), dyn(q, find_singularities(q)) {}
};

const Fixture& fx(const std::string& name) {
  static std::map<std::string, std::unique_ptr<Fixture>> cache;
  auto& p = cache[name];
  if (!p) p = std::make_unique<Fixture>(name);
  return *p;
}

std::vector<cplx> omega_points(const QuadratureDomain& q, int n, std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    const cplx z(u(rng), u(rng));
    if (membership(q, SpherePoint(z)).tag == Region::OmegaInterior) out.push_back(z);
  }
  return out;
}

}  // namespace

TEST(Classify, DropletPointEscapesImmediately) {
  const OrbitRecord r = classify(fx("quarter-cubed").dyn, SpherePoint(0.0));
  EXPECT_EQ(r.outcome, Outcome::EscapedAtRank);
  EXPECT_EQ(r.rank, 0);
}

TEST(Classify, InfinityIsSuperattractingFixedPoint) {
  const OrbitRecord r = classify(fx("quarter-cubed").dyn, SpherePoint::infinity());
  EXPECT_EQ(r.outcome, Outcome::ConvergedToCycle);
  EXPECT_EQ(r.period, 1);
  EXPECT_TRUE(r.representative.is_infinite());
}

TEST(Classify, LargePointsFallIntoInfinity) {
  const OrbitRecord r = classify(fx("quarter-cubed").dyn, SpherePoint(cplx(50.0, 20.0)));
  EXPECT_EQ(r.outcome, Outcome::ConvergedToCycle);
  EXPECT_TRUE(r.representative.is_infinite());
}

TEST(Classify, PreimageOfDropletHasRankOne) {
  const QuadratureDomain& q = fx("quarter-cubed").q;
  const RootSet pre = sigma_preimages(q, SpherePoint(cplx(0.1, 0.05)));
  int in_omega = 0;
  for (const Root& y : pre.roots) {
    if (membership(q, y.location).tag != Region::OmegaInterior) continue;
    ++in_omega;
    const OrbitRecord r = classify(fx("quarter-cubed").dyn, y.location);
    EXPECT_EQ(r.outcome, Outcome::EscapedAtRank);
    EXPECT_EQ(r.rank, 1);
  }
  EXPECT_GT(in_omega, 0);
}

TEST(Classify, EscapedOrbitInvariant) {
  const Fixture& f = fx("quarter-cubed");
  for (const cplx z : omega_points(f.q, 100, 31, 3.0)) {
    const OrbitRecord r = classify(f.dyn, SpherePoint(z));
    if (r.outcome != Outcome::EscapedAtRank) continue;
    ASSERT_EQ(static_cast<int>(r.points.size()), r.rank + 1);
    for (int j = 0; j < r.rank; ++j) EXPECT_EQ(membership(f.q, r.points[static_cast<std::size_t>(j)]).tag, Region::OmegaInterior);
    EXPECT_NE(membership(f.q, r.points.back()).tag, Region::OmegaInterior);
  }
}

TEST(Classify, RankCoherence) {
  const Fixture& f = fx("half-cubed");
  int checked = 0;
  for (const cplx z : omega_points(f.q, 400, 32, 2.0)) {
    const OrbitRecord r = classify(f.dyn, SpherePoint(z));
    if (r.outcome != Outcome::EscapedAtRank || r.rank < 1) continue;
    const OrbitRecord s = classify(f.dyn, schwarz_reflect(f.q, SpherePoint(z)));
    EXPECT_EQ(s.outcome, Outcome::EscapedAtRank);
    EXPECT_EQ(s.rank, r.rank - 1);
    if (++checked == 100) break;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Classify, TotalInvariance) {
  const Fixture& f = fx("half-cubed");
  DynamicsOptions opts;
  opts.max_iter = 100;
  for (const cplx z : omega_points(f.q, 60, 33, 2.0)) {
    const OrbitRecord r = classify(f.dyn, SpherePoint(z), opts);
    const bool escaped = r.outcome == Outcome::EscapedAtRank;
    for (std::size_t k = 1; k < std::min<std::size_t>(r.points.size(), 6); ++k) {
      const OrbitRecord s = classify(f.dyn, r.points[k], opts);
      EXPECT_EQ(s.outcome == Outcome::EscapedAtRank, escaped) << z;
    }
  }
}

TEST(CriticalOrbits, HalfCubedInfinityFixed) {
  const auto orbits = critical_orbits(fx("half-cubed").dyn);
  ASSERT_EQ(orbits.size(), 1u);
  EXPECT_TRUE(orbits[0].seed.is_infinite());
  EXPECT_EQ(orbits[0].orbit.outcome, Outcome::ConvergedToCycle);
  EXPECT_EQ(orbits[0].orbit.period, 1);
}

TEST(CriticalOrbits, QuarterCubedFiniteOnesEscapeEarly) {
  const auto orbits = critical_orbits(fx("quarter-cubed").dyn);
  int finite = 0;
  for (const CriticalOrbit& c : orbits) {
    if (c.seed.is_infinite()) {
      EXPECT_EQ(c.orbit.outcome, Outcome::ConvergedToCycle);
      continue;
    }
    ++finite;
    EXPECT_EQ(c.orbit.outcome, Outcome::EscapedAtRank);
    EXPECT_LE(c.orbit.rank, 1);
  }
  EXPECT_EQ(finite, 3);
}

TEST(CriticalOrbits, PinchNoneConvergeToDoublePoint) {
  const auto orbits = critical_orbits(fx("pinch").dyn);
  EXPECT_FALSE(orbits.empty());
  for (const CriticalOrbit& c : orbits) {
    EXPECT_NE(c.orbit.outcome, Outcome::LeftNumericRange);
    if (c.orbit.outcome == Outcome::ConvergedToSingular) {
      EXPECT_TRUE(c.orbit.landed);
    }
  }
}

TEST(CriticalOrbits, PinchInfinityLandsOnDoublePoint) {
  const OrbitRecord r = classify(fx("pinch").dyn, SpherePoint::infinity());
  EXPECT_EQ(r.outcome, Outcome::ConvergedToSingular);
  EXPECT_TRUE(r.landed);
  EXPECT_EQ(r.singular, 0);
}

TEST(Render, SinglePixel) {
  const EscapeRaster r = render(fx("quarter-cubed").dyn, {}, 1, 1);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_NE(r.cells[0], Cell::Failure);
  const EscapeRaster tiny = render(fx("quarter-cubed").dyn, {0.0, 0.01, 0.01}, 1, 1);
  EXPECT_EQ(tiny.cells[0], Cell::DropletInterior);
}

TEST(Render, QuarterCubedWideView) {
  const Fixture& f = fx("quarter-cubed");
  const EscapeRaster r = render(f.dyn, {0.0, 12.0, 12.0}, 256, 256);
  const std::size_t non = r.count(Cell::NonEscaping);
  EXPECT_GT(non, 0u);
  EXPECT_LT(non, r.cells.size());
  EXPECT_EQ(r.count(Cell::Failure), 0u);
  EXPECT_EQ(count_escape_components(r).droplet_interior, 1);
}

TEST(Render, QuarterCubedEscapingSurroundsDroplet) {
  const EscapeRaster r = render(fx("quarter-cubed").dyn, {}, 128, 128);
  std::size_t border = 0;
  for (int i = 0; i < r.nx; ++i) {
    border += r.at(i, 0) == Cell::Escaping;
    border += r.at(i, r.ny - 1) == Cell::Escaping;
    border += r.at(0, i) == Cell::Escaping;
    border += r.at(r.nx - 1, i) == Cell::Escaping;
  }
  EXPECT_EQ(border, 4u * 128u);
  EXPECT_EQ(r.at(64, 64), Cell::DropletInterior);
  const int gap = min_cell_distance(r, Cell::DropletInterior, {Cell::Escaping});
  EXPECT_GE(gap, 1);
  EXPECT_LE(gap, 3);
}

TEST(Render, HalfCubedThreefoldSymmetry) {
  const EscapeRaster r = render(fx("half-cubed").dyn, {}, 200, 200);
  std::size_t non = 0, matched = 0;
  for (int j = 0; j < r.ny; ++j) {
    for (int i = 0; i < r.nx; ++i) {
      if (r.at(i, j) != Cell::NonEscaping) continue;
      const cplx z = kOmega * r.pixel_center(i, j);
      const int ci = static_cast<int>(std::floor((z.real() + 2.0) / r.bounds.width * r.nx));
      const int cj = static_cast<int>(std::floor((2.0 - z.imag()) / r.bounds.height * r.ny));
      if (ci < 1 || cj < 1 || ci > r.nx - 2 || cj > r.ny - 2) continue;
      ++non;
      bool ok = false;
      for (int dj = -1; dj <= 1 && !ok; ++dj)
        for (int di = -1; di <= 1 && !ok; ++di) {
          const int a = ci + di, b = cj + dj;
          ok = a >= 0 && b >= 0 && a < r.nx && b < r.ny && r.at(a, b) == Cell::NonEscaping;
        }
      matched += ok;
    }
  }
  ASSERT_GT(non, 1000u);
  EXPECT_GE(static_cast<double>(matched), 0.995 * static_cast<double>(non));
}

TEST(Render, Deterministic) {
  const EscapeRaster a = render(fx("half-cubed").dyn, {}, 64, 64);
  RenderOptions one;
  one.threads = 1;
  const EscapeRaster b = render(fx("half-cubed").dyn, {}, 64, 64, one);
  EXPECT_EQ(a.cells, b.cells);
  EXPECT_EQ(a.rank, b.rank);
}

TEST(Render, RejectsBadSizes) {
  EXPECT_THROW(render(fx("quarter-cubed").dyn, {}, 0, 4), Error);
  EXPECT_THROW(render(fx("quarter-cubed").dyn, {0.0, -1.0, 1.0}, 4, 4), Error);
}

TEST(Components, EmptyDropletView) {
  const EscapeRaster r = render(fx("quarter-cubed").dyn, {cplx(10.0, 0.0), 1.0, 1.0}, 32, 32);
  const ComponentCounts c = count_escape_components(r);
  EXPECT_EQ(c.droplet_interior, 0);
  EXPECT_EQ(c.closed_droplet, 0);
}

TEST(Components, PinchSplitsInteriorButNotClosure) {
  RenderOptions ro;
  ro.max_iter = 0;
  const EscapeRaster r = render(fx("pinch").dyn, {0.0, 3.0, 3.0}, 1024, 1024, ro);
  const ComponentCounts c = count_escape_components(r);
  EXPECT_EQ(c.droplet_interior, 2);
  EXPECT_EQ(c.closed_droplet, 1);
}

TEST(Components, LabelingIsEightConnected) {
  const std::vector<char> mask = {1, 0, 0,
                                  0, 1, 0,
                                  0, 0, 1};
  std::vector<int> labels;
  EXPECT_EQ(label_components(mask, 3, 3, labels), 1);
  const std::vector<char> two = {1, 0, 1,
                                 1, 0, 1,
                                 1, 0, 1};
  EXPECT_EQ(label_components(two, 3, 3, labels), 2);
}

TEST(AntiPolynomialLike, PreimageOfOmegaIsCompactlyContained) {
  const Fixture& f = fx("quarter-cubed");
  RenderOptions ro;
  ro.max_iter = 3;
  EscapeRaster r = render(f.dyn, {0.0, 3.0, 3.0}, 1024, 1024, ro);
  // Cells of σ^{-1}(Ω): rank >= 2 or still iterating.
  for (std::size_t k = 0; k < r.cells.size(); ++k)
    if (r.cells[k] == Cell::Escaping && r.rank[k] >= 2) r.cells[k] = Cell::NonEscaping;
  ASSERT_GT(r.count(Cell::NonEscaping), 0u);
  EXPECT_GT(min_cell_distance(r, Cell::NonEscaping, {Cell::BoundaryBand, Cell::DropletInterior}), 1);
}

TEST(AntiPolynomialLike, InteriorFiberHasTwoPoints) {
  const Fixture& f = fx("quarter-cubed");
  int checked = 0;
  for (const cplx z : omega_points(f.q, 200, 34, 3.0)) {
    if (membership(f.q, schwarz_reflect(f.q, SpherePoint(z))).tag != Region::OmegaInterior) continue;
    int inside = 0;
    for (const Root& y : sigma_preimages(f.q, SpherePoint(z)).roots) {
      if (membership(f.q, y.location).tag != Region::OmegaInterior) continue;
      if (membership(f.q, schwarz_reflect(f.q, y.location)).tag == Region::OmegaInterior) inside += y.multiplicity;
    }
    EXPECT_EQ(inside, 2) << z;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Palette, FixedColours) {
  EXPECT_EQ(palette(Cell::DropletInterior, -1).g, 139);
  EXPECT_EQ(palette(Cell::NonEscaping, -1).r, 128);
  const Rgb even = palette(Cell::Escaping, 2), odd = palette(Cell::Escaping, 1);
  EXPECT_FALSE(even.r == odd.r && even.g == odd.g && even.b == odd.b);
}
