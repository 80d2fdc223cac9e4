// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "qdyn/qdyn.hpp"

using namespace qdyn;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void criterion(int id, double limit_s, const std::function<Check()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Check o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && dt >= limit_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  if (!o.pass) ++failures;
  std::printf("AC%-2d %s  %.2fs%s%s\n", id, o.pass ? "PASS" : "FAIL", dt, o.detail.empty() ? "" : "  ", o.detail.c_str());
  std::fflush(stdout);
}

std::vector<QuadratureDomain> catalog_domains(std::vector<std::string>* names = nullptr) {
  std::vector<QuadratureDomain> out;
  for (const CatalogEntry& e : catalog()) {
    if (e.kind != EntryKind::QuadratureMap) continue;
    out.push_back(build_domain(*e.map));
    if (names) names->push_back(e.name);
  }
  return out;
}

std::vector<cplx> region_points(const QuadratureDomain& q, Region want, int n, std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    const cplx z(u(rng), u(rng));
    if (membership(q, SpherePoint(z)).tag == want) out.push_back(z);
  }
  return out;
}

std::string run_cli(const std::string& args, int& code) {
  const auto path = std::filesystem::temp_directory_path() / ("qdyn_accept_" + std::to_string(::getpid()));
  const std::string cmd = std::string(QDYN_CLI_PATH) + " " + args + " > " + path.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  std::filesystem::remove(path);
  return ss.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

int main() {
  const auto t_setup = std::chrono::steady_clock::now();
  catalog();
  std::printf("setup: catalog ready in %.2fs\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t_setup).count());

  criterion(1, 1.0, [] {
    Check o;
    std::vector<std::string> names;
    const auto doms = catalog_domains(&names);
    for (std::size_t i = 0; i < doms.size(); ++i)
      o.require(total_multiplicity(doms[i].crit_f()) == 2 * doms[i].d_f() - 2, names[i] + " critical count");
    return o;
  });

  criterion(2, 1.0, [] {
    Check o;
    const QuadratureDomain q = build_domain(*lookup("quarter-cubed")->map);
    const double s = std::cbrt(0.5);
    const std::vector<cplx> want = {0.0, s, s * kOmega, s * kOmega * kOmega};
    const auto crit = q.crit_f();
    o.require(total_multiplicity(crit) == 4, "expected four critical points");
    for (const cplx w : want) {
      bool found = false;
      for (const CriticalPoint& c : crit) found = found || (c.location.is_finite() && std::abs(c.location.value() - w) < 1e-10);
      o.require(found, "missing critical point");
    }
    for (const CriticalPoint& c : crit) {
      if (c.location.is_infinite() || std::abs(c.location.value()) < 1e-12) continue;
      const SpherePoint v = eval(q.f(), c.location);
      for (const Root& r : preimages(q.f(), v).roots)
        o.require(r.location.is_finite() && std::abs(r.location.value()) < 1.0, "critical value has a preimage outside the disk");
      o.require(membership(q, v).tag == Region::DropletInterior, "critical value not in the droplet");
    }
    return o;
  });

  criterion(3, 1.0, [] {
    Check o;
    std::vector<std::string> names;
    const auto doms = catalog_domains(&names);
    double worst = 0.0;
    for (std::size_t i = 0; i < doms.size(); ++i) {
      double w = 0.0;
      for (int k = 0; k < 512; ++k) {
        const cplx p = eval_finite(doms[i].f(), std::polar(1.0, 2.0 * kPi * (k + 0.25) / 512.0));
        w = std::max(w, std::abs(schwarz_reflect(doms[i], SpherePoint(p)).value() - p));
        const Membership m = membership(doms[i], SpherePoint(p));
        w = std::max(w, std::abs(eval(doms[i].f(), kappa(m.witness)).value() - p));
      }
      o.require(w < 1e-8, names[i] + " boundary residual " + fmt("%.2e", w));
      worst = std::max(worst, w);
    }
    if (o.pass) o.detail = "max " + fmt("%.2e", worst);
    return o;
  });

  criterion(4, 5.0, [] {
    Check o;
    std::vector<std::string> names;
    const auto doms = catalog_domains(&names);
    for (std::size_t i = 0; i < doms.size(); ++i) {
      const QuadratureDomain& q = doms[i];
      for (const cplx z : region_points(q, Region::DropletInterior, 50, 101, 1.5))
        o.require(sigma_preimages(q, SpherePoint(z)).total_multiplicity() == q.d_f(), names[i] + " droplet fiber");
      for (const cplx z : region_points(q, Region::OmegaInterior, 50, 102, 3.0))
        o.require(sigma_preimages(q, SpherePoint(z)).total_multiplicity() == q.d_f() - 1, names[i] + " Omega fiber");
    }
    return o;
  });

  criterion(5, 30.0, [] {
    Check o;
    const QuadratureDomain q = build_domain(*lookup("quarter-cubed")->map);
    const Dynamics dyn(q);
    RenderOptions ro;
    ro.max_iter = 3;
    EscapeRaster r = render(dyn, {0.0, 3.0, 3.0}, 1024, 1024, ro);
    for (std::size_t k = 0; k < r.cells.size(); ++k)
      if (r.cells[k] == Cell::Escaping && r.rank[k] >= 2) r.cells[k] = Cell::NonEscaping;
    const int d = min_cell_distance(r, Cell::NonEscaping, {Cell::BoundaryBand, Cell::DropletInterior});
    o.require(d > 0, "preimage of Omega touches the boundary band");
    int checked = 0;
    for (const cplx z : region_points(q, Region::OmegaInterior, 400, 103, 3.0)) {
      if (membership(q, schwarz_reflect(q, SpherePoint(z))).tag != Region::OmegaInterior) continue;
      int inside = 0;
      for (const Root& y : sigma_preimages(q, SpherePoint(z)).roots)
        if (membership(q, y.location).tag == Region::OmegaInterior && membership(q, schwarz_reflect(q, y.location)).tag == Region::OmegaInterior)
          inside += y.multiplicity;
      o.require(inside == 2, "interior fiber count");
      ++checked;
    }
    o.require(checked >= 20, "too few interior samples");
    if (o.pass) o.detail = "band distance " + std::to_string(d) + " px, " + std::to_string(checked) + " fibers";
    return o;
  });

  criterion(6, 10.0, [] {
    Check o;
    const TreeSweep s = tree_sweep(9);
    o.require(s.violations == 0, std::to_string(s.violations) + " violations");
    o.require(s.chains == s.chains_at_equality, "a chain misses equality");
    o.require(s.per_size.at(9) == 4782969, "wrong tree count at 9 vertices");
    if (o.pass) o.detail = std::to_string(s.checked) + " trees, " + std::to_string(s.chains) + " chains at equality";
    return o;
  });

  criterion(7, 120.0, [] {
    Check o;
    const TheoremReport a = verify(build_domain(*lookup("quarter-cubed")->map), "quarter-cubed");
    o.require(a.lhs_A_infty && *a.lhs_A_infty == 1 && *a.rhs_A_infty == 1, "quarter-cubed node-at-infinity bound not 1 = 1");
    const PinchResult p = pinch_search(0.5, 0.01, 0.5);
    o.require(p.c_hi - p.c_star < 1e-8, "bisection bracket too wide");
    const TheoremReport b = verify(build_domain(pinch_map(p.c_star, 0.5)), "pinch");
    o.require(b.lhs_A == 2 && b.rhs_A == 2, "pinch general bound not 2 = 2");
    if (o.pass) o.detail = "c* = " + fmt("%.12f", p.c_star) + ", bracket " + fmt("%.1e", p.c_hi - p.c_star);
    return o;
  });

  criterion(8, 30.0, [] {
    Check o;
    const QuadratureDomain q = build_domain(*lookup("half-cubed")->map);
    const TheoremReport r = verify(q, "half-cubed");
    o.require(r.num_cusps == 3 && r.num_doubles == 0 && r.Delta == 0, "singularity counts");
    o.require(r.node_at_infinity && r.lhs_B == 3 && r.rhs_B == 4 && r.pass_B, "bound B");
    for (const Singularity& s : r.singularities)
      o.require(s.order_n == 3 && std::abs(s.slope - 1.5) <= 0.1, "cusp fit slope " + fmt("%.3f", s.slope));
    return o;
  });

  criterion(9, 30.0, [] {
    Check o;
    for (const CatalogEntry& e : catalog()) {
      if (e.kind != EntryKind::QuadratureMap) continue;
      const TheoremReport r = verify(build_domain(*e.map), e.name);
      for (std::size_t i = 0; i < r.singularities.size(); ++i) {
        o.require(r.singular_convergence[i] >= 0, e.name + " negative count");
        o.require(r.singular_convergence[i] == r.singularities[i].delta, e.name + " orbit count differs from weight");
      }
      o.require(r.delta_consistent, e.name + " inconsistent");
    }
    return o;
  });

  criterion(10, 5.0, [] {
    Check o;
    const auto fps = apollonian_fixed_points();
    o.require(fps.size() == 10, std::to_string(fps.size()) + " fixed points");
    auto near = [&](cplx z, FixedPointType t) {
      for (const FixedPoint& p : fps)
        if (std::abs(p.z - z) < 1e-6 && p.type == t) return true;
      return false;
    };
    for (const cplx c : {cplx(0.0), cplx(1.0), kOmega, kOmega * kOmega}) {
      o.require(near(c, FixedPointType::Superattracting), "critical point not a superattracting fixed point");
      o.require(std::abs(apollonian_R(SpherePoint(c)).value() - c) < 1e-12, "critical point not fixed");
    }
    const double s3 = std::sqrt(3.0);
    o.require(near((s3 - 1.0) / 2.0, FixedPointType::Repelling), "(sqrt3 - 1)/2 missing");
    o.require(near(-(s3 + 1.0) / 2.0, FixedPointType::Repelling), "-(sqrt3 + 1)/2 missing");
    int rep = 0;
    for (const FixedPoint& p : fps)
      if (p.type == FixedPointType::Repelling) {
        ++rep;
        o.require(std::abs(p.multiplier - s3) < 1e-3, "multiplier " + fmt("%.6f", p.multiplier));
      }
    o.require(rep == 6, std::to_string(rep) + " repelling");
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double eq = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const cplx z(u(rng), u(rng));
      const cplx a = apollonian_R(SpherePoint(kOmega * z)).value(), b = apollonian_R(SpherePoint(z)).value();
      eq = std::max(eq, std::abs(a - kOmega * b) / std::max(1.0, std::abs(b)));
    }
    o.require(eq < 1e-12, "equivariance " + fmt("%.2e", eq));
    return o;
  });

  criterion(11, 1.0, [] {
    Check o;
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double inv = 0.0;
    for (const GeodesicReflection& s : triangle_sides())
      for (int k = 0; k < 200; ++k) {
        const cplx z(u(rng), u(rng));
        if (std::abs(z) >= 1.0) continue;
        inv = std::max(inv, std::abs(s(s(z)) - z));
      }
    o.require(inv < 1e-12, "involutivity " + fmt("%.2e", inv));
    auto winding = [](const std::function<cplx(cplx)>& g) {
      const int n = 6000;
      double total = 0.0;
      cplx prev = g(std::polar(1.0, 2.0 * kPi * 0.1 / n));
      for (int k = 1; k <= n; ++k) {
        const cplx cur = g(std::polar(1.0, 2.0 * kPi * (k + 0.1) / n));
        total += std::arg(cur / prev);
        prev = cur;
      }
      return static_cast<int>(std::lround(total / (2.0 * kPi)));
    };
    o.require(winding([](cplx z) { return nielsen(z); }) == -2, "Nielsen winding");
    o.require(winding([](cplx z) { return anti_farey(z); }) == -2, "anti-Farey winding");
    double semi = 0.0;
    for (int k = 0; k < 64; ++k) {
      const cplx z = std::polar(1.0, 2.0 * kPi * (k + 0.3) / 64.0);
      const cplx n = nielsen(z);
      semi = std::max(semi, std::abs(anti_farey(z * z * z) - n * n * n));
    }
    o.require(semi < 1e-10, "semiconjugacy " + fmt("%.2e", semi));
    double fixed = 0.0;
    const GeodesicReflection& side = triangle_sides()[0];
    const double a0 = std::arg(1.0 - side.center), a1 = std::arg(kOmega - side.center);
    for (int k = 0; k < 256; ++k) {
      const cplx w = side.center + std::polar(side.radius, a0 + (a1 - a0) * (k + 0.5) / 256.0);
      fixed = std::max(fixed, std::abs(nielsen(w) - w));
      fixed = std::max(fixed, std::abs(anti_farey(w * w * w) - w * w * w));
    }
    o.require(fixed < 1e-9, "boundary fixed points " + fmt("%.2e", fixed));
    return o;
  });

  criterion(12, 0.0, [] {
    Check o;
    int c1 = -1, c2 = -1;
    const std::string a = run_cli("verify --all", c1);
    const std::string b = run_cli("verify --all", c2);
    o.require(c1 == 0 && c2 == 0, "verify --all exit codes " + std::to_string(c1) + ", " + std::to_string(c2));
    o.require(!a.empty() && a == b, "outputs differ");
    if (o.pass) o.detail = std::to_string(a.size()) + " bytes identical";
    return o;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
