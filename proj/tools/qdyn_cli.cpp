// qdyn: analyze, render and verify quadrature domains from the catalog or a
// JSON domain spec; enumerate trees; sample the circle and Apollonian maps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdyn/qdyn.hpp"

namespace {

using qdyn::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kInputError = 2, kNumericError = 3, kUnknownCatalog = 4, kUnwritable = 5 };

struct CliFailure {
  int code;
  std::string message;
};

struct Source {
  std::string name;
  qdyn::RationalMap map;
  qdyn::EntryKind kind = qdyn::EntryKind::QuadratureMap;
  int samples = 4096;
};

Source resolve(const std::string& positional, const std::string& map_path, const std::string& catalog_name) {
  int given = !positional.empty() + !map_path.empty() + !catalog_name.empty();
  if (given != 1) throw CliFailure{kInputError, "give exactly one map source: a catalog name, --catalog or --map"};
  std::string name = !catalog_name.empty() ? catalog_name : positional;
  std::string path = map_path;
  if (!name.empty()) {
    if (const auto e = qdyn::lookup(name)) {
      if (!e->map) throw CliFailure{kInputError, "'" + name + "' is a circle map; use group-maps"};
      return {e->name, *e->map, e->kind, 4096};
    }
    if (!catalog_name.empty() || !std::filesystem::is_regular_file(name))
      throw CliFailure{kUnknownCatalog, "unknown catalog entry '" + name + "'"};
    path = name;
  }
  std::ifstream in(path);
  if (!in) throw CliFailure{kInputError, "cannot read " + path};
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CliFailure{kInputError, "malformed JSON in " + path + ": " + e.what()};
  }
  const qdyn::DomainSpec s = qdyn::domain_spec_from_json(j);
  return {s.name, s.map, qdyn::EntryKind::QuadratureMap, s.samples};
}

qdyn::QuadratureDomain domain_of(const Source& s, double tol) {
  if (s.kind != qdyn::EntryKind::QuadratureMap) throw CliFailure{kInputError, "'" + s.name + "' is not a quadrature map"};
  qdyn::DomainOptions opts;
  opts.samples = s.samples;
  if (tol > 0.0) opts.band_tol = tol;
  return qdyn::build_domain(s.map, opts);
}

void check_writable(const std::string& path) {
  const bool existed = std::filesystem::exists(path);
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw CliFailure{kUnwritable, "cannot write " + path};
  }
  if (!existed) std::filesystem::remove(path);
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw CliFailure{kUnwritable, "cannot write " + out};
  f << text;
  if (!f) throw CliFailure{kUnwritable, "write failed for " + out};
}

void write_image(const std::string& path, int nx, int ny, const std::vector<qdyn::Rgb>& px) {
  try {
    qdyn::write_ppm(path, nx, ny, px);
  } catch (const qdyn::Error& e) {
    throw CliFailure{kUnwritable, e.what()};
  }
}

std::string sidecar(const std::string& ppm) {
  std::filesystem::path p(ppm);
  p.replace_extension(".json");
  return p.string();
}

qdyn::Bounds parse_bounds(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw CliFailure{kInputError, "--bounds expects cx,cy,w,h"};
    }
  }
  if (v.size() != 4 || !(v[2] > 0.0) || !(v[3] > 0.0)) throw CliFailure{kInputError, "--bounds expects cx,cy,w,h with positive w,h"};
  return {qdyn::cplx(v[0], v[1]), v[2], v[3]};
}

std::pair<int, int> parse_res(const std::string& s) {
  int nx = 0, ny = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%dx%d%c", &nx, &ny, &tail) == 2 || (std::sscanf(s.c_str(), "%d%c", &nx, &tail) == 1 && (ny = nx))) {
    if (nx >= 1 && ny >= 1 && nx <= 16384 && ny <= 16384) return {nx, ny};
  }
  throw CliFailure{kInputError, "--res expects N or NxM with 1 <= N, M <= 16384"};
}

json orbit_json(const qdyn::OrbitRecord& o) {
  json j = {{"outcome", std::string(qdyn::to_string(o.outcome))}, {"steps", o.steps}};
  if (o.outcome == qdyn::Outcome::EscapedAtRank) j["rank"] = o.rank;
  if (o.outcome == qdyn::Outcome::NonEscaping) j["budget"] = o.budget;
  if (o.outcome == qdyn::Outcome::ConvergedToCycle) {
    j["period"] = o.period;
    j["representative"] = qdyn::to_json(o.representative);
  }
  if (o.outcome == qdyn::Outcome::ConvergedToSingular) {
    j["singular"] = o.singular;
    j["landed"] = o.landed;
  }
  return j;
}

int cmd_analyze(const Source& src, double tol, const std::string& out) {
  const qdyn::QuadratureDomain q = domain_of(src, tol);
  const auto sing = qdyn::find_singularities(q);
  const qdyn::Dynamics dyn(q, sing);
  json crit = json::array();
  for (const qdyn::CriticalPoint& c : q.crit_f()) crit.push_back({{"z", qdyn::to_json(c.location)}, {"multiplicity", c.multiplicity}});
  json orbits = json::array();
  for (const qdyn::CriticalOrbit& c : qdyn::critical_orbits(dyn)) {
    json o = orbit_json(c.orbit);
    o["seed"] = qdyn::to_json(c.seed);
    o["multiplicity"] = c.multiplicity;
    orbits.push_back(o);
  }
  json j = {{"name", src.name},
            {"map", qdyn::to_json(src.map)},
            {"domain", qdyn::domain_summary(q)},
            {"certificate", qdyn::to_json(q.certificate())},
            {"critical_points", crit},
            {"singularities", qdyn::to_json(sing)},
            {"critical_orbits", orbits}};
  bool has_double = false;
  for (const auto& s : sing) has_double = has_double || s.kind == qdyn::SingularityKind::DoublePoint;
  if (has_double) {
    qdyn::RenderOptions ro;
    ro.max_iter = 0;
    const auto raster = qdyn::render(dyn, qdyn::detail::boundary_box(q, 0.1), 512, 512, ro);
    j["droplet_tree"] = qdyn::to_json(qdyn::extract_droplet_tree(raster, sing));
  }
  emit(j, out);
  return kOk;
}

int cmd_render(const Source& src, double tol, const std::string& bounds, const std::string& res, int max_iter, int supersample,
               std::string out) {
  if (out.empty()) out = src.name + ".ppm";
  const qdyn::Bounds b = bounds.empty() ? qdyn::Bounds{} : parse_bounds(bounds);
  const auto [nx, ny] = parse_res(res);
  if (max_iter < 0) throw CliFailure{kInputError, "--max-iter must be non-negative"};
  if (supersample < 1 || supersample > 4) throw CliFailure{kInputError, "--supersample must be 1..4"};
  check_writable(out);
  check_writable(sidecar(out));
  const qdyn::QuadratureDomain q = domain_of(src, tol);
  const qdyn::Dynamics dyn(q, qdyn::find_singularities(q));
  qdyn::RenderOptions ro;
  ro.max_iter = max_iter;
  ro.supersample = supersample;
  const qdyn::EscapeRaster r = qdyn::render(dyn, b, nx, ny, ro);
  write_image(out, r.nx, r.ny, r.colors);
  json meta = qdyn::raster_metadata(r);
  meta["name"] = src.name;
  emit(meta, sidecar(out));
  return kOk;
}

int cmd_verify(const std::vector<Source>& sources, double tol, const std::string& out) {
  std::vector<std::future<qdyn::TheoremReport>> jobs;
  for (const Source& s : sources)
    jobs.push_back(std::async(std::launch::async, [&s, tol] {
      const qdyn::QuadratureDomain q = domain_of(s, tol);
      return qdyn::verify(q, s.name);
    }));
  json arr = json::array();
  bool ok = true;
  for (auto& f : jobs) {
    const qdyn::TheoremReport r = f.get();
    ok = ok && r.all_pass();
    arr.push_back(qdyn::to_json(r));
  }
  emit(arr, out);
  return ok ? kOk : kVerifyFailed;
}

int cmd_trees(int max_vertices, const std::string& out) {
  if (max_vertices < 2) throw CliFailure{kInputError, "--max-vertices must be at least 2"};
  const qdyn::TreeSweep s = qdyn::tree_sweep(max_vertices);
  emit(qdyn::to_json(s, max_vertices), out);
  return s.violations == 0 ? kOk : kVerifyFailed;
}

json circle_map_summary(qdyn::GroupMap g, int samples) {
  using qdyn::cplx;
  auto map = [g](cplx z) { return g == qdyn::GroupMap::Nielsen ? qdyn::nielsen(z) : qdyn::anti_farey(z); };
  double winding = 0.0, min_expansion = std::numeric_limits<double>::infinity();
  cplx prev = map(std::polar(1.0, 0.0));
  for (int k = 1; k <= samples; ++k) {
    const double th = 2.0 * qdyn::kPi * k / samples;
    const cplx cur = map(std::polar(1.0, th));
    winding += std::arg(cur / prev);
    prev = cur;
  }
  // |d/dθ| away from the ideal vertices, by central differences
  const double h = 1e-7;
  int fixed_samples = 0;
  double fixed_err = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * qdyn::kPi * (k + 0.5) / samples;
    const double d = std::abs(map(std::polar(1.0, th + h)) - map(std::polar(1.0, th - h))) / (2.0 * h);
    min_expansion = std::min(min_expansion, d);
  }
  // ∂Π (or its image ∂ℋ) sampled along each side
  for (const auto& side : qdyn::triangle_sides()) {
    const double a0 = std::arg(-side.center);
    const double span = std::atan(1.0 / side.radius);
    for (int k = 0; k < samples / 3; ++k) {
      const double t = -span + 2.0 * span * (k + 0.5) / (samples / 3);
      cplx p = side.center + side.radius * std::polar(1.0, a0 + t);
      if (g == qdyn::GroupMap::AntiFarey) p = p * p * p;
      fixed_err = std::max(fixed_err, std::abs(map(p) - p));
      ++fixed_samples;
    }
  }
  return {{"map", std::string(qdyn::to_string(g))},
          {"samples", samples},
          {"circle_winding", static_cast<int>(std::lround(winding / (2.0 * qdyn::kPi)))},
          {"min_circle_expansion", min_expansion},
          {"boundary_fixed_samples", fixed_samples},
          {"boundary_fixed_max_error", fixed_err}};
}

json apollonian_summary(int samples, unsigned long long seed) {
  using qdyn::cplx;
  json fps = json::array();
  int critical = 0, repelling = 0;
  for (const qdyn::FixedPoint& p : qdyn::apollonian_fixed_points()) {
    fps.push_back({{"z", qdyn::to_json(p.z)}, {"multiplier", p.multiplier}, {"type", std::string(qdyn::to_string(p.type))}});
    critical += p.type == qdyn::FixedPointType::Superattracting;
    repelling += p.type == qdyn::FixedPointType::Repelling;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double eq = 0.0;
  for (int k = 0; k < samples; ++k) {
    const cplx z(u(rng), u(rng));
    const auto a = qdyn::apollonian_R(qdyn::SpherePoint(qdyn::kOmega * z));
    const auto b = qdyn::apollonian_R(qdyn::SpherePoint(z));
    if (a.is_finite() && b.is_finite()) eq = std::max(eq, std::abs(a.value() - qdyn::kOmega * b.value()));
  }
  return {{"map", "apollonian"},
          {"fixed_points", fps},
          {"critical_fixed", critical},
          {"repelling_fixed", repelling},
          {"samples", samples},
          {"seed", seed},
          {"rotation_equivariance_max_error", eq}};
}

int cmd_group_maps(const std::string& which, int samples, unsigned long long seed, const std::string& res, int max_iter,
                   const std::string& raster_out, const std::string& out) {
  const auto g = qdyn::parse_group_map(which);
  if (!g) throw CliFailure{kUnknownCatalog, "unknown group map '" + which + "' (nielsen, anti-farey, apollonian)"};
  if (samples < 3) throw CliFailure{kInputError, "--samples must be at least 3"};
  if (!raster_out.empty()) check_writable(raster_out);
  json j = *g == qdyn::GroupMap::Apollonian ? apollonian_summary(samples, seed) : circle_map_summary(*g, samples);
  if (!raster_out.empty()) {
    const auto [nx, ny] = parse_res(res);
    const qdyn::Bounds b = *g == qdyn::GroupMap::Apollonian ? qdyn::Bounds{0.0, 4.0, 4.0} : qdyn::Bounds{0.0, 2.2, 2.2};
    const qdyn::GroupRaster r = qdyn::group_raster(*g, b, nx, ny, max_iter);
    write_image(raster_out, r.nx, r.ny, r.colors);
    j["raster"] = {{"path", raster_out}, {"resolution", {nx, ny}}, {"max_iter", max_iter}};
  }
  emit(j, out);
  return kOk;
}

int exit_for(const qdyn::Error& e) {
  switch (e.kind()) {
    case qdyn::ErrorKind::ConvergenceFailure:
    case qdyn::ErrorKind::NewtonDivergence:
    case qdyn::ErrorKind::FitUnstable:
    case qdyn::ErrorKind::NumericRange:
    case qdyn::ErrorKind::AmbiguousBand: return kNumericError;
    default: return kInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schwarz reflections of quadrature domains: analysis, pictures and bound checks"};
  app.require_subcommand(1);

  std::string positional, map_path, catalog_name, out, bounds, res = "512", raster_out;
  double tol = 0.0;
  int max_iter = -1, supersample = 1, max_vertices = 9, samples = 256;
  unsigned long long seed = 1;
  bool all = false;

  auto source_opts = [&](CLI::App* c) {
    c->add_option("source", positional, "catalog name or domain-spec JSON path");
    c->add_option("--map", map_path, "domain-spec JSON file");
    c->add_option("--catalog", catalog_name, "catalog entry name");
    c->add_option("--tol", tol, "boundary band tolerance in the w-plane");
    c->add_option("--out", out, "output path (default: stdout)");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "domain summary, singularities and critical orbits as JSON");
  source_opts(analyze);
  CLI::App* render = app.add_subcommand("render", "escape-time raster as PPM plus a JSON sidecar");
  source_opts(render);
  render->add_option("--bounds", bounds, "view rectangle cx,cy,w,h (default 0,0,4,4)");
  render->add_option("--res", res, "resolution N or NxM (default 512)");
  render->add_option("--max-iter", max_iter, "iteration budget (default 60)");
  render->add_option("--supersample", supersample, "colour supersampling factor 1..4");
  CLI::App* verify = app.add_subcommand("verify", "theorem reports as a JSON array; exit 1 on any failed check");
  source_opts(verify);
  verify->add_flag("--all", all, "verify every quadrature map in the catalog");
  CLI::App* trees = app.add_subcommand("trees", "exhaustive check of 2n1 + n2 >= n + 3 over labeled trees");
  trees->add_option("--max-vertices", max_vertices, "largest tree size (<= 9)");
  trees->add_option("--out", out, "output path (default: stdout)");
  CLI::App* group = app.add_subcommand("group-maps", "sampled checks of the Nielsen, anti-Farey and Apollonian maps");
  std::string which;
  group->add_option("map", which, "nielsen, anti-farey or apollonian")->required();
  group->add_option("--samples", samples, "number of samples (default 256)");
  group->add_option("--seed", seed, "seed for random samples");
  group->add_option("--raster", raster_out, "optional PPM picture");
  group->add_option("--res", res, "raster resolution N or NxM");
  group->add_option("--max-iter", max_iter, "raster iteration budget (default 60)");
  group->add_option("--out", out, "output path (default: stdout)");
  CLI::App* catalog = app.add_subcommand("catalog", "list catalog entries as domain-spec JSON");
  catalog->add_option("--out", out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(resolve(positional, map_path, catalog_name), tol, out);
    if (render->parsed())
      return cmd_render(resolve(positional, map_path, catalog_name), tol, bounds, res, max_iter < 0 ? 60 : max_iter, supersample, out);
    if (verify->parsed()) {
      std::vector<Source> srcs;
      if (all) {
        if (!positional.empty() || !map_path.empty() || !catalog_name.empty()) throw CliFailure{kInputError, "--all takes no map source"};
        for (const qdyn::CatalogEntry& e : qdyn::catalog())
          if (e.kind == qdyn::EntryKind::QuadratureMap) srcs.push_back({e.name, *e.map, e.kind, 4096});
      } else {
        srcs.push_back(resolve(positional, map_path, catalog_name));
      }
      return cmd_verify(srcs, tol, out);
    }
    if (trees->parsed()) return cmd_trees(max_vertices, out);
    if (group->parsed()) return cmd_group_maps(which, samples, seed, res, max_iter < 0 ? 60 : max_iter, raster_out, out);
    if (catalog->parsed()) {
      json arr = json::array();
      for (const qdyn::CatalogEntry& e : qdyn::catalog()) {
        json j = {{"name", e.name}, {"kind", std::string(qdyn::to_string(e.kind))}, {"description", e.description}};
        if (e.map) j["spec"] = qdyn::to_json(qdyn::DomainSpec{e.name, *e.map, 4096});
        if (e.parameter) j["parameter"] = *e.parameter;
        arr.push_back(j);
      }
      emit(arr, out);
      return kOk;
    }
  } catch (const CliFailure& f) {
    std::cerr << "qdyn: " << f.message << "\n";
    return f.code;
  } catch (const qdyn::Error& e) {
    std::cerr << "qdyn: " << qdyn::to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_for(e);
  }
  return kInputError;
}
