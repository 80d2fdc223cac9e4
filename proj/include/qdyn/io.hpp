#pragma once

// JSON encodings and PPM output.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdyn/droplet_graph.hpp"
#include "qdyn/dynamics.hpp"
#include "qdyn/exemplars.hpp"
#include "qdyn/quadrature.hpp"
#include "qdyn/rational.hpp"
#include "qdyn/singularity.hpp"
#include "qdyn/theorem.hpp"

namespace qdyn {

using json = nlohmann::ordered_json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const SpherePoint& p) { return p.is_infinite() ? json(nullptr) : to_json(p.value()); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::InvalidArgument, "json: complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Polynomial& p) {
  json a = json::array();
  for (const cplx c : p.coeffs()) a.push_back(to_json(c));
  return a;
}

inline Polynomial polynomial_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidArgument, "json: polynomial must be an array of coefficients");
  std::vector<cplx> c;
  for (const json& x : j) c.push_back(complex_from_json(x));
  return Polynomial(std::move(c));
}

inline json to_json(const RationalMap& r) { return {{"numerator", to_json(r.num())}, {"denominator", to_json(r.den())}}; }

inline RationalMap rational_from_json(const json& j) {
  if (!j.is_object() || !j.contains("numerator") || !j.contains("denominator"))
    throw Error(ErrorKind::InvalidArgument, "json: rational map needs numerator and denominator");
  return RationalMap(polynomial_from_json(j.at("numerator")), polynomial_from_json(j.at("denominator")));
}

struct DomainSpec {
  std::string name;
  RationalMap map;
  int samples = 4096;
};

inline json to_json(const DomainSpec& s) { return {{"name", s.name}, {"map", to_json(s.map)}, {"samples", s.samples}}; }

inline DomainSpec domain_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("map")) throw Error(ErrorKind::InvalidArgument, "json: domain spec needs a map");
  DomainSpec s{j.value("name", std::string("custom")), rational_from_json(j.at("map")), j.value("samples", 4096)};
  if (s.samples < 64) throw Error(ErrorKind::InvalidArgument, "json: samples must be at least 64");
  return s;
}

inline json domain_summary(const QuadratureDomain& q) {
  json nodes = json::array();
  for (const Node& n : q.nodes()) nodes.push_back({{"z", to_json(n.location)}, {"weight", n.weight}});
  return {{"d_f", q.d_f()}, {"d_Omega", q.d_Omega()}, {"n_Omega", q.n_Omega()}, {"nodes", nodes}, {"node_at_infinity", q.node_at_infinity()}};
}

inline json to_json(const UnivalenceCertificate& c) {
  return {{"samples", c.samples},
          {"transversal_crossings", c.transversal_crossings},
          {"overlapping_arcs", c.overlapping_arcs},
          {"tangential_contacts", c.tangential_contacts.size()},
          {"injectivity_samples", c.injectivity_samples},
          {"injectivity_failures", c.injectivity_failures},
          {"standing_margin", c.standing_margin},
          {"accepted", c.accepted()}};
}

inline json to_json(const Singularity& s) {
  json j = {{"kind", std::string(to_string(s.kind))}, {"z", to_json(s.location)}, {"n", s.order_n}, {"delta", s.delta}};
  j["slope"] = std::isfinite(s.slope) ? json(s.slope) : json(nullptr);
  j["residual"] = std::isfinite(s.residual) ? json(s.residual) : json(nullptr);
  if (s.fit_unstable) j["fit_unstable"] = true;
  return j;
}

inline json to_json(const std::vector<Singularity>& v) {
  json a = json::array();
  for (const Singularity& s : v) a.push_back(to_json(s));
  return a;
}

inline json to_json(const Tree& t) {
  json e = json::array();
  for (const auto& [a, b] : t.edges) e.push_back({a, b});
  return {{"vertices", t.vertex_count}, {"edges", e}};
}

inline json to_json(const DropletTree& t) {
  json j = to_json(t.tree);
  json pts = json::array();
  for (const cplx z : t.edge_points) pts.push_back(to_json(z));
  j["edge_points"] = pts;
  return j;
}

inline json to_json(const TreeSweep& s, int max_vertices) {
  json per = json::object();
  for (const auto& [n, c] : s.per_size) per[std::to_string(n)] = c;
  return {{"max_vertices", max_vertices},
          {"checked", s.checked},
          {"violations", s.violations},
          {"equality_cases", s.equality_cases},
          {"chains", s.chains},
          {"chains_at_equality", s.chains_at_equality},
          {"non_chain_equality", s.non_chain_equality},
          {"max_valence_at_equality", s.max_valence_at_equality},
          {"per_size", per}};
}

inline json to_json(const TheoremReport& r) {
  json j;
  j["name"] = r.name;
  j["d_f"] = r.d_f;
  j["d_Omega"] = r.d_Omega;
  j["n_Omega"] = r.n_Omega;
  j["node_at_infinity"] = r.node_at_infinity;
  j["conn"] = r.conn;
  j["num_cusps"] = r.num_cusps;
  j["num_doubles"] = r.num_doubles;
  j["Delta"] = r.Delta;
  j["applicable"] = r.applicable;
  auto flag = [&](bool v) { return r.applicable ? json(v) : json(nullptr); };
  j["lhs_A"] = r.lhs_A;
  j["rhs_A"] = r.rhs_A;
  j["pass_A"] = flag(r.pass_A);
  if (r.node_at_infinity) {
    j["lhs_A_infty"] = *r.lhs_A_infty;
    j["rhs_A_infty"] = *r.rhs_A_infty;
    j["pass_A_infty"] = flag(*r.pass_A_infty);
  }
  j["lhs_B"] = r.lhs_B;
  j["rhs_B"] = r.rhs_B;
  j["pass_B"] = flag(r.pass_B);
  j["lhs_41"] = r.lhs_41;
  j["rhs_41"] = r.rhs_41;
  j["pass_41"] = flag(r.pass_41);
  j["crit_count_check"] = r.crit_count_check;
  j["delta_consistent"] = r.delta_consistent;
  j["components_pass"] = flag(r.components_pass);
  j["pass"] = r.all_pass();
  j["singularities"] = to_json(r.singularities);

  json tags = json::array();
  for (const TaggedCritical& t : r.crit_tags)
    tags.push_back({{"z", to_json(t.point)}, {"multiplicity", t.multiplicity}, {"tag", std::string(to_string(t.tag))}});
  json part = json::object();
  for (const CritTag t : {CritTag::C, CritTag::T, CritTag::P, CritTag::S, CritTag::Unresolved}) {
    const auto it = r.crit_partition.find(t);
    part[std::string(to_string(t))] = it == r.crit_partition.end() ? 0 : it->second;
  }
  json comps = json::array();
  for (const ComponentBound& c : r.components)
    comps.push_back({{"component", c.component}, {"doubles", c.doubles}, {"critical", c.critical}, {"pass", c.pass}});
  j["diagnostics"] = {{"crit_tags", tags},
                      {"crit_partition", part},
                      {"singular_convergence", r.singular_convergence},
                      {"components", comps},
                      {"interior_components", r.interior_components},
                      {"conn_raster_res", r.conn_raster_res},
                      {"standing_margin", r.standing_margin},
                      {"injectivity_margin", r.injectivity_margin},
                      {"fit_unstable", r.fit_unstable},
                      {"warnings", r.warnings}};
  return j;
}

inline json raster_metadata(const EscapeRaster& r) {
  json counts = json::object();
  for (const Cell c : {Cell::DropletInterior, Cell::Escaping, Cell::NonEscaping, Cell::BoundaryBand, Cell::Failure})
    counts[std::string(to_string(c))] = r.count(c);
  return {{"bounds", {{"center", to_json(r.bounds.center)}, {"width", r.bounds.width}, {"height", r.bounds.height}}},
          {"resolution", {r.nx, r.ny}},
          {"max_iter", r.max_iter},
          {"supersample", r.supersample},
          {"counts", counts},
          {"failures", r.count(Cell::Failure)}};
}

/// Binary P6, rows top to bottom.
inline void write_ppm(const std::string& path, int nx, int ny, const std::vector<Rgb>& px) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  out << "P6\n" << nx << ' ' << ny << "\n255\n";
  std::vector<char> buf;
  buf.reserve(px.size() * 3);
  for (const Rgb& c : px) {
    buf.push_back(static_cast<char>(c.r));
    buf.push_back(static_cast<char>(c.g));
    buf.push_back(static_cast<char>(c.b));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path);
}

inline void write_ppm(const std::string& path, const EscapeRaster& r) { write_ppm(path, r.nx, r.ny, r.colors); }

}  // namespace qdyn
