#pragma once

// JSON and CSV for spaces, maps, curve families and certificates.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/error.hpp"
#include "qrgeom/quasiregular.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       std::initializer_list<const char*> required, const std::string& where,
                       std::vector<std::string>& findings) {
  if (!obj.is_object()) {
    findings.push_back(where + ": expected an object");
    return;
  }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) findings.push_back(where + ": unknown field '" + it.key() + "'");
  for (auto r : required)
    if (!obj.contains(r)) findings.push_back(where + ": missing field '" + std::string(r) + "'");
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::usage, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(where + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace detail

inline json load_json(const std::filesystem::path& p) { return detail::parse_json(detail::read_text(p), p.string()); }

// Non-finite numbers become strings so that reports stay valid JSON.
inline json jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json jnums(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(jnum(x));
  return a;
}

// ---------------------------------------------------------------------------
// Spaces

inline SpaceData space_data_from_json(const json& j) {
  std::vector<std::string> findings;
  detail::check_keys(j, {"vertices", "edges", "dist"}, {"vertices", "edges"}, "space", findings);
  if (!findings.empty()) throw ValidationError(std::move(findings));
  SpaceData d;
  std::unordered_map<std::string, std::size_t> index;
  if (!j["vertices"].is_array()) throw ValidationError("space: vertices must be an array");
  for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
    const auto& v = j["vertices"][i];
    const std::string where = "vertex " + std::to_string(i);
    detail::check_keys(v, {"id", "mass"}, {"id", "mass"}, where, findings);
    if (!v.is_object() || !v.contains("id") || !v.contains("mass")) continue;
    if (!v["id"].is_string() || !v["mass"].is_number()) {
      findings.push_back(where + ": id must be a string and mass a number");
      continue;
    }
    index.emplace(v["id"].get<std::string>(), d.ids.size());
    d.ids.push_back(v["id"].get<std::string>());
    d.masses.push_back(v["mass"].get<double>());
  }
  if (!j["edges"].is_array()) throw ValidationError("space: edges must be an array");
  for (std::size_t e = 0; e < j["edges"].size(); ++e) {
    const auto& ed = j["edges"][e];
    const std::string where = "edge " + std::to_string(e);
    detail::check_keys(ed, {"u", "v", "len"}, {"u", "v", "len"}, where, findings);
    if (!ed.is_object() || !ed.contains("u") || !ed.contains("v") || !ed.contains("len")) continue;
    if (!ed["u"].is_string() || !ed["v"].is_string() || !ed["len"].is_number()) {
      findings.push_back(where + ": u, v must be strings and len a number");
      continue;
    }
    auto u = index.find(ed["u"].get<std::string>()), v = index.find(ed["v"].get<std::string>());
    if (u == index.end() || v == index.end()) {
      findings.push_back(where + ": unknown endpoint");
      continue;
    }
    d.edges.push_back({u->second, v->second, ed["len"].get<double>()});
  }
  if (j.contains("dist")) {
    const auto& m = j["dist"];
    if (m.is_string()) {
      if (m.get<std::string>() != "path") findings.push_back("space: dist must be \"path\" or a matrix");
    } else if (m.is_array()) {
      const std::size_t n = d.ids.size();
      DistanceMatrix dm(n);
      bool shape = m.size() == n;
      for (std::size_t i = 0; shape && i < n; ++i) {
        if (!m[i].is_array() || m[i].size() != n) {
          shape = false;
          break;
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (!m[i][k].is_number()) {
            shape = false;
            break;
          }
          dm(i, k) = m[i][k].get<double>();
        }
      }
      if (!shape)
        findings.push_back("space: dist matrix must be " + std::to_string(n) + "x" + std::to_string(n) + " numbers");
      else
        d.dist = std::move(dm);
    } else {
      findings.push_back("space: dist must be \"path\" or a matrix");
    }
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return d;
}

inline SpacePtr space_from_json(const json& j) { return std::make_shared<const Space>(space_data_from_json(j)); }

inline SpacePtr load_space(const std::filesystem::path& p) { return space_from_json(load_json(p)); }

inline json space_to_json(const Space& s) {
  json j;
  j["vertices"] = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) j["vertices"].push_back({{"id", s.id(i)}, {"mass", s.mass(i)}});
  j["edges"] = json::array();
  for (const auto& e : s.edges()) j["edges"].push_back({{"u", s.id(e.u)}, {"v", s.id(e.v)}, {"len", e.len}});
  if (s.is_path_metric()) {
    j["dist"] = "path";
  } else {
    json m = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < s.size(); ++k) row.push_back(s.dist(i, k));
      m.push_back(std::move(row));
    }
    j["dist"] = std::move(m);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Maps: {"source": file, "target": file, "pairs": [[x, y], ...]}; files relative to the map.

struct LoadedMap {
  std::filesystem::path source_file, target_file;
  VertexMap map;
};

inline std::vector<std::size_t> assignment_from_pairs(const Space& src, const Space& tgt, const json& pairs,
                                                      std::vector<std::string>& findings) {
  std::vector<std::size_t> assign(src.size(), std::numeric_limits<std::size_t>::max());
  if (!pairs.is_array()) {
    findings.push_back("map: pairs must be an array");
    return assign;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
      findings.push_back("pair " + std::to_string(i) + ": expected [source id, target id]");
      continue;
    }
    const auto xs = p[0].get<std::string>(), ys = p[1].get<std::string>();
    std::size_t x, y;
    try {
      x = src.index(xs);
    } catch (const std::exception&) {
      findings.push_back("pair " + std::to_string(i) + ": unknown source vertex '" + xs + "'");
      continue;
    }
    try {
      y = tgt.index(ys);
    } catch (const std::exception&) {
      findings.push_back("pair " + std::to_string(i) + ": image '" + ys + "' is not a target vertex");
      continue;
    }
    if (assign[x] != std::numeric_limits<std::size_t>::max() && assign[x] != y)
      findings.push_back("map not a function: '" + xs + "' assigned twice");
    assign[x] = y;
  }
  std::string missing;
  for (std::size_t x = 0; x < src.size(); ++x)
    if (assign[x] == std::numeric_limits<std::size_t>::max()) missing += (missing.empty() ? "" : ",") + src.id(x);
  if (!missing.empty()) findings.push_back("map not total: unassigned " + missing);
  return assign;
}

inline LoadedMap load_map(const std::filesystem::path& p) {
  const auto j = load_json(p);
  std::vector<std::string> findings;
  detail::check_keys(j, {"source", "target", "pairs"}, {"source", "target", "pairs"}, "map", findings);
  if (!findings.empty()) throw ValidationError(std::move(findings));
  if (!j["source"].is_string() || !j["target"].is_string()) throw ValidationError("map: source and target must be file names");
  const auto dir = p.parent_path();
  const auto sf = dir / j["source"].get<std::string>(), tf = dir / j["target"].get<std::string>();
  auto load_side = [&](const std::filesystem::path& f, const char* side) -> SpacePtr {
    try {
      return load_space(f);
    } catch (const ValidationError& e) {
      for (const auto& s : e.findings()) findings.push_back(std::string(side) + " " + f.filename().string() + ": " + s);
      return nullptr;
    }
  };
  auto src = load_side(sf, "source");
  auto tgt = load_side(tf, "target");
  if (!src || !tgt) throw ValidationError(std::move(findings));
  auto assign = assignment_from_pairs(*src, *tgt, j["pairs"], findings);
  if (!findings.empty()) {
    // surjectivity and edge-compatibility over whatever was assigned
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<char> hit(tgt->size(), 0);
    for (auto y : assign)
      if (y != none) hit[y] = 1;
    std::string missing;
    for (std::size_t y = 0; y < tgt->size(); ++y)
      if (!hit[y]) missing += (missing.empty() ? "" : ",") + tgt->id(y);
    if (!missing.empty()) findings.push_back("not surjective: missing " + missing);
    for (const auto& e : src->edges()) {
      const auto a = assign[e.u], b = assign[e.v];
      if (a != none && b != none && a != b && !tgt->edge_between(a, b))
        findings.push_back("edge " + src->id(e.u) + "-" + src->id(e.v) + " maps to non-adjacent " + tgt->id(a) + "," +
                           tgt->id(b));
    }
    throw ValidationError(std::move(findings));
  }
  return LoadedMap{sf, tf, VertexMap(src, tgt, std::move(assign))};
}

inline json map_to_json(const VertexMap& f, const std::string& source_file, const std::string& target_file) {
  json j;
  j["source"] = source_file;
  j["target"] = target_file;
  j["pairs"] = json::array();
  for (std::size_t x = 0; x < f.source().size(); ++x) j["pairs"].push_back({f.source().id(x), f.target().id(f(x))});
  return j;
}

// ---------------------------------------------------------------------------
// Families: {"paths": [[id, ...], ...]}, {"connect": {"E": [...], "F": [...], "within": [...]}}
// or {"samples": [{"connect": ...}, ...]}. A missing "within" means the whole space.

struct FamilySpec {
  std::vector<Curve> paths;
  std::vector<ConnectSpec> connect;
  bool explicit_paths() const { return !paths.empty() || connect.empty(); }
};

inline VertexSet ids_to_set(const Space& s, const json& a, const std::string& where, std::vector<std::string>& findings) {
  VertexSet out;
  if (!a.is_array()) {
    findings.push_back(where + ": expected an array of vertex ids");
    return out;
  }
  for (const auto& v : a) {
    if (!v.is_string()) {
      findings.push_back(where + ": vertex ids must be strings");
      continue;
    }
    try {
      out.push_back(s.index(v.get<std::string>()));
    } catch (const std::exception&) {
      findings.push_back(where + ": unknown vertex '" + v.get<std::string>() + "'");
    }
  }
  return normalize(std::move(out));
}

inline ConnectSpec connect_from_json(const Space& s, const json& j, const std::string& where,
                                     std::vector<std::string>& findings) {
  ConnectSpec c;
  detail::check_keys(j, {"E", "F", "within"}, {"E", "F"}, where, findings);
  if (!j.is_object()) return c;
  if (j.contains("E")) c.E = ids_to_set(s, j["E"], where + ".E", findings);
  if (j.contains("F")) c.F = ids_to_set(s, j["F"], where + ".F", findings);
  c.within = j.contains("within") ? ids_to_set(s, j["within"], where + ".within", findings) : all_vertices(s);
  return c;
}

inline FamilySpec family_from_json(const Space& s, const json& j) {
  std::vector<std::string> findings;
  FamilySpec out;
  detail::check_keys(j, {"paths", "connect", "samples"}, {}, "family", findings);
  if (!findings.empty()) throw ValidationError(std::move(findings));
  if (j.contains("paths")) {
    if (!j["paths"].is_array()) findings.push_back("family: paths must be an array");
    for (std::size_t i = 0; j["paths"].is_array() && i < j["paths"].size(); ++i) {
      const auto& p = j["paths"][i];
      Curve c;
      if (!p.is_array()) {
        findings.push_back("path " + std::to_string(i) + ": expected an array of vertex ids");
        continue;
      }
      bool ok = true;
      for (const auto& v : p) {
        try {
          c.vertices.push_back(s.index(v.get<std::string>()));
        } catch (const std::exception&) {
          findings.push_back("path " + std::to_string(i) + ": unknown vertex " + v.dump());
          ok = false;
        }
      }
      if (ok && !is_valid_curve(s, c)) findings.push_back("path " + std::to_string(i) + ": consecutive vertices not adjacent");
      out.paths.push_back(std::move(c));
    }
  }
  if (j.contains("connect")) out.connect.push_back(connect_from_json(s, j["connect"], "connect", findings));
  if (j.contains("samples")) {
    if (!j["samples"].is_array()) findings.push_back("family: samples must be an array");
    for (std::size_t i = 0; j["samples"].is_array() && i < j["samples"].size(); ++i) {
      const auto& e = j["samples"][i];
      std::vector<std::string> local;
      detail::check_keys(e, {"connect"}, {"connect"}, "sample " + std::to_string(i), local);
      findings.insert(findings.end(), local.begin(), local.end());
      if (local.empty()) out.connect.push_back(connect_from_json(s, e["connect"], "sample " + std::to_string(i), findings));
    }
  }
  if (out.paths.empty() && out.connect.empty()) findings.push_back("family: needs paths, connect or samples");
  for (std::size_t i = 0; i < out.connect.size(); ++i) {
    try {
      detail::check_connect_sets(s, out.connect[i].E, out.connect[i].F, out.connect[i].within);
    } catch (const ValidationError& e) {
      for (const auto& f : e.findings()) findings.push_back("connect " + std::to_string(i) + ": " + f);
    }
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return out;
}

inline json ids_json(const Space& s, const VertexSet& v) {
  json a = json::array();
  for (auto x : v) a.push_back(s.id(x));
  return a;
}

inline json connect_to_json(const Space& s, const ConnectSpec& c) {
  return {{"E", ids_json(s, c.E)}, {"F", ids_json(s, c.F)}, {"within", ids_json(s, c.within)}};
}

// ---------------------------------------------------------------------------
// Certificates and CSV

inline json certificate_to_json(const Certificate& c, const Space* space = nullptr) {
  json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["estimate"] = jnum(c.estimate);
  j["witness_kind"] = c.witness_kind;
  json w = json::array();
  for (auto x : c.witness) {
    if (space && c.witness_kind != "family sample" && x < space->size())
      w.push_back(space->id(x));
    else
      w.push_back(x);
  }
  j["witness"] = std::move(w);
  j["flags"] = c.flags;
  json v = json::object();
  for (const auto& [k, x] : c.values) v[k] = jnum(x);
  j["values"] = std::move(v);
  return j;
}

// Shortest round-trip decimal for CSV cells.
inline std::string csv_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::usage, "cannot write " + p.string());
  out << text;
}

inline std::string matrix_csv(const Space& s, const DistanceMatrix& m) {
  std::ostringstream os;
  os << "id";
  for (std::size_t i = 0; i < s.size(); ++i) os << ',' << s.id(i);
  os << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << s.id(i);
    for (std::size_t k = 0; k < s.size(); ++k) os << ',' << csv_num(m(i, k));
    os << '\n';
  }
  return os.str();
}

}  // namespace qrgeom
