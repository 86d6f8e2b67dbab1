// qrgeom: command-line front end.
// Exit codes: 0 ok, 2 validation, 3 resource cap, 64 usage.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrgeom/qrgeom.hpp"

namespace fs = std::filesystem;
using namespace qrgeom;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;
constexpr int kExitUsage = 64;

struct Options {
  std::string out = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double tol = 1e-6;
  double p = 2.0;
  double radius_cap = 0.0;
  std::size_t exact_cap = kDefaultExactCap;
  std::size_t max_iter = 100000;
};

std::string sha256_file(const fs::path& p) {
  const auto bytes = detail::read_text(p);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

// argv without the output directory and thread count, which do not affect results
json command_echo(int argc, char** argv) {
  json a = json::array();
  for (int i = 1; i < argc; ++i) {
    std::string s = argv[i];
    if (s == "--out" || s == "--threads") {
      ++i;
      continue;
    }
    if (s.rfind("--out=", 0) == 0 || s.rfind("--threads=", 0) == 0) continue;
    a.push_back(s);
  }
  return a;
}

class Report {
 public:
  Report(const Options& opt, json command) : opt_(opt), t0_(std::chrono::steady_clock::now()) {
    j_["schema_version"] = kSchemaVersion;
    j_["command"] = std::move(command);
    j_["seed"] = opt.seed;
    j_["inputs"] = json::object();
    j_["results"] = json::object();
    j_["certificates"] = json::array();
  }

  void input(const fs::path& p) { j_["inputs"][p.string()] = sha256_file(p); }
  json& results() { return j_["results"]; }
  void certificate(const Certificate& c, const Space* s = nullptr) { j_["certificates"].push_back(certificate_to_json(c, s)); }
  void sidecar(const std::string& name, const std::string& text) {
    write_text(dir() / name, text);
    j_["files"].push_back(name);
  }

  fs::path dir() const {
    fs::create_directories(opt_.out);
    return fs::path(opt_.out);
  }

  void write() {
    j_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    write_text(dir() / "report.json", j_.dump(2) + "\n");
  }

 private:
  const Options& opt_;
  std::chrono::steady_clock::time_point t0_;
  json j_;
};

void summary(const std::vector<Certificate>& certs) {
  for (const auto& c : certs)
    std::cout << c.name << ": " << (c.pass ? "pass" : "FAIL") << " estimate " << csv_num(c.estimate) << "\n";
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const Options& opt, const json& echo, const std::string& file) {
  Report rep(opt, echo);
  rep.input(file);
  auto& res = rep.results();
  try {
    const auto j = load_json(file);
    if (j.is_object() && j.contains("pairs")) {
      res["kind"] = "map";
      const auto m = load_map(file);
      const auto& f = m.map;
      res["source_vertices"] = f.source().size();
      res["target_vertices"] = f.target().size();
      res["max_multiplicity"] = max_multiplicity(f);
      res["branch_set"] = ids_json(f.source(), branch_set(f));
    } else {
      res["kind"] = "space";
      const auto s = space_from_json(j);
      res["vertices"] = s->size();
      res["edges"] = s->edges().size();
      res["path_metric"] = s->is_path_metric();
    }
    res["valid"] = true;
    res["findings"] = json::array();
    rep.write();
    std::cout << "valid " << res["kind"].get<std::string>() << "\n";
    return 0;
  } catch (const ValidationError& e) {
    res["valid"] = false;
    res["findings"] = e.findings();
    rep.write();
    for (const auto& f : e.findings()) std::cerr << f << "\n";
    return kExitValidation;
  }
}

// ---------------------------------------------------------------------------
// pullback

int cmd_pullback(const Options& opt, const json& echo, const std::string& map_file, const std::string& metric,
                 std::size_t curve_edges) {
  Report rep(opt, echo);
  rep.input(map_file);
  const auto m = load_map(map_file);
  const auto& f = m.map;
  auto& res = rep.results();
  const auto bracket = pullback_metric_bracket(f);
  rep.sidecar("pullback_lower.csv", matrix_csv(f.source(), bracket.lower));
  rep.sidecar("pullback_upper.csv", matrix_csv(f.source(), bracket.upper));

  const bool want_exact = metric == "exact" || (metric == "auto" && f.source().size() <= opt.exact_cap);
  std::optional<DistanceMatrix> exact;
  if (want_exact) {
    exact = pullback_metric_exact(f, opt.exact_cap);
    rep.sidecar("pullback_exact.csv", matrix_csv(f.source(), *exact));
    std::size_t outside = 0;
    for (std::size_t a = 0; a < f.source().size(); ++a)
      for (std::size_t b = 0; b < f.source().size(); ++b)
        if ((*exact)(a, b) < bracket.lower(a, b) - kDistTol || (*exact)(a, b) > bracket.upper(a, b) + kDistTol) ++outside;
    res["bracket_violations"] = outside;
    res["exact_metric_findings"] = metric_findings(*exact);
  }
  res["metric"] = want_exact ? "exact" : "lower";

  json zeros = json::array();
  for (auto [a, b] : discreteness_failures(bracket.lower)) zeros.push_back({f.source().id(a), f.source().id(b)});
  res["discreteness_failures"] = zeros;
  if (!zeros.empty()) {
    rep.write();
    throw ValidationError("f not discrete at graph level: " + std::to_string(zeros.size()) + " pairs at pullback distance 0");
  }

  const auto fac = factorize(f, want_exact ? MetricChoice::exact : MetricChoice::lower, opt.exact_cap);
  const auto paths = enumerate_simple_paths(f.source(), curve_edges);
  res["paths"] = paths.curves.size();
  res["paths_truncated"] = paths.truncated;
  std::vector<Certificate> certs{verify_projection(fac, paths.curves), bld_bdd_transfer_check(f, fac, paths.curves)};
  if (want_exact) {
    const auto ch = length_chain(f, opt.exact_cap);
    res["multiplicity"] = ch.multiplicity;
    certs.push_back(ch.certificate);
  }
  for (const auto& c : certs) rep.certificate(c, &f.source());
  rep.write();
  summary(certs);
  return 0;
}

// ---------------------------------------------------------------------------
// measure

int cmd_measure(const Options& opt, const json& echo, const std::string& map_file) {
  Report rep(opt, echo);
  rep.input(map_file);
  const auto m = load_map(map_file);
  const auto& f = m.map;
  const auto mu = masses_of(f.source()), nu = masses_of(f.target());
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> rho(f.source().size());
  for (auto& r : rho) r = unit(rng);

  const auto jac = jacobians(f, mu, nu);
  const auto pb = pullback_measure(f, nu);
  Certificate chain;
  chain.name = "essential_index_chain";
  chain.estimate = 0.0;
  std::ostringstream csv;
  csv << "id,image,mu,nu_image,pullback_mass,J,J_inverse,local_index,essential_index\n";
  for (std::size_t x = 0; x < f.source().size(); ++x) {
    const auto i = local_index(f, x);
    const auto ess = essential_index_profile(f, x, nu, opt.radius_cap > 0.0 ? std::optional(opt.radius_cap) : std::nullopt);
    if (ess.value) {
      if (*ess.value < 1.0 - 1e-12 || *ess.value > static_cast<double>(i) + 1e-12) chain.fail({x}, "vertex");
      chain.estimate = std::max(chain.estimate, *ess.value / static_cast<double>(i));
    }
    csv << f.source().id(x) << ',' << f.target().id(f(x)) << ',' << csv_num(mu[x]) << ',' << csv_num(nu[f(x)]) << ','
        << csv_num(pb[x]) << ',' << (jac.forward[x] ? csv_num(*jac.forward[x]) : "undefined") << ','
        << (jac.inverse[x] ? csv_num(*jac.inverse[x]) : "undefined") << ',' << i << ','
        << (ess.value ? csv_num(*ess.value) : "undefined") << '\n';
  }
  rep.sidecar("jacobians.csv", csv.str());
  std::vector<Certificate> certs{change_of_variables_check(f, rho, nu), condition_N_check(f, mu, nu),
                                 condition_N_inverse_check(f, mu, nu), area_inequality_check(f, rho, mu, nu), chain};
  for (const auto& c : certs) rep.certificate(c, &f.source());
  rep.results()["total_pullback_mass"] = measure_of(pb, all_vertices(f.source()));
  rep.write();
  summary(certs);
  return 0;
}

// ---------------------------------------------------------------------------
// modulus

json modulus_json(const ModulusResult& r) {
  return {{"value", jnum(r.value)},   {"p", r.p},           {"gap", jnum(r.gap)},
          {"dual_bound", jnum(r.dual_bound)}, {"iterations", r.iterations}, {"rounds", r.rounds},
          {"min_curve_length", jnum(r.min_curve_length)}, {"converged", r.converged},
          {"empty_family", r.empty_family}, {"working_set", r.working_set.size()}, {"exact", r.exact}};
}

std::string density_csv(const Space& s, const ModulusResult& r) {
  std::ostringstream os;
  os << "u,v,len,rho\n";
  for (std::size_t e = 0; e < s.edges().size(); ++e)
    os << s.id(s.edges()[e].u) << ',' << s.id(s.edges()[e].v) << ',' << csv_num(s.edges()[e].len) << ','
       << csv_num(e < r.density.size() ? r.density[e] : 0.0) << '\n';
  return os.str();
}

int cmd_modulus(const Options& opt, const json& echo, const std::string& space_file, const std::string& family_file,
                const std::string& cost_kind) {
  Report rep(opt, echo);
  rep.input(space_file);
  rep.input(family_file);
  const auto s = load_space(space_file);
  const auto fam = family_from_json(*s, load_json(family_file));
  ModulusOptions mo;
  mo.p = opt.p;
  mo.tol = opt.tol;
  mo.max_iter = opt.max_iter;
  if (!(mo.p > 1.0)) throw ValidationError("p must exceed 1");
  const auto cost = cost_kind == "unit" ? unit_costs(*s) : mass_costs(*s);
  json out = json::array();
  std::size_t idx = 0;
  auto run = [&](const FamilyOracle& oracle, json desc) {
    const auto r = modulus(oracle, cost, mo);
    desc["result"] = modulus_json(r);
    out.push_back(desc);
    rep.sidecar(idx == 0 ? "density.csv" : "density_" + std::to_string(idx) + ".csv", density_csv(*s, r));
    std::cout << "Mod_" << csv_num(mo.p) << " = " << csv_num(r.value) << " (gap " << csv_num(r.gap) << ")\n";
    ++idx;
  };
  if (!fam.paths.empty()) run(explicit_family(*s, fam.paths), {{"family", "paths"}, {"curves", fam.paths.size()}});
  for (const auto& c : fam.connect)
    run(connecting_family(*s, c.E, c.F, c.within), {{"family", "connect"}, {"E", c.E.size()}, {"F", c.F.size()}});
  rep.results()["cost"] = cost_kind;
  rep.results()["families"] = out;
  rep.write();
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string map_file, property, family_file;
  double constant = kInf;
  std::size_t curve_edges = 6, random_curves = 200, m = 2;
};

int cmd_verify(const Options& opt, const json& echo, const VerifyArgs& a) {
  Report rep(opt, echo);
  rep.input(a.map_file);
  const auto lm = load_map(a.map_file);
  const auto& f = lm.map;
  auto& res = rep.results();
  res["property"] = a.property;
  res["constant"] = jnum(a.constant);
  std::vector<Certificate> certs;
  const Space* witness_space = &f.source();

  auto need_family = [&](const Space& s) {
    if (a.family_file.empty()) throw Error(ErrorKind::usage, "--family is required for --property " + a.property);
    rep.input(a.family_file);
    return family_from_json(s, load_json(a.family_file));
  };

  if (a.property == "bld" || a.property == "bdd") {
    const auto sample = curve_sample(f.source(), a.curve_edges, a.random_curves, opt.seed);
    auto c = a.property == "bld" ? bld_verify(f, a.constant, sample) : bdd_verify(f, a.constant, sample);
    const auto lf = lipschitz_field(f);
    c.values["lipschitz_field_bound"] = lf.bound;
    if (lf.collapse) c.flags.push_back("collapsed edge");
    certs.push_back(c);
  } else if (a.property == "lq") {
    certs.push_back(lq_verify(f, a.constant));
  } else if (a.property == "metric-qr" || a.property == "inverse-qr") {
    const bool inverse = a.property == "inverse-qr";
    certs.push_back(dilatation_certificate(f, a.constant, opt.radius_cap, inverse));
    const auto sum = dilatation_summary(f, opt.radius_cap, inverse);
    std::ostringstream csv;
    csv << "id,r,L,l,H\n";
    for (const auto& row : sum.rows)
      for (const auto& s : row.shells)
        csv << f.source().id(row.x) << ',' << csv_num(s.r) << ',' << csv_num(s.outer) << ',' << csv_num(s.inner) << ','
            << csv_num(s.ratio) << '\n';
    rep.sidecar(inverse ? "inverse_dilatation.csv" : "dilatation.csv", csv.str());
  } else if (a.property == "bqs") {
    const auto g = bqs_gauge(f, continuum_sample(f.source(), a.random_curves, opt.seed), opt.seed);
    std::ostringstream csv;
    csv << "t,eta\n";
    Certificate c;
    c.name = "bqs";
    c.estimate = 0.0;
    for (const auto& pt : g.points) {
      csv << csv_num(pt.t) << ',' << csv_num(pt.eta) << '\n';
      if (pt.t > 0.0) c.estimate = std::max(c.estimate, pt.eta / pt.t);
    }
    c.values["pairs"] = static_cast<double>(g.pairs);
    c.values["seed"] = static_cast<double>(g.seed);
    c.flags.push_back("linear gauge bound");
    if (c.estimate > a.constant + kDistTol) c.fail({}, "gauge");
    certs.push_back(c);
    rep.sidecar("gauge.csv", csv.str());
  } else if (a.property == "ko" || a.property == "ki") {
    const auto fam = need_family(f.source());
    if (fam.connect.empty()) throw ValidationError("ko/ki need connect samples");
    const auto mc = a.property == "ko" ? ko_certificate(f, fam.connect, opt.p, a.constant)
                                       : ki_certificate(f, fam.connect, opt.p, a.constant);
    json samples = json::array();
    for (const auto& s : mc.samples)
      samples.push_back({{"source", jnum(s.source)}, {"image", jnum(s.image)}, {"ratio", jnum(s.ratio)}, {"gap", jnum(s.gap)}});
    res["samples"] = samples;
    certs.push_back(mc.certificate);
  } else if (a.property == "analytic-qr") {
    certs.push_back(analytic_qr_constant(f, opt.p, a.constant).certificate);
  } else if (a.property == "vaisala") {
    const auto fam = need_family(f.target());
    if (fam.paths.empty()) throw ValidationError("vaisala needs explicit image paths");
    const auto lifted = lift_curves(f, fam.paths);
    auto v = vaisala_certificate(f, lifted.gamma, fam.paths, lifted.lifts, a.m, opt.p, a.constant);
    if (lifted.ambiguous) v.certificate.flags.push_back("ambiguous lift");
    res["lifts"] = lifted.gamma.size();
    res["mod_source"] = jnum(v.mod_source);
    res["mod_image"] = jnum(v.mod_image);
    certs.push_back(v.certificate);
    witness_space = nullptr;
  } else {
    throw Error(ErrorKind::usage, "unknown property '" + a.property + "'");
  }
  for (const auto& c : certs) rep.certificate(c, witness_space);
  rep.write();
  summary(certs);
  return 0;
}

// ---------------------------------------------------------------------------
// embed

int cmd_embed(const Options& opt, const json& echo, const std::string& map_file, bool normalize) {
  Report rep(opt, echo);
  rep.input(map_file);
  const auto lm = load_map(map_file);
  const auto& f = lm.map;
  EmbedOptions eo;
  eo.normalize = normalize;
  eo.exact_cap = opt.exact_cap;
  const auto r = embed(f, eo);
  const auto& plan = r.plan;
  const Space& Y = f.target();

  std::ostringstream csv;
  csv << "vertex,image";
  for (std::size_t i = 0; i < plan.dimension(); ++i) csv << ",c" << i;
  csv << '\n';
  for (std::size_t x = 0; x < f.source().size(); ++x) {
    csv << f.source().id(x) << ',' << Y.id(f(x));
    for (double v : r.coords[x]) csv << ',' << csv_num(v);
    csv << '\n';
  }
  rep.sidecar("coordinates.csv", csv.str());

  json pj;
  pj["N"] = plan.N;
  pj["c_d"] = plan.c_d;
  pj["colors_used"] = plan.colors_used;
  pj["dimension"] = plan.dimension();
  pj["doubling_constant"] = jnum(plan.doubling);
  pj["doubling_bound"] = jnum(plan.doubling_bound);
  pj["levels"] = json::array();
  for (std::size_t k = 1; k < plan.N; ++k) {
    json lv;
    lv["k"] = k;
    json R = json::object();
    for (std::size_t y = 0; y < Y.size(); ++y) R[Y.id(y)] = jnum(plan.R[k - 1][y]);
    lv["R"] = R;
    lv["net"] = ids_json(Y, plan.nets[k - 1]);
    pj["levels"].push_back(lv);
  }
  pj["blocks"] = json::array();
  for (const auto& b : plan.blocks) {
    json bj{{"k", b.k}, {"j", b.j}, {"slot", (b.k - 1) * plan.c_d + (b.j - 1)}, {"net_class", ids_json(Y, b.net_class)}};
    bj["sets"] = json::array();
    for (const auto& s : b.sets)
      bj["sets"].push_back({{"net_point", Y.id(s.net_point)}, {"points", ids_json(f.source(), s.points)}, {"label", s.label},
                            {"size", s.set.size()}});
    pj["blocks"].push_back(bj);
  }
  rep.sidecar("plan.json", pj.dump(2) + "\n");

  auto dist_json = [](const Distortion& d) {
    return json{{"lower", jnum(d.lower)}, {"upper", jnum(d.upper)}, {"injective", d.injective},
                {"phi_lipschitz", jnum(d.phi_lipschitz)}, {"fiber_epsilon", jnum(d.fiber_epsilon)},
                {"fiber_worst_over_12", jnum(d.fiber_worst_12)}};
  };
  json dj;
  dj["pullback_metric"] = dist_json(r.distortion);
  dj["original_metric"] = dist_json(r.original);
  dj["exact_metric"] = r.exact_metric;
  dj["coordinate_lipschitz_over_N"] = jnum(r.coordinate_lipschitz);
  const auto& c = r.checks;
  dj["plan_checks"] = {{"rk_lipschitz_excess", jnum(c.rk_lipschitz_excess)}, {"rk_zero_iff", c.rk_zero_iff},
                       {"net_separated", c.net_separated},  {"net_covers", c.net_covers},
                       {"classes_disjoint", c.classes_disjoint}, {"labels_consistent", c.labels_consistent},
                       {"comparability_7", jnum(c.comparability_7)}, {"comparability_8", jnum(c.comparability_8)}};
  dj["flags"] = r.flags;
  rep.sidecar("distortion.json", dj.dump(2) + "\n");
  rep.results() = dj;
  rep.results()["N"] = plan.N;
  rep.results()["dimension"] = plan.dimension();
  rep.certificate(r.fiber_scale, &f.source());
  rep.certificate(r.composition, &f.source());
  rep.write();
  std::cout << "N " << plan.N << " dimension " << plan.dimension() << " injective " << r.distortion.injective << " lower "
            << csv_num(r.distortion.lower) << " upper " << csv_num(r.distortion.upper) << "\n";
  summary({r.fiber_scale, r.composition});
  return 0;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string kind, map_file;
  std::size_t levels = 4, sectors = 8, k = 2, n = 8, m = 2, w = 4, h = 4;
  double r0 = 0.0, r1 = 1.0, t = 2.0;
  bool flat = false;
};

VertexSet ring(std::size_t offset, std::size_t i, std::size_t sectors) {
  VertexSet r;
  for (std::size_t j = 0; j < sectors; ++j) r.push_back(offset + i * sectors + j);
  return r;
}

int cmd_gen(const Options& opt, const json& echo, const GenArgs& g) {
  Report rep(opt, echo);
  auto& res = rep.results();
  res["kind"] = g.kind;
  auto write_json = [&](const std::string& name, const json& j) { rep.sidecar(name, j.dump(2) + "\n"); };
  auto write_map = [&](const VertexMap& f) {
    write_json("source.json", space_to_json(f.source()));
    write_json("target.json", space_to_json(f.target()));
    write_json("map.json", map_to_json(f, "source.json", "target.json"));
  };
  if (g.kind == "polar") {
    const auto s = gen_polar_grid(g.levels, g.sectors, g.r0, g.r1);
    write_json("space.json", space_to_json(*s));
    if (g.r0 > 0.0) {
      ConnectSpec c{ring(0, 0, g.sectors), ring(0, g.levels - 1, g.sectors), all_vertices(*s)};
      write_json("family.json", {{"connect", connect_to_json(*s, c)}});
    }
    res["total_mass"] = s->total_mass();
  } else if (g.kind == "winding") {
    const auto f = gen_winding(g.k, g.levels, g.sectors, g.r1, !g.flat);
    write_map(f);
    // annulus families between rings of the source, away from the center
    const std::size_t S = g.k * g.sectors, L = g.levels;
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{L / 4, L - 1}, {L / 2 > 0 ? L / 2 - 1 : 0, L - 1}, {0, L / 2}};
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    json samples = json::array();
    for (auto [a, b] : pairs) {
      if (a >= b) continue;
      ConnectSpec c{ring(1, a, S), ring(1, b, S), {}};
      for (std::size_t i = a; i <= b; ++i) {
        const auto r = ring(1, i, S);
        c.within.insert(c.within.end(), r.begin(), r.end());
      }
      c.within = normalize(c.within);
      samples.push_back({{"connect", connect_to_json(f.source(), c)}});
    }
    write_json("family.json", {{"samples", samples}});
    res["branch_set"] = ids_json(f.source(), branch_set(f));
  } else if (g.kind == "cycle") {
    write_json("space.json", space_to_json(*gen_cycle(g.n)));
  } else if (g.kind == "cycle-cover") {
    const auto f = gen_cycle_cover(g.n, g.m);
    write_map(f);
    json path = json::array();
    for (std::size_t i = 0; i <= g.n; ++i) path.push_back(f.target().id(i % g.n));
    write_json("family.json", {{"paths", json::array({path})}});
  } else if (g.kind == "grid") {
    write_json("space.json", space_to_json(*gen_grid(g.w, g.h)));
  } else if (g.kind == "stretch") {
    write_map(gen_stretch(g.w, g.h, g.t));
  } else if (g.kind == "random-map") {
    write_map(gen_random_map(g.n, g.k, opt.seed));
  } else if (g.kind == "pullback") {
    if (g.map_file.empty()) throw Error(ErrorKind::usage, "gen pullback needs --map");
    rep.input(g.map_file);
    const auto lm = load_map(g.map_file);
    write_json("space.json", space_to_json(*gen_pullback_space(lm.map, opt.exact_cap)));
  } else {
    throw Error(ErrorKind::usage, "unknown generator '" + g.kind + "'");
  }
  rep.write();
  std::cout << "wrote " << g.kind << " to " << opt.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrgeom: pullback metrics, modulus and quasiregularity certificates on finite metric measure spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--threads", opt.threads, "worker threads (0: all cores)");
  app.add_option("--tol", opt.tol, "modulus admissibility tolerance");
  app.add_option("--p", opt.p, "modulus exponent");
  app.add_option("--radius-cap", opt.radius_cap, "radius cap for profiles (0: normal radius)");
  app.add_option("--exact-cap", opt.exact_cap, "largest source for the exact pullback metric");
  app.add_option("--max-iter", opt.max_iter, "modulus coordinate sweeps");

  std::string file;
  auto* validate = app.add_subcommand("validate", "check a space or map file");
  validate->add_option("file", file)->required()->check(CLI::ExistingFile);

  std::string map_file, metric = "auto";
  std::size_t curve_edges = 6;
  auto* pullback = app.add_subcommand("pullback", "pullback metric, factorization and its checks");
  pullback->add_option("--map", map_file)->required()->check(CLI::ExistingFile);
  pullback->add_option("--metric", metric)->check(CLI::IsMember({"auto", "exact", "lower"}));
  pullback->add_option("--curve-edges", curve_edges);

  auto* measure = app.add_subcommand("measure", "pullback measure, Jacobians, Condition N");
  measure->add_option("--map", map_file)->required()->check(CLI::ExistingFile);

  std::string space_file, family_file, cost = "mass";
  auto* mod = app.add_subcommand("modulus", "p-modulus of a curve family");
  mod->add_option("--space", space_file)->required()->check(CLI::ExistingFile);
  mod->add_option("--family", family_file)->required()->check(CLI::ExistingFile);
  mod->add_option("--cost", cost)->check(CLI::IsMember({"mass", "unit"}));

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "distortion and quasiregularity certificates");
  verify->add_option("--map", va.map_file)->required()->check(CLI::ExistingFile);
  verify->add_option("--property", va.property)
      ->required()
      ->check(CLI::IsMember({"bld", "bdd", "lq", "metric-qr", "inverse-qr", "bqs", "ko", "ki", "analytic-qr", "vaisala"}));
  verify->add_option("--constant", va.constant);
  verify->add_option("--family", va.family_file)->check(CLI::ExistingFile);
  verify->add_option("--curve-edges", va.curve_edges);
  verify->add_option("--random-curves", va.random_curves);
  verify->add_option("--m", va.m);

  bool no_normalize = false;
  auto* emb = app.add_subcommand("embed", "bi-Lipschitz embedding f x phi");
  emb->add_option("--map", map_file)->required()->check(CLI::ExistingFile);
  emb->add_flag("--no-normalize", no_normalize, "skip the pullback normalization (map must be 1-BDD)");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "write example spaces and maps");
  gen->add_option("kind", ga.kind)
      ->required()
      ->check(CLI::IsMember({"polar", "winding", "cycle", "cycle-cover", "grid", "stretch", "random-map", "pullback"}));
  gen->add_option("--levels", ga.levels);
  gen->add_option("--sectors", ga.sectors);
  gen->add_option("--r0", ga.r0);
  gen->add_option("--r1", ga.r1);
  gen->add_option("--k", ga.k);
  gen->add_option("--n", ga.n);
  gen->add_option("--m", ga.m);
  gen->add_option("--width", ga.w);
  gen->add_option("--height", ga.h);
  gen->add_option("--t", ga.t);
  gen->add_flag("--flat", ga.flat, "flat source for winding (default: cone metric)");
  gen->add_option("--map", ga.map_file)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (opt.threads > 0) set_threads(opt.threads);
  const auto echo = command_echo(argc, argv);
  try {
    if (*validate) return cmd_validate(opt, echo, file);
    if (*pullback) return cmd_pullback(opt, echo, map_file, metric, curve_edges);
    if (*measure) return cmd_measure(opt, echo, map_file);
    if (*mod) return cmd_modulus(opt, echo, space_file, family_file, cost);
    if (*verify) return cmd_verify(opt, echo, va);
    if (*emb) return cmd_embed(opt, echo, map_file, !no_normalize);
    if (*gen) return cmd_gen(opt, echo, ga);
  } catch (const ValidationError& e) {
    for (const auto& f : e.findings()) std::cerr << "error: " << f << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::validation: return kExitValidation;
      case ErrorKind::resource_cap: return kExitCap;
      case ErrorKind::usage: return kExitUsage;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
