#pragma once
// Job orchestration behind the command-line tool: configuration, pipelines,
// and the JSON report. Every pass/fail flag names the tolerance it used.

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "examples.hpp"
#include "io.hpp"

namespace symplag::app {

using io::json;
namespace fs = std::filesystem;

inline const char* kVersion = "1.0.0";

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify", "integrate", "example", "family", "invariants", "congruence", "export"};
  return names;
}

inline const std::vector<std::string>& tolerance_names() {
  static const std::vector<std::string> names{"group", "rank", "frame", "flat", "gauge", "congruent", "resid", "umbilic"};
  return names;
}

inline double& tol_ref(Tolerances& t, const std::string& name) {
  if (name == "group") return t.group;
  if (name == "rank") return t.rank;
  if (name == "frame") return t.frame;
  if (name == "flat") return t.flat;
  if (name == "gauge") return t.gauge;
  if (name == "congruent") return t.congruent;
  if (name == "resid") return t.resid;
  if (name == "umbilic") return t.umbilic;
  throw ConfigError("unknown tolerance '" + name + "'");
}

struct JobConfig {
  std::string command;
  bool has_grid = false;
  GridGeom grid;
  json params = json::object();
  Tolerances tol;
  std::string output_dir = "symplag_out";

  json to_json() const {
    json t = json::object();
    Tolerances copy = tol;
    for (const auto& n : tolerance_names()) t[n] = tol_ref(copy, n);
    json j{{"command", command}, {"params", params}, {"tolerances", t}, {"output_dir", output_dir}};
    j["grid"] = has_grid ? io::geom_to_json(grid) : json(nullptr);
    return j;
  }

  static JobConfig from_json(const json& j) {
    JobConfig c;
    try {
      c.command = j.value("command", std::string{});
      if (j.contains("grid") && !j["grid"].is_null()) {
        c.has_grid = true;
        c.grid = io::geom_from_json(j["grid"]);
      }
      if (j.contains("params")) c.params = j["params"];
      if (j.contains("tolerances"))
        for (const auto& [k, v] : j["tolerances"].items()) tol_ref(c.tol, k) = v.get<double>();
      c.output_dir = j.value("output_dir", c.output_dir);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
  }

  void validate() const {
    bool known = false;
    for (const auto& n : command_names()) known |= n == command;
    if (!known) throw ConfigError("unknown command '" + command + "'");
    Tolerances copy = tol;
    for (const auto& n : tolerance_names())
      if (!(tol_ref(copy, n) > 0)) throw ConfigError("tolerance " + n + " must be positive");
    if (has_grid) grid.validate();
    if (output_dir.empty()) throw ConfigError("output_dir is empty");
  }
};

// "nx,ny,x0,y0,dx,dy"
inline GridGeom parse_grid_spec(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("bad --grid entry '" + cell + "'");
    }
  }
  if (v.size() != 6) throw ConfigError("--grid expects nx,ny,x0,y0,dx,dy");
  GridGeom g{static_cast<int>(v[0]), static_cast<int>(v[1]), v[2], v[3], v[4], v[5]};
  g.validate();
  return g;
}

class Report {
 public:
  explicit Report(const JobConfig& cfg) : cfg_(cfg) { start_ = std::chrono::steady_clock::now(); }

  void residual(const std::string& name, const RealGrid& g, int margin = 0) {
    double mx = 0, sum = 0;
    std::size_t n = 0;
    for (int i = margin; i < g.nx() - margin; ++i)
      for (int j = margin; j < g.ny() - margin; ++j) {
        mx = std::max(mx, std::abs(g(i, j)));
        sum += std::abs(g(i, j));
        ++n;
      }
    residuals_[name] = {{"max", mx}, {"mean", n ? sum / n : 0.0}, {"margin", margin}};
  }
  void residual(const std::string& name, const ComplexGrid& g, int margin = 0) {
    residual(name, map(g, [](cplx c) { return std::abs(c); }), margin);
  }
  void value(const std::string& name, const json& v) { values_[name] = v; }

  // Passes when value <= tol (or value > tol when `above` is set).
  bool check(const std::string& name, double value, const std::string& tol_name, bool above = false) {
    Tolerances copy = cfg_.tol;
    const double t = tol_ref(copy, tol_name);
    const bool pass = above ? value > t : value <= t;
    checks_[name] = {{"value", value}, {"tolerance", "tol_" + tol_name}, {"threshold", t},
                     {"relation", above ? ">" : "<="}, {"pass", pass}};
    ok_ = ok_ && pass;
    return pass;
  }
  void warn(const std::string& w) { warnings_.push_back(w); }
  void warn_all(const std::vector<std::string>& ws) {
    for (const auto& w : ws) warn(w);
  }
  void file(const std::string& kind, const fs::path& p) { files_[kind] = p.string(); }
  bool ok() const { return ok_; }

  json to_json() const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return {{"status", ok_ ? "pass" : "fail"},
            {"config", cfg_.to_json()},
            {"residuals", residuals_},
            {"values", values_},
            {"checks", checks_},
            {"warnings", warnings_},
            {"files", files_},
            {"provenance",
             {{"version", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"threads", worker_count()},
              {"wall_time_s", wall}}}};
  }

 private:
  JobConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  json residuals_ = json::object(), values_ = json::object(), checks_ = json::object(), files_ = json::object();
  std::vector<std::string> warnings_;
  bool ok_ = true;
};

// ---- parameter helpers -----------------------------------------------------------

inline const GridGeom& need_grid(const JobConfig& c) {
  if (!c.has_grid) throw ConfigError("command '" + c.command + "' needs a grid (--grid or config.grid)");
  return c.grid;
}

inline Section5Params section5_params(const json& p) {
  Section5Params q;
  const json s = p.value("section5", json::object());
  q.p = s.value("p", 0.0);
  q.c1 = s.value("c1", 1.0);
  q.c2 = s.value("c2", 1.0);
  q.a1 = s.value("a1", 0.0);
  q.a2 = s.value("a2", 0.0);
  q.m1 = s.value("m1", 0.0);
  q.m2 = s.value("m2", 0.0);
  return q;
}

// Holomorphic polynomial sum_k c_k z^k from [[re, im], ...] or [re, ...].
inline ComplexGrid poly_field(const json& coeffs, const GridGeom& g) {
  std::vector<cplx> c;
  for (const auto& e : coeffs) c.push_back(e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>()) : cplx(e.get<double>(), 0));
  return sample(g, [&](double x, double y) {
    cplx z(x, y), acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
  });
}

inline fs::path resolve(const JobConfig& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || fs::exists(path) ? path : fs::path(c.output_dir) / path;
}

// Triple from params.source: "section5" (default), "umbilic", or "files".
inline InvariantTriple make_triple(const JobConfig& c, Report& rep, double lambda = 0) {
  const std::string src = c.params.value("source", std::string("section5"));
  if (src == "section5") {
    const auto q = section5_params(c.params);
    rep.warn_all(q.warnings());
    return section5_triple(q, need_grid(c), lambda);
  }
  if (src == "umbilic") {
    const GridGeom& g = need_grid(c);
    const json u = c.params.value("umbilic", json::object());
    InvariantTriple inv{poly_field(u.value("t_poly", json::array({1.0})), g), ComplexGrid(g),
                        poly_field(u.value("p_poly", json::array({0.0})), g)};
    for (auto& p : inv.p.v) p -= lambda;
    return inv;
  }
  if (src == "files") {
    const json f = c.params.at("files");
    InvariantTriple inv{io::read_field_csv(resolve(c, f.at("t"))), io::read_field_csv(resolve(c, f.at("h"))),
                        io::read_field_csv(resolve(c, f.at("p")))};
    for (auto& p : inv.p.v) p -= lambda;
    return inv;
  }
  throw ConfigError("unknown source '" + src + "'");
}

inline void write_triple(const fs::path& dir, const InvariantTriple& inv, Report& rep, const std::string& prefix = "") {
  for (const auto& [name, g] : {std::pair<const char*, const ComplexGrid*>{"t", &inv.t}, {"h", &inv.h}, {"p", &inv.p}}) {
    const fs::path p = dir / (prefix + name + ".csv");
    io::write_field_csv(p, *g);
    rep.file(prefix + name, p);
  }
}

// ---- commands ----------------------------------------------------------------------

inline void run_verify(const JobConfig& c, Report& rep) {
  const InvariantTriple inv = make_triple(c, rep);
  inv.validate(c.tol);
  const auto r = inteq_residual(inv);
  rep.residual("inteq_r1", r.r1);
  rep.residual("inteq_r2", r.r2);
  rep.residual("inteq_r3", r.r3);
  const auto fb = dbar_fubini_residual(inv);
  rep.residual("dbar_fubini", fb);
  const auto flat = flatness_residual(theta_from_invariants(inv));
  rep.residual("flatness", flat);
  rep.check("inteq_r1", max_abs(r.r1), "resid");
  rep.check("inteq_r2", max_abs(r.r2), "resid");
  rep.check("inteq_r3", max_abs(r.r3), "resid");
  rep.check("dbar_fubini", max_abs(fb), "resid");
  rep.check("flatness", max_abs(flat), "flat");
  if (max_abs(imag_part(inv.h)) <= c.tol.resid) {
    const auto d = diffeq_residual(inv.t, inv.h, imag_part(inv.p), c.tol);
    rep.residual("diffeq_r1", d.r1);
    rep.residual("diffeq_r2", d.r2);
    rep.residual("diffeq_r3", d.r3);
  }
}

inline void run_integrate(const JobConfig& c, Report& rep) {
  const InvariantTriple inv = make_triple(c, rep);
  inv.validate(c.tol);
  const auto F = integrate_frame(theta_from_invariants(inv), {}, c.tol);
  rep.warn_all(F.warnings);
  const auto m = immersion_from_frame(F);
  const fs::path dir(c.output_dir);
  io::write_immersion_csv(dir / "immersion.csv", m, &F.S);
  rep.file("immersion", dir / "immersion.csv");
  if (c.params.value("obj", true)) {
    io::export_mesh(m, io::MeshFormat::obj_f1f2, dir / "immersion_f1f2.obj");
    io::export_mesh(m, io::MeshFormat::obj_f3f4, dir / "immersion_f3f4.obj");
    rep.file("obj_f1f2", dir / "immersion_f1f2.obj");
    rep.file("obj_f3f4", dir / "immersion_f3f4.obj");
  }
  rep.value("flatness", F.flatness_report);
  rep.value("projected_nodes", F.projected_nodes);
  rep.residual("lagrangian_defect", lagrangian_defect(m), 2);
  rep.check("frame_defect", F.max_defect, "frame");
  rep.check("path_defect", F.path_defect, "resid");
  rep.check("lagrangian_defect", max_abs(lagrangian_defect(m), 2), "resid");
  if (c.params.value("source", std::string("section5")) == "section5") {
    const auto q = section5_params(c.params);
    if (q.a1 == 0 && q.a2 == 0 && q.m1 == 0 && q.m2 == 0) {
      const Vec4 base = section5_f(q, inv.geom().x0, inv.geom().y0) - m(0, 0);
      double e = 0;
      for (int i = 0; i < m.nx(); ++i)
        for (int j = 0; j < m.ny(); ++j)
          e = std::max(e, (section5_f(q, inv.geom().x(i), inv.geom().y(j)) - base - m(i, j)).cwiseAbs().maxCoeff());
      rep.check("closed_form_error", e, "resid");
    }
  }
}

inline ImmersionGrid umbilic_member(const JobConfig& c, double lambda, Report& rep) {
  const GridGeom& g = need_grid(c);
  const json u = c.params.value("umbilic", json::object());
  const auto uc = umbilic_curve({poly_field(u.value("p_poly", json::array({0.0})), g), lambda}, c.tol);
  rep.warn_all(uc.warnings);
  return curve_immersion(uc.curve);
}

inline void run_example(const JobConfig& c, Report& rep) {
  const std::string name = c.params.value("name", std::string("section5"));
  const GridGeom& g = need_grid(c);
  const fs::path dir(c.output_dir);
  if (name == "section5") {
    const auto q = section5_params(c.params);
    rep.warn_all(q.warnings());
    const auto inv = section5_triple(q, g);
    write_triple(dir, inv, rep);
    const auto closed = section5_immersion_closed(q, g);
    io::write_immersion_csv(dir / "closed_form.csv", closed);
    rep.file("closed_form", dir / "closed_form.csv");
    const auto F = integrate_frame(theta_from_invariants(inv), {}, c.tol);
    const auto m = immersion_from_frame(F);
    io::write_immersion_csv(dir / "immersion.csv", m, &F.S);
    rep.file("immersion", dir / "immersion.csv");
    const Vec4 shift = closed(0, 0) - m(0, 0);
    double e = 0;
    for (std::size_t k = 0; k < m.v.size(); ++k) e = std::max(e, (closed.v[k] - shift - m.v[k]).cwiseAbs().maxCoeff());
    rep.check("closed_form_error", e, "resid");
    rep.check("frame_defect", F.max_defect, "frame");
    rep.check("inteq_r1", max_abs(inteq_residual(inv).r1), "resid");
  } else if (name == "umbilic") {
    const double lambda = c.params.value("lambda", 0.0);
    const json u = c.params.value("umbilic", json::object());
    const auto uc = umbilic_curve({poly_field(u.value("p_poly", json::array({0.0})), g), lambda}, c.tol);
    rep.warn_all(uc.warnings);
    double det = 0;
    for (const auto& X : uc.frame.v) det = std::max(det, std::abs(X.determinant() - 1.0));
    rep.check("determinant_drift", det, "group");
    rep.residual("flex_defect", flex_defect(uc.curve));
    const auto m = curve_immersion(uc.curve);
    io::write_immersion_csv(dir / "immersion.csv", m);
    rep.file("immersion", dir / "immersion.csv");
    const auto red = reduction_pipeline(m, {}, c.tol);
    rep.warn_all(red.warnings);
    rep.check("umbilic_h", max_abs(red.inv.h), "umbilic");
    write_triple(dir, red.inv, rep, "extracted_");
  } else {
    throw ConfigError("unknown example '" + name + "' (section5, umbilic)");
  }
}

inline void run_family(const JobConfig& c, Report& rep) {
  std::vector<double> lambdas = c.params.value("lambdas", std::vector<double>{-1.0, 0.0, 1.0});
  if (lambdas.empty()) throw ConfigError("lambdas is empty");
  const std::string src = c.params.value("source", std::string("section5"));
  std::vector<ImmersionGrid> members;
  for (double l : lambdas) {
    if (src == "umbilic") {
      members.push_back(umbilic_member(c, l, rep));
    } else {
      const auto inv = make_triple(c, rep, l);
      inv.validate(c.tol);
      rep.check("inteq_r1_lambda_" + io::fmt17(l), max_abs(inteq_residual(inv).r1), "resid");
      const auto F = integrate_frame(theta_from_invariants(inv), {}, c.tol);
      members.push_back(immersion_from_frame(F));
    }
  }
  std::vector<ReductionResult> reds;
  for (const auto& m : members) reds.push_back(reduction_pipeline(m, {}, c.tol));
  const std::size_t n = members.size();
  json matrix = json::array();
  double diag = 0, offmin = INFINITY, fub = 0;
  const int mg = ReductionOptions{}.check_margin;
  for (std::size_t a = 0; a < n; ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < n; ++b) {
      const double d = congruence_from_frames(members[a], reds[a].F.S, members[b], reds[b].F.S).defect;
      row.push_back(d);
      if (a == b) diag = std::max(diag, d);
      else offmin = std::min(offmin, d);
    }
    matrix.push_back(row);
    const auto t2 = zip(reds[a].inv.t, reds[0].inv.t, [](cplx x, cplx y) { return x * x - y * y; });
    fub = std::max(fub, max_abs(t2, mg));
  }
  rep.value("lambdas", lambdas);
  rep.value("congruence_matrix", matrix);
  rep.check("congruence_diagonal", diag, "congruent");
  if (n > 1) rep.check("congruence_offdiagonal_min", offmin, "congruent", true);
  rep.check("fubini_spread", fub, "gauge");
}

inline void run_invariants(const JobConfig& c, Report& rep) {
  const auto file = io::read_immersion_csv(resolve(c, c.params.at("immersion").get<std::string>()));
  ReductionOptions opt;
  opt.orientation = c.params.value("orientation", 1);
  const auto red = reduction_pipeline(file.f, opt, c.tol);
  rep.warn_all(red.warnings);
  write_triple(fs::path(c.output_dir), red.inv, rep);
  const auto& gr = red.gauge;
  rep.value("gauge", {{"omega_dz", gr.omega_dz}, {"omega_dzbar", gr.omega_dzbar}, {"gamma_trace", gr.gamma_trace},
                      {"ell", gr.ell}, {"alpha_trace", gr.alpha_trace}, {"alpha_asym", gr.alpha_asym},
                      {"tau_dzbar", gr.tau_dzbar}, {"rho_dzbar", gr.rho_dzbar}, {"margin", gr.margin}});
  rep.check("gauge_worst", gr.worst_condition(), "gauge");
  rep.residual("ell1_sq_plus_ell2_sq", zip(red.data.l1, red.data.l2, [](double a, double b) { return a * a + b * b; }));
}

inline void run_congruence(const JobConfig& c, Report& rep) {
  const auto a = io::read_immersion_csv(resolve(c, c.params.at("a").get<std::string>()));
  const auto b = io::read_immersion_csv(resolve(c, c.params.at("b").get<std::string>()));
  const auto r = congruence_defect_detail(a.f, b.f, {}, c.tol);
  rep.value("defect", r.defect);
  rep.value("congruent", r.defect <= c.tol.congruent);
  rep.value("frame_sign", r.sign);
  const std::string expect = c.params.value("expect", std::string{});
  if (expect == "congruent") rep.check("defect", r.defect, "congruent");
  else if (expect == "noncongruent") rep.check("defect", r.defect, "congruent", true);
  else if (!expect.empty()) throw ConfigError("expect must be 'congruent' or 'noncongruent'");
}

inline void run_export(const JobConfig& c, Report& rep) {
  const auto in = io::read_immersion_csv(resolve(c, c.params.at("input").get<std::string>()));
  const std::string fmt = c.params.value("format", std::string("obj-xy-f1f2"));
  const std::string out = c.params.value("output", fmt == "csv" ? std::string("export.csv") : std::string("export.obj"));
  const fs::path p = fs::path(c.output_dir) / out;
  io::export_mesh(in.f, io::parse_mesh_format(fmt), p);
  rep.file("mesh", p);
  rep.value("vertices", in.f.v.size());
  rep.value("triangles", 2 * (in.f.nx() - 1) * (in.f.ny() - 1));
}

// Fills every parameter default the chosen command reads, so the report's
// config echo reproduces the run on its own.
inline JobConfig resolve_defaults(JobConfig c) {
  json& p = c.params;
  if (!p.is_object()) throw ConfigError("params must be a JSON object");
  auto def = [](json& node, const char* key, const json& v) {
    if (!node.contains(key)) node[key] = v;
  };
  const std::string& cmd = c.command;
  const bool triple = cmd == "verify" || cmd == "integrate" || cmd == "family";
  if (cmd == "example") def(p, "name", "section5");
  if (triple) def(p, "source", "section5");
  const std::string src = triple ? p["source"].get<std::string>() : p.value("name", std::string{});
  if (src == "section5") {
    def(p, "section5", json::object());
    for (const auto& [k, v] : std::vector<std::pair<const char*, double>>{
             {"p", 0}, {"c1", 1}, {"c2", 1}, {"a1", 0}, {"a2", 0}, {"m1", 0}, {"m2", 0}})
      def(p["section5"], k, v);
  }
  if (src == "umbilic") {
    def(p, "umbilic", json::object());
    def(p["umbilic"], "t_poly", json::array({1.0}));
    def(p["umbilic"], "p_poly", json::array({0.0}));
  }
  if (cmd == "example" && src == "umbilic") def(p, "lambda", 0.0);
  if (cmd == "integrate") def(p, "obj", true);
  if (cmd == "family") def(p, "lambdas", json::array({-1.0, 0.0, 1.0}));
  if (cmd == "invariants") def(p, "orientation", 1);
  if (cmd == "congruence") def(p, "expect", "");
  if (cmd == "export") {
    def(p, "format", "obj-xy-f1f2");
    def(p, "output", p["format"] == "csv" ? "export.csv" : "export.obj");
  }
  return c;
}

inline json run(const JobConfig& input) {
  input.validate();
  const JobConfig cfg = resolve_defaults(input);
  Report rep(cfg);
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir);
  const std::string& cmd = cfg.command;
  if (cmd == "verify") run_verify(cfg, rep);
  else if (cmd == "integrate") run_integrate(cfg, rep);
  else if (cmd == "example") run_example(cfg, rep);
  else if (cmd == "family") run_family(cfg, rep);
  else if (cmd == "invariants") run_invariants(cfg, rep);
  else if (cmd == "congruence") run_congruence(cfg, rep);
  else if (cmd == "export") run_export(cfg, rep);
  json j = rep.to_json();
  io::write_json(fs::path(cfg.output_dir) / "report.json", j);
  return j;
}

// 0 pass, 1 residual or module failure, 2 configuration or IO error.
inline int exit_code_for(const json& report) { return report.value("status", std::string("fail")) == "pass" ? 0 : 1; }

}  // namespace symplag::app
