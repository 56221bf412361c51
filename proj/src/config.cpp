#include "depcag/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace depcag {

namespace {

/// A JSON value together with its pointer, for error messages.
struct Node {
  const Json& j;
  std::string ptr;

  Node at(const std::string& key) const { return {j.at(key), ptr + "/" + key}; }
  Node at(std::size_t i) const { return {j.at(i), ptr + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key); }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(ptr.empty() ? "/" : ptr, msg); }

  void require_object(const std::set<std::string>& allowed) const {
    if (!j.is_object()) fail("expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) at(it.key()).fail("unknown key '" + it.key() + "'");
  }
  double number() const {
    if (!j.is_number()) fail("expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    double v = number();
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
  }
  long integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<long>();
  }
};

Expr parse_entry(const Node& n) {
  if (n.j.is_number()) return Expr::constant(n.number());
  if (!n.j.is_string()) n.fail("expected an expression string or a number");
  try {
    return Expr::parse(n.j.get<std::string>());
  } catch (const ParseError& e) {
    n.fail(e.what());
  }
}

std::vector<Expr> parse_matrix_exprs(const Node& n, int dim) {
  if (!n.j.is_array() || static_cast<int>(n.j.size()) != dim)
    n.fail("expected " + std::to_string(dim) + " rows");
  std::vector<Expr> out;
  for (int r = 0; r < dim; ++r) {
    Node row = n.at(static_cast<std::size_t>(r));
    if (!row.j.is_array() || static_cast<int>(row.j.size()) != dim)
      row.fail("expected " + std::to_string(dim) + " entries");
    for (int c = 0; c < dim; ++c) {
      Node cell = row.at(static_cast<std::size_t>(c));
      Expr e = parse_entry(cell);
      if (e.max_x_index() > 0 || e.max_y_index() > 0) cell.fail("matrix entries may only depend on t");
      out.push_back(std::move(e));
    }
  }
  return out;
}

Mat parse_numeric_matrix(const Node& n, int dim) {
  if (!n.j.is_array() || static_cast<int>(n.j.size()) != dim)
    n.fail("expected " + std::to_string(dim) + " rows");
  Mat m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    Node row = n.at(static_cast<std::size_t>(r));
    if (!row.j.is_array() || static_cast<int>(row.j.size()) != dim)
      row.fail("expected " + std::to_string(dim) + " entries");
    for (int c = 0; c < dim; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).number();
  }
  return m;
}

std::vector<double> number_list(const Node& n) {
  if (!n.j.is_array()) n.fail("expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < n.j.size(); ++i) v.push_back(n.at(i).number());
  return v;
}

/// {"analytic": v} or {"samples": N, "inflation": x}; absent means sampled
/// with the given defaults. Returns the canonical form.
struct BoundSpec {
  bool analytic = false;
  double value = 0.0;
  int samples = 0;
  double inflation = 1.0;

  Json canonical() const {
    if (analytic) return Json{{"analytic", value}};
    return Json{{"samples", samples}, {"inflation", inflation}};
  }
};

BoundSpec parse_bound(const Node* n, int default_samples, double default_inflation) {
  BoundSpec b;
  b.samples = default_samples;
  b.inflation = default_inflation;
  if (!n) return b;
  n->require_object({"analytic", "samples", "inflation"});
  if (n->has("analytic")) {
    if (n->has("samples") || n->has("inflation")) n->fail("give either 'analytic' or a sampling spec");
    b.analytic = true;
    b.value = n->at("analytic").number();
    if (b.value < 0.0) n->at("analytic").fail("a bound cannot be negative");
    return b;
  }
  if (n->has("samples")) {
    long s = n->at("samples").integer();
    if (s < 2) n->at("samples").fail("need at least 2 samples");
    b.samples = static_cast<int>(s);
  }
  if (n->has("inflation")) {
    b.inflation = n->at("inflation").number();
    if (b.inflation < 1.0) n->at("inflation").fail("inflation must be >= 1");
  }
  return b;
}

Grid parse_grid(const Node& n, Json& canon) {
  n.require_object({"family", "params", "explicit"});
  try {
    if (n.has("explicit")) {
      if (n.has("family") || n.has("params")) n.fail("give either 'family' or 'explicit'");
      Node ex = n.at("explicit");
      ex.require_object({"t", "zeta", "first_index", "theta"});
      if (!ex.has("t") || !ex.has("zeta")) ex.fail("explicit windows need 't' and 'zeta'");
      std::vector<double> t = number_list(ex.at("t"));
      std::vector<double> z = number_list(ex.at("zeta"));
      long first = ex.has("first_index") ? ex.at("first_index").integer() : 0;
      double theta = ex.has("theta") ? ex.at("theta").positive() : 0.0;
      Grid g = Grid::explicit_window(t, z, first, theta);
      canon = {{"explicit", {{"t", t}, {"zeta", z}, {"first_index", first}, {"theta", g.theta()}}}};
      return g;
    }
    if (!n.has("family") || !n.at("family").j.is_string()) n.fail("expected 'family' (a string) or 'explicit'");
    std::string fam = n.at("family").j.get<std::string>();
    std::vector<double> params = n.has("params") ? number_list(n.at("params")) : std::vector<double>{};
    Grid g = Grid::builtin_family(fam, params);
    canon = {{"family", fam}, {"params", params}};
    return g;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

std::string engine_key_list() { return "horizon, picard_tol, mesh_step, quad_step, traj_step, max_iterations"; }

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunConfig parse_config(const Json& doc) {
  Node root{doc, ""};
  root.require_object({"preset", "grid", "system", "nonlinearity", "dichotomy", "engine", "window", "seed"});
  if (root.has("preset")) {
    // A preset document with selected top-level sections replaced.
    if (!doc.at("preset").is_string()) root.at("preset").fail("expected a preset name");
    std::string name = doc.at("preset").get<std::string>();
    Json merged = preset_document(name);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (it.key() != "preset") merged[it.key()] = it.value();
    RunConfig cfg = parse_config(merged);
    cfg.preset = name;
    return cfg;
  }
  RunConfig cfg;
  Json canon = Json::object();

  if (!root.has("grid")) root.fail("missing 'grid'");
  Json grid_canon;
  Grid grid = parse_grid(root.at("grid"), grid_canon);
  canon["grid"] = grid_canon;

  // Verification window.
  if (grid.is_window()) {
    cfg.k_lo = grid.first_index();
    cfg.k_hi = grid.last_index();
  }
  if (root.has("window")) {
    Node w = root.at("window");
    w.require_object({"k_lo", "k_hi", "samples_per_interval"});
    if (w.has("k_lo")) cfg.k_lo = w.at("k_lo").integer();
    if (w.has("k_hi")) cfg.k_hi = w.at("k_hi").integer();
    if (w.has("samples_per_interval")) {
      long s = w.at("samples_per_interval").integer();
      if (s < 2) w.at("samples_per_interval").fail("need at least 2 samples per interval");
      cfg.samples_per_interval = static_cast<int>(s);
    }
    if (cfg.k_hi < cfg.k_lo) w.fail("k_hi must not be below k_lo");
  }
  if (grid.is_window() && (cfg.k_lo < grid.first_index() || cfg.k_hi > grid.last_index()))
    root.at("window").fail("window exceeds the explicit grid");
  canon["window"] = {{"k_lo", cfg.k_lo}, {"k_hi", cfg.k_hi}, {"samples_per_interval", cfg.samples_per_interval}};

  // System.
  if (!root.has("system")) root.fail("missing 'system'");
  Node sys = root.at("system");
  sys.require_object({"dim", "A", "A0", "bounds"});
  if (!sys.has("dim")) sys.fail("missing 'dim'");
  long dim = sys.at("dim").integer();
  if (dim < 1 || dim > 64) sys.at("dim").fail("dim must be in 1..64");
  int n = static_cast<int>(dim);
  if (!sys.has("A")) sys.fail("missing 'A'");
  std::vector<Expr> a_entries = parse_matrix_exprs(sys.at("A"), n);
  std::vector<Expr> a0_entries;
  if (sys.has("A0")) {
    a0_entries = parse_matrix_exprs(sys.at("A0"), n);
  } else {
    a0_entries.assign(static_cast<std::size_t>(n * n), Expr::constant(0.0));
  }
  double t_lo = grid.t(cfg.k_lo), t_hi = grid.t(cfg.k_hi + 1);
  const Node* m_node = nullptr;
  const Node* m0_node = nullptr;
  std::optional<Node> mb, m0b;
  std::vector<double> t_range{t_lo, t_hi};
  if (sys.has("bounds")) {
    Node b = sys.at("bounds");
    b.require_object({"M", "M0", "t_range"});
    if (b.has("M")) m_node = &mb.emplace(b.at("M"));
    if (b.has("M0")) m0_node = &m0b.emplace(b.at("M0"));
    if (b.has("t_range")) {
      t_range = number_list(b.at("t_range"));
      if (t_range.size() != 2 || !(t_range[0] < t_range[1])) b.at("t_range").fail("expected [lo, hi] with lo < hi");
    }
  }
  BoundSpec mspec = parse_bound(m_node, 1000, 1.1);
  BoundSpec m0spec = parse_bound(m0_node, 1000, 1.1);
  MatrixFunction A = MatrixFunction::from_exprs(n, a_entries);
  MatrixFunction A0 = MatrixFunction::from_exprs(n, a0_entries);
  auto certify = [&](const BoundSpec& s, const MatrixFunction& mf) {
    return s.analytic ? CertifiedBound::analytic(s.value)
                      : mf.sampled_bound(t_range[0], t_range[1], s.samples, s.inflation);
  };
  CertifiedBound M = certify(mspec, A), M0 = certify(m0spec, A0);
  cfg.system = std::make_shared<const LinearSystem>(grid, std::move(A), std::move(A0), M, M0);
  auto matrix_text = [&](const Node& node) {
    // Keep the user's literals so the canonical form is stable.
    return node.j;
  };
  Json a0_text = sys.has("A0") ? matrix_text(sys.at("A0")) : Json(std::vector<std::vector<std::string>>(
                                                                 n, std::vector<std::string>(n, "0")));
  canon["system"] = {{"dim", n},
                     {"A", matrix_text(sys.at("A"))},
                     {"A0", a0_text},
                     {"bounds", {{"M", mspec.canonical()}, {"M0", m0spec.canonical()}, {"t_range", t_range}}}};

  // Nonlinearity.
  canon["nonlinearity"] = nullptr;
  if (root.has("nonlinearity") && !doc.at("nonlinearity").is_null() &&
      !(doc.at("nonlinearity").is_string() && doc.at("nonlinearity").get<std::string>() == "none")) {
    Node nl = root.at("nonlinearity");
    nl.require_object({"f", "radius", "bounds"});
    if (!nl.has("f")) nl.fail("missing 'f'");
    Node fn = nl.at("f");
    if (!fn.j.is_array() || static_cast<int>(fn.j.size()) != n) fn.fail("expected " + std::to_string(n) + " expressions");
    std::vector<Expr> f;
    for (int i = 0; i < n; ++i) {
      Node c = fn.at(static_cast<std::size_t>(i));
      Expr e = parse_entry(c);
      if (e.max_x_index() > n || e.max_y_index() > n) c.fail("refers to a component beyond dim");
      f.push_back(std::move(e));
    }
    double radius = nl.has("radius") ? nl.at("radius").positive() : 10.0;
    std::optional<Node> mu_n, l1_n, l2_n;
    if (nl.has("bounds")) {
      Node b = nl.at("bounds");
      b.require_object({"mu", "ell1", "ell2"});
      if (b.has("mu")) mu_n.emplace(b.at("mu"));
      if (b.has("ell1")) l1_n.emplace(b.at("ell1"));
      if (b.has("ell2")) l2_n.emplace(b.at("ell2"));
    }
    BoundSpec mu = parse_bound(mu_n ? &*mu_n : nullptr, 20000, 1.05);
    BoundSpec l1 = parse_bound(l1_n ? &*l1_n : nullptr, 20000, 1.05);
    BoundSpec l2 = parse_bound(l2_n ? &*l2_n : nullptr, 20000, 1.05);
    Ranges ranges{{"t", {t_range[0], t_range[1]}}};
    for (int i = 1; i <= n; ++i) {
      ranges["x" + std::to_string(i)] = {-radius, radius};
      ranges["y" + std::to_string(i)] = {-radius, radius};
    }
    Nonlinearity nlin;
    nlin.mu = mu.analytic ? CertifiedBound::analytic(mu.value) : bound_norm(f, ranges, mu.samples, mu.inflation);
    nlin.ell1 = l1.analytic ? CertifiedBound::analytic(l1.value)
                            : lipschitz_estimate(f, Block::X, ranges, l1.samples, l1.inflation);
    nlin.ell2 = l2.analytic ? CertifiedBound::analytic(l2.value)
                            : lipschitz_estimate(f, Block::Y, ranges, l2.samples, l2.inflation);
    nlin.f = std::move(f);
    cfg.f = std::move(nlin);
    canon["nonlinearity"] = {{"f", fn.j},
                             {"radius", radius},
                             {"bounds", {{"mu", mu.canonical()}, {"ell1", l1.canonical()}, {"ell2", l2.canonical()}}}};
  }

  // Dichotomy.
  if (!root.has("dichotomy")) root.fail("missing 'dichotomy'");
  Node d = root.at("dichotomy");
  auto parse_K = [&](const Node& parent) -> std::optional<double> {
    if (!parent.has("K")) return std::nullopt;
    Node k = parent.at("K");
    if (k.j.is_string() && k.j.get<std::string>() == "auto") return std::nullopt;
    double v = k.number();
    if (v < 1.0) k.fail("K must be >= 1 or \"auto\"");
    return v;
  };
  auto K_json = [&](const std::optional<double>& K) { return K ? Json(*K) : Json("auto"); };
  bool discrete = (d.j.is_string() && d.j.get<std::string>() == "discrete-auto") ||
                  (d.has("source") && d.at("source").j == "discrete-auto");
  if (d.j.is_string() && !discrete) d.fail("expected an object or \"discrete-auto\"");
  if (discrete) {
    cfg.dichotomy.mode = DichotomyConfig::Mode::DiscreteAuto;
    if (d.j.is_object()) {
      d.require_object({"source", "K", "alpha"});
      cfg.dichotomy.K = parse_K(d);
      if (d.has("alpha") && !(d.at("alpha").j.is_string() && d.at("alpha").j == "auto"))
        cfg.dichotomy.alpha = d.at("alpha").positive();
    }
    canon["dichotomy"] = {{"source", "discrete-auto"},
                          {"K", K_json(cfg.dichotomy.K)},
                          {"alpha", cfg.dichotomy.alpha ? Json(*cfg.dichotomy.alpha) : Json("auto")}};
  } else {
    d.require_object({"source", "P", "K", "alpha"});
    if (d.has("source") && d.at("source").j != "user") d.at("source").fail("expected \"user\" or \"discrete-auto\"");
    if (!d.has("P")) d.fail("missing 'P'");
    if (!d.has("alpha")) d.fail("missing 'alpha'");
    cfg.dichotomy.P = parse_numeric_matrix(d.at("P"), n);
    try {
      check_projection(cfg.dichotomy.P, "P");
    } catch (const Error& e) {
      d.at("P").fail(e.what());
    }
    cfg.dichotomy.K = parse_K(d);
    cfg.dichotomy.alpha = d.at("alpha").positive();
    canon["dichotomy"] = {{"source", "user"},
                          {"P", d.at("P").j},
                          {"K", K_json(cfg.dichotomy.K)},
                          {"alpha", *cfg.dichotomy.alpha}};
  }

  // Engine knobs; absent ones resolve at run time.
  Json eng = Json::object();
  if (root.has("engine")) {
    Node e = root.at("engine");
    e.require_object({"horizon", "picard_tol", "mesh_step", "quad_step", "traj_step", "max_iterations"});
    auto knob = [&](const char* key, double& slot) {
      if (!e.has(key)) return;
      Node v = e.at(key);
      if (std::string(key) != "picard_tol" && v.j.is_string() && v.j.get<std::string>() == "auto") {
        slot = 0.0;
        return;
      }
      slot = v.positive();
    };
    knob("horizon", cfg.engine.horizon);
    knob("picard_tol", cfg.engine.picard_tol);
    knob("mesh_step", cfg.engine.mesh_step);
    knob("quad_step", cfg.engine.quad_step);
    knob("traj_step", cfg.engine.traj_step);
    if (e.has("max_iterations")) {
      long it = e.at("max_iterations").integer();
      if (it < 1) e.at("max_iterations").fail("expected a positive integer (" + engine_key_list() + ")");
      cfg.engine.max_iterations = static_cast<int>(it);
    }
  }
  auto auto_or = [](double v) { return v > 0.0 ? Json(v) : Json("auto"); };
  eng["horizon"] = auto_or(cfg.engine.horizon);
  eng["picard_tol"] = cfg.engine.picard_tol;
  eng["mesh_step"] = auto_or(cfg.engine.mesh_step);
  eng["quad_step"] = auto_or(cfg.engine.quad_step);
  eng["traj_step"] = auto_or(cfg.engine.traj_step);
  eng["max_iterations"] = cfg.engine.max_iterations;
  canon["engine"] = eng;

  if (root.has("seed")) {
    Node s = root.at("seed");
    if (!s.j.is_number_unsigned() && !(s.j.is_number_integer() && s.j.get<long long>() >= 0))
      s.fail("expected a non-negative integer");
    cfg.seed = s.j.get<std::uint64_t>();
  }
  canon["seed"] = cfg.seed;

  cfg.canonical = std::move(canon);
  cfg.hash = sha256_hex(cfg.canonical.dump());
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::vector<std::string> preset_names() {
  return {"scalar-stable", "planar-saddle", "palmer-limit", "pure-pca"};
}

Json preset_document(const std::string& name) {
  auto analytic = [](double v) { return Json{{"analytic", v}}; };
  if (name == "scalar-stable") {
    return {
        {"grid", {{"family", "floor"}}},
        {"system", {{"dim", 1}, {"A", {{"-1"}}}, {"A0", {{"0.1"}}}, {"bounds", {{"M", analytic(1.0)}, {"M0", analytic(0.1)}}}}},
        {"nonlinearity",
         {{"f", {"0.01*tanh(x1)"}},
          {"bounds", {{"mu", analytic(0.01)}, {"ell1", analytic(0.01)}, {"ell2", analytic(0.0)}}}}},
        {"dichotomy", {{"P", {{1.0}}}, {"K", "auto"}, {"alpha", 0.5}}},
    };
  }
  if (name == "planar-saddle") {
    return {
        {"grid", {{"family", "floor_half"}}},
        {"system",
         {{"dim", 2},
          {"A", Json::array({Json::array({"-1", "0"}), Json::array({"0", "1"})})},
          {"A0", Json::array({Json::array({"0.1", "0"}), Json::array({"0", "-0.1"})})},
          {"bounds", {{"M", analytic(1.0)}, {"M0", analytic(0.1)}}}}},
        {"nonlinearity",
         {{"f", Json::array({"0.01*tanh(x2)", "0.01*tanh(x1)"})},
          {"bounds", {{"mu", analytic(0.01 * std::sqrt(2.0))}, {"ell1", analytic(0.01)}, {"ell2", analytic(0.0)}}}}},
        {"dichotomy", {{"P", {{1.0, 0.0}, {0.0, 0.0}}}, {"K", "auto"}, {"alpha", 0.5}}},
    };
  }
  if (name == "palmer-limit") {
    return {
        {"grid", {{"family", "floor_half"}}},
        {"system",
         {{"dim", 1}, {"A", {{"-1+0.5*sin(t)"}}}, {"A0", {{"0"}}}, {"bounds", {{"M", analytic(1.5)}, {"M0", analytic(0.0)}}}}},
        {"nonlinearity",
         {{"f", {"0.01*tanh(x1)+0.005*sin(y1)"}},
          {"bounds", {{"mu", analytic(0.015)}, {"ell1", analytic(0.01)}, {"ell2", analytic(0.005)}}}}},
        {"dichotomy", {{"P", {{1.0}}}, {"K", "auto"}, {"alpha", 0.5}}},
    };
  }
  if (name == "pure-pca") {
    return {
        {"grid", {{"family", "floor_half"}}},
        {"system", {{"dim", 1}, {"A", {{"0"}}}, {"A0", {{"-0.5"}}}, {"bounds", {{"M", analytic(0.0)}, {"M0", analytic(0.5)}}}}},
        {"nonlinearity",
         {{"f", {"0.01*tanh(x1)"}},
          {"bounds", {{"mu", analytic(0.01)}, {"ell1", analytic(0.01)}, {"ell2", analytic(0.0)}}}}},
        {"dichotomy", {{"P", {{1.0}}}, {"K", "auto"}, {"alpha", 0.3}}},
    };
  }
  std::string known;
  for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
  throw ConfigError("/preset", "unknown preset '" + name + "' (known: " + known + ")");
}

RunConfig load_preset(const std::string& name) {
  RunConfig cfg = parse_config(preset_document(name));
  cfg.preset = name;
  return cfg;
}

}  // namespace depcag
