#include "helpers.hpp"

#include "depcag/commands.hpp"

#include <sstream>

using namespace testing;

namespace {

Json scalar_doc() {
  return Json::parse(R"J({
    "grid": {"family": "floor"},
    "system": {"dim": 1, "A": [["-1"]], "A0": [["0.1"]],
               "bounds": {"M": {"analytic": 1}, "M0": {"analytic": 0.1}}},
    "nonlinearity": {"f": ["0.01*tanh(x1)"],
                     "bounds": {"mu": {"analytic": 0.01}, "ell1": {"analytic": 0.01}, "ell2": {"analytic": 0}}},
    "dichotomy": {"P": [[1]], "K": "auto", "alpha": 0.5}
  })J");
}

std::string config_error_pointer(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

CommandOptions command(const std::string& name) {
  CommandOptions o;
  o.command = name;
  return o;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string& header) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find("\r\n", pos);
    REQUIRE(end != std::string::npos);
    std::string line = text.substr(pos, end - pos);
    pos = end + 2;
    if (first) {
      header = line;
      first = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("presets load and hash deterministically") {
    auto names = preset_names();
    CHECK(names.size() == 4);
    for (const auto& n : names) {
      RunConfig a = load_preset(n), b = load_preset(n);
      CHECK(a.hash == b.hash);
      CHECK(a.hash.size() == 64);
      CHECK(a.preset == n);
    }
    CHECK(load_preset("scalar-stable").hash != load_preset("pure-pca").hash);
    CHECK_THROWS_AS(load_preset("nope"), ConfigError);
  }

  TEST_CASE("the canonical document is a fixed point") {
    for (const auto& n : preset_names()) {
      RunConfig a = load_preset(n);
      RunConfig b = parse_config(a.canonical);
      CHECK(b.canonical == a.canonical);
      CHECK(b.hash == a.hash);
    }
    RunConfig s = with_seed(load_preset("scalar-stable"), 99);
    CHECK(s.seed == 99);
    CHECK(s.hash != load_preset("scalar-stable").hash);
    CHECK(parse_config(s.canonical).hash == s.hash);
  }

  TEST_CASE("config errors carry a JSON pointer") {
    Json d = scalar_doc();
    CHECK(config_error_pointer(d) == "<accepted>");

    Json unknown = d;
    unknown["colour"] = "blue";
    CHECK(config_error_pointer(unknown) == "/colour");

    Json rows = d;
    rows["system"]["A"] = Json::array({Json::array({"-1"}), Json::array({"0"})});
    CHECK(config_error_pointer(rows) == "/system/A");

    Json expr = d;
    expr["nonlinearity"]["f"] = Json::array({"tanh(x1"});
    CHECK(config_error_pointer(expr).rfind("/nonlinearity/f", 0) == 0);

    Json alpha = d;
    alpha["dichotomy"]["alpha"] = -1.0;
    CHECK(config_error_pointer(alpha) == "/dichotomy/alpha");

    Json grid = d;
    grid["grid"]["family"] = "zigzag";
    CHECK(config_error_pointer(grid).rfind("/grid", 0) == 0);
  }

  TEST_CASE("check passes on the scalar preset") {
    CommandOutput out = run_command(load_preset("scalar-stable"), command("check"));
    CHECK(out.exit_code == 0);
    Json j = Json::parse(out.body);
    CHECK(j["pass"] == true);
    CHECK(j["command"] == "check");
    CHECK(j["config_hash"] == load_preset("scalar-stable").hash);
  }

  TEST_CASE("check fails when v >= 1") {
    Json d = scalar_doc();
    d["system"]["A0"] = Json::array({Json::array({"2"})});
    d["system"]["bounds"]["M0"] = {{"analytic", 2.0}};
    CommandOutput out = run_command(parse_config(d), command("check"));
    CHECK(out.exit_code == 1);
    Json j = Json::parse(out.body);
    CHECK(j["theorem_conditions"]["flags"]["schema0"] == false);
    CHECK(j["pass"] == false);
  }

  TEST_CASE("solve writes RFC 4180 CSV") {
    CommandOptions o = command("solve");
    o.xi = std::vector<double>{0.5};
    o.t = 1.5;
    CommandOutput out = run_command(load_preset("scalar-stable"), o);
    CHECK(out.exit_code == 0);
    std::string header;
    auto rows = parse_csv(out.body, header);
    CHECK(header == "t,x_1");
    REQUIRE(rows.size() > 2);
    CHECK(rows.front()[0] == 0.0);
    CHECK(rows.front()[1] == 0.5);
    CHECK(rows.back()[0] == 1.5);
  }

  TEST_CASE("solve agrees with bounded plus a homogeneous solution") {
    // With a state-independent f = g(t) the nonlinear solve is the forced
    // linear equation, so x(t) = x*(t) + Z(t, tau)(xi - x*(tau)).
    Json d = scalar_doc();
    d["grid"] = {{"family", "floor_half"}};
    d["nonlinearity"] = {{"f", {"cos(t)"}},
                         {"bounds", {{"mu", {{"analytic", 1.0}}}, {"ell1", {{"analytic", 0.0}}},
                                     {"ell2", {{"analytic", 0.0}}}}}};
    RunConfig cfg = parse_config(d);
    const double tau = 0.2, t = 3.3, xi = 0.7;

    CommandOptions b = command("bounded");
    b.g = {"cos(t)"};
    b.t = tau;
    Json at_tau = Json::parse(run_command(cfg, b).body);
    b.t = t;
    Json at_t = Json::parse(run_command(cfg, b).body);

    CommandOptions s = command("solve");
    s.xi = std::vector<double>{xi};
    s.tau = tau;
    s.t = t;
    std::string header;
    auto rows = parse_csv(run_command(cfg, s).body, header);
    double x_t = rows.back()[1];

    Problem p = build_problem(cfg, tau, t);
    double z = p.ctx->table().Z(t, tau)(0, 0);
    double xs_tau = at_tau["value"][0], xs_t = at_t["value"][0];
    double bars = at_tau["error_bar"].get<double>() * std::fabs(z) + at_t["error_bar"].get<double>();
    CHECK(std::fabs(x_t - (xs_t + z * (xi - xs_tau))) <= bars + 1e-6);
  }

  TEST_CASE("reports are byte-stable") {
    CommandOptions o = command("conjugacy");
    o.conj_cmd = "H";
    o.xi = std::vector<double>{0.3};
    o.t = 1.0;
    RunConfig cfg = load_preset("scalar-stable");
    CHECK(run_command(cfg, o).body == run_command(cfg, o).body);
  }

  TEST_CASE("argument errors") {
    RunConfig cfg = load_preset("scalar-stable");
    CommandOptions o = command("solve");
    o.t = 1.0;
    CHECK_THROWS_AS(run_command(cfg, o), DomainError);
    o.xi = std::vector<double>{1.0, 2.0};
    CHECK_THROWS_AS(run_command(cfg, o), DomainError);
    CHECK_THROWS_AS(run_command(cfg, command("frobnicate")), DomainError);
  }
}
