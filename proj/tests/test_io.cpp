#include "doctest.h"

#include "sepcert/cli.hpp"
#include "sepcert/problem_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace sepcert;

namespace {

std::string data(const char* name) { return std::string(SEPCERT_TEST_DATA) + "/" + name; }

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::vector<std::string> load_errors(const io::Json& doc) {
  try {
    io::parse_problem(doc);
  } catch (const io::ProblemError& e) {
    return e.errors();
  }
  return {};
}

}  // namespace

TEST_CASE("load the double integrator file") {
  const io::ProblemFile f = io::load_problem(data("dblint.json"));
  REQUIRE(std::holds_alternative<io::ControlSpec>(f));
  const io::ControlSpec& s = std::get<io::ControlSpec>(f);
  const ControlProblem p = s.build();
  CHECK_NOTHROW(p.validate());
  CHECK(p.n == 2);
  CHECK(p.dynamics.f(0.0, make_vec({3, 4}), make_vec({-1})) == make_vec({4, -1}));
  CHECK(p.dynamics.jac_x(0.0, make_vec({3, 4}), make_vec({-1}))(0, 1) == 1.0);
  CHECK(p.terminal_cost.gradient(make_vec({1, 1})) == make_vec({-1, 0}));
  CHECK(std::holds_alternative<FreeEndpoint>(p.target));
  CHECK(s.options.mesh == 1000);
}

TEST_CASE("missing and malformed fields are all reported") {
  io::Json doc = io::Json::parse(R"({"kind": "control", "dims": {"n": 2, "m": 1}, "x0": [0, 0],
    "dynamics": ["x2", "u1"], "terminal_cost": "-x1", "target": "free",
    "control_samples": [[1]], "candidate": [[1]]})");
  auto errs = load_errors(doc);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0] == "missing field 'horizon'");

  doc["horizon"] = {{"a", 0}, {"b", 1}};
  CHECK(load_errors(doc).empty());

  doc["dynamics"] = {"x7", "u1"};
  doc["x0"] = {0};
  doc.erase("candidate");
  errs = load_errors(doc);
  CHECK(errs.size() == 3);
  CHECK(errs[0] == "x0: expected 2 entries, got 1");
  CHECK(errs[1] == "dynamics[0]: unknown identifier 'x7' at col 1");
  CHECK(errs[2] == "missing field 'candidate'");

  CHECK(load_errors(io::Json::parse(R"({"kind": "teapot"})"))[0] == "kind: unknown problem kind 'teapot'");
  CHECK_THROWS_AS(io::load_problem(data("no_such_file.json")), io::ProblemError);
}

TEST_CASE("control boxes expand to a grid") {
  const auto g = io::box_grid(make_vec({-1, 0}), make_vec({1, 2}), 3);
  CHECK(g.size() == 9);
  CHECK(g.front() == make_vec({-1, 0}));
  CHECK(g.back() == make_vec({1, 2}));
  const io::ControlSpec s = std::get<io::ControlSpec>(io::load_problem(data("dblint_running.json")));
  CHECK(s.control_samples.size() == 9);
  CHECK(s.lagrangian);
}

TEST_CASE("serialize then reload is structurally identical") {
  for (const char* name : {"dblint.json", "dblint_needles.json", "dblint_running.json", "cones_axes.json",
                           "amp_zero.json", "circle.json", "halfplane.json", "openmap.json"}) {
    const io::Json once = io::to_json(io::load_problem(data(name)));
    const io::Json twice = io::to_json(io::parse_problem(once));
    CHECK_MESSAGE(once == twice, name);
  }
}

TEST_CASE("cli exit codes") {
  std::string text;
  CHECK(run_cli({"pmp", "verify", data("dblint.json")}, &text) == cli::kTrue);
  CHECK(text.find("p_c = -1") != std::string::npos);
  CHECK(run_cli({"pmp", "verify", data("dblint_bad.json")}) == cli::kFalse);
  CHECK(run_cli({"pmp", "verify", data("dblint.json"), "--tol", "1e-3", "--mesh", "200"}) == cli::kTrue);
  CHECK(run_cli({"pmp", "verify", data("dblint.json"), "--needles", "0.25,0.5,0.75"}) == cli::kTrue);
  CHECK(run_cli({"needle", "check", data("dblint_needles.json")}) == cli::kTrue);
  CHECK(run_cli({"cone", "transversal", data("cones_nontransversal.json")}, &text) == cli::kFalse);
  CHECK(text.find("separating form p = [1, 0]") != std::string::npos);
  CHECK(run_cli({"cone", "transversal", data("cones_axes.json")}) == cli::kTrue);
  CHECK(run_cli({"cone", "separate", data("cones_axes.json")}) == cli::kFalse);
  CHECK(run_cli({"cone", "polar", data("cones_axes.json")}) == cli::kTrue);
  CHECK(run_cli({"amp", "solve", data("amp_zero.json")}) == cli::kTrue);
  CHECK(run_cli({"lagrange", "verify", data("circle.json")}) == cli::kTrue);
  CHECK(run_cli({"kkt", "verify", data("halfplane.json")}) == cli::kTrue);
  CHECK(run_cli({"fermat", data("flat.json")}) == cli::kTrue);
  CHECK(run_cli({"fermat", data("circle.json")}) == cli::kFalse);
  CHECK(run_cli({"openmap", "check", data("openmap.json")}) == cli::kTrue);

  CHECK(run_cli({"teleport", data("dblint.json")}, &text) == cli::kInputError);
  CHECK(text.find("usage:") != std::string::npos);
  CHECK(run_cli({}) == cli::kInputError);
  CHECK(run_cli({"pmp", "verify", data("circle.json")}) == cli::kInputError);
  CHECK(run_cli({"pmp", "verify", data("no_such_file.json")}) == cli::kInputError);
  CHECK(run_cli({"lagrange", "verify", data("halfplane.json")}) == cli::kInputError);
}

TEST_CASE("certificates re-run to the same verdict") {
  const std::string path = "sepcert_test_cert.json";
  const std::string again = "sepcert_test_cert2.json";
  for (const auto& args : std::vector<std::vector<std::string>>{{"pmp", "verify", data("dblint.json")},
                                                                {"pmp", "verify", data("dblint_bad.json")},
                                                                {"openmap", "check", data("openmap.json")}}) {
    std::vector<std::string> first = args;
    first.insert(first.end(), {"--cert", path, "--seed", "5"});
    const int code = run_cli(first);
    std::vector<std::string> second{args[0], args[1], path, "--cert", again};
    CHECK(run_cli(second) == code);
    std::ifstream a(path), b(again);
    CHECK(io::Json::parse(a) == io::Json::parse(b));
  }
  std::ifstream in(path);
  const io::Json cert = io::Json::parse(in);
  CHECK(cert["problem"]["seed"] == 5);
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("pmp certificate contents") {
  const std::string path = "sepcert_test_pmp.json";
  REQUIRE(run_cli({"pmp", "verify", data("dblint.json"), "--cert", path}) == cli::kTrue);
  std::ifstream in(path);
  const io::Json cert = io::Json::parse(in);
  const io::Json& r = cert["result"];
  CHECK(r["verdict"] == "certified");
  CHECK(r["p_c"] == -1.0);
  CHECK(r["normality"] == "normal");
  CHECK(r["adjoint"]["p"].size() == 1001);
  CHECK(r["residual_per_node"].size() == 1001);
  CHECK(r["tolerances"]["certify"] == 1e-6);
  CHECK(cert["problem"]["options"]["mesh"] == 1000);
  std::remove(path.c_str());
}
