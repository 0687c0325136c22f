// End-to-end checks of the wickmart binary: worked examples, exit codes,
// determinism of payloads, config/env plumbing, and schema conformance of
// the JSON outputs.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using nlohmann::json;

namespace {

std::string g_binary;
std::string g_schemas;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + g_binary + " " + args + " 2>/dev/null";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

json load_schema(const std::string& name) {
  std::ifstream in(g_schemas + "/" + name);
  REQUIRE(in.good());
  return json::parse(in);
}

// Minimal structural validator covering the subset our schemas use:
// type, properties, required, items.
bool validates(const json& value, const json& schema);

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "boolean") return value.is_boolean();
  return false;
}

bool validates(const json& value, const json& schema) {
  if (schema.contains("type") && !type_matches(value, schema["type"].get<std::string>()))
    return false;
  if (schema.contains("required"))
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>())) return false;
  if (schema.contains("properties") && value.is_object()) {
    for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
      if (value.contains(it.key()) && !validates(value[it.key()], it.value())) return false;
  }
  if (schema.contains("items") && value.is_array())
    for (const auto& item : value)
      if (!validates(item, schema["items"])) return false;
  return true;
}

}  // namespace

TEST_CASE("wick eval prints the worked value") {
  const RunResult r = run("wick eval --poly 0,0,0,0,1 --x 2 --t 1");
  CHECK(r.code == 0);
  CHECK(r.out == "-5\n");
}

TEST_CASE("wick expand emits the documented JSON shape") {
  const RunResult r = run("wick expand --poly 0,0,0,0,1");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("wick_expand.schema.json")));
  REQUIRE(j["terms"].size() == 3);
  CHECK(j["terms"][0] == json({{"xpow", 4}, {"tpow", 0}, {"coef", 1.0}}));
  CHECK(j["terms"][1] == json({{"xpow", 2}, {"tpow", 1}, {"coef", -6.0}}));
  CHECK(j["terms"][2] == json({{"xpow", 0}, {"tpow", 2}, {"coef", 3.0}}));
}

TEST_CASE("validation failures exit with code 1 and print usage") {
  CHECK(run("wick eval --x 2 --t 1").code == 1);          // missing --poly
  CHECK(run("wick eval --poly 0,0,1 --x 0 --t 0").code == 1);  // degree too low
  CHECK(run("--definitely-not-a-flag").code != 0);
  CHECK(run("wick eval --poly 0,0,0,0,1 --x 2 --t 1 --bogus 3").code != 0);
}

TEST_CASE("envelope output validates and matches the closed form") {
  const RunResult r = run("envelope --poly 0,0,0,0,1 --t 1");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("envelope.schema.json")));
  CHECK(std::abs(j["f"].get<double>() - 2.3344142) < 1e-6);
}

TEST_CASE("cone calibration round-trips through a file") {
  const std::string cone_path = "/tmp/wickmart_cli_cone.json";
  const RunResult cal = run("cone-calibrate --poly 0,0,0,0,1 --tmax 50 --eps 0.5,0.25 --out " + cone_path);
  REQUIRE(cal.code == 0);
  std::ifstream in(cone_path);
  REQUIRE(in.good());
  const json cone = json::parse(in);
  CHECK(validates(cone, load_schema("cone_config.schema.json")));
  CHECK(cone["A"].get<double>() == 3.0);

  const RunResult sim = run("paths simulate --poly 0,0,0,0,1 --cone " + cone_path +
                            " --dt 0.005 --tmax 2 --paths 20 --seed 5");
  CHECK(sim.code == 0);
  CHECK(sim.out.find("path,d_t,d_l,d_h,q,n_hits") == 0);
  std::remove(cone_path.c_str());
}

TEST_CASE("payloads are byte-identical across reruns and thread counts") {
  const std::string args =
      "paths simulate --poly 0,0,0,0,1 --dt 0.005 --tmax 2 --paths 40 --seed 11";
  const RunResult a = run(args + " --threads 1");
  const RunResult b = run(args + " --threads 4");
  const RunResult c = run(args + " --threads 1");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);

  const RunResult g1 = run("gff simulate --poly 0,0,0,0,1 --grid 3 --t 0.5 --replicas 10 --seed 3 --threads 1");
  const RunResult g2 = run("gff simulate --poly 0,0,0,0,1 --grid 3 --t 0.5 --replicas 10 --seed 3 --threads 2");
  CHECK(g1.code == 0);
  CHECK(g1.out == g2.out);
}

TEST_CASE("config file supplies defaults, flags override") {
  const std::string cfg_path = "/tmp/wickmart_cli_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({"x": 2, "t": 1})";
  }
  const RunResult from_cfg = run("wick eval --poly 0,0,0,0,1 --config " + cfg_path);
  CHECK(from_cfg.code == 0);
  CHECK(from_cfg.out == "-5\n");
  const RunResult overridden = run("wick eval --poly 0,0,0,0,1 --config " + cfg_path + " --x 0");
  CHECK(overridden.code == 0);
  CHECK(overridden.out == "3\n");
  std::remove(cfg_path.c_str());
}

TEST_CASE("WICKMART_SEED is the seed fallback") {
  const std::string args = "gff simulate --poly 0,0,0,0,1 --grid 2 --t 0.5 --replicas 5";
  const RunResult env_run = run(args, "WICKMART_SEED=99 ");
  const RunResult flag_run = run(args + " --seed 99");
  const RunResult other = run(args + " --seed 100");
  CHECK(env_run.code == 0);
  CHECK(env_run.out == flag_run.out);
  CHECK(env_run.out != other.out);
  // explicit flag wins over the environment
  const RunResult both = run(args + " --seed 100", "WICKMART_SEED=99 ");
  CHECK(both.out == other.out);
}

TEST_CASE("coupling exit JSON validates; closed form within noise of MC") {
  const RunResult r = run("coupling exit --z -0.5 --paths 4000 --dt 0.002 --horizon 20 --seed 21");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("coupling_exit.schema.json")));
  const double cf = j["closed_form"].get<double>();
  const double mc = j["mc"].get<double>();
  const double se = j["stderr"].get<double>();
  CHECK(std::abs(cf - 0.36787944117144233) < 1e-12);
  CHECK(std::abs(mc - cf) <= 4.0 * se);
}

TEST_CASE("tau fit JSON validates") {
  const RunResult r = run(
      "coupling tau --poly 0,0,0,0,1 --gaps 0.1,0.2 --paths 500 --dt 0.005 --t 1 --seed 2");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("coupling_tau.schema.json")));
}

TEST_CASE("kernel check report validates") {
  const RunResult r = run("gff kernel-check --tmax 10 --grid 4");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("kernel_report.schema.json")));
  CHECK(j["psd_min_eigenvalue"].get<double>() >= -1e-10);
}

TEST_CASE("moments mgf consumes a sample file and validates") {
  const std::string samples_path = "/tmp/wickmart_cli_samples.csv";
  {
    std::ofstream out(samples_path);
    out << "value\n";
    for (int i = 0; i < 2000; ++i) out << 0.001 * (i % 41 - 20) << "\n";
  }
  const RunResult r = run("moments mgf --input " + samples_path + " --alphas -0.2:0.1:0.2");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(validates(j, load_schema("mgf_curve.schema.json")));
  CHECK(j["points"].size() == 5);
  std::remove(samples_path.c_str());
}

TEST_CASE("verify-all quick profile: criteria 1-14 green, 15 reported") {
  const RunResult r = run("verify-all --profile quick --seed 7");
  INFO(r.out);
  // one line per criterion
  for (int id = 1; id <= 15; ++id)
    CHECK(r.out.find("[" + std::to_string(id) + "]") != std::string::npos);
  for (int id = 1; id <= 14; ++id)
    CHECK(r.out.find("[" + std::to_string(id) + "] PASS") != std::string::npos);
  // criterion 15's CI-overlap clause is structurally red on a fixed grid (the
  // per-site t^4 variance keeps the estimand drifting between t=4 and t=6);
  // the runner must report it rather than hide it, and the exit code must agree
  if (r.out.find("[15] PASS") != std::string::npos) {
    CHECK(r.code == 0);
  } else {
    CHECK(r.out.find("[15] FAIL") != std::string::npos);
    CHECK(r.code == 2);
  }
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: test_cli <wickmart-binary> <schemas-dir>\n");
    return 1;
  }
  g_binary = argv[1];
  g_schemas = argv[2];
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  return ctx.run();
}
