#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmh/chain.hpp"
#include "qmh/io.hpp"
#include "qmh/version.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

using namespace qmh;
using namespace qmh::testing;
using nlohmann::json;

namespace {

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("kernel and vector JSON round-trips are bit-exact") {
  SplitMix64 rng(321);
  const Matrix T = random_proposal(5, rng);
  const Matrix back = kernel_from_json(kernel_to_json(T));
  REQUIRE(back.rows() == 5);
  CHECK((back - T).cwiseAbs().maxCoeff() == 0.0);

  const Vector pi = random_target(7, rng);
  const Vector vback = vector_from_json(vector_to_json(pi));
  REQUIRE(vback.size() == 7);
  CHECK((vback - pi).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(kernel_from_json("not json"), Error);
  CHECK_THROWS_AS(kernel_from_json(R"({"n": 2, "rows": [[0.5, 0.5]]})"), Error);
  CHECK_THROWS_AS(kernel_from_json(R"({"n": 2, "rows": [[1.0], [1.0]]})"),
                  Error);
  CHECK_THROWS_AS(vector_from_json(R"({"n": 3, "values": [1.0]})"), Error);
}

TEST_CASE("edge-space JSON rebuilds the index table") {
  SplitMix64 rng(654);
  const Vector pi = random_target(4, rng);
  const Matrix T = random_proposal(4, rng);
  const EdgeSpace S = edge_space(T);
  const Vector nu = edge_measure(S, pi, T);

  const auto [back, nu_back] = edge_space_from_json(edge_space_to_json(S, nu));
  REQUIRE(back.size() == S.size());
  CHECK(back.n == S.n);
  CHECK((nu_back - nu).cwiseAbs().maxCoeff() == 0.0);
  for (Index e = 0; e < S.size(); ++e) {
    CHECK(back.edges[e] == S.edges[e]);
    const auto [x, y] = S.edges[e];
    CHECK(back.index(x, y) == S.index(x, y));
  }

  CHECK_THROWS_AS(
      edge_space_from_json(R"({"n": 2, "edges": [[0, 5]], "nu": [1.0]})"),
      Error);
}

TEST_CASE("experiment configurations survive the JSON round-trip") {
  SUBCASE("explicit kernel") {
    ExperimentConfig cfg;
    cfg.kernel.type = "explicit";
    cfg.kernel.pi = Vector(2);
    cfg.kernel.pi << 0.25, 0.75;
    cfg.kernel.T = Matrix(2, 2);
    cfg.kernel.T << 0, 1, 1, 0;
    cfg.rule = AcceptanceRule::MetropolisLazy;
    cfg.mode = "qpe";
    cfg.ancilla_bits = 5;
    cfg.shots = 2500;
    cfg.seed = 987654321;
    cfg.tolerances.spectral = 1e-8;

    const ExperimentConfig back =
        experiment_config_from_json(experiment_config_to_json(cfg));
    CHECK(back.kernel.type == "explicit");
    CHECK((back.kernel.pi - cfg.kernel.pi).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.kernel.T - cfg.kernel.T).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.rule == AcceptanceRule::MetropolisLazy);
    CHECK(back.mode == "qpe");
    CHECK(back.ancilla_bits == 5);
    CHECK(back.shots == 2500);
    CHECK(back.seed == 987654321);
    CHECK(back.tolerances.spectral == 1e-8);
  }

  SUBCASE("mala kernel") {
    ExperimentConfig cfg;
    cfg.kernel.type = "mala";
    cfg.kernel.mala.bits = 5;
    cfg.kernel.mala.lo = -2.0;
    cfg.kernel.mala.hi = 2.0;
    cfg.kernel.mala.tau = 0.03;
    cfg.kernel.mala.beta = 17.5;
    cfg.kernel.mala.potential.name = "table";
    cfg.kernel.mala.potential.values.assign(32, 0.125);
    cfg.rule = AcceptanceRule::Glauber;

    const ExperimentConfig back =
        experiment_config_from_json(experiment_config_to_json(cfg));
    CHECK(back.kernel.type == "mala");
    CHECK(back.kernel.mala.bits == 5);
    CHECK(back.kernel.mala.lo == -2.0);
    CHECK(back.kernel.mala.hi == 2.0);
    CHECK(back.kernel.mala.tau == 0.03);
    CHECK(back.kernel.mala.beta == 17.5);
    CHECK(back.kernel.mala.potential.name == "table");
    CHECK(back.kernel.mala.potential.values == std::vector<double>(32, 0.125));
  }

  SUBCASE("omitted fields keep their defaults") {
    const ExperimentConfig back = experiment_config_from_json(
        R"({"kernel": {"type": "mala", "mala": {"bits": 4}}})");
    const ExperimentConfig defaults;
    CHECK(back.rule == defaults.rule);
    CHECK(back.mode == defaults.mode);
    CHECK(back.shots == defaults.shots);
    CHECK(back.seed == defaults.seed);
    CHECK(back.kernel.mala.tau == defaults.kernel.mala.tau);
  }

  SUBCASE("mala config alone round-trips") {
    MalaConfig cfg;
    cfg.bits = 7;
    cfg.tau = 0.015;
    cfg.beta = 3.25;
    const MalaConfig back = mala_config_from_json(mala_config_to_json(cfg));
    CHECK(back.bits == 7);
    CHECK(back.tau == 0.015);
    CHECK(back.beta == 3.25);
    CHECK(back.potential.name == "two_well");
  }
}

TEST_CASE("run manifests carry command, config, versions, and outputs") {
  const std::string manifest = run_manifest(
      "walk-spectrum", R"({"shots": 5})", 99, {"a.csv", "b.json"});
  const json j = json::parse(manifest);
  CHECK(j.at("command") == "walk-spectrum");
  CHECK(j.at("config").at("shots") == 5);
  CHECK(j.at("seed") == 99);
  CHECK(j.at("versions").at("qmh") == std::string(kVersion));
  CHECK(j.at("versions").contains("eigen"));
  REQUIRE(j.at("outputs").size() == 2);
  CHECK(j.at("outputs")[0] == "a.csv");

  // a non-JSON config is echoed opaquely rather than dropped
  const json j2 = json::parse(run_manifest("sample", "plain text", 1, {}));
  CHECK(j2.at("config").is_string());
}

TEST_CASE("CSV emitters write one header line plus one line per entry") {
  CVector eig(2);
  eig << Complex(1.0, 0.0), Complex(-0.25, 0.5);
  const std::string spec = spectrum_to_csv(eig);
  CHECK(spec.rfind("index,re,im\n", 0) == 0);
  CHECK(count_lines(spec) == 3);
  {
    std::istringstream in(spec);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "0,1,0");
    std::getline(in, line);
    CHECK(line == "1,-0.25,0.5");
  }

  Matrix M(2, 2);
  M << 0.5, 0.125, -1.0 / 3.0, 0.0;
  const std::string op = operator_to_csv(M);
  CHECK(op.rfind("row,col,re,im\n", 0) == 0);
  CHECK(count_lines(op) == 5);
  // row-major order, full precision, zero imaginary column
  {
    std::istringstream in(op);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "0,0,0.5,0");
    std::getline(in, line);
    CHECK(line == "0,1,0.125,0");
    std::getline(in, line);
    CHECK(line == "1,0,-0.33333333333333331,0");
  }

  const CMatrix C = M.cast<Complex>() * Complex(0.0, 1.0);
  const std::string opc = operator_to_csv(C);
  CHECK(count_lines(opc) == 5);
  CHECK(opc.find("0,0,0,0.5") != std::string::npos);

  Vector v(3);
  v << 1.0, 0.0, -0.5;
  const std::string sv = statevector_to_csv(v);
  CHECK(sv.rfind("index,re,im\n", 0) == 0);
  CHECK(count_lines(sv) == 4);
  CHECK(sv.find("2,-0.5,0") != std::string::npos);

  // full round-trip precision through the %.17g format
  SplitMix64 rng(888);
  const Vector dense = random_target(6, rng);
  std::istringstream in(statevector_to_csv(dense));
  std::string line;
  std::getline(in, line);  // header
  for (Index i = 0; i < 6; ++i) {
    std::getline(in, line);
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == dense[i]);
  }
}

TEST_CASE("gate sequences serialize one JSON object per line") {
  SplitMix64 rng(999);
  Matrix A(2, 2);
  A << 0.0, 0.5, 0.25, 0.0;
  const GateSequence seq = assemble_O_cal_A(1, A);
  const std::string text = gates_to_jsonl(seq);
  CHECK(count_lines(text) == static_cast<int>(seq.gates.size()));

  std::istringstream in(text);
  std::string line;
  size_t k = 0;
  bool saw_rotation = false;
  while (std::getline(in, line)) {
    const json j = json::parse(line);  // every line parses on its own
    REQUIRE(j.contains("kind"));
    REQUIRE(j.contains("qubits"));
    REQUIRE(j.contains("params"));
    CHECK(j.at("qubits").is_array());
    for (const auto& q : j.at("qubits")) {
      CHECK(q.get<int>() >= 0);
      CHECK(q.get<int>() < seq.total_qubits());
    }
    if (j.at("kind") == "coin_rotation") {
      saw_rotation = true;
      CHECK(j.at("params").at("table_rows") == 2);
    }
    ++k;
  }
  CHECK(k == seq.gates.size());
  CHECK(saw_rotation);
}

TEST_CASE("text files round-trip and unopenable paths raise errors") {
  const std::string dir = std::filesystem::temp_directory_path() /
                          "qmh_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/payload.txt";
  const std::string content = "line one\nline two\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_text_file(dir + "/does_not_exist.txt"), Error);
  CHECK_THROWS_AS(write_text_file(dir + "/no/such/dir/file.txt", "x"), Error);
}
