#include "qmh/io.hpp"

#include "qmh/version.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qmh {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Error::Code::InvalidArgument,
                std::string("JSON parse error: ") + e.what());
  }
}

[[noreturn]] void bad_field(const char* what, const json::exception& e) {
  throw Error(Error::Code::InvalidArgument,
              std::string("JSON field error (") + what + "): " + e.what());
}

json rows_of(const Eigen::Ref<const Matrix>& K) {
  json rows = json::array();
  for (Index i = 0; i < K.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < K.cols(); ++j) row.push_back(K(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix rows_to_matrix(const json& rows, Index n) {
  if (static_cast<Index>(rows.size()) != n)
    throw Error(Error::Code::InvalidArgument,
                "kernel JSON: row count does not match n");
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<size_t>(i));
    if (static_cast<Index>(row.size()) != n)
      throw Error(Error::Code::InvalidArgument,
                  "kernel JSON: row length does not match n");
    for (Index j = 0; j < n; ++j)
      K(i, j) = row.at(static_cast<size_t>(j)).get<double>();
  }
  return K;
}

json values_of(const Eigen::Ref<const Vector>& v) {
  json values = json::array();
  for (Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
  return values;
}

Vector values_to_vector(const json& values, Index n) {
  if (static_cast<Index>(values.size()) != n)
    throw Error(Error::Code::InvalidArgument,
                "vector JSON: value count does not match n");
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = values.at(static_cast<size_t>(i)).get<double>();
  return v;
}

json mala_to_obj(const MalaConfig& cfg) {
  json j;
  j["bits"] = cfg.bits;
  j["lo"] = cfg.lo;
  j["hi"] = cfg.hi;
  j["tau"] = cfg.tau;
  j["beta"] = cfg.beta;
  j["potential"] = {{"name", cfg.potential.name},
                    {"values", cfg.potential.values}};
  return j;
}

MalaConfig mala_from_obj(const json& j) {
  MalaConfig cfg;
  try {
    cfg.bits = j.value("bits", cfg.bits);
    cfg.lo = j.value("lo", cfg.lo);
    cfg.hi = j.value("hi", cfg.hi);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.beta = j.value("beta", cfg.beta);
    if (j.contains("potential")) {
      const json& p = j.at("potential");
      cfg.potential.name = p.value("name", cfg.potential.name);
      if (p.contains("values"))
        cfg.potential.values = p.at("values").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    bad_field("mala config", e);
  }
  return cfg;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

const char* kind_name(Gate::Kind k) {
  switch (k) {
    case Gate::Kind::X: return "x";
    case Gate::Kind::H: return "h";
    case Gate::Kind::Phase: return "phase";
    case Gate::Kind::CnotBlock: return "cnot_block";
    case Gate::Kind::Mcx: return "mcx";
    case Gate::Kind::CRegSwap: return "creg_swap";
    case Gate::Kind::DistinctCswap: return "distinct_cswap";
    case Gate::Kind::CoinRotation: return "coin_rotation";
    case Gate::Kind::PhaseBlockZ: return "phase_block_z";
    case Gate::Kind::RegUnitary: return "reg_unitary";
    case Gate::Kind::ReflectZero: return "reflect_zero";
  }
  return "?";
}

}  // namespace

// --------------------------------------------------------------------- JSON ---

std::string kernel_to_json(const Eigen::Ref<const Matrix>& K) {
  json j;
  j["n"] = K.rows();
  j["rows"] = rows_of(K);
  return j.dump(2);
}

Matrix kernel_from_json(const std::string& text) {
  const json j = parse_or_throw(text);
  try {
    const Index n = j.at("n").get<Index>();
    return rows_to_matrix(j.at("rows"), n);
  } catch (const json::exception& e) {
    bad_field("kernel", e);
  }
}

std::string vector_to_json(const Eigen::Ref<const Vector>& v) {
  json j;
  j["n"] = v.size();
  j["values"] = values_of(v);
  return j.dump(2);
}

Vector vector_from_json(const std::string& text) {
  const json j = parse_or_throw(text);
  try {
    const Index n = j.at("n").get<Index>();
    return values_to_vector(j.at("values"), n);
  } catch (const json::exception& e) {
    bad_field("vector", e);
  }
}

std::string edge_space_to_json(const EdgeSpace& S,
                               const Eigen::Ref<const Vector>& nu) {
  json edges = json::array();
  for (const auto& [x, y] : S.edges) edges.push_back({x, y});
  json j;
  j["n"] = S.n;
  j["edges"] = std::move(edges);
  j["nu"] = values_of(nu);
  return j.dump(2);
}

std::pair<EdgeSpace, Vector> edge_space_from_json(const std::string& text) {
  const json j = parse_or_throw(text);
  try {
    EdgeSpace S;
    S.n = j.at("n").get<Index>();
    if (S.n < 1)
      throw Error(Error::Code::InvalidArgument, "edge-space JSON: n < 1");
    S.edge_index = Eigen::MatrixXi::Constant(S.n, S.n, -1);
    for (const json& e : j.at("edges")) {
      const Index x = e.at(0).get<Index>();
      const Index y = e.at(1).get<Index>();
      if (x < 0 || x >= S.n || y < 0 || y >= S.n)
        throw Error(Error::Code::InvalidArgument,
                    "edge-space JSON: edge endpoint out of range");
      S.edge_index(x, y) = static_cast<int>(S.edges.size());
      S.edges.emplace_back(x, y);
    }
    Vector nu = values_to_vector(j.at("nu"), S.size());
    return {std::move(S), std::move(nu)};
  } catch (const json::exception& e) {
    bad_field("edge space", e);
  }
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json kernel;
  kernel["type"] = cfg.kernel.type;
  if (cfg.kernel.type == "explicit") {
    kernel["pi"] = values_of(cfg.kernel.pi);
    kernel["rows"] = rows_of(cfg.kernel.T);
  } else {
    kernel["mala"] = mala_to_obj(cfg.kernel.mala);
  }
  json j;
  j["kernel"] = std::move(kernel);
  j["rule"] = to_string(cfg.rule);
  j["mode"] = cfg.mode;
  j["ancilla_bits"] = cfg.ancilla_bits;
  j["shots"] = cfg.shots;
  j["seed"] = cfg.seed;
  j["tolerances"] = {{"structural", cfg.tolerances.structural},
                     {"spectral", cfg.tolerances.spectral},
                     {"reversibility", cfg.tolerances.reversibility}};
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = parse_or_throw(text);
  ExperimentConfig cfg;
  try {
    if (j.contains("kernel")) {
      const json& k = j.at("kernel");
      cfg.kernel.type = k.value("type", cfg.kernel.type);
      if (k.contains("pi")) {
        const json& pi = k.at("pi");
        cfg.kernel.pi = values_to_vector(pi, static_cast<Index>(pi.size()));
      }
      if (k.contains("rows")) {
        const json& rows = k.at("rows");
        cfg.kernel.T = rows_to_matrix(rows, static_cast<Index>(rows.size()));
      }
      if (k.contains("mala")) cfg.kernel.mala = mala_from_obj(k.at("mala"));
    }
    if (j.contains("rule"))
      cfg.rule = acceptance_rule_from_string(j.at("rule").get<std::string>());
    cfg.mode = j.value("mode", cfg.mode);
    cfg.ancilla_bits = j.value("ancilla_bits", cfg.ancilla_bits);
    cfg.shots = j.value("shots", cfg.shots);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      cfg.tolerances.structural = t.value("structural", cfg.tolerances.structural);
      cfg.tolerances.spectral = t.value("spectral", cfg.tolerances.spectral);
      cfg.tolerances.reversibility =
          t.value("reversibility", cfg.tolerances.reversibility);
    }
  } catch (const json::exception& e) {
    bad_field("experiment config", e);
  }
  return cfg;
}

std::string mala_config_to_json(const MalaConfig& cfg) {
  return mala_to_obj(cfg).dump(2);
}

MalaConfig mala_config_from_json(const std::string& text) {
  return mala_from_obj(parse_or_throw(text));
}

std::string run_manifest(const std::string& command,
                         const std::string& config_json, std::uint64_t seed,
                         const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  try {
    j["config"] = json::parse(config_json);
  } catch (const json::exception&) {
    j["config"] = config_json;  // opaque echo when not valid JSON
  }
  j["seed"] = seed;
  j["versions"] = {{"qmh", kVersion}, {"eigen", eigen_version()}};
  j["outputs"] = outputs;
  return j.dump(2);
}

// ---------------------------------------------------------------------- CSV ---

std::string spectrum_to_csv(const CVector& eigenvalues) {
  std::string out = "index,re,im\n";
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    out += std::to_string(i) + ',' + fmt(eigenvalues[i].real()) + ',' +
           fmt(eigenvalues[i].imag()) + '\n';
  }
  return out;
}

std::string operator_to_csv(const Eigen::Ref<const Matrix>& op) {
  std::string out = "row,col,re,im\n";
  for (Index i = 0; i < op.rows(); ++i)
    for (Index j = 0; j < op.cols(); ++j)
      out += std::to_string(i) + ',' + std::to_string(j) + ',' +
             fmt(op(i, j)) + ",0\n";
  return out;
}

std::string operator_to_csv(const Eigen::Ref<const CMatrix>& op) {
  std::string out = "row,col,re,im\n";
  for (Index i = 0; i < op.rows(); ++i)
    for (Index j = 0; j < op.cols(); ++j)
      out += std::to_string(i) + ',' + std::to_string(j) + ',' +
             fmt(op(i, j).real()) + ',' + fmt(op(i, j).imag()) + '\n';
  return out;
}

std::string statevector_to_csv(const Eigen::Ref<const Vector>& v) {
  std::string out = "index,re,im\n";
  for (Index i = 0; i < v.size(); ++i)
    out += std::to_string(i) + ',' + fmt(v[i]) + ",0\n";
  return out;
}

std::string gates_to_jsonl(const GateSequence& seq) {
  std::string out;
  for (const Gate& g : seq.gates) {
    json qubits = json::array();
    json params = json::object();
    switch (g.kind) {
      case Gate::Kind::X:
      case Gate::Kind::H:
        qubits.push_back(g.target);
        break;
      case Gate::Kind::Phase:
        qubits.push_back(g.target);
        params["theta"] = g.theta;
        break;
      case Gate::Kind::Mcx:
        for (int q : g.controls) qubits.push_back(q);
        qubits.push_back(g.target);
        params["control_values"] = g.control_values;
        break;
      case Gate::Kind::CnotBlock:
        for (int q : seq.layout.qubits(g.reg_a)) qubits.push_back(q);
        for (int q : seq.layout.qubits(g.reg_b)) qubits.push_back(q);
        params["source"] = to_string(g.reg_a);
        params["dest"] = to_string(g.reg_b);
        break;
      case Gate::Kind::CRegSwap:
      case Gate::Kind::DistinctCswap:
        if (g.kind == Gate::Kind::DistinctCswap)
          for (int q : seq.layout.qubits(g.reg_a)) qubits.push_back(q);
        for (int q : seq.layout.qubits(g.reg_b)) qubits.push_back(q);
        for (int q : seq.layout.qubits(g.reg_c)) qubits.push_back(q);
        break;
      case Gate::Kind::CoinRotation:
      case Gate::Kind::PhaseBlockZ:
        for (int q : seq.layout.qubits(g.reg_a)) qubits.push_back(q);
        for (int q : seq.layout.qubits(g.reg_b)) qubits.push_back(q);
        qubits.push_back(g.target);
        params["adjoint"] = g.adjoint;
        params["table_rows"] = g.table.rows();
        if (g.kind == Gate::Kind::CoinRotation && g.use_reg_c)
          params["equality_register"] = to_string(g.reg_c);
        break;
      case Gate::Kind::RegUnitary:
        for (int q : seq.layout.qubits(g.reg_a)) qubits.push_back(q);
        if (g.table.rows() != (Index{1} << seq.layout.slot_width(g.reg_a)))
          for (int q : seq.layout.qubits(g.reg_b)) qubits.push_back(q);
        params["adjoint"] = g.adjoint;
        params["dim"] = g.table.rows();
        break;
      case Gate::Kind::ReflectZero:
        for (int q : g.qubits) qubits.push_back(q);
        break;
    }
    if (g.control >= 0) {
      params["control"] = g.control;
      params["control_value"] = g.control_value;
    }
    if (!g.tag.empty()) params["tag"] = g.tag;

    json line;
    line["kind"] = kind_name(g.kind);
    line["qubits"] = std::move(qubits);
    line["params"] = std::move(params);
    out += line.dump() + '\n';
  }
  return out;
}

// -------------------------------------------------------------------- files ---

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error(Error::Code::InvalidArgument, "cannot open for write: " + path);
  f << content;
  if (!f)
    throw Error(Error::Code::InvalidArgument, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw Error(Error::Code::InvalidArgument, "cannot open for read: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace qmh
