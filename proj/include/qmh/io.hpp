#ifndef QMH_IO_HPP
#define QMH_IO_HPP

/**
 * @file io.hpp
 * @brief JSON and CSV serialization for kernels, edge spaces, operators,
 *        gate sequences, experiment configurations, and run manifests.
 *
 * Formats:
 *  - kernel JSON:        {"n": N, "rows": [[...], ...]}
 *  - vector JSON:        {"n": N, "values": [...]}
 *  - edge-space JSON:    {"n": N, "edges": [[x,y], ...], "nu": [...]}
 *  - spectra CSV:        index,re,im
 *  - operator CSV:       row,col,re,im          (dense, row-major)
 *  - statevector CSV:    index,re,im
 *  - gate JSON lines:    {"kind": ..., "qubits": [...], "params": {...}}
 *  - run manifest JSON:  {"command", "config", "seed", "versions", "outputs"}
 */

#include "qmh/dual.hpp"
#include "qmh/experiment.hpp"
#include "qmh/gates.hpp"
#include "qmh/types.hpp"

#include <string>
#include <vector>

namespace qmh {

// ------------------------------------------------------------------- JSON ---

std::string kernel_to_json(const Eigen::Ref<const Matrix>& K);
Matrix kernel_from_json(const std::string& text);

std::string vector_to_json(const Eigen::Ref<const Vector>& v);
Vector vector_from_json(const std::string& text);

std::string edge_space_to_json(const EdgeSpace& S,
                               const Eigen::Ref<const Vector>& nu);
/** Parses edges and nu; rebuilds the index table. */
std::pair<EdgeSpace, Vector> edge_space_from_json(const std::string& text);

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);

std::string mala_config_to_json(const MalaConfig& cfg);
MalaConfig mala_config_from_json(const std::string& text);

/** Manifest describing one CLI run: config echo, seed, versions, outputs. */
std::string run_manifest(const std::string& command,
                         const std::string& config_json, std::uint64_t seed,
                         const std::vector<std::string>& outputs);

// -------------------------------------------------------------------- CSV ---

std::string spectrum_to_csv(const CVector& eigenvalues);
std::string operator_to_csv(const Eigen::Ref<const Matrix>& op);
std::string operator_to_csv(const Eigen::Ref<const CMatrix>& op);
std::string statevector_to_csv(const Eigen::Ref<const Vector>& v);

/** Gate sequence as JSON lines, one gate per line. */
std::string gates_to_jsonl(const GateSequence& seq);

// ------------------------------------------------------------------ files ---

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qmh

#endif  // QMH_IO_HPP
