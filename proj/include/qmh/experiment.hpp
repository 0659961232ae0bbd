#ifndef QMH_EXPERIMENT_HPP
#define QMH_EXPERIMENT_HPP

/**
 * @file experiment.hpp
 * @brief End-to-end experiments: stationary-state sampling through the dual
 *        walk (exact projection or phase estimation), gap reports, and the
 *        two-well gap-versus-bound sweep.
 */

#include "qmh/chain.hpp"
#include "qmh/dual.hpp"
#include "qmh/gates.hpp"
#include "qmh/mala.hpp"
#include "qmh/types.hpp"
#include "qmh/walk.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qmh {

/** How the acceptance matrix (and hence the dual walk) is formed. */
enum class AcceptanceRule { Glauber, Metropolis, MetropolisLazy };

AcceptanceRule acceptance_rule_from_string(const std::string& s);
const char* to_string(AcceptanceRule rule);

/** Where the chain comes from. */
struct KernelSource {
  std::string type = "explicit";  ///< "explicit" or "mala"
  Vector pi;                      ///< explicit: target distribution
  Matrix T;                       ///< explicit: proposal kernel
  MalaConfig mala;                ///< mala: grid configuration
};

/** Full experiment configuration (JSON-serializable; see io.hpp). */
struct ExperimentConfig {
  KernelSource kernel;
  AcceptanceRule rule = AcceptanceRule::Glauber;
  std::string mode = "exact-projection";  ///< or "qpe"
  int ancilla_bits = 3;                   ///< QPE register width t
  long shots = 100000;
  std::uint64_t seed = 42;
  Tolerances tolerances;
};

/** The assembled chain with its dual-walk ingredients. */
struct PreparedChain {
  Vector pi;     ///< target
  Matrix T;      ///< proposal
  Matrix A;      ///< acceptance actually used by the dual (halved when lazy)
  Matrix A_full; ///< acceptance of the non-lazy chain
  Matrix P;      ///< mh_kernel(T, A_full): the chain whose gap is delta
  EdgeSpace S;
  Vector nu;
  DualMode dual_mode;
};

PreparedChain prepare_chain(const ExperimentConfig& cfg);

/** Outcome of a sampling run. */
struct SampleRun {
  Eigen::VectorXi histogram;      ///< counts per state, sums to shots
  Vector sampled_distribution;    ///< the distribution the histogram drew from
  double tv_to_target = 0.0;      ///< TV(empirical, pi)
  double success_probability = 1; ///< per-attempt projection success
  double expected_repetitions = 1;///< 1/success_probability
  double fidelity = 1.0;          ///< |<post state | exact projected state>|^2
  long shots = 0;
  std::uint64_t seed = 0;
  std::map<std::string, long> oracle_calls;  ///< accumulated O_T/O_A (dag) calls
};

/**
 * Exact-projection sampling.  The walk state starts as
 * BoxBar(|+> (x) uniform-over-edges) (or a caller-supplied edge-pair
 * coefficient state), is projected onto the unit-eigenphase slice of the walk
 * intersected with range(BoxBar) — the line spanned by BoxBar|+, sqrt(nu)> —
 * renormalized, unwound with extract_pi, and the target register is sampled.
 * Oracle calls: the single extraction (O^T then O_T^T).
 * @throws Error{ZeroOverlap} if |<psi_0|BoxBar(+, sqrt(nu))>| < 1e-12.
 */
SampleRun algorithm1_exact(const ExperimentConfig& cfg,
                           const std::optional<Vector>& initial_edge_state = {});

/**
 * Phase-estimation sampling: t-bit QPE over the dual walk, post-selected on
 * the zero-phase bin (eigenphase in (-pi/2^t, pi/2^t]).  Reports the
 * post-selection probability, the fidelity of the post-selected state to the
 * exact projection, and the oracle-call audit: (2^t - 1) controlled walk
 * applications, each costing {O_T: 2, O_T_dag: 2, O_A: 2, O_A_dag: 2}, plus
 * the final extraction.
 */
SampleRun algorithm1_qpe(const ExperimentConfig& cfg,
                         const std::optional<Vector>& initial_edge_state = {});

/** One row of the two-well sweep. */
struct SweepPoint {
  double sweep_value = 0.0; ///< beta (or tau / potential scale)
  double delta = 0.0;       ///< spectral gap of the non-lazy chain
  double delta_star = 0.0;  ///< dual-product gap (lazy dual by default)
  double lambda = 0.0;      ///< sqrt(1 - delta_star)
  double angular_gap = 0.0; ///< Delta = acos(lambda)
  double bound = 0.0;       ///< acos(sqrt(1 - delta/2))
  bool bound_holds = false; ///< angular_gap >= bound - 1e-9
};

struct SweepConfig {
  MalaConfig grid;                 ///< defaults: 64-point two-well grid
  std::string variable = "beta";   ///< "beta", "tau", or "scale"
  double from = 1.0;
  double to = 4000.0;
  int points = 13;                 ///< log-spaced sweep grid
  bool lazy = true;                ///< use the lazy Metropolis dual
};

/**
 * Two-well sweep: for each point, the classical gap delta (symmetric
 * discriminant eigensolve), the dual-product gap delta_star (structured
 * Lanczos on the edge space), the angular gap Delta = acos(sqrt(1-delta_star))
 * and the bound acos(sqrt(1-delta/2)).  With the lazy dual the bound is a
 * theorem; every point is checked.
 */
std::vector<SweepPoint> two_well_sweep(const SweepConfig& cfg);

/** Gap summary of a prepared chain. */
struct GapReport {
  double delta = 0.0;        ///< classical spectral gap (non-lazy chain)
  double delta_star = 0.0;   ///< dual-product gap of the configured dual
  double lambda = 0.0;       ///< sqrt(1 - delta_star)
  double angular_gap = 0.0;  ///< acos(lambda)
  double bound = 0.0;        ///< acos(sqrt(1 - delta/2)) (lazy/Glauber theorem)
  bool bound_holds = false;
  double mixing_lower = 0.0; ///< spectral bounds on tau(epsilon)
  double mixing_upper = 0.0;
  double epsilon = 0.01;
  QubitAudit qubits;         ///< for m = ceil(log2 n)
};

GapReport gap_report(const ExperimentConfig& cfg, double epsilon = 0.01);

}  // namespace qmh

#endif  // QMH_EXPERIMENT_HPP
