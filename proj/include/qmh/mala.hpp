#ifndef QMH_MALA_HPP
#define QMH_MALA_HPP

/**
 * @file mala.hpp
 * @brief Discretized Metropolis-adjusted Langevin proposals on a periodic
 *        grid, and the arithmetic circuits that realize them.
 *
 * The grid has n = 2^bits points x_i = lo + i h, h = (hi - lo)/n (hi is
 * identified with lo).  The target is pi ~ exp(-beta U) and the Langevin
 * proposal from x is a wrapped Gaussian with mean x - tau beta U'(x) and
 * variance 2 tau; U' uses periodic central differences.  On the quantum side
 * the proposal splits as O_T = U_drift O_g: O_g prepares the zero-centred
 * Gaussian amplitude profile, U_drift shifts it by the integer-rounded drift.
 * The rounding is surfaced as a reported total-variation distance between the
 * quantum and classical proposal rows, never hidden.
 */

#include "qmh/gates.hpp"
#include "qmh/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qmh {

/** Potential on the grid: either a named analytic form or a value table. */
struct FunctionSpec {
  std::string name = "two_well";  ///< "two_well" or "table"
  std::vector<double> values;     ///< used when name == "table"
};

/** Configuration of a discretized Langevin chain. */
struct MalaConfig {
  int bits = 6;          ///< grid size n = 2^bits
  double lo = -1.0;      ///< interval start
  double hi = 1.0;       ///< interval end (identified with lo)
  double tau = 0.1;      ///< Langevin step size (proposal variance 2 tau)
  double beta = 1.0;     ///< inverse temperature
  FunctionSpec potential;///< potential U

  Index n() const { return Index(1) << bits; }
  double h() const { return (hi - lo) / static_cast<double>(n()); }
  double position(Index i) const { return lo + static_cast<double>(i) * h(); }
};

/**
 * Two-well potential U(x) = (x^4 - x^2)/32 on [-1, 1): minima at
 * x = +-1/sqrt(2) with depth -1/128, continuous across the periodic seam
 * (U(-1) = U(1) = 0).
 */
double two_well(double x);

/** Potential values on the grid (analytic form or table). */
Vector potential_values(const MalaConfig& cfg);

/** Periodic central-difference gradient of the potential on the grid. */
Vector potential_gradient(const MalaConfig& cfg);

/** Boltzmann target pi_i ~ exp(-beta U(x_i)), normalized. */
Vector boltzmann_target(const MalaConfig& cfg);

/**
 * Unnormalized wrapped Gaussian density exp(-wrap(x - mean)^2 / (2 sigma^2))
 * summed over periodic images, evaluated at every grid point.  Shared by the
 * classical proposal rows and the quantum amplitude profile.
 */
Vector wrapped_gaussian_density(const MalaConfig& cfg, double mean,
                                double sigma2);

/**
 * Classical MALA proposal: row x is the wrapped Gaussian with mean
 * x - tau beta U'(x) and variance 2 tau, diagonal zeroed, renormalized.
 * @throws Error{DegenerateRow} if a row has (numerically) zero mass after
 *         zeroing the diagonal.
 */
Matrix mala_proposal(const MalaConfig& cfg);

/**
 * Zero-centred Gaussian amplitude state g with g_j = sqrt(rho_j / sum rho),
 * rho the wrapped density with variance 2 tau around grid position 0.
 * Squares match the (pre-diagonal-zeroing) proposal row of a flat potential.
 */
Vector gaussian_state(const MalaConfig& cfg);

/** Diagonal phase unitary V_f = diag(e^{2 pi i f(x)/n}) for integer table f. */
CMatrix diagonal_phase(const std::vector<long>& f, Index n);

/** Policy for non-integer drift shifts (in units of grid steps). */
enum class ShiftPolicy {
  Round,  ///< round to nearest integer (default; discrepancy reported via TV)
  Strict, ///< raise Error{NonIntegerShift} when off-integer beyond 1e-9
};

/** Integer shift table s(x) = round(tau beta U'(x)/h) (policy applied). */
std::vector<long> grad_shift(const MalaConfig& cfg,
                             ShiftPolicy policy = ShiftPolicy::Round);

/**
 * Shift permutation U_f |x, y> = |x, y + f(x) mod n>, the unitary realized by
 * phase estimation of V_f on the second register.
 */
Matrix shift_operator(const std::vector<long>& f, Index n);

/**
 * Phase-estimation realization of the shift: (1 (x) QFT^dag) times the
 * f(x)-fold controlled phase times (1 (x) QFT), with
 * QFT|y> = n^{-1/2} sum_j e^{+2 pi i j y / n} |j>.  Equal to
 * shift_operator(f, n) exactly; exposed for the circuit-identity tests.
 */
CMatrix shift_operator_qpe(const std::vector<long>& f, Index n);

/** Proposal-oracle report: amplitudes, unitary factors, and the TV audit. */
struct MalaProposalOracle {
  Matrix O_T;            ///< n^2 x n^2 unitary U_drift (1 (x) G)
  Matrix quantum_rows;   ///< |<y|O_T|x,0>|^2 as rows (the realized proposal)
  double max_row_tv;     ///< max_x TV(quantum row x, classical row x)
  double tolerance;      ///< configured acceptance threshold for the TV audit
  bool within_tolerance; ///< max_row_tv <= tolerance
};

/**
 * Quantum proposal oracle O_T = U_drift (1 (x) G) with G the Gaussian
 * preparation (Gram-Schmidt completion of gaussian_state) and U_drift the
 * rounded-drift shift.  The report carries the max row TV distance to
 * mala_proposal(cfg); the default tolerance (1e-6) flags any visible
 * rounding, which the two-well defaults do exhibit (drift below half a grid
 * step rounds to zero) — the figure is reported, not asserted.
 */
MalaProposalOracle mala_O_T(const MalaConfig& cfg, double tolerance = 1e-6);

/**
 * Diagonalized acceptance-coin circuit: O_A = (S H) e^{i theta(x,y) Z} (H S^dag)
 * on the coin, theta = -asin(sqrt(A(x,y))), with S = Phase(pi/2).  Returns the
 * gate sequence on layout coin(m); its dense matrix equals build_O_A(A).
 */
GateSequence diagonalize_O_A(int m, const Eigen::Ref<const Matrix>& A);

}  // namespace qmh

#endif  // QMH_MALA_HPP
