#ifndef QMH_CHAIN_HPP
#define QMH_CHAIN_HPP

/**
 * @file chain.hpp
 * @brief Finite-state Markov chains: Metropolis-Hastings construction,
 *        stationarity, reversibility, spectral gaps and mixing times.
 *
 * Conventions.  Kernels are row-stochastic matrices acting on distributions
 * from the right (mu' = mu^T P).  A proposal kernel T has zero diagonal and
 * symmetric support {T(x,y) > 0  iff  T(y,x) > 0}.  An acceptance matrix A
 * has entries in [0,1] and zero diagonal; entries off the proposal support
 * are ignored (kept at zero by the constructors here).  The resulting chain
 * is P(x,y) = T(x,y) A(x,y) for x != y with the diagonal absorbing the
 * rejected mass.
 */

#include "qmh/types.hpp"

#include <utility>
#include <vector>

namespace qmh {

/** Total-variation distance (1/2) * l1 between two distributions. */
template <typename DerivedA, typename DerivedB>
double tv_distance(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

/** @throws Error{InvalidArgument} unless pi >= 0 and sums to 1 within tol. */
void validate_probability_vector(const Eigen::Ref<const Vector>& pi,
                                 double tol = Tolerances{}.structural);

/** @throws Error{InvalidArgument} unless K >= 0 with unit row sums within tol. */
void validate_kernel(const Eigen::Ref<const Matrix>& K,
                     double tol = Tolerances{}.structural);

/**
 * Validate a proposal kernel: row-stochastic, zero diagonal, symmetric support.
 * @throws Error{NonzeroDiagonal}   naming the offending state x
 * @throws Error{AsymmetricSupport} naming the offending pair (x,y)
 */
void validate_proposal(const Eigen::Ref<const Matrix>& T,
                       double tol = Tolerances{}.structural);

/**
 * Validate an acceptance matrix against a proposal: entries in [0,1], zero
 * diagonal, and zero off the support of T.
 */
void validate_acceptance(const Eigen::Ref<const Matrix>& A,
                         const Eigen::Ref<const Matrix>& T,
                         double tol = Tolerances{}.structural);

/**
 * Metropolis acceptance  A(x,y) = min(1, pi(y)T(y,x) / (pi(x)T(x,y))).
 * @throws Error{ZeroTargetMass} if some pi(x) <= 0.
 */
Matrix metropolis_acceptance(const Eigen::Ref<const Vector>& pi,
                             const Eigen::Ref<const Matrix>& T);

/**
 * Glauber (heat-bath) acceptance
 * A(x,y) = pi(y)T(y,x) / (pi(x)T(x,y) + pi(y)T(y,x)), which satisfies
 * A(x,y) + A(y,x) = 1 on the proposal support.
 * @throws Error{ZeroTargetMass} if some pi(x) <= 0.
 */
Matrix glauber_acceptance(const Eigen::Ref<const Vector>& pi,
                          const Eigen::Ref<const Matrix>& T);

/**
 * Metropolis-Hastings kernel P(x,y) = T(x,y)A(x,y) for x != y with the
 * rejection mass on the diagonal.
 * @throws Error{NegativeDiagonal} if a diagonal entry falls below -1e-12
 *         (tiny negatives inside the tolerance are clamped to zero).
 */
Matrix mh_kernel(const Eigen::Ref<const Matrix>& T,
                 const Eigen::Ref<const Matrix>& A);

/** Lazy version (1 + P)/2; identical to halving the acceptance matrix. */
Matrix lazy(const Eigen::Ref<const Matrix>& P);

/**
 * Stationary distribution of an ergodic kernel, via the left unit
 * eigenvector cross-checked with 10*ceil(1/delta) power iterations.
 * @throws Error{NotErgodic} if the unit-modulus eigenvalue is not simple.
 */
Vector stationary_distribution(const Eigen::Ref<const Matrix>& P,
                               const Tolerances& tol = {});

/** Detailed balance pi(x)P(x,y) = pi(y)P(y,x) within tol (max abs). */
bool is_reversible(const Eigen::Ref<const Matrix>& P,
                   const Eigen::Ref<const Vector>& pi,
                   double tol = Tolerances{}.reversibility);

/**
 * Symmetric discriminant D(x,y) = sqrt(pi(x)/pi(y)) P(x,y) of a reversible
 * kernel; it is similar to P, so its (real) spectrum is the spectrum of P.
 * @throws Error{NotReversible} naming the pair with the worst detailed-balance
 *         violation.
 */
Matrix discriminant(const Eigen::Ref<const Matrix>& P,
                    const Eigen::Ref<const Vector>& pi,
                    double tol = Tolerances{}.reversibility);

/** Eigenvalues of P sorted by decreasing modulus (ties: decreasing real). */
CVector eigenvalues(const Eigen::Ref<const Matrix>& P);

/**
 * Spectral gap delta = 1 - max{|lambda| : lambda != lambda_max} of an ergodic
 * kernel.  Reversible kernels (w.r.t. their stationary distribution) are
 * routed through the symmetric discriminant for accuracy.
 * @throws Error{NotErgodic} if the unit eigenvalue is not simple.
 */
double spectral_gap(const Eigen::Ref<const Matrix>& P, const Tolerances& tol = {});

/** Same, with the stationary distribution already at hand. */
double spectral_gap(const Eigen::Ref<const Matrix>& P,
                    const Eigen::Ref<const Vector>& pi,
                    const Tolerances& tol = {});

/**
 * Exact mixing time tau(eps) = min{ t : max_x TV(P^t(x,.), pi) <= eps } by
 * iterated multiplication.
 * @param cap hard iteration cap.
 * @throws Error{CapExceeded} if t exceeds `cap` before reaching eps.
 */
int mixing_time(const Eigen::Ref<const Matrix>& P,
                const Eigen::Ref<const Vector>& pi, double eps, int cap = 200000);

/**
 * Spectral mixing-time sandwich for a reversible ergodic chain:
 *   (1/delta - 1) * ln(1/eps)  <=  tau(eps)  <=  (1/delta) * ln(1/(2 eps sqrt(pi_min))).
 *
 * Caveat: the lower bound above is the optimistic form.  What eigenvalue decay
 * actually guarantees is d(t) >= lambda^t / 2, i.e. a lower bound of
 * (1/delta - 1) * ln(1/(2 eps)); brute-force mixing times of fast-mixing
 * chains can undershoot the optimistic form by up to (1/delta - 1) * ln 2.
 */
std::pair<double, double> mixing_bounds(double delta, double pi_min, double eps);

/** Spectral summary of an ergodic kernel. */
struct SpectralReport {
  CVector eigenvalues;      ///< sorted by decreasing modulus
  double delta = 0.0;       ///< spectral gap
  double mixing_lower = 0.0;///< spectral lower bound on tau(eps)
  double mixing_upper = 0.0;///< spectral upper bound on tau(eps)
  int mixing_time = -1;     ///< exact tau(eps) (-1 if the cap was hit)
  double epsilon = 0.0;     ///< accuracy the mixing figures refer to
  std::vector<double> tv_curve;  ///< max_x TV(P^t(x,.), pi) for t = 1,2,...
};

/**
 * Full spectral report at accuracy eps.  The TV curve runs until it falls
 * below eps (or the cap); mixing_time is -1 and no error is raised when the
 * cap is hit, so reports on slowly mixing chains remain usable.
 */
SpectralReport spectral_report(const Eigen::Ref<const Matrix>& P, double eps,
                               int cap = 200000, const Tolerances& tol = {});

}  // namespace qmh

#endif  // QMH_CHAIN_HPP
