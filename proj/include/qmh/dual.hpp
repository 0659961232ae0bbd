#ifndef QMH_DUAL_HPP
#define QMH_DUAL_HPP

/**
 * @file dual.hpp
 * @brief Edge-space ("dual") kernels of a Metropolis-Hastings chain.
 *
 * The directed edge set of a proposal T is S = {(x,y) : T(x,y) > 0} in
 * lexicographic order.  On S the chain splits into a proposal step
 *     EdgeT((x,y),(z,t)) = [x==z] T(x,t)
 * and an acceptance step
 *     EdgeA((x,y),(y,x)) = A(x,y),   EdgeA((x,y),(x,y)) = 1 - A(x,y),
 * giving the dual kernel  EdgeP = EdgeT * EdgeA  and its measure-adjoint
 * EdgeP* = EdgeA * EdgeT, both stationary for nu(x,y) = pi(x)T(x,y).
 * The product EdgeP EdgeP* and the two-block dilation of (EdgeP, EdgeP*)
 * control the angular spectral gap of the quantized walk.
 */

#include "qmh/types.hpp"

#include <utility>
#include <vector>

namespace qmh {

/** Directed edge set of a proposal kernel, in lexicographic order. */
struct EdgeSpace {
  Index n = 0;                                ///< number of states
  std::vector<std::pair<Index, Index>> edges; ///< (x,y) with T(x,y) > 0
  Eigen::MatrixXi edge_index;                 ///< n x n; -1 off the edge set

  Index size() const { return static_cast<Index>(edges.size()); }

  /** Index of edge (x,y). @throws Error{InputOffEdgeSet} if absent. */
  Index index(Index x, Index y) const;

  /** Index of the reversed edge. */
  Index reverse(Index e) const {
    return index(edges[e].second, edges[e].first);
  }
};

/** Build the edge space of a validated proposal kernel. */
EdgeSpace edge_space(const Eigen::Ref<const Matrix>& T);

/**
 * Stationary edge measure nu(x,y) = pi(x) T(x,y), normalized by construction.
 * Its first marginal is pi.
 */
Vector edge_measure(const EdgeSpace& S, const Eigen::Ref<const Vector>& pi,
                    const Eigen::Ref<const Matrix>& T);

/** Edge-space proposal step EdgeT (row-stochastic |S| x |S|, idempotent). */
Matrix dual_proposal(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T);

/** Edge-space acceptance step EdgeA (block 2x2 per edge pair). */
Matrix dual_acceptance(const EdgeSpace& S, const Eigen::Ref<const Matrix>& A);

/** The dual kernel, its nu-adjoint, and the symmetrized product. */
struct DualKernels {
  Matrix P;      ///< EdgeT * EdgeA
  Matrix P_star; ///< EdgeA * EdgeT  (adjoint of P w.r.t. nu)
  Matrix TAT;    ///< EdgeT * EdgeA * EdgeT (spectrum = spectrum(P) + zeros)
};

DualKernels dual_kernels(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A);

/** Which chain the dual operators are built from. */
enum class DualMode {
  Glauber,     ///< acceptance used as given (heat-bath chains)
  LazyGeneral, ///< acceptance halved first (dual of the lazy chain (1+P)/2)
};

struct DeltaStarReport {
  double delta_star = 0.0;    ///< 1 - lambda_2(EdgeP EdgeP*)
  double lambda = 0.0;        ///< sqrt(1 - delta_star) = second singular value
  Index product_dimension = 0;///< |S|
};

/**
 * Spectral gap of EdgeP EdgeP*.  In LazyGeneral mode the acceptance matrix is
 * halved before the dual operators are formed; delta_star then refers to the
 * dual of the lazy chain.
 * @throws Error{NotErgodicProduct} if the unit eigenvalue of EdgeP EdgeP* is
 *         not simple (e.g. non-lazy Metropolis with uniform target and
 *         symmetric proposal, where EdgeA^2 = 1).
 */
DeltaStarReport delta_star(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                           const Eigen::Ref<const Matrix>& A, DualMode mode,
                           const Tolerances& tol = {});

/**
 * Two-block dilation of the dual pair and its discriminant.
 *
 * P_bar = [[0, EdgeP], [EdgeP*, 0]] is stationary and reversible for the
 * doubled measure (nu, nu)/2; its discriminant w.r.t. that measure is
 *   D_bar = [[0, M], [M^T, 0]],  M = diag(sqrt(nu)) EdgeP diag(1/sqrt(nu)),
 * whose spectrum is the symmetric set { +-singular values of M }.  The
 * vectors (sqrt(nu), +-sqrt(nu))/sqrt(2) are always +-1 eigenvectors, and
 * lambda = the largest singular value of M below 1 = sqrt(1 - delta_star).
 */
struct Dilation {
  Matrix P_bar;   ///< 2|S| x 2|S| block kernel
  Matrix D_bar;   ///< symmetric discriminant of P_bar
  Vector weights; ///< the doubled measure (nu, nu)/2
  double lambda;  ///< second-largest |eigenvalue| of D_bar
};

Dilation dilation(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                  const Eigen::Ref<const Matrix>& A,
                  const Eigen::Ref<const Vector>& nu, const Tolerances& tol = {});

/**
 * Second singular value of M = diag(sqrt(nu)) EdgeP diag(1/sqrt(nu)) by
 * Lanczos iteration on M^T M - sqrt(nu) sqrt(nu)^T with structured O(|S|)
 * matvecs; never materializes an |S| x |S| matrix.  Suitable for the n = 64
 * two-well sweep (|S| = 4032).  The exact known top pair (1, sqrt(nu)) is
 * verified before deflation.
 *
 * @return {lambda, delta_star = 1 - lambda^2} packed in a DeltaStarReport.
 */
DeltaStarReport dual_second_singular_value(const EdgeSpace& S,
                                           const Eigen::Ref<const Matrix>& T,
                                           const Eigen::Ref<const Matrix>& A,
                                           const Eigen::Ref<const Vector>& nu,
                                           double tol = 1e-12, int max_iter = 600);

}  // namespace qmh

#endif  // QMH_DUAL_HPP
