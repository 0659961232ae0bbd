#ifndef QMH_WALK_HPP
#define QMH_WALK_HPP

/**
 * @file walk.hpp
 * @brief Step isometries, unitary oracles, Hermitianization, and the
 *        qubitized walk of an edge-space Metropolis-Hastings kernel.
 *
 * Two state-space pictures are used:
 *
 *  - EDGE picture (spectral work): vectors indexed by directed edges
 *    e in S.  The step isometry of a row-stochastic kernel K is
 *    Box |e> = |e> (x) sum_f sqrt(K(e,f)) |f>, and the qubitized walk of the
 *    dual pair lives on C^2 (x) C^{|S|^2}.
 *
 *  - REGISTER picture (oracle/circuit work): four size-d registers
 *    r1..r4 plus a flag slot, basis index
 *        ((((x d + y) d + z) d + t) * 2 + flag,
 *    i.e. r1 most significant, flag least.  The oracle O acts on edge (x,y)
 *    held in (r1,r2) and writes the successor edge into (r3,r4):
 *        O |x,y,0,0,0> = |x,y> (x) sum_z sqrt(T(x,z)(1-A(x,z))) |x,z,0>
 *                                 + sqrt(T(x,z)A(x,z))   |z,x,0>,
 *    a unitary extension of the step isometry of EdgeP.  O* does the same for
 *    EdgeP*.  Register copies and folds use XOR semantics when d is a power
 *    of two (matching the qubit-level CNOT realization) and the mod-d
 *    analogues t <- (t+s) mod d, y <- (y-x+z) mod d otherwise; both satisfy
 *    the identities g(x,x,t) = t and g(x,y,x) = y the constructions rely on.
 */

#include "qmh/dual.hpp"
#include "qmh/types.hpp"

#include <vector>

namespace qmh {

/**
 * Step isometry of a row-stochastic kernel: the k^2 x k matrix with columns
 * |e> -> |e> (x) sum_f sqrt(K(e,f)) |f>.
 */
Matrix step_isometry(const Eigen::Ref<const Matrix>& K);

/**
 * Deterministic unitary completion: orthonormalizes the seed columns by
 * two-pass modified Gram-Schmidt and fills the remaining columns from the
 * canonical basis.  Column j of the result equals seed j for orthonormal
 * seeds (state-preparation unitaries map |j> to seed j).
 * @throws Error{InvalidArgument} if the seeds are linearly dependent.
 */
Matrix unitary_completion(const Eigen::Ref<const Matrix>& seeds, Index dim);

/** Pair swap |a,b> -> |b,a> on C^k (x) C^k. */
Matrix pair_swap(Index k);

/**
 * Proposal oracle O_T on (r_src, r_dst): block-diagonal sum_x |x><x| (x) V_x
 * with V_x |0> = sum_y sqrt(T(x,y)) |y>.  Each V_x is completed from the seed
 * list {sqrt(T(x,.)), e_0, e_1, ...} by modified Gram-Schmidt (deterministic).
 */
Matrix build_O_T(const Eigen::Ref<const Matrix>& T);

/**
 * Acceptance-coin oracle O_A on (r1, r2, coin), coin least significant:
 * for each pair the 2x2 rotation [[sqrt(1-A), -sqrt(A)], [sqrt(A), sqrt(1-A)]]
 * = exp(i theta Y) with theta = -asin(sqrt(A(x,y))).
 */
Matrix build_O_A(const Eigen::Ref<const Matrix>& A);

/**
 * Edge-acceptance oracle on three registers and one ancilla (dim 2 d^3):
 *   |x,y,x>|0> -> sqrt(1-A(x,y)) |x,x,y>|0> + sqrt(A(x,y)) |x,y,x>|0>
 *   |x,x,y>|0> ->     -sqrt(A(x,y)) |x,x,y>|0> + sqrt(1-A(x,y)) |x,y,x>|0>
 * with every other basis state (pairwise distinct, or all equal, or
 * r2 == r3 != r1) fixed and the ancilla always restored to |0>.
 */
Matrix build_O_cal_A(const Eigen::Ref<const Matrix>& A);

/**
 * Adjoint-side edge-acceptance oracle: the register fold
 * |x,y,z> -> |x, fold(x,y,z), y> composed after build_O_cal_A, so that
 *   |z,t,z>|0> -> sqrt(1-A(z,t)) |z,t,z>|0> + sqrt(A(z,t)) |z,t,t>|0>,
 * keeping the edge (z,t) in the first two registers and leaving the accepted
 * tail in the third.  (XOR fold for power-of-two d, mod-d fold otherwise.)
 */
Matrix build_O_cal_A_star(const Eigen::Ref<const Matrix>& A);

/**
 * Walk oracle O = O_cal_A^(r1,r3,r4) O_T^(r1,r3) COPY^(r1->r4) on
 * (r1..r4, flag), dim 2 d^4: a unitary extension of the step isometry of
 * EdgeP (edge in (r1,r2), successor edge in (r3,r4), flag returned to |0>).
 */
Matrix build_O(const Eigen::Ref<const Matrix>& T,
               const Eigen::Ref<const Matrix>& A);

/** Adjoint-side oracle O* = O_T^(r3,r4) O_cal_A*^(r1,r2,r3) COPY^(r1->r3). */
Matrix build_O_star(const Eigen::Ref<const Matrix>& T,
                    const Eigen::Ref<const Matrix>& A);

/** A unitary together with the isometry that frames its encoded block. */
struct Spue {
  Matrix U;   ///< unitary (symmetric for a genuine SPUE)
  Matrix box; ///< isometry; encoded operator = box^T U box
};

/**
 * Hermitianization of a projected unitary encoding (U, box_left, box_right):
 *   U_bar  = (|0><0| (x) U + |1><1| (x) U^T) (X (x) 1)   (block [[0,U],[U^T,0]])
 *   box_bar = |0><0| (x) box_left + |1><1| (x) box_right,
 * so U_bar is symmetric and box_bar^T U_bar box_bar = [[0, A], [A^T, 0]] with
 * A = box_left^T U box_right.
 */
Spue hermitianize(const Eigen::Ref<const Matrix>& U,
                  const Eigen::Ref<const Matrix>& box_left,
                  const Eigen::Ref<const Matrix>& box_right);

/** Qubitized walk W = (2 box box^T - 1) U of a symmetric encoding. */
Matrix qubitized_walk(const Spue& spue);

/**
 * The edge-picture SPUE of the dual pair: U = X (x) pair_swap(|S|) and
 * box = |0><0| (x) Box(EdgeP*) + |1><1| (x) Box(EdgeP), an isometry
 * C^{2|S|} -> C^{2|S|^2}.  Its encoded operator box^T U box equals
 * [[0, M^T], [M, 0]] with M the nu-discriminant of EdgeP, sharing the
 * spectrum of the dilation discriminant D_bar.
 */
Spue dual_walk_spue(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                    const Eigen::Ref<const Matrix>& A);

/** Dense qubitized walk of the dual pair (dim 2|S|^2; small |S| only). */
Matrix dual_walk_unitary(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A);

/** Angular spectral gap report of the dual walk. */
struct WalkSpectrumReport {
  double angular_gap = 0.0;       ///< acos(lambda), lambda from the dilation
  double angular_gap_direct = -1; ///< from eigenphases of W (if materialized)
  double lambda = 0.0;            ///< second-largest |eigenvalue| of D_bar
  double delta_star = 0.0;        ///< 1 - lambda^2
  std::vector<double> phases;     ///< unsigned eigenphases of W (if materialized)
};

/**
 * Angular gap Delta of the dual walk.  For small edge sets (materialize =
 * true) W is built densely and its eigenphases are extracted from the
 * symmetric part (W + W^T)/2 — valid since W is real orthogonal, so its
 * spectrum is exp(+-i theta) pairs plus +-1; the report then carries both the
 * direct angular gap and the dilation-based one (they must agree to 1e-8).
 * For large edge sets only the dilation path runs (Lanczos, O(|S|) memory).
 */
WalkSpectrumReport walk_spectrum(const EdgeSpace& S,
                                 const Eigen::Ref<const Matrix>& T,
                                 const Eigen::Ref<const Matrix>& A,
                                 const Eigen::Ref<const Vector>& nu,
                                 bool materialize, const Tolerances& tol = {});

/**
 * Controlled-swap symmetric encoding on (r1, r2, coin):
 *   U = O_T^T O_A^T S^c O_A O_T  with S^c the coin-controlled register swap.
 * Its (r2, coin) = (0,0) block is the symmetric matrix
 *   D(x,z) = sqrt(P(x,z) P(z,x))   (x != z),   D(x,x) = P(x,x),
 * the discriminant of P = mh_kernel(T, A) whenever (pi, T, A) is reversible.
 * Qubit budget at d = 2^m: 2m + 1.
 */
Matrix cswap_spue_unitary(const Eigen::Ref<const Matrix>& T,
                          const Eigen::Ref<const Matrix>& A);

/** The encoded d x d block <x,0,0| U |z,0,0> of cswap_spue_unitary. */
Matrix cswap_encoded_block(const Eigen::Ref<const Matrix>& T,
                           const Eigen::Ref<const Matrix>& A);

// ---------------------------------------------------------------------------
// Register-picture walk and streaming appliers (gate-level comparison path,
// stationary-state extraction).  These require d = n (every register value a
// valid state), which the power-of-two instances used in circuit tests have.
// ---------------------------------------------------------------------------

/**
 * Apply O (or its adjoint) in place to columns of `state` living on
 * (r1..r4, flag), dim 2 d^4, via its thin factors; never materializes O.
 */
void apply_O(const Eigen::Ref<const Matrix>& T,
             const Eigen::Ref<const Matrix>& A, Eigen::Ref<Matrix> state,
             bool adjoint);

/** Same for O*. */
void apply_O_star(const Eigen::Ref<const Matrix>& T,
                  const Eigen::Ref<const Matrix>& A, Eigen::Ref<Matrix> state,
                  bool adjoint);

/**
 * Apply the register-picture walk W = (2 BoxBar BoxBar^T - 1)(X (x) SWAP) in
 * place to columns of `state` on (herm, r1..r4, flag), dim 4 d^4.  BoxBar is
 * the herm-controlled pair of full-register step isometries (EdgeP* rows on
 * herm=0, EdgeP rows on herm=1) tensored with flag |0>; applied through the
 * thin (4 d^4 x 2 d^2) isometry, never materializing the walk.
 */
void apply_walk_register(const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A,
                         Eigen::Ref<Matrix> state);

/** Dense register-picture walk (dim 4 d^4; small d only). */
Matrix walk_register_unitary(const Eigen::Ref<const Matrix>& T,
                             const Eigen::Ref<const Matrix>& A);

/**
 * Embed an edge-picture walk state (C^2 (x) C^{|S|^2}) into the register
 * picture (herm, r1..r4, flag), dim 4 d^4, via
 * |h>|e,f> -> |h>|x_e,y_e,x_f,y_f>|0>.
 */
Vector embed_edge_pair_state(const EdgeSpace& S,
                             const Eigen::Ref<const Vector>& edge_state,
                             Index d);

/** Result of unwinding the fixed walk state back to the target register. */
struct Extraction {
  Vector state;          ///< final register state (herm, r1..r4, flag)
  Vector pi_amplitudes;  ///< amplitudes on r1; all other registers |0>, herm |+>
  double fidelity = 0.0; ///< overlap^2 with |+>|pi^(1/2)>|0,0,0>
};

/**
 * Unwind the stationary walk state: applies the herm-controlled register
 * swap, then O^T (flag attached and returned to |0>), then O_T^T on (r1,r2).
 * On input BoxBar(|+> (x) |sqrt(nu)>) the output is |+>|sqrt(pi)>|0,0,0> and
 * fidelity = 1 up to roundoff.
 *
 * @param walk_state  register-picture state on (herm, r1..r4, flag),
 *                    dim 4 d^4.
 * @param pi          target distribution the fidelity is measured against.
 * @param strict      when true, fidelity < 1 - 1e-6 raises
 *                    Error{NotStationaryInput}.
 */
Extraction extract_pi(const Eigen::Ref<const Vector>& walk_state,
                      const Eigen::Ref<const Matrix>& T,
                      const Eigen::Ref<const Matrix>& A,
                      const Eigen::Ref<const Vector>& pi, bool strict = false);

}  // namespace qmh

#endif  // QMH_WALK_HPP
