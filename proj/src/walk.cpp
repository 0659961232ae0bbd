#include "qmh/walk.hpp"

#include "qmh/chain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace qmh {

namespace {

bool is_power_of_two(Index d) { return d > 0 && (d & (d - 1)) == 0; }

/** Digit of basis index i at the register with the given stride. */
inline Index digit(Index i, Index stride, Index d) { return (i / stride) % d; }

/** Register addition t <- t (+) s: XOR for power-of-two d, mod-d otherwise. */
inline Index reg_add(Index t, Index s, Index d, bool xor_mode) {
  return xor_mode ? (t ^ s) : (t + s) % d;
}

inline Index reg_sub(Index t, Index s, Index d, bool xor_mode) {
  return xor_mode ? (t ^ s) : (((t - s) % d) + d) % d;
}

/** Three-register fold g(x,y,z) with g(x,x,t) = t and g(x,y,x) = y. */
inline Index fold3(Index x, Index y, Index z, Index d, bool xor_mode) {
  return xor_mode ? (x ^ y ^ z) : (((y - x + z) % d) + d) % d;
}

/** Inverse of the fold in its last argument: h with g(x,h,?) ... see below. */
inline Index fold3_inv(Index x, Index u, Index v, Index d, bool xor_mode) {
  // forward permutation: (x,y,z) -> (x, u = g(x,y,z), v = y); the inverse
  // recovers z = x (+) u (-) v.
  return xor_mode ? (x ^ u ^ v) : (((u - v + x) % d) + d) % d;
}

/** Apply a basis permutation dest[i] = image of i to the rows of state. */
void apply_permutation(Eigen::Ref<Matrix> state, const std::vector<Index>& dest) {
  Matrix tmp = state;
  for (Index i = 0; i < state.rows(); ++i) state.row(dest[i]) = tmp.row(i);
}

template <class MapFn>
void run_permutation(Eigen::Ref<Matrix> state, MapFn&& map) {
  std::vector<Index> dest(static_cast<size_t>(state.rows()));
  for (Index i = 0; i < state.rows(); ++i) dest[static_cast<size_t>(i)] = map(i);
  apply_permutation(state, dest);
}

void require_square_pair(const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A) {
  if (T.rows() != T.cols() || A.rows() != T.rows() || A.cols() != T.cols())
    throw Error(Error::Code::InvalidArgument,
                "proposal and acceptance matrices must be square and of equal size");
}

void require_rows(const Eigen::Ref<const Matrix>& state, Index expected,
                  const char* what) {
  if (state.rows() != expected)
    throw Error(Error::Code::LayoutMismatch,
                std::string(what) + ": state has " + std::to_string(state.rows()) +
                    " rows, expected " + std::to_string(expected));
}

/** Per-source blocks V_x of O_T, with V_x |0> = sum_y sqrt(T(x,y)) |y>. */
std::vector<Matrix> proposal_blocks(const Eigen::Ref<const Matrix>& T) {
  const Index d = T.rows();
  std::vector<Matrix> V;
  V.reserve(static_cast<size_t>(d));
  for (Index x = 0; x < d; ++x) {
    Matrix seed = T.row(x).transpose().cwiseMax(0.0).cwiseSqrt();
    const double norm = seed.norm();
    if (norm < 1e-12)
      throw Error(Error::Code::InvalidArgument,
                  "proposal row " + std::to_string(x) + " is zero");
    seed /= norm;
    V.push_back(unitary_completion(seed, d));
  }
  return V;
}

/**
 * Apply O_T (block sum_x |x><x| (x) V_x over the src/dst register pair) to
 * the dst fiber of every basis configuration.
 */
void apply_proposal(const std::vector<Matrix>& V, Eigen::Ref<Matrix> state,
                    Index d, Index s_src, Index s_dst, bool adjoint) {
  const Index n = state.rows();
  Matrix fiber(d, state.cols());
  for (Index base = 0; base < n; ++base) {
    if (digit(base, s_dst, d) != 0) continue;
    const Matrix& Vx = V[static_cast<size_t>(digit(base, s_src, d))];
    for (Index k = 0; k < d; ++k) fiber.row(k) = state.row(base + k * s_dst);
    if (adjoint)
      fiber = Vx.transpose() * fiber;
    else
      fiber = Vx * fiber;
    for (Index k = 0; k < d; ++k) state.row(base + k * s_dst) = fiber.row(k);
  }
}

/**
 * Edge-acceptance oracle on three role registers (strides s1, s2, s3) and a
 * flag slot (stride s_flag, dimension 2).  Factors, applied left to right:
 *
 *   G1  flip flag if val(1) == val(2)
 *   G2  swap registers 2,3 if flag == 1
 *   G3  rotate flag by [[sqrt(1-a), -sqrt(a)], [sqrt(a), sqrt(1-a)]],
 *       a = A(val(1), val(2)), if val(3) == val(1)
 *   G4  swap registers 2,3 if flag == 0
 *   G5  flip flag if val(1) == val(3)
 *   G6  swap registers 2,3 if flag == 0 and val(1), val(2), val(3) are
 *       pairwise distinct (restores the untouched-tail states G4 displaced;
 *       the distinctness predicate is swap-invariant, so this is a valid
 *       permutation)
 *
 * Every factor is orthogonal; G1, G2, G4, G5, G6 are involutions, so the
 * adjoint reverses the order and transposes the rotation.
 */
void apply_edge_acceptance(const Eigen::Ref<const Matrix>& A,
                           Eigen::Ref<Matrix> state, Index d, Index s1,
                           Index s2, Index s3, Index s_flag, bool adjoint) {
  const Index n = state.rows();

  auto flag_of = [&](Index i) { return digit(i, s_flag, 2); };
  auto flip_if = [&](auto&& pred) {
    run_permutation(state, [&](Index i) {
      return pred(i) ? (flag_of(i) ? i - s_flag : i + s_flag) : i;
    });
  };
  auto swap23_if = [&](auto&& pred) {
    run_permutation(state, [&](Index i) {
      if (!pred(i)) return i;
      const Index b = digit(i, s2, d), c = digit(i, s3, d);
      return i + (c - b) * s2 + (b - c) * s3;
    });
  };
  auto rotate = [&](bool adj) {
    for (Index base = 0; base < n; ++base) {
      if (flag_of(base) != 0) continue;
      const Index x = digit(base, s1, d);
      if (digit(base, s3, d) != x) continue;
      const double a = std::clamp(A(x, digit(base, s2, d)), 0.0, 1.0);
      const double c = std::sqrt(1.0 - a), s = adj ? -std::sqrt(a) : std::sqrt(a);
      const auto v0 = state.row(base).eval();
      const auto v1 = state.row(base + s_flag).eval();
      state.row(base) = c * v0 - s * v1;
      state.row(base + s_flag) = s * v0 + c * v1;
    }
  };

  auto g1 = [&] { flip_if([&](Index i) { return digit(i, s1, d) == digit(i, s2, d); }); };
  auto g2 = [&] { swap23_if([&](Index i) { return flag_of(i) == 1; }); };
  auto g4 = [&] { swap23_if([&](Index i) { return flag_of(i) == 0; }); };
  auto g5 = [&] { flip_if([&](Index i) { return digit(i, s1, d) == digit(i, s3, d); }); };
  auto g6 = [&] {
    swap23_if([&](Index i) {
      if (flag_of(i) != 0) return false;
      const Index x = digit(i, s1, d), y = digit(i, s2, d), z = digit(i, s3, d);
      return x != y && y != z && x != z;
    });
  };

  if (!adjoint) {
    g1();
    g2();
    rotate(false);
    g4();
    g5();
    g6();
  } else {
    g6();
    g5();
    g4();
    rotate(true);
    g2();
    g1();
  }
}

/** Fold permutation (x,y,z) -> (x, g(x,y,z), y) over three role registers. */
void apply_fold(Eigen::Ref<Matrix> state, Index d, Index s1, Index s2,
                Index s3, bool adjoint) {
  const bool xor_mode = is_power_of_two(d);
  run_permutation(state, [&](Index i) {
    const Index x = digit(i, s1, d), y = digit(i, s2, d), z = digit(i, s3, d);
    Index new2, new3;
    if (!adjoint) {
      new2 = fold3(x, y, z, d, xor_mode);
      new3 = y;
    } else {
      new2 = z;
      new3 = fold3_inv(x, y, z, d, xor_mode);
    }
    return i + (new2 - y) * s2 + (new3 - z) * s3;
  });
}

/** Register copy dst <- dst (+) src (adjoint: dst <- dst (-) src). */
void apply_copy(Eigen::Ref<Matrix> state, Index d, Index s_src, Index s_dst,
                bool adjoint) {
  const bool xor_mode = is_power_of_two(d);
  run_permutation(state, [&](Index i) {
    const Index s = digit(i, s_src, d), t = digit(i, s_dst, d);
    const Index nt = adjoint ? reg_sub(t, s, d, xor_mode) : reg_add(t, s, d, xor_mode);
    return i + (nt - t) * s_dst;
  });
}

struct WalkStrides {
  Index d, s1, s2, s3, s4, flag, dim;
};

WalkStrides walk_strides(Index d) {
  WalkStrides w;
  w.d = d;
  w.flag = 1;
  w.s4 = 2;
  w.s3 = 2 * d;
  w.s2 = 2 * d * d;
  w.s1 = 2 * d * d * d;
  w.dim = 2 * d * d * d * d;
  return w;
}

/** Thin full-register step isometry of EdgeP: (2 d^4) x d^2, column (x,y). */
Matrix box_full_forward(const Eigen::Ref<const Matrix>& T,
                        const Eigen::Ref<const Matrix>& A) {
  const Index d = T.rows();
  const WalkStrides w = walk_strides(d);
  Matrix B = Matrix::Zero(w.dim, d * d);
  auto idx = [&](Index x, Index y, Index z, Index t) {
    return x * w.s1 + y * w.s2 + z * w.s3 + t * w.s4;
  };
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) {
      const Index col = x * d + y;
      for (Index z = 0; z < d; ++z) {
        const double p = T(x, z);
        if (p <= 0) continue;
        const double a = std::clamp(A(x, z), 0.0, 1.0);
        B(idx(x, y, x, z), col) += std::sqrt(p * (1.0 - a));
        B(idx(x, y, z, x), col) += std::sqrt(p * a);
      }
    }
  return B;
}

/** Thin full-register step isometry of EdgeP*: column (z,t). */
Matrix box_full_adjoint_side(const Eigen::Ref<const Matrix>& T,
                             const Eigen::Ref<const Matrix>& A) {
  const Index d = T.rows();
  const WalkStrides w = walk_strides(d);
  Matrix B = Matrix::Zero(w.dim, d * d);
  auto idx = [&](Index x, Index y, Index z, Index t) {
    return x * w.s1 + y * w.s2 + z * w.s3 + t * w.s4;
  };
  for (Index z = 0; z < d; ++z)
    for (Index t = 0; t < d; ++t) {
      const Index col = z * d + t;
      const double a = (z == t) ? 0.0 : std::clamp(A(z, t), 0.0, 1.0);
      for (Index y = 0; y < d; ++y) {
        const double keep = (1.0 - a) * T(z, y);
        if (keep > 0) B(idx(z, t, z, y), col) += std::sqrt(keep);
        const double move = a * T(t, y);
        if (move > 0) B(idx(z, t, t, y), col) += std::sqrt(move);
      }
    }
  return B;
}

}  // namespace

Matrix unitary_completion(const Eigen::Ref<const Matrix>& seeds, Index dim) {
  Matrix Q(dim, dim);
  Index cols = 0;
  auto push = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < cols; ++j) v -= Q.col(j).dot(v) * Q.col(j);
    const double norm = v.norm();
    if (norm < 1e-8) return false;
    Q.col(cols++) = v / norm;
    return true;
  };
  for (Index j = 0; j < seeds.cols(); ++j)
    if (!push(seeds.col(j)))
      throw Error(Error::Code::InvalidArgument,
                  "unitary completion: seed columns are linearly dependent");
  for (Index k = 0; k < dim && cols < dim; ++k) push(Vector::Unit(dim, k));
  return Q;
}

Matrix step_isometry(const Eigen::Ref<const Matrix>& K) {
  const Index k = K.rows();
  if (K.cols() != k)
    throw Error(Error::Code::InvalidArgument, "step isometry needs a square kernel");
  Matrix box = Matrix::Zero(k * k, k);
  for (Index e = 0; e < k; ++e)
    for (Index f = 0; f < k; ++f)
      if (K(e, f) > 0) box(e * k + f, e) = std::sqrt(K(e, f));
  return box;
}

Matrix pair_swap(Index k) {
  Matrix S = Matrix::Zero(k * k, k * k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) S(b * k + a, a * k + b) = 1.0;
  return S;
}

Matrix build_O_T(const Eigen::Ref<const Matrix>& T) {
  const Index d = T.rows();
  if (T.cols() != d)
    throw Error(Error::Code::InvalidArgument, "proposal oracle needs a square kernel");
  const std::vector<Matrix> V = proposal_blocks(T);
  Matrix O = Matrix::Zero(d * d, d * d);
  for (Index x = 0; x < d; ++x)
    O.block(x * d, x * d, d, d) = V[static_cast<size_t>(x)];
  return O;
}

Matrix build_O_A(const Eigen::Ref<const Matrix>& A) {
  const Index d = A.rows();
  if (A.cols() != d)
    throw Error(Error::Code::InvalidArgument, "acceptance oracle needs a square matrix");
  Matrix O = Matrix::Zero(2 * d * d, 2 * d * d);
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) {
      const double a = std::clamp(A(x, y), 0.0, 1.0);
      const double c = std::sqrt(1.0 - a), s = std::sqrt(a);
      const Index base = (x * d + y) * 2;
      O(base, base) = c;
      O(base, base + 1) = -s;
      O(base + 1, base) = s;
      O(base + 1, base + 1) = c;
    }
  return O;
}

Matrix build_O_cal_A(const Eigen::Ref<const Matrix>& A) {
  const Index d = A.rows();
  if (A.cols() != d)
    throw Error(Error::Code::InvalidArgument, "acceptance oracle needs a square matrix");
  const Index dim = 2 * d * d * d;
  Matrix M = Matrix::Identity(dim, dim);
  apply_edge_acceptance(A, M, d, 2 * d * d, 2 * d, 2, 1, false);
  return M;
}

Matrix build_O_cal_A_star(const Eigen::Ref<const Matrix>& A) {
  const Index d = A.rows();
  if (A.cols() != d)
    throw Error(Error::Code::InvalidArgument, "acceptance oracle needs a square matrix");
  const Index dim = 2 * d * d * d;
  Matrix M = Matrix::Identity(dim, dim);
  apply_edge_acceptance(A, M, d, 2 * d * d, 2 * d, 2, 1, false);
  apply_fold(M, d, 2 * d * d, 2 * d, 2, false);
  return M;
}

void apply_O(const Eigen::Ref<const Matrix>& T, const Eigen::Ref<const Matrix>& A,
             Eigen::Ref<Matrix> state, bool adjoint) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  require_rows(state, w.dim, "apply_O");
  const std::vector<Matrix> V = proposal_blocks(T);
  if (!adjoint) {
    apply_copy(state, w.d, w.s1, w.s4, false);
    apply_proposal(V, state, w.d, w.s1, w.s3, false);
    apply_edge_acceptance(A, state, w.d, w.s1, w.s3, w.s4, w.flag, false);
  } else {
    apply_edge_acceptance(A, state, w.d, w.s1, w.s3, w.s4, w.flag, true);
    apply_proposal(V, state, w.d, w.s1, w.s3, true);
    apply_copy(state, w.d, w.s1, w.s4, true);
  }
}

void apply_O_star(const Eigen::Ref<const Matrix>& T,
                  const Eigen::Ref<const Matrix>& A, Eigen::Ref<Matrix> state,
                  bool adjoint) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  require_rows(state, w.dim, "apply_O_star");
  const std::vector<Matrix> V = proposal_blocks(T);
  if (!adjoint) {
    apply_copy(state, w.d, w.s1, w.s3, false);
    apply_edge_acceptance(A, state, w.d, w.s1, w.s2, w.s3, w.flag, false);
    apply_fold(state, w.d, w.s1, w.s2, w.s3, false);
    apply_proposal(V, state, w.d, w.s3, w.s4, false);
  } else {
    apply_proposal(V, state, w.d, w.s3, w.s4, true);
    apply_fold(state, w.d, w.s1, w.s2, w.s3, true);
    apply_edge_acceptance(A, state, w.d, w.s1, w.s2, w.s3, w.flag, true);
    apply_copy(state, w.d, w.s1, w.s3, true);
  }
}

Matrix build_O(const Eigen::Ref<const Matrix>& T,
               const Eigen::Ref<const Matrix>& A) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  Matrix O = Matrix::Identity(w.dim, w.dim);
  apply_O(T, A, O, false);
  return O;
}

Matrix build_O_star(const Eigen::Ref<const Matrix>& T,
                    const Eigen::Ref<const Matrix>& A) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  Matrix O = Matrix::Identity(w.dim, w.dim);
  apply_O_star(T, A, O, false);
  return O;
}

Spue hermitianize(const Eigen::Ref<const Matrix>& U,
                  const Eigen::Ref<const Matrix>& box_left,
                  const Eigen::Ref<const Matrix>& box_right) {
  const Index dim = U.rows();
  if (U.cols() != dim || box_left.rows() != dim || box_right.rows() != dim)
    throw Error(Error::Code::InvalidArgument,
                "hermitianization: operator and isometries must share the row space");
  Spue out;
  out.U = Matrix::Zero(2 * dim, 2 * dim);
  out.U.topRightCorner(dim, dim) = U;
  out.U.bottomLeftCorner(dim, dim) = U.transpose();
  out.box = Matrix::Zero(2 * dim, box_left.cols() + box_right.cols());
  out.box.topLeftCorner(dim, box_left.cols()) = box_left;
  out.box.bottomRightCorner(dim, box_right.cols()) = box_right;
  return out;
}

Matrix qubitized_walk(const Spue& spue) {
  const Index dim = spue.U.rows();
  if (spue.box.rows() != dim)
    throw Error(Error::Code::InvalidArgument,
                "qubitized walk: isometry rows must match the unitary");
  Matrix refl = 2.0 * (spue.box * spue.box.transpose());
  refl.diagonal().array() -= 1.0;
  return refl * spue.U;
}

Spue dual_walk_spue(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                    const Eigen::Ref<const Matrix>& A) {
  const DualKernels K = dual_kernels(S, T, A);
  return hermitianize(pair_swap(S.size()), step_isometry(K.P_star),
                      step_isometry(K.P));
}

Matrix dual_walk_unitary(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A) {
  return qubitized_walk(dual_walk_spue(S, T, A));
}

WalkSpectrumReport walk_spectrum(const EdgeSpace& S,
                                 const Eigen::Ref<const Matrix>& T,
                                 const Eigen::Ref<const Matrix>& A,
                                 const Eigen::Ref<const Vector>& nu,
                                 bool materialize, const Tolerances& tol) {
  WalkSpectrumReport rep;
  // Dense eigensolve of the 2|S| dilation while affordable, structured
  // Lanczos beyond that.
  if (S.size() <= 700)
    rep.lambda = dilation(S, T, A, nu, tol).lambda;
  else
    rep.lambda = dual_second_singular_value(S, T, A, nu).lambda;
  rep.delta_star = std::max(0.0, 1.0 - rep.lambda * rep.lambda);
  rep.angular_gap = std::acos(std::clamp(rep.lambda, -1.0, 1.0));

  if (materialize) {
    const Matrix W = dual_walk_unitary(S, T, A);
    // W is real orthogonal: its spectrum is conjugate pairs exp(+-i theta)
    // plus real +-1, so the eigenvalues of (W + W^T)/2 are exactly the
    // cosines and the unsigned phases recover the spectrum.
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (W + W.transpose()));
    if (es.info() != Eigen::Success)
      throw Error(Error::Code::InvalidArgument,
                  "walk spectrum: symmetric eigensolver failed");
    rep.phases.reserve(static_cast<size_t>(es.eigenvalues().size()));
    constexpr double kPhaseZero = 1e-6;
    double min_phase = std::numbers::pi;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double theta = std::acos(std::clamp(es.eigenvalues()[i], -1.0, 1.0));
      rep.phases.push_back(theta);
      if (theta > kPhaseZero) min_phase = std::min(min_phase, theta);
    }
    std::sort(rep.phases.begin(), rep.phases.end());
    rep.angular_gap_direct = min_phase;
  }
  return rep;
}

Matrix cswap_spue_unitary(const Eigen::Ref<const Matrix>& T,
                          const Eigen::Ref<const Matrix>& A) {
  require_square_pair(T, A);
  const Index d = T.rows();
  const Index dim = 2 * d * d;
  const Index s1 = 2 * d, s2 = 2;
  const std::vector<Matrix> V = proposal_blocks(T);

  Matrix U = Matrix::Identity(dim, dim);
  auto coin_rotation = [&](bool adj) {
    for (Index base = 0; base < dim; base += 2) {
      const double a =
          std::clamp(A(digit(base, s1, d), digit(base, s2, d)), 0.0, 1.0);
      const double c = std::sqrt(1.0 - a), s = adj ? -std::sqrt(a) : std::sqrt(a);
      const auto v0 = U.row(base).eval();
      const auto v1 = U.row(base + 1).eval();
      U.row(base) = c * v0 - s * v1;
      U.row(base + 1) = s * v0 + c * v1;
    }
  };

  apply_proposal(V, U, d, s1, s2, false);
  coin_rotation(false);
  run_permutation(U, [&](Index i) {  // coin-controlled register swap
    if (digit(i, 1, 2) == 0) return i;
    const Index x = digit(i, s1, d), y = digit(i, s2, d);
    return i + (y - x) * s1 + (x - y) * s2;
  });
  coin_rotation(true);
  apply_proposal(V, U, d, s1, s2, true);
  return U;
}

Matrix cswap_encoded_block(const Eigen::Ref<const Matrix>& T,
                           const Eigen::Ref<const Matrix>& A) {
  const Matrix U = cswap_spue_unitary(T, A);
  const Index d = T.rows();
  Matrix D(d, d);
  for (Index x = 0; x < d; ++x)
    for (Index z = 0; z < d; ++z) D(x, z) = U(x * d * 2, z * d * 2);
  return D;
}

void apply_walk_register(const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A,
                         Eigen::Ref<Matrix> state) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  const Index half = w.dim;
  require_rows(state, 2 * half, "apply_walk_register");

  // Shift unitary X (x) SWAP_pairs: flip herm, then exchange (r1,r2)<->(r3,r4).
  run_permutation(state, [&](Index i) {
    const Index j = (i >= half) ? i - half : i + half;
    const Index base = j % half;
    const Index x = digit(base, w.s1, w.d), y = digit(base, w.s2, w.d);
    const Index z = digit(base, w.s3, w.d), t = digit(base, w.s4, w.d);
    return j + (z - x) * w.s1 + (t - y) * w.s2 + (x - z) * w.s3 + (y - t) * w.s4;
  });

  // Reflection 2 BoxBar BoxBar^T - 1 through the herm-controlled pair of
  // full-register step isometries (thin factors; EdgeP* on herm = 0).
  const Matrix Bs = box_full_adjoint_side(T, A);
  const Matrix Bf = box_full_forward(T, A);
  const Matrix C0 = Bs.transpose() * state.topRows(half);
  const Matrix C1 = Bf.transpose() * state.bottomRows(half);
  state.topRows(half) = 2.0 * (Bs * C0) - state.topRows(half);
  state.bottomRows(half) = 2.0 * (Bf * C1) - state.bottomRows(half);
}

Matrix walk_register_unitary(const Eigen::Ref<const Matrix>& T,
                             const Eigen::Ref<const Matrix>& A) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  Matrix W = Matrix::Identity(2 * w.dim, 2 * w.dim);
  apply_walk_register(T, A, W);
  return W;
}

Vector embed_edge_pair_state(const EdgeSpace& S,
                             const Eigen::Ref<const Vector>& edge_state,
                             Index d) {
  const Index s = S.size();
  if (edge_state.size() != 2 * s * s)
    throw Error(Error::Code::LayoutMismatch,
                "edge-pair state must have dimension 2 |S|^2");
  for (const auto& [x, y] : S.edges)
    if (x >= d || y >= d)
      throw Error(Error::Code::LayoutMismatch,
                  "register dimension too small for the edge set");
  const WalkStrides w = walk_strides(d);
  Vector out = Vector::Zero(2 * w.dim);
  for (Index h = 0; h < 2; ++h)
    for (Index e = 0; e < s; ++e)
      for (Index f = 0; f < s; ++f) {
        const auto& [xe, ye] = S.edges[static_cast<size_t>(e)];
        const auto& [xf, yf] = S.edges[static_cast<size_t>(f)];
        out[h * w.dim + xe * w.s1 + ye * w.s2 + xf * w.s3 + yf * w.s4] =
            edge_state[h * s * s + e * s + f];
      }
  return out;
}

Extraction extract_pi(const Eigen::Ref<const Vector>& walk_state,
                      const Eigen::Ref<const Matrix>& T,
                      const Eigen::Ref<const Matrix>& A,
                      const Eigen::Ref<const Vector>& pi, bool strict) {
  require_square_pair(T, A);
  const WalkStrides w = walk_strides(T.rows());
  const Index half = w.dim;
  if (walk_state.size() != 2 * half)
    throw Error(Error::Code::LayoutMismatch,
                "walk state must have dimension 4 d^4");
  if (pi.size() != w.d)
    throw Error(Error::Code::LayoutMismatch,
                "target distribution size must match the register dimension");

  Matrix state = walk_state;
  // Herm-controlled pair swap: on herm = 0 the state carries Box* columns;
  // swapping (r1,r2)<->(r3,r4) turns them into Box columns (uses detailed
  // balance), aligning both herm branches.
  run_permutation(state, [&](Index i) {
    if (i >= half) return i;
    const Index x = digit(i, w.s1, w.d), y = digit(i, w.s2, w.d);
    const Index z = digit(i, w.s3, w.d), t = digit(i, w.s4, w.d);
    return i + (z - x) * w.s1 + (t - y) * w.s2 + (x - z) * w.s3 + (y - t) * w.s4;
  });

  // O^T on (r1..r4, flag) within each herm branch: Box |nu> -> |nu>|0,0>|0>.
  Matrix branches(half, 2);
  branches.col(0) = state.topRows(half);
  branches.col(1) = state.bottomRows(half);
  apply_O(T, A, branches, true);

  // O_T^T on (r1, r2): |nu> = O_T |sqrt(pi)>|0>, so this lands on the target.
  const std::vector<Matrix> V = proposal_blocks(T);
  apply_proposal(V, branches, w.d, w.s1, w.s2, true);

  Extraction out;
  out.state = Vector(2 * half);
  out.state.head(half) = branches.col(0);
  out.state.tail(half) = branches.col(1);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  out.pi_amplitudes = Vector::Zero(w.d);
  double overlap = 0.0;
  for (Index x = 0; x < w.d; ++x) {
    const Index i = x * w.s1;
    out.pi_amplitudes[x] = inv_sqrt2 * (branches(i, 0) + branches(i, 1));
    overlap += std::sqrt(std::max(0.0, pi[x])) * out.pi_amplitudes[x];
  }
  out.fidelity = overlap * overlap;
  if (strict && out.fidelity < 1.0 - 1e-6)
    throw Error(Error::Code::NotStationaryInput,
                "extraction fidelity " + std::to_string(out.fidelity) +
                    " below the stationary-input threshold");
  return out;
}

}  // namespace qmh
