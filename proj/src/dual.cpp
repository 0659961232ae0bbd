#include "qmh/dual.hpp"

#include "qmh/chain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace qmh {

Index EdgeSpace::index(Index x, Index y) const {
  if (x < 0 || y < 0 || x >= n || y >= n || edge_index(x, y) < 0)
    throw Error(Error::Code::InputOffEdgeSet,
                "state pair (" + std::to_string(x) + "," + std::to_string(y) +
                    ") is not in the directed edge set");
  return edge_index(x, y);
}

EdgeSpace edge_space(const Eigen::Ref<const Matrix>& T) {
  validate_proposal(T);
  EdgeSpace S;
  S.n = T.rows();
  S.edge_index = Eigen::MatrixXi::Constant(S.n, S.n, -1);
  for (Index x = 0; x < S.n; ++x)
    for (Index y = 0; y < S.n; ++y)
      if (T(x, y) > 0.0) {
        S.edge_index(x, y) = static_cast<int>(S.edges.size());
        S.edges.emplace_back(x, y);
      }
  return S;
}

Vector edge_measure(const EdgeSpace& S, const Eigen::Ref<const Vector>& pi,
                    const Eigen::Ref<const Matrix>& T) {
  validate_probability_vector(pi);
  Vector nu(S.size());
  for (Index e = 0; e < S.size(); ++e)
    nu[e] = pi[S.edges[e].first] * T(S.edges[e].first, S.edges[e].second);
  return nu;
}

Matrix dual_proposal(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T) {
  Matrix ET = Matrix::Zero(S.size(), S.size());
  for (Index e = 0; e < S.size(); ++e) {
    const Index x = S.edges[e].first;
    for (Index f = 0; f < S.size(); ++f)
      if (S.edges[f].first == x) ET(e, f) = T(x, S.edges[f].second);
  }
  return ET;
}

Matrix dual_acceptance(const EdgeSpace& S, const Eigen::Ref<const Matrix>& A) {
  Matrix EA = Matrix::Zero(S.size(), S.size());
  for (Index e = 0; e < S.size(); ++e) {
    const auto [x, y] = S.edges[e];
    EA(e, S.index(y, x)) += A(x, y);
    EA(e, e) += 1.0 - A(x, y);
  }
  return EA;
}

DualKernels dual_kernels(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                         const Eigen::Ref<const Matrix>& A) {
  DualKernels K;
  const Matrix ET = dual_proposal(S, T);
  const Matrix EA = dual_acceptance(S, A);
  K.P = ET * EA;
  K.P_star = EA * ET;
  K.TAT = ET * EA * ET;
  return K;
}

namespace {

/// nu-discriminant M = diag(sqrt nu) EdgeP diag(1/sqrt nu) of a dual kernel.
Matrix nu_discriminant(const Matrix& edge_P, const Vector& nu) {
  const Vector sqrt_nu = nu.cwiseSqrt();
  return sqrt_nu.asDiagonal() * edge_P * sqrt_nu.cwiseInverse().asDiagonal();
}

}  // namespace

DeltaStarReport delta_star(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                           const Eigen::Ref<const Matrix>& A, DualMode mode,
                           const Tolerances& tol) {
  const Matrix A_used = (mode == DualMode::LazyGeneral) ? (0.5 * A).eval()
                                                        : Matrix(A);
  // Halving the acceptance preserves the stationary target, so the edge
  // measure can be derived from the classical chain itself.  The lazy
  // version is used for the derivation: it has the same stationary target,
  // and its positive diagonal rules out periodicity, so the only way this
  // can fail is genuine reducibility.
  const Vector pi = stationary_distribution(lazy(mh_kernel(T, A_used)));
  const Vector nu = edge_measure(S, pi, T);
  const DualKernels K = dual_kernels(S, T, A_used);

  // EdgeP EdgeP* is nu-self-adjoint and PSD: conjugating by diag(sqrt nu)
  // yields the symmetric M M^T whose spectrum is the singular values of M
  // squared, all in [0,1].
  const Matrix M = nu_discriminant(K.P, nu);
  Matrix G = M * M.transpose();
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(G, Eigen::EigenvaluesOnly);
  Vector ev = solver.eigenvalues();  // ascending

  Index unit_count = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i] - 1.0) <= tol.spectral) ++unit_count;
  if (unit_count != 1)
    throw Error(Error::Code::NotErgodicProduct,
                "EdgeP EdgeP* has unit eigenvalue of multiplicity " +
                    std::to_string(unit_count) +
                    " (walk-relevant product chain is not ergodic)");
  DeltaStarReport report;
  report.product_dimension = S.size();
  const double second =
      (ev.size() > 1) ? std::clamp(ev[ev.size() - 2], 0.0, 1.0) : 0.0;
  report.delta_star = 1.0 - second;
  report.lambda = std::sqrt(second);
  return report;
}

Dilation dilation(const EdgeSpace& S, const Eigen::Ref<const Matrix>& T,
                  const Eigen::Ref<const Matrix>& A,
                  const Eigen::Ref<const Vector>& nu, const Tolerances& tol) {
  const DualKernels K = dual_kernels(S, T, A);
  const Index k = S.size();
  Dilation dil;
  dil.P_bar = Matrix::Zero(2 * k, 2 * k);
  dil.P_bar.topRightCorner(k, k) = K.P;
  dil.P_bar.bottomLeftCorner(k, k) = K.P_star;
  dil.weights.resize(2 * k);
  dil.weights << 0.5 * nu, 0.5 * nu;

  const Matrix M = nu_discriminant(K.P, nu);
  dil.D_bar = Matrix::Zero(2 * k, 2 * k);
  dil.D_bar.topRightCorner(k, k) = M;
  dil.D_bar.bottomLeftCorner(k, k) = M.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(dil.D_bar, Eigen::EigenvaluesOnly);
  const Vector ev = solver.eigenvalues();
  double second = 0.0;
  Index unit_count = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(std::abs(ev[i]) - 1.0) <= tol.spectral) ++unit_count;
    else second = std::max(second, std::abs(ev[i]));
  }
  if (unit_count < 2)
    throw Error(Error::Code::NotErgodicProduct,
                "dilation lost its +-1 eigenvalue pair");
  dil.lambda = second;
  return dil;
}

// ---------------------------------------------------------------------------
// Structured second singular value: Lanczos on M^T M - s s^T with
// M = diag(sqrt(nu)) EdgeP diag(1/sqrt(nu)), s = sqrt(nu), using O(|S|)
// matvecs that exploit EdgeT's per-tail rank-one blocks and EdgeA's 2x2
// block structure.
// ---------------------------------------------------------------------------

namespace {

struct EdgeOps {
  const EdgeSpace& S;
  Matrix T;            // n x n proposal
  Matrix A;            // n x n acceptance (already halved if lazy)
  Vector sqrt_nu;
  std::vector<Index> rev;   // reversed-edge index
  std::vector<Index> tail;  // tail state of each edge

  explicit EdgeOps(const EdgeSpace& s, const Matrix& t, const Matrix& a,
                   const Vector& nu)
      : S(s), T(t), A(a), sqrt_nu(nu.cwiseSqrt()) {
    rev.resize(S.size());
    tail.resize(S.size());
    for (Index e = 0; e < S.size(); ++e) {
      rev[e] = S.reverse(e);
      tail[e] = S.edges[e].first;
    }
  }

  // (EdgeA v)[e] = (1-A(e)) v[e] + A(e) v[rev e]
  Vector apply_A(const Vector& v) const {
    Vector w(v.size());
    for (Index e = 0; e < S.size(); ++e) {
      const auto [x, y] = S.edges[e];
      const double a = A(x, y);
      w[e] = (1.0 - a) * v[e] + a * v[rev[e]];
    }
    return w;
  }

  // (EdgeA^T v)[f] = (1-A(f)) v[f] + A(rev f) v[rev f]
  Vector apply_A_transpose(const Vector& v) const {
    Vector w(v.size());
    for (Index f = 0; f < S.size(); ++f) {
      const auto [x, y] = S.edges[f];
      const double a_here = A(x, y);
      const double a_rev = A(y, x);
      w[f] = (1.0 - a_here) * v[f] + a_rev * v[rev[f]];
    }
    return w;
  }

  // (EdgeT v)[(x,y)] = sum_t T(x,t) v[(x,t)]  (same for every y): rank one
  // per tail block.
  Vector apply_T(const Vector& v) const {
    Vector per_tail = Vector::Zero(S.n);
    for (Index e = 0; e < S.size(); ++e)
      per_tail[tail[e]] += T(S.edges[e].first, S.edges[e].second) * v[e];
    Vector w(v.size());
    for (Index e = 0; e < S.size(); ++e) w[e] = per_tail[tail[e]];
    return w;
  }

  // (EdgeT^T v)[(x,t)] = T(x,t) * sum_y v[(x,y)]
  Vector apply_T_transpose(const Vector& v) const {
    Vector per_tail = Vector::Zero(S.n);
    for (Index e = 0; e < S.size(); ++e) per_tail[tail[e]] += v[e];
    Vector w(v.size());
    for (Index e = 0; e < S.size(); ++e)
      w[e] = T(S.edges[e].first, S.edges[e].second) * per_tail[tail[e]];
    return w;
  }

  // M v with M = diag(sqrt nu) EdgeT EdgeA diag(1/sqrt nu)
  Vector apply_M(const Vector& v) const {
    Vector w = v.cwiseQuotient(sqrt_nu);
    w = apply_A(w);
    w = apply_T(w);
    return w.cwiseProduct(sqrt_nu);
  }

  Vector apply_M_transpose(const Vector& v) const {
    Vector w = v.cwiseProduct(sqrt_nu);
    w = apply_T_transpose(w);
    w = apply_A_transpose(w);
    return w.cwiseQuotient(sqrt_nu);
  }
};

}  // namespace

DeltaStarReport dual_second_singular_value(const EdgeSpace& S,
                                           const Eigen::Ref<const Matrix>& T,
                                           const Eigen::Ref<const Matrix>& A,
                                           const Eigen::Ref<const Vector>& nu,
                                           double tol, int max_iter) {
  const Index dim = S.size();
  const EdgeOps ops(S, T, A, nu);
  Vector s = nu.cwiseSqrt();
  s.normalize();

  // The exact top singular pair must be (1, s) before deflation is valid.
  if ((ops.apply_M(s) - s).cwiseAbs().maxCoeff() > 1e-11 ||
      (ops.apply_M_transpose(s) - s).cwiseAbs().maxCoeff() > 1e-11)
    throw Error(Error::Code::NotErgodicProduct,
                "sqrt(nu) is not fixed by the dual discriminant; edge measure "
                "inconsistent with the dual pair");

  // Lanczos with full reorthogonalization on B = M^T M - s s^T (symmetric
  // PSD, top eigenvalue = second singular value of M squared).
  const auto apply_B = [&](const Vector& v) {
    Vector w = ops.apply_M_transpose(ops.apply_M(v));
    w -= s * s.dot(v);
    return w;
  };

  std::vector<Vector> basis;
  std::vector<double> alpha, beta;  // tridiagonal coefficients
  // Deterministic start orthogonal to s.
  Vector q = Vector::Zero(dim);
  for (Index i = 0; i < dim; ++i)
    q[i] = std::sin(0.7 * static_cast<double>(i + 1)) + 0.3;
  q -= s * s.dot(q);
  if (q.norm() < 1e-12) {
    q = Vector::Unit(dim, 0);
    q -= s * s.dot(q);
  }
  q.normalize();

  double top = 0.0;
  const int iters = std::min<int>(max_iter, static_cast<int>(dim));
  for (int k = 0; k < iters; ++k) {
    basis.push_back(q);
    Vector w = apply_B(q);
    const double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (k > 0) w -= beta.back() * basis[k - 1];
    // Full reorthogonalization (twice against s and the whole basis).
    for (int pass = 0; pass < 2; ++pass) {
      w -= s * s.dot(w);
      for (const Vector& b : basis) w -= b * b.dot(w);
    }
    const double b = w.norm();

    // Ritz values of the current tridiagonal matrix.
    const int kk = k + 1;
    Matrix tri = Matrix::Zero(kk, kk);
    for (int i = 0; i < kk; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < kk) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> tris(tri);
    top = tris.eigenvalues().maxCoeff();
    // Residual bound of the top Ritz pair: |beta_k * last component|.
    Index which = 0;
    tris.eigenvalues().maxCoeff(&which);
    const double resid = b * std::abs(tris.eigenvectors()(kk - 1, which));
    if (resid <= tol || b <= tol) break;

    beta.push_back(b);
    q = w / b;
  }

  DeltaStarReport report;
  report.product_dimension = dim;
  const double second = std::clamp(top, 0.0, 1.0);
  report.delta_star = 1.0 - second;
  report.lambda = std::sqrt(second);
  return report;
}

}  // namespace qmh
