#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmh/chain.hpp"
#include "qmh/dual.hpp"
#include "qmh/walk.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <numbers>

using namespace qmh;
using namespace qmh::testing;

namespace {

Vector k2_pi() {
  Vector pi(2);
  pi << 2.0 / 3.0, 1.0 / 3.0;
  return pi;
}

Matrix k2_T() {
  Matrix T(2, 2);
  T << 0, 1, 1, 0;
  return T;
}

Matrix random_orthogonal(Index n, SplitMix64& rng) {
  Matrix X(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) X(i, j) = rng.uniform() - 0.5;
  return Eigen::HouseholderQR<Matrix>(X).householderQ();
}

Vector random_state(Index n, SplitMix64& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
  return v / v.norm();
}

/** Zero-diagonal acceptance with arbitrary [0,1] entries off the diagonal. */
Matrix random_acceptance_table(Index d, SplitMix64& rng) {
  Matrix A(d, d);
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) A(x, y) = (x == y) ? 0.0 : rng.uniform();
  return A;
}

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

/** Register-picture index ((((x d + y) d + z) d + t) * 2 + flag. */
Index reg_idx(Index d, Index x, Index y, Index z, Index t, Index flag) {
  return (((x * d + y) * d + z) * d + t) * 2 + flag;
}

}  // namespace

TEST_CASE("unitary_completion preserves orthonormal seeds deterministically") {
  SplitMix64 rng(555);
  const Index dim = 7;
  const Matrix Q = random_orthogonal(dim, rng);
  const Matrix seeds = Q.leftCols(3);

  const Matrix U = unitary_completion(seeds, dim);
  CHECK(max_abs(U.transpose() * U - Matrix::Identity(dim, dim)) < 1e-12);
  CHECK(max_abs(U.leftCols(3) - seeds) < 1e-12);

  const Matrix U2 = unitary_completion(seeds, dim);
  CHECK(max_abs(U - U2) == 0.0);  // bit-reproducible

  Matrix dependent(dim, 2);
  dependent.col(0) = seeds.col(0);
  dependent.col(1) = 2.0 * seeds.col(0);
  CHECK_THROWS_AS(unitary_completion(dependent, dim), Error);
}

TEST_CASE("step_isometry columns carry sqrt kernel rows") {
  SplitMix64 rng(600);
  const Vector pi = random_target(4, rng);
  const Matrix T = random_proposal(4, rng);
  const Matrix P = mh_kernel(T, metropolis_acceptance(pi, T));
  const Index k = 4;

  const Matrix B = step_isometry(P);
  REQUIRE(B.rows() == k * k);
  REQUIRE(B.cols() == k);
  CHECK(max_abs(B.transpose() * B - Matrix::Identity(k, k)) < 1e-12);
  for (Index e = 0; e < k; ++e)
    for (Index f = 0; f < k; ++f)
      CHECK(B(e * k + f, e) ==
            doctest::Approx(std::sqrt(P(e, f))).epsilon(1e-13));
  // columns of different tails never overlap
  for (Index e = 0; e < k; ++e)
    for (Index g = 0; g < k; ++g)
      if (e != g) CHECK(B.col(e).dot(B.col(g)) == 0.0);
}

TEST_CASE("pair_swap is the tensor swap permutation") {
  const Index k = 3;
  const Matrix S = pair_swap(k);
  CHECK(max_abs(S * S - Matrix::Identity(k * k, k * k)) < 1e-15);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) {
      Vector in = Vector::Zero(k * k);
      in[a * k + b] = 1.0;
      const Vector out = S * in;
      CHECK(out[b * k + a] == 1.0);
    }
}

TEST_CASE("proposal oracle O_T prepares sqrt proposal rows per block") {
  SplitMix64 rng(1234);
  for (Index d : {3, 4}) {
    const Matrix T = random_proposal(d, rng);
    const Matrix OT = build_O_T(T);
    REQUIRE(OT.rows() == d * d);
    CHECK(max_abs(OT * OT.transpose() - Matrix::Identity(d * d, d * d)) <
          1e-12);
    for (Index x = 0; x < d; ++x) {
      for (Index z = 0; z < d; ++z)
        CHECK(OT(x * d + z, x * d + 0) ==
              doctest::Approx(std::sqrt(T(x, z))).epsilon(1e-13));
      // block diagonal: no leakage between source blocks
      for (Index xp = 0; xp < d; ++xp)
        if (xp != x)
          CHECK(max_abs(OT.block(xp * d, x * d, d, d)) == 0.0);
    }
  }
}

TEST_CASE("coin oracle O_A rotates the flag by the acceptance angle") {
  SplitMix64 rng(77);
  const Index d = 3;
  const Matrix A = random_acceptance_table(d, rng);
  const Matrix OA = build_O_A(A);
  REQUIRE(OA.rows() == d * d * 2);
  CHECK(max_abs(OA.transpose() * OA - Matrix::Identity(2 * d * d, 2 * d * d)) <
        1e-12);
  for (Index x = 0; x < d; ++x)
    for (Index y = 0; y < d; ++y) {
      const Index base = (x * d + y) * 2;
      const double c = std::sqrt(1.0 - A(x, y));
      const double s = std::sqrt(A(x, y));
      CHECK(OA(base, base) == doctest::Approx(c).epsilon(1e-13));
      CHECK(OA(base + 1, base) == doctest::Approx(s).epsilon(1e-13));
      CHECK(OA(base, base + 1) == doctest::Approx(-s).epsilon(1e-13));
      CHECK(OA(base + 1, base + 1) == doctest::Approx(c).epsilon(1e-13));
    }
}

TEST_CASE("edge-acceptance oracle implements the five input patterns") {
  SplitMix64 rng(99);
  for (Index d : {3, 4}) {  // both the mod-d and the XOR code paths
    const Matrix A = random_acceptance_table(d, rng);
    const Matrix O = build_O_cal_A(A);
    const Index dim = 2 * d * d * d;
    REQUIRE(O.rows() == dim);
    CHECK(max_abs(O.transpose() * O - Matrix::Identity(dim, dim)) < 1e-12);

    auto idx = [d](Index a, Index b, Index c, Index flag) {
      return ((a * d + b) * d + c) * 2 + flag;
    };

    for (Index x = 0; x < d; ++x)
      for (Index y = 0; y < d; ++y) {
        if (x == y) {
          // |x,x,x>|0> is fixed
          Vector col = O.col(idx(x, x, x, 0));
          col[idx(x, x, x, 0)] -= 1.0;
          CHECK(col.cwiseAbs().maxCoeff() < 1e-13);
          continue;
        }
        const double c = std::sqrt(1.0 - A(x, y));
        const double s = std::sqrt(A(x, y));

        // |x,y,x>|0> -> c |x,x,y>|0> + s |x,y,x>|0>
        Vector col = O.col(idx(x, y, x, 0));
        col[idx(x, x, y, 0)] -= c;
        col[idx(x, y, x, 0)] -= s;
        CHECK(col.cwiseAbs().maxCoeff() < 1e-12);

        // |x,x,y>|0> -> -s |x,x,y>|0> + c |x,y,x>|0>
        col = O.col(idx(x, x, y, 0));
        col[idx(x, x, y, 0)] += s;
        col[idx(x, y, x, 0)] -= c;
        CHECK(col.cwiseAbs().maxCoeff() < 1e-12);

        // |x,y,y>|0> fixed
        col = O.col(idx(x, y, y, 0));
        col[idx(x, y, y, 0)] -= 1.0;
        CHECK(col.cwiseAbs().maxCoeff() < 1e-13);

        // pairwise distinct fixed
        for (Index z = 0; z < d; ++z)
          if (z != x && z != y) {
            col = O.col(idx(x, y, z, 0));
            col[idx(x, y, z, 0)] -= 1.0;
            CHECK(col.cwiseAbs().maxCoeff() < 1e-13);
          }
      }

    // the ancilla is always restored on flag-0 input
    for (Index i = 0; i < dim; i += 2) {
      const Vector col = O.col(i);
      for (Index j = 1; j < dim; j += 2) CHECK(std::abs(col[j]) < 1e-13);
    }
  }
}

TEST_CASE("adjoint-side edge-acceptance oracle keeps the edge in front") {
  SplitMix64 rng(98);
  for (Index d : {3, 4}) {
    const Matrix A = random_acceptance_table(d, rng);
    const Matrix O = build_O_cal_A_star(A);
    const Index dim = 2 * d * d * d;
    CHECK(max_abs(O.transpose() * O - Matrix::Identity(dim, dim)) < 1e-12);

    auto idx = [d](Index a, Index b, Index c, Index flag) {
      return ((a * d + b) * d + c) * 2 + flag;
    };

    // |z,t,z>|0> -> sqrt(1-A(z,t)) |z,t,z>|0> + sqrt(A(z,t)) |z,t,t>|0>
    for (Index z = 0; z < d; ++z)
      for (Index t = 0; t < d; ++t) {
        Vector col = O.col(idx(z, t, z, 0));
        col[idx(z, t, z, 0)] -= std::sqrt(1.0 - A(z, t));
        col[idx(z, t, t, 0)] -= std::sqrt(A(z, t));
        CHECK(col.cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("walk oracles O and O* extend the dual step isometries") {
  SplitMix64 rng(2718);
  for (Index d : {3, 4}) {
    const Vector pi = random_target(d, rng);
    const Matrix T = random_proposal(d, rng);
    const Matrix A = metropolis_acceptance(pi, T);
    const Index dim = 2 * d * d * d * d;

    const Matrix O = build_O(T, A);
    const Matrix Os = build_O_star(T, A);
    CHECK(max_abs(O.transpose() * O - Matrix::Identity(dim, dim)) < 1e-11);
    CHECK(max_abs(Os.transpose() * Os - Matrix::Identity(dim, dim)) < 1e-11);

    // column formulas for every register pair (x,y)
    for (Index x = 0; x < d; ++x)
      for (Index y = 0; y < d; ++y) {
        Vector col = O.col(reg_idx(d, x, y, 0, 0, 0));
        for (Index z = 0; z < d; ++z) {
          col[reg_idx(d, x, y, x, z, 0)] -=
              std::sqrt(T(x, z) * (1.0 - A(x, z)));
          col[reg_idx(d, x, y, z, x, 0)] -= std::sqrt(T(x, z) * A(x, z));
        }
        CHECK(col.cwiseAbs().maxCoeff() < 1e-12);

        Vector cols = Os.col(reg_idx(d, x, y, 0, 0, 0));
        for (Index w = 0; w < d; ++w) {
          cols[reg_idx(d, x, y, x, w, 0)] -=
              std::sqrt((1.0 - A(x, y)) * T(x, w));
          cols[reg_idx(d, x, y, y, w, 0)] -= std::sqrt(A(x, y) * T(y, w));
        }
        CHECK(cols.cwiseAbs().maxCoeff() < 1e-12);
      }

    // restricted to edges, O carries sqrt(EdgeP) and O* carries sqrt(EdgeP*)
    const EdgeSpace S = edge_space(T);
    const DualKernels K = dual_kernels(S, T, A);
    for (Index e = 0; e < S.size(); ++e) {
      const auto [x, y] = S.edges[e];
      Vector col = O.col(reg_idx(d, x, y, 0, 0, 0));
      Vector cols = Os.col(reg_idx(d, x, y, 0, 0, 0));
      for (Index f = 0; f < S.size(); ++f) {
        const auto [z, t] = S.edges[f];
        col[reg_idx(d, x, y, z, t, 0)] -= std::sqrt(K.P(e, f));
        cols[reg_idx(d, x, y, z, t, 0)] -= std::sqrt(K.P_star(e, f));
      }
      CHECK(col.cwiseAbs().maxCoeff() < 1e-11);
      CHECK(cols.cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("streaming appliers agree with the dense oracles") {
  SplitMix64 rng(31337);
  for (Index d : {3, 4}) {
    const Vector pi = random_target(d, rng);
    const Matrix T = random_proposal(d, rng);
    const Matrix A = glauber_acceptance(pi, T);
    const Index dim = 2 * d * d * d * d;

    const Matrix O = build_O(T, A);
    const Matrix Os = build_O_star(T, A);
    Matrix states(dim, 3);
    for (int c = 0; c < 3; ++c) states.col(c) = random_state(dim, rng);

    Matrix got = states;
    apply_O(T, A, got, /*adjoint=*/false);
    CHECK(max_abs(got - O * states) < 1e-12);

    got = states;
    apply_O(T, A, got, /*adjoint=*/true);
    CHECK(max_abs(got - O.transpose() * states) < 1e-12);

    got = states;
    apply_O_star(T, A, got, /*adjoint=*/false);
    CHECK(max_abs(got - Os * states) < 1e-12);

    got = states;
    apply_O_star(T, A, got, /*adjoint=*/true);
    CHECK(max_abs(got - Os.transpose() * states) < 1e-12);
  }
}

TEST_CASE("hermitianization produces the symmetric two-block form") {
  SplitMix64 rng(404);
  const Index big = 6, small = 3;
  const Matrix U = random_orthogonal(big, rng);
  const Matrix QL = random_orthogonal(big, rng).leftCols(small);
  const Matrix QR = random_orthogonal(big, rng).leftCols(small);

  const Spue spue = hermitianize(U, QL, QR);
  REQUIRE(spue.U.rows() == 2 * big);
  CHECK(max_abs(spue.U - spue.U.transpose()) < 1e-13);
  CHECK(max_abs(spue.U.topLeftCorner(big, big)) == 0.0);
  CHECK(max_abs(spue.U.topRightCorner(big, big) - U) == 0.0);
  CHECK(max_abs(spue.U.bottomLeftCorner(big, big) - U.transpose()) == 0.0);

  CHECK(max_abs(spue.box.transpose() * spue.box -
                Matrix::Identity(2 * small, 2 * small)) < 1e-12);

  const Matrix enc = spue.box.transpose() * spue.U * spue.box;
  const Matrix Ablk = QL.transpose() * U * QR;
  CHECK(max_abs(enc.topRightCorner(small, small) - Ablk) < 1e-12);
  CHECK(max_abs(enc.bottomLeftCorner(small, small) - Ablk.transpose()) <
        1e-12);
  CHECK(max_abs(enc.topLeftCorner(small, small)) < 1e-12);
  CHECK(max_abs(enc.bottomRightCorner(small, small)) < 1e-12);
}

TEST_CASE("dual walk encoding carries the nu-discriminant") {
  SplitMix64 rng(515);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.next() % 3);
    const Vector pi = random_target(n, rng);
    const Matrix T = random_proposal(n, rng);
    const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
    const EdgeSpace S = edge_space(T);
    const Vector nu = edge_measure(S, pi, T);
    const Index s = S.size();

    const Spue spue = dual_walk_spue(S, T, A);
    CHECK(max_abs(spue.U - spue.U.transpose()) < 1e-13);
    CHECK(max_abs(spue.U * spue.U -
                  Matrix::Identity(2 * s * s, 2 * s * s)) < 1e-12);

    // encoded block vs the dilation discriminant, up to the block swap
    const DualKernels K = dual_kernels(S, T, A);
    const Vector root = nu.cwiseSqrt();
    const Matrix M =
        root.asDiagonal() * K.P * root.cwiseInverse().asDiagonal();
    const Matrix enc = spue.box.transpose() * spue.U * spue.box;
    CHECK(max_abs(enc.topRightCorner(s, s) - M.transpose()) < 1e-11);
    CHECK(max_abs(enc.bottomLeftCorner(s, s) - M) < 1e-11);

    // same spectrum as the dilation discriminant
    const Dilation dil = dilation(S, T, A, nu);
    Eigen::SelfAdjointEigenSolver<Matrix> e1(enc), e2(dil.D_bar);
    CHECK(max_abs(e1.eigenvalues() - e2.eigenvalues()) < 1e-10);
  }
}

TEST_CASE("the walk fixes the hermitianized stationary state") {
  SplitMix64 rng(616);
  const Index n = 4;
  const Vector pi = random_target(n, rng);
  const Matrix T = random_proposal(n, rng);
  const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
  const EdgeSpace S = edge_space(T);
  const Vector nu = edge_measure(S, pi, T);
  const Index s = S.size();

  const Spue spue = dual_walk_spue(S, T, A);
  const Matrix W = qubitized_walk(spue);
  CHECK(max_abs(W.transpose() * W -
                Matrix::Identity(2 * s * s, 2 * s * s)) < 1e-11);
  CHECK(max_abs(W - dual_walk_unitary(S, T, A)) < 1e-13);

  Vector coeff(2 * s);
  coeff << nu.cwiseSqrt(), nu.cwiseSqrt();
  coeff /= std::sqrt(2.0);
  const Vector psi = spue.box * coeff;
  CHECK((W * psi - psi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("walk eigenphases follow the arccos of the encoded spectrum") {
  SplitMix64 rng(717);
  const Index n = 3;
  const Vector pi = random_target(n, rng);
  const Matrix T = random_proposal(n, rng);
  const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
  const EdgeSpace S = edge_space(T);
  const Vector nu = edge_measure(S, pi, T);

  const Spue spue = dual_walk_spue(S, T, A);
  const Matrix W = qubitized_walk(spue);
  const Matrix enc = spue.box.transpose() * spue.U * spue.box;
  Eigen::SelfAdjointEigenSolver<Matrix> es(enc);

  const WalkSpectrumReport rep = walk_spectrum(S, T, A, nu, true);
  CHECK(rep.angular_gap_direct ==
        doctest::Approx(rep.angular_gap).epsilon(1e-8));

  // interior phases of W = acos of interior encoded eigenvalues (as
  // multisets; each interior eigenvalue yields a conjugate pair e^{+-i theta},
  // hence two entries with the same phase magnitude)
  std::vector<Complex> interior_W, interior_enc;
  for (double ph : rep.phases)
    if (ph > 1e-6 && ph < std::numbers::pi - 1e-6)
      interior_W.emplace_back(ph, 0.0);
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (std::abs(lam) < 1.0 - 1e-9) {
      interior_enc.emplace_back(std::acos(lam), 0.0);
      interior_enc.emplace_back(std::acos(lam), 0.0);
    }
  }
  CHECK(multiset_equal(interior_W, interior_enc, 1e-8));

  // eigenvector identity: mu = (e^{i theta} - U) Box v / (sqrt(2) sin theta)
  const CMatrix Wc = W.cast<Complex>();
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (std::abs(lam) >= 1.0 - 1e-9) continue;
    const double theta = std::acos(lam);
    const Vector bv = spue.box * es.eigenvectors().col(i);
    for (double sign : {1.0, -1.0}) {
      const Complex phase = std::exp(Complex(0.0, sign * theta));
      const CVector mu =
          (phase * CVector::Ones(bv.size()).asDiagonal().toDenseMatrix() -
           spue.U.cast<Complex>()) *
          bv.cast<Complex>() / (std::sqrt(2.0) * std::sin(theta));
      CHECK((Wc * mu - phase * mu).norm() < 1e-8);
      CHECK(std::abs(mu.norm() - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("two-state lazy Metropolis walk: frozen angular gap") {
  const Vector pi = k2_pi();
  const Matrix T = k2_T();
  const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
  const EdgeSpace S = edge_space(T);
  const Vector nu = edge_measure(S, pi, T);

  const WalkSpectrumReport rep = walk_spectrum(S, T, A, nu, true);
  CHECK(rep.lambda == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(rep.delta_star == doctest::Approx(15.0 / 16.0).epsilon(1e-10));
  CHECK(rep.angular_gap == doctest::Approx(std::acos(0.25)).epsilon(1e-10));
  CHECK(rep.angular_gap_direct ==
        doctest::Approx(std::acos(0.25)).epsilon(1e-8));
}

TEST_CASE("controlled-swap encoding exposes the discriminant block") {
  SplitMix64 rng(818);
  for (int trial = 0; trial < 6; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next() % 5);
    const Vector pi = random_target(d, rng);
    const Matrix T = random_proposal(d, rng);
    const Matrix A = metropolis_acceptance(pi, T);
    const Matrix P = mh_kernel(T, A);

    const Matrix U = cswap_spue_unitary(T, A);
    REQUIRE(U.rows() == 2 * d * d);
    CHECK(max_abs(U.transpose() * U -
                  Matrix::Identity(2 * d * d, 2 * d * d)) < 1e-11);

    const Matrix D = cswap_encoded_block(T, A);
    CHECK(max_abs(D - D.transpose()) < 1e-12);
    CHECK(max_abs(D - discriminant(P, pi)) < 1e-10);
    // the encoded block is read off the (r2, coin) = (0,0) corner
    for (Index x = 0; x < d; ++x)
      for (Index z = 0; z < d; ++z)
        CHECK(D(x, z) == doctest::Approx(U(x * d * 2, z * d * 2)).epsilon(1e-13));
  }

  SUBCASE("frozen two-state block") {
    const Matrix D = cswap_encoded_block(k2_T(),
                                         metropolis_acceptance(k2_pi(), k2_T()));
    Matrix expect(2, 2);
    expect << 0.5, std::sqrt(2.0) / 2.0, std::sqrt(2.0) / 2.0, 0.0;
    CHECK(max_abs(D - expect) < 1e-12);
  }
}

TEST_CASE("register walk equals its reflection-times-shift definition") {
  SplitMix64 rng(919);
  for (Index d : {2, 3}) {
    const Vector pi = random_target(d, rng);
    const Matrix T = random_proposal(d, rng);
    const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
    const Index half = 2 * d * d * d * d;
    const Index dim = 2 * half;

    // oracle: BoxBar columns from the dense O/O* on basis inputs
    const Matrix O = build_O(T, A);
    const Matrix Os = build_O_star(T, A);
    Matrix Bbar = Matrix::Zero(dim, 2 * d * d);
    for (Index x = 0; x < d; ++x)
      for (Index y = 0; y < d; ++y) {
        const Index in = reg_idx(d, x, y, 0, 0, 0);
        Bbar.col(0 * d * d + x * d + y).head(half) = Os.col(in);
        Bbar.col(1 * d * d + x * d + y).tail(half) = O.col(in);
      }
    CHECK(max_abs(Bbar.transpose() * Bbar -
                  Matrix::Identity(2 * d * d, 2 * d * d)) < 1e-11);

    // shift: X on herm, (r1,r2) <-> (r3,r4), flag untouched
    Matrix shift = Matrix::Zero(dim, dim);
    for (Index h = 0; h < 2; ++h)
      for (Index x = 0; x < d; ++x)
        for (Index y = 0; y < d; ++y)
          for (Index z = 0; z < d; ++z)
            for (Index t = 0; t < d; ++t)
              for (Index fl = 0; fl < 2; ++fl)
                shift((1 - h) * half + reg_idx(d, z, t, x, y, fl),
                      h * half + reg_idx(d, x, y, z, t, fl)) = 1.0;

    const Matrix W_expect =
        (2.0 * Bbar * Bbar.transpose() - Matrix::Identity(dim, dim)) * shift;
    const Matrix W = walk_register_unitary(T, A);
    CHECK(max_abs(W - W_expect) < 1e-11);

    // streaming applier matches on random states
    Matrix states(dim, 2);
    states.col(0) = random_state(dim, rng);
    states.col(1) = random_state(dim, rng);
    Matrix got = states;
    apply_walk_register(T, A, got);
    CHECK(max_abs(got - W_expect * states) < 1e-11);
  }
}

TEST_CASE("the register walk restricts to the edge-picture walk") {
  SplitMix64 rng(1020);
  for (Index n : {3, 4}) {
    const Vector pi = random_target(n, rng);
    const Matrix T = random_proposal(n, rng);
    const Matrix A = glauber_acceptance(pi, T);
    const EdgeSpace S = edge_space(T);
    const Index s = S.size();

    const Matrix W_edge = dual_walk_unitary(S, T, A);
    for (int trial = 0; trial < 3; ++trial) {
      const Vector psi = random_state(2 * s * s, rng);
      Matrix embedded = embed_edge_pair_state(S, psi, n);
      apply_walk_register(T, A, embedded);
      const Vector expect = embed_edge_pair_state(S, Vector(W_edge * psi), n);
      CHECK((embedded - expect).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("embed_edge_pair_state maps basis to basis") {
  SplitMix64 rng(1121);
  const Index n = 3;
  const Matrix T = random_proposal(n, rng);
  const EdgeSpace S = edge_space(T);
  const Index s = S.size();

  for (Index h = 0; h < 2; ++h)
    for (Index e = 0; e < s; ++e)
      for (Index f = 0; f < s; ++f) {
        Vector in = Vector::Zero(2 * s * s);
        in[h * s * s + e * s + f] = 1.0;
        const Vector out = embed_edge_pair_state(S, in, n);
        REQUIRE(out.size() == 4 * n * n * n * n);
        CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-14));
        const auto [x, y] = S.edges[e];
        const auto [z, t] = S.edges[f];
        CHECK(out[h * 2 * n * n * n * n + reg_idx(n, x, y, z, t, 0)] == 1.0);
      }

  Vector wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(embed_edge_pair_state(S, wrong, n), Error);
}

TEST_CASE("extraction unwinds the stationary walk state to the target") {
  SplitMix64 rng(1222);
  for (Index n : {3, 4, 5}) {
    const Vector pi = random_target(n, rng);
    const Matrix T = random_proposal(n, rng);
    const Matrix A = Matrix(0.5 * metropolis_acceptance(pi, T));
    const EdgeSpace S = edge_space(T);
    const Vector nu = edge_measure(S, pi, T);
    const Index s = S.size();

    // the pair-swap/extraction identity behind the unwinding
    const DualKernels K = dual_kernels(S, T, A);
    const Vector root = nu.cwiseSqrt();
    CHECK((pair_swap(s) * step_isometry(K.P_star) * root -
           step_isometry(K.P) * root)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    const Spue spue = dual_walk_spue(S, T, A);
    Vector coeff(2 * s);
    coeff << root, root;
    coeff /= std::sqrt(2.0);
    const Vector psi = embed_edge_pair_state(S, Vector(spue.box * coeff), n);

    const Extraction ext = extract_pi(psi, T, A, pi, /*strict=*/true);
    CHECK(ext.fidelity >= 1.0 - 1e-10);
    REQUIRE(ext.pi_amplitudes.size() == n);
    for (Index x = 0; x < n; ++x)
      CHECK(ext.pi_amplitudes[x] ==
            doctest::Approx(std::sqrt(pi[x])).epsilon(1e-9));

    // all mass sits on r2 = r3 = r4 = flag = 0
    const Index half = 2 * n * n * n * n;
    double on_zero = 0.0;
    for (Index h = 0; h < 2; ++h)
      for (Index x = 0; x < n; ++x) {
        const double a = ext.state[h * half + reg_idx(n, x, 0, 0, 0, 0)];
        on_zero += a * a;
      }
    CHECK(on_zero >= 1.0 - 1e-10);

    // a perturbed input is rejected in strict mode
    Vector bad = psi;
    bad[1] += 0.3;
    bad /= bad.norm();
    CHECK_THROWS_AS(extract_pi(bad, T, A, pi, /*strict=*/true), Error);
    // ...but reported honestly otherwise
    const Extraction loose = extract_pi(bad, T, A, pi, /*strict=*/false);
    CHECK(loose.fidelity < 1.0 - 1e-6);
  }
}
