#include "qmh/chain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmh {

const char* to_string(Error::Code code) {
  switch (code) {
    case Error::Code::InvalidArgument:    return "InvalidArgument";
    case Error::Code::NonzeroDiagonal:    return "NonzeroDiagonal";
    case Error::Code::AsymmetricSupport:  return "AsymmetricSupport";
    case Error::Code::ZeroTargetMass:     return "ZeroTargetMass";
    case Error::Code::NegativeDiagonal:   return "NegativeDiagonal";
    case Error::Code::NotErgodic:         return "NotErgodic";
    case Error::Code::NotReversible:      return "NotReversible";
    case Error::Code::CapExceeded:        return "CapExceeded";
    case Error::Code::NotErgodicProduct:  return "NotErgodicProduct";
    case Error::Code::InputOffEdgeSet:    return "InputOffEdgeSet";
    case Error::Code::LayoutMismatch:     return "LayoutMismatch";
    case Error::Code::DegenerateRow:      return "DegenerateRow";
    case Error::Code::NonIntegerShift:    return "NonIntegerShift";
    case Error::Code::NotStationaryInput: return "NotStationaryInput";
    case Error::Code::ZeroOverlap:        return "ZeroOverlap";
  }
  return "UnknownError";
}

namespace {

std::string pair_str(Index x, Index y) {
  std::ostringstream os;
  os << "(" << x << "," << y << ")";
  return os.str();
}

}  // namespace

void validate_probability_vector(const Eigen::Ref<const Vector>& pi, double tol) {
  if (pi.size() < 2)
    throw Error(Error::Code::InvalidArgument,
                "probability vector needs at least 2 states, got " +
                    std::to_string(pi.size()));
  if (pi.minCoeff() < -tol)
    throw Error(Error::Code::InvalidArgument,
                "probability vector has a negative entry");
  if (std::abs(pi.sum() - 1.0) > tol)
    throw Error(Error::Code::InvalidArgument,
                "probability vector sums to " + std::to_string(pi.sum()) +
                    ", expected 1");
}

void validate_kernel(const Eigen::Ref<const Matrix>& K, double tol) {
  if (K.rows() != K.cols() || K.rows() < 2)
    throw Error(Error::Code::InvalidArgument,
                "kernel must be square with at least 2 states");
  if (K.minCoeff() < -tol)
    throw Error(Error::Code::InvalidArgument, "kernel has a negative entry");
  for (Index x = 0; x < K.rows(); ++x)
    if (std::abs(K.row(x).sum() - 1.0) > tol)
      throw Error(Error::Code::InvalidArgument,
                  "kernel row " + std::to_string(x) + " sums to " +
                      std::to_string(K.row(x).sum()) + ", expected 1");
}

void validate_proposal(const Eigen::Ref<const Matrix>& T, double tol) {
  validate_kernel(T, tol);
  for (Index x = 0; x < T.rows(); ++x)
    if (T(x, x) != 0.0)
      throw Error(Error::Code::NonzeroDiagonal,
                  "proposal has nonzero diagonal at state " + std::to_string(x) +
                      ": T" + pair_str(x, x) + " = " + std::to_string(T(x, x)));
  for (Index x = 0; x < T.rows(); ++x)
    for (Index y = 0; y < T.cols(); ++y)
      if ((T(x, y) > 0.0) != (T(y, x) > 0.0))
        throw Error(Error::Code::AsymmetricSupport,
                    "proposal support is asymmetric at " + pair_str(x, y) +
                        ": T" + pair_str(x, y) + " = " + std::to_string(T(x, y)) +
                        " but T" + pair_str(y, x) + " = " +
                        std::to_string(T(y, x)));
}

void validate_acceptance(const Eigen::Ref<const Matrix>& A,
                         const Eigen::Ref<const Matrix>& T, double tol) {
  if (A.rows() != T.rows() || A.cols() != T.cols())
    throw Error(Error::Code::InvalidArgument,
                "acceptance and proposal dimensions differ");
  for (Index x = 0; x < A.rows(); ++x) {
    if (A(x, x) != 0.0)
      throw Error(Error::Code::InvalidArgument,
                  "acceptance diagonal must be zero at state " +
                      std::to_string(x));
    for (Index y = 0; y < A.cols(); ++y) {
      if (A(x, y) < -tol || A(x, y) > 1.0 + tol)
        throw Error(Error::Code::InvalidArgument,
                    "acceptance out of [0,1] at " + pair_str(x, y));
      if (T(x, y) == 0.0 && x != y && A(x, y) != 0.0)
        throw Error(Error::Code::InvalidArgument,
                    "acceptance nonzero off proposal support at " +
                        pair_str(x, y));
    }
  }
}

namespace {

void require_positive_target(const Eigen::Ref<const Vector>& pi) {
  for (Index x = 0; x < pi.size(); ++x)
    if (pi[x] <= 0.0)
      throw Error(Error::Code::ZeroTargetMass,
                  "target distribution has no mass at state " +
                      std::to_string(x));
}

}  // namespace

Matrix metropolis_acceptance(const Eigen::Ref<const Vector>& pi,
                             const Eigen::Ref<const Matrix>& T) {
  require_positive_target(pi);
  Matrix A = Matrix::Zero(T.rows(), T.cols());
  for (Index x = 0; x < T.rows(); ++x)
    for (Index y = 0; y < T.cols(); ++y)
      if (x != y && T(x, y) > 0.0)
        A(x, y) = std::min(1.0, (pi[y] * T(y, x)) / (pi[x] * T(x, y)));
  return A;
}

Matrix glauber_acceptance(const Eigen::Ref<const Vector>& pi,
                          const Eigen::Ref<const Matrix>& T) {
  require_positive_target(pi);
  Matrix A = Matrix::Zero(T.rows(), T.cols());
  for (Index x = 0; x < T.rows(); ++x)
    for (Index y = 0; y < T.cols(); ++y)
      if (x != y && T(x, y) > 0.0) {
        const double forward = pi[x] * T(x, y);
        const double backward = pi[y] * T(y, x);
        A(x, y) = backward / (forward + backward);
      }
  return A;
}

Matrix mh_kernel(const Eigen::Ref<const Matrix>& T,
                 const Eigen::Ref<const Matrix>& A) {
  Matrix P = T.cwiseProduct(A);
  for (Index x = 0; x < T.rows(); ++x) {
    const double moved = P.row(x).sum();
    double stay = 1.0 - moved;
    if (stay < -1e-12)
      throw Error(Error::Code::NegativeDiagonal,
                  "rejection mass at state " + std::to_string(x) +
                      " is negative: " + std::to_string(stay));
    P(x, x) = std::max(stay, 0.0);
  }
  return P;
}

Matrix lazy(const Eigen::Ref<const Matrix>& P) {
  return 0.5 * (Matrix::Identity(P.rows(), P.cols()) + P);
}

CVector eigenvalues(const Eigen::Ref<const Matrix>& P) {
  Eigen::EigenSolver<Matrix> solver(P, /*computeEigenvectors=*/false);
  CVector ev = solver.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(),
            [](const Complex& a, const Complex& b) {
              const double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma > mb;
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  return ev;
}

namespace {

/// Number of eigenvalues on the unit circle (within tol) — must be 1 for
/// ergodicity (simple unit eigenvalue, no other unit-modulus eigenvalue).
Index count_unit_modulus(const CVector& ev, double tol) {
  Index count = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(std::abs(ev[i]) - 1.0) <= tol) ++count;
  return count;
}

}  // namespace

Vector stationary_distribution(const Eigen::Ref<const Matrix>& P,
                               const Tolerances& tol) {
  validate_kernel(P, tol.structural);
  const Index n = P.rows();
  Eigen::EigenSolver<Matrix> solver(P.transpose());
  const CVector ev = solver.eigenvalues();

  Index unit = -1;
  Index unit_count = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(std::abs(ev[i]) - 1.0) <= tol.spectral) {
      ++unit_count;
      if (std::abs(ev[i] - Complex(1, 0)) <= tol.spectral) unit = i;
    }
  }
  if (unit_count != 1 || unit < 0)
    throw Error(Error::Code::NotErgodic,
                "kernel has " + std::to_string(unit_count) +
                    " unit-modulus eigenvalues; stationary distribution is "
                    "not unique");

  // Solve (P^T - I) pi = 0 with the normalization sum(pi) = 1 replacing the
  // last (redundant) equation: the standard direct method, more accurate than
  // the raw eigenvector on stiff chains.
  Matrix B = P.transpose() - Matrix::Identity(n, n);
  B.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Vector pi = B.colPivHouseholderQr().solve(rhs);

  // Consistency with the unit eigenvector (ergodicity was checked above).
  Vector pi_eig = solver.eigenvectors().col(unit).real();
  if (pi_eig.sum() < 0) pi_eig = -pi_eig;
  pi_eig = pi_eig.cwiseMax(0.0);
  pi_eig /= pi_eig.sum();
  if (pi.minCoeff() < -tol.spectral || tv_distance(pi, pi_eig) > 1e-6)
    throw Error(Error::Code::NotErgodic,
                "direct solve and unit eigenvector disagree; kernel is not "
                "cleanly ergodic");
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();

  // Cross-check with power iterations from the uniform start.  The step count
  // targets 10/delta mixing times (capped), and the agreement tolerance is the
  // spectral TV bound at that step count with generous slack, so slow chains
  // do not fail spuriously while periodic/reducible ones still would.
  double second = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (i != unit) second = std::max(second, std::abs(ev[i]));
  const double delta = std::max(1.0 - second, 1e-15);
  const long steps =
      std::min<long>(static_cast<long>(std::ceil(10.0 / delta)), 60000);
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Constant(P.rows(), 1.0 / P.rows());
  for (long s = 0; s < steps; ++s) mu = mu * P;
  const double decay = std::pow(std::max(second, 0.0), static_cast<double>(steps));
  const double power_tol =
      std::max(1e-8, 20.0 * decay / std::sqrt(std::max(pi.minCoeff(), 1e-300)));
  if (tv_distance(mu.transpose(), pi) > power_tol)
    throw Error(Error::Code::NotErgodic,
                "power iteration disagrees with the unit eigenvector; kernel "
                "may be periodic or reducible");
  if ((P.transpose() * pi - pi).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(Error::Code::NotErgodic, "stationary residual exceeds 1e-10");
  return pi;
}

bool is_reversible(const Eigen::Ref<const Matrix>& P,
                   const Eigen::Ref<const Vector>& pi, double tol) {
  for (Index x = 0; x < P.rows(); ++x)
    for (Index y = 0; y < x; ++y)
      if (std::abs(pi[x] * P(x, y) - pi[y] * P(y, x)) > tol) return false;
  return true;
}

Matrix discriminant(const Eigen::Ref<const Matrix>& P,
                    const Eigen::Ref<const Vector>& pi, double tol) {
  double worst = 0.0;
  Index wx = 0, wy = 0;
  for (Index x = 0; x < P.rows(); ++x)
    for (Index y = 0; y < x; ++y) {
      const double gap = std::abs(pi[x] * P(x, y) - pi[y] * P(y, x));
      if (gap > worst) { worst = gap; wx = x; wy = y; }
    }
  if (worst > tol)
    throw Error(Error::Code::NotReversible,
                "detailed balance fails worst at " + pair_str(wx, wy) +
                    ": |pi(x)P(x,y) - pi(y)P(y,x)| = " + std::to_string(worst));
  Matrix D(P.rows(), P.cols());
  for (Index x = 0; x < P.rows(); ++x)
    for (Index y = 0; y < P.cols(); ++y)
      D(x, y) = std::sqrt(pi[x] / pi[y]) * P(x, y);
  // Exact symmetry by averaging away roundoff.
  D = 0.5 * (D + D.transpose()).eval();
  return D;
}

double spectral_gap(const Eigen::Ref<const Matrix>& P, const Tolerances& tol) {
  return spectral_gap(P, stationary_distribution(P, tol), tol);
}

double spectral_gap(const Eigen::Ref<const Matrix>& P,
                    const Eigen::Ref<const Vector>& pi, const Tolerances& tol) {
  if (is_reversible(P, pi, tol.reversibility)) {
    const Matrix D = discriminant(P, pi, tol.reversibility);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(D, Eigen::EigenvaluesOnly);
    const Vector ev = solver.eigenvalues();  // ascending
    Index unit_count = 0;
    double second = 0.0;
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(std::abs(ev[i]) - 1.0) <= tol.spectral) ++unit_count;
      else second = std::max(second, std::abs(ev[i]));
    }
    if (unit_count != 1)
      throw Error(Error::Code::NotErgodic,
                  "kernel has " + std::to_string(unit_count) +
                      " unit-modulus eigenvalues");
    return 1.0 - second;
  }
  const CVector ev = eigenvalues(P);
  if (count_unit_modulus(ev, tol.spectral) != 1)
    throw Error(Error::Code::NotErgodic, "kernel is not ergodic");
  return 1.0 - (ev.size() > 1 ? std::abs(ev[1]) : 0.0);
}

int mixing_time(const Eigen::Ref<const Matrix>& P,
                const Eigen::Ref<const Vector>& pi, double eps, int cap) {
  Matrix Pt = P;
  for (int t = 1; t <= cap; ++t) {
    double worst = 0.0;
    for (Index x = 0; x < P.rows(); ++x)
      worst = std::max(worst, tv_distance(Pt.row(x).transpose(), pi));
    if (worst <= eps) return t;
    Pt = (Pt * P).eval();
  }
  throw Error(Error::Code::CapExceeded,
              "mixing time exceeds cap of " + std::to_string(cap) +
                  " iterations at accuracy " + std::to_string(eps));
}

std::pair<double, double> mixing_bounds(double delta, double pi_min, double eps) {
  const double lower = (1.0 / delta - 1.0) * std::log(1.0 / eps);
  const double upper = (1.0 / delta) * std::log(1.0 / (2.0 * eps * std::sqrt(pi_min)));
  return {lower, upper};
}

SpectralReport spectral_report(const Eigen::Ref<const Matrix>& P, double eps,
                               int cap, const Tolerances& tol) {
  SpectralReport report;
  report.epsilon = eps;
  const Vector pi = stationary_distribution(P, tol);
  report.eigenvalues = eigenvalues(P);
  report.delta = spectral_gap(P, pi, tol);
  std::tie(report.mixing_lower, report.mixing_upper) =
      mixing_bounds(report.delta, pi.minCoeff(), eps);

  Matrix Pt = P;
  report.mixing_time = -1;
  for (int t = 1; t <= cap; ++t) {
    double worst = 0.0;
    for (Index x = 0; x < P.rows(); ++x)
      worst = std::max(worst, tv_distance(Pt.row(x).transpose(), pi));
    report.tv_curve.push_back(worst);
    if (worst <= eps) { report.mixing_time = t; break; }
    Pt = (Pt * P).eval();
  }
  return report;
}

}  // namespace qmh
