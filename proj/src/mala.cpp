#include "qmh/mala.hpp"

#include "qmh/chain.hpp"
#include "qmh/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace qmh {

namespace {

void validate_grid(const MalaConfig& cfg) {
  if (cfg.bits < 1 || cfg.bits > 20)
    throw Error(Error::Code::InvalidArgument,
                "grid bits must lie in [1, 20], got " + std::to_string(cfg.bits));
  if (!(cfg.hi > cfg.lo))
    throw Error(Error::Code::InvalidArgument, "grid needs hi > lo");
  if (!(cfg.tau > 0.0))
    throw Error(Error::Code::InvalidArgument, "Langevin step size must be positive");
  if (!(cfg.beta > 0.0))
    throw Error(Error::Code::InvalidArgument, "inverse temperature must be positive");
}

Index wrap_index(Index i, Index n) { return ((i % n) + n) % n; }

}  // namespace

double two_well(double x) {
  const double x2 = x * x;
  return (x2 * x2 - x2) / 32.0;
}

Vector potential_values(const MalaConfig& cfg) {
  validate_grid(cfg);
  const Index n = cfg.n();
  Vector U(n);
  if (cfg.potential.name == "two_well") {
    for (Index i = 0; i < n; ++i) U[i] = two_well(cfg.position(i));
  } else if (cfg.potential.name == "table") {
    if (static_cast<Index>(cfg.potential.values.size()) != n)
      throw Error(Error::Code::InvalidArgument,
                  "potential table has " +
                      std::to_string(cfg.potential.values.size()) +
                      " entries, grid has " + std::to_string(n));
    for (Index i = 0; i < n; ++i)
      U[i] = cfg.potential.values[static_cast<size_t>(i)];
  } else {
    throw Error(Error::Code::InvalidArgument,
                "unknown potential '" + cfg.potential.name + "'");
  }
  return U;
}

Vector potential_gradient(const MalaConfig& cfg) {
  const Vector U = potential_values(cfg);
  const Index n = cfg.n();
  const double h = cfg.h();
  Vector grad(n);
  for (Index i = 0; i < n; ++i)
    grad[i] = (U[wrap_index(i + 1, n)] - U[wrap_index(i - 1, n)]) / (2.0 * h);
  return grad;
}

Vector boltzmann_target(const MalaConfig& cfg) {
  const Vector U = potential_values(cfg);
  const double u_min = U.minCoeff();
  Vector pi = (-cfg.beta * (U.array() - u_min)).exp().matrix();
  pi /= pi.sum();
  return pi;
}

Vector wrapped_gaussian_density(const MalaConfig& cfg, double mean,
                                double sigma2) {
  validate_grid(cfg);
  if (!(sigma2 > 0.0))
    throw Error(Error::Code::InvalidArgument, "variance must be positive");
  const Index n = cfg.n();
  const double L = cfg.hi - cfg.lo;
  const double sigma = std::sqrt(sigma2);
  // Enough periodic images that the truncated tails are below 1e-300.
  const long images = std::max<long>(3, static_cast<long>(std::ceil(40.0 * sigma / L)) + 1);
  Vector rho = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const double base = cfg.position(i) - mean;
    double sum = 0.0;
    for (long k = -images; k <= images; ++k) {
      const double dxk = base + static_cast<double>(k) * L;
      sum += std::exp(-dxk * dxk / (2.0 * sigma2));
    }
    rho[i] = sum;
  }
  return rho;
}

Matrix mala_proposal(const MalaConfig& cfg) {
  const Index n = cfg.n();
  const Vector grad = potential_gradient(cfg);
  Matrix T(n, n);
  for (Index i = 0; i < n; ++i) {
    const double mean = cfg.position(i) - cfg.tau * cfg.beta * grad[i];
    Vector row = wrapped_gaussian_density(cfg, mean, 2.0 * cfg.tau);
    row[i] = 0.0;
    const double mass = row.sum();
    if (!(mass > 1e-14))
      throw Error(Error::Code::DegenerateRow,
                  "proposal row " + std::to_string(i) +
                      " has no off-diagonal mass");
    T.row(i) = row.transpose() / mass;
  }
  return T;
}

Vector gaussian_state(const MalaConfig& cfg) {
  Vector rho = wrapped_gaussian_density(cfg, cfg.position(0), 2.0 * cfg.tau);
  rho /= rho.sum();
  return rho.cwiseSqrt();
}

CMatrix diagonal_phase(const std::vector<long>& f, Index n) {
  if (static_cast<Index>(f.size()) != n)
    throw Error(Error::Code::LayoutMismatch,
                "phase table size must match the register dimension");
  CMatrix V = CMatrix::Zero(n, n);
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (Index x = 0; x < n; ++x)
    V(x, x) = std::exp(Complex(0.0, w * static_cast<double>(f[static_cast<size_t>(x)])));
  return V;
}

std::vector<long> grad_shift(const MalaConfig& cfg, ShiftPolicy policy) {
  const Vector grad = potential_gradient(cfg);
  const double h = cfg.h();
  std::vector<long> shifts(static_cast<size_t>(cfg.n()));
  for (Index i = 0; i < cfg.n(); ++i) {
    const double raw = cfg.tau * cfg.beta * grad[i] / h;
    const double rounded = std::nearbyint(raw);
    if (policy == ShiftPolicy::Strict && std::abs(raw - rounded) > 1e-9)
      throw Error(Error::Code::NonIntegerShift,
                  "drift at grid point " + std::to_string(i) + " is " +
                      std::to_string(raw) + " steps, not an integer");
    shifts[static_cast<size_t>(i)] = static_cast<long>(rounded);
  }
  return shifts;
}

Matrix shift_operator(const std::vector<long>& f, Index n) {
  if (static_cast<Index>(f.size()) != n)
    throw Error(Error::Code::LayoutMismatch,
                "shift table size must match the register dimension");
  Matrix U = Matrix::Zero(n * n, n * n);
  for (Index x = 0; x < n; ++x) {
    const Index s = wrap_index(static_cast<Index>(f[static_cast<size_t>(x)]), n);
    for (Index y = 0; y < n; ++y) U(x * n + wrap_index(y + s, n), x * n + y) = 1.0;
  }
  return U;
}

CMatrix shift_operator_qpe(const std::vector<long>& f, Index n) {
  if (static_cast<Index>(f.size()) != n)
    throw Error(Error::Code::LayoutMismatch,
                "shift table size must match the register dimension");
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  CMatrix Q(n, n);  // QFT |y> = n^{-1/2} sum_j e^{+2 pi i j y / n} |j>
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j)
    for (Index y = 0; y < n; ++y)
      Q(j, y) = scale * std::exp(Complex(0.0, w * static_cast<double>(j * y)));

  CMatrix U = CMatrix::Zero(n * n, n * n);
  CVector phases(n);
  for (Index x = 0; x < n; ++x) {
    const double fx = static_cast<double>(f[static_cast<size_t>(x)]);
    for (Index j = 0; j < n; ++j)
      phases[j] = std::exp(Complex(0.0, w * fx * static_cast<double>(j)));
    // block_x = QFT^dag diag_j(e^{2 pi i f(x) j / n}) QFT
    U.block(x * n, x * n, n, n) = Q.adjoint() * phases.asDiagonal() * Q;
  }
  return U;
}

MalaProposalOracle mala_O_T(const MalaConfig& cfg, double tolerance) {
  const Index n = cfg.n();
  const Matrix T = mala_proposal(cfg);
  const Vector g = gaussian_state(cfg);
  const Matrix G = unitary_completion(g, n);

  // U_drift centres the zero-centred profile at the proposal mean: the shift
  // table combines the source index with the rounded negative drift.
  const std::vector<long> drift = grad_shift(cfg, ShiftPolicy::Round);
  std::vector<long> f(static_cast<size_t>(n));
  for (Index x = 0; x < n; ++x)
    f[static_cast<size_t>(x)] =
        static_cast<long>(wrap_index(x - static_cast<Index>(drift[static_cast<size_t>(x)]), n));

  MalaProposalOracle out;
  Matrix prep = Matrix::Zero(n * n, n * n);  // 1 (x) G
  for (Index x = 0; x < n; ++x) prep.block(x * n, x * n, n, n) = G;
  out.O_T = shift_operator(f, n) * prep;

  out.quantum_rows.resize(n, n);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      const double amp = out.O_T(x * n + y, x * n + 0);
      out.quantum_rows(x, y) = amp * amp;
    }

  out.max_row_tv = 0.0;
  for (Index x = 0; x < n; ++x)
    out.max_row_tv =
        std::max(out.max_row_tv, tv_distance(out.quantum_rows.row(x), T.row(x)));
  out.tolerance = tolerance;
  out.within_tolerance = out.max_row_tv <= tolerance;
  return out;
}

GateSequence diagonalize_O_A(int m, const Eigen::Ref<const Matrix>& A) {
  GateSequence seq;
  seq.layout = RegisterLayout::coin(m);
  const int coin = seq.layout.qubit(Slot::AFlag);

  auto phase = [&](double theta) {
    Gate g;
    g.kind = Gate::Kind::Phase;
    g.target = coin;
    g.theta = theta;
    return g;
  };
  auto hadamard = [&] {
    Gate g;
    g.kind = Gate::Kind::H;
    g.target = coin;
    return g;
  };

  // O_A = S H e^{i theta(x,y) Z} H S^dag on the coin (application order
  // right to left), theta = -asin(sqrt(A(x,y))).
  seq.gates.push_back(phase(-std::numbers::pi / 2.0));  // S^dag
  seq.gates.push_back(hadamard());
  {
    Gate g;
    g.kind = Gate::Kind::PhaseBlockZ;
    g.target = coin;
    g.reg_a = Slot::R1;
    g.reg_b = Slot::R2;
    g.table = A;
    g.tag = "O_A_diag";
    seq.gates.push_back(g);
  }
  seq.gates.push_back(hadamard());
  seq.gates.push_back(phase(std::numbers::pi / 2.0));  // S
  return seq;
}

}  // namespace qmh
