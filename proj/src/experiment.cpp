#include "qmh/experiment.hpp"

#include "qmh/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace qmh {

AcceptanceRule acceptance_rule_from_string(const std::string& s) {
  if (s == "glauber") return AcceptanceRule::Glauber;
  if (s == "metropolis") return AcceptanceRule::Metropolis;
  if (s == "metropolis-lazy") return AcceptanceRule::MetropolisLazy;
  throw Error(Error::Code::InvalidArgument,
              "unknown acceptance rule '" + s +
                  "' (expected glauber, metropolis, or metropolis-lazy)");
}

const char* to_string(AcceptanceRule rule) {
  switch (rule) {
    case AcceptanceRule::Glauber: return "glauber";
    case AcceptanceRule::Metropolis: return "metropolis";
    case AcceptanceRule::MetropolisLazy: return "metropolis-lazy";
  }
  return "?";
}

PreparedChain prepare_chain(const ExperimentConfig& cfg) {
  PreparedChain chain;
  if (cfg.kernel.type == "explicit") {
    chain.pi = cfg.kernel.pi;
    chain.T = cfg.kernel.T;
    validate_probability_vector(chain.pi, cfg.tolerances.structural);
    validate_proposal(chain.T, cfg.tolerances.structural);
  } else if (cfg.kernel.type == "mala") {
    chain.pi = boltzmann_target(cfg.kernel.mala);
    chain.T = mala_proposal(cfg.kernel.mala);
  } else {
    throw Error(Error::Code::InvalidArgument,
                "unknown kernel source '" + cfg.kernel.type +
                    "' (expected explicit or mala)");
  }

  switch (cfg.rule) {
    case AcceptanceRule::Glauber:
      chain.A_full = glauber_acceptance(chain.pi, chain.T);
      chain.A = chain.A_full;
      chain.dual_mode = DualMode::Glauber;
      break;
    case AcceptanceRule::Metropolis:
      chain.A_full = metropolis_acceptance(chain.pi, chain.T);
      chain.A = chain.A_full;
      chain.dual_mode = DualMode::Glauber;  // acceptance used as given
      break;
    case AcceptanceRule::MetropolisLazy:
      chain.A_full = metropolis_acceptance(chain.pi, chain.T);
      chain.A = 0.5 * chain.A_full;
      chain.dual_mode = DualMode::LazyGeneral;
      break;
  }
  chain.P = mh_kernel(chain.T, chain.A_full);
  chain.S = edge_space(chain.T);
  chain.nu = edge_measure(chain.S, chain.pi, chain.T);
  return chain;
}

namespace {

/** Reference coefficient state (|+> (x) |sqrt(nu)>) in C^2 (x) C^|S|. */
Vector plus_sqrt_nu(const Vector& nu) {
  const Index s = nu.size();
  const Vector root = nu.cwiseMax(0.0).cwiseSqrt();
  Vector ref(2 * s);
  ref.head(s) = root / std::sqrt(2.0);
  ref.tail(s) = root / std::sqrt(2.0);
  return ref;
}

/** Default initial coefficient state |+> (x) uniform-over-edges. */
Vector plus_uniform(Index s) {
  Vector psi(2 * s);
  psi.setConstant(1.0 / std::sqrt(2.0 * static_cast<double>(s)));
  return psi;
}

Vector resolve_initial(const std::optional<Vector>& initial, Index s) {
  if (!initial.has_value()) return plus_uniform(s);
  if (initial->size() != 2 * s)
    throw Error(Error::Code::LayoutMismatch,
                "initial coefficient state must have dimension 2 |S|");
  const double norm = initial->norm();
  if (norm < 1e-12)
    throw Error(Error::Code::InvalidArgument, "initial state has zero norm");
  return *initial / norm;
}

/** Map a coefficient state through BoxBar into the edge-pair picture. */
Vector apply_box_bar(const EdgeSpace& S, const Matrix& T, const Matrix& A,
                     const Vector& coeff) {
  const DualKernels K = dual_kernels(S, T, A);
  const Index s = S.size();
  const Matrix box_star = step_isometry(K.P_star);
  const Matrix box = step_isometry(K.P);
  Vector out(2 * s * s);
  out.head(s * s) = box_star * coeff.head(s);
  out.tail(s * s) = box * coeff.tail(s);
  return out;
}

/** Marginal distribution of register r1 of a (herm, r1..r4, flag) state. */
Vector r1_marginal(const Vector& state, Index d) {
  const Index s1 = 2 * d * d * d;
  Vector q = Vector::Zero(d);
  for (Index i = 0; i < state.size(); ++i)
    q[(i / s1) % d] += state[i] * state[i];
  return q;
}

void add_calls(std::map<std::string, long>& calls, const std::string& key,
               long count) {
  calls[key] += count;
}

/** Shared tail: unwind, sample the target register, audit the extraction. */
void finish_run(SampleRun& run, const PreparedChain& chain,
                const Vector& edge_pair_state) {
  const Index d = chain.pi.size();
  const Vector reg_state = embed_edge_pair_state(chain.S, edge_pair_state, d);
  const Extraction ext = extract_pi(reg_state, chain.T, chain.A, chain.pi);
  run.fidelity = std::min(run.fidelity, ext.fidelity);
  add_calls(run.oracle_calls, "O_T_dag", 2);  // O^T contains one, plus the
  add_calls(run.oracle_calls, "O_A_dag", 1);  // final proposal unpreparation

  run.sampled_distribution = r1_marginal(ext.state, d);
  SplitMix64 rng(run.seed);
  run.histogram = sample_histogram(run.sampled_distribution, run.shots, rng);
  const Vector empirical =
      run.histogram.cast<double>() / static_cast<double>(run.shots);
  run.tv_to_target = tv_distance(empirical, chain.pi);
}

}  // namespace

SampleRun algorithm1_exact(const ExperimentConfig& cfg,
                           const std::optional<Vector>& initial_edge_state) {
  const PreparedChain chain = prepare_chain(cfg);
  const Index s = chain.S.size();
  const Vector psi0 = resolve_initial(initial_edge_state, s);
  const Vector ref = plus_sqrt_nu(chain.nu);

  // Projection onto the unit-phase slice of range(BoxBar): the overlap with
  // the fixed coefficient state is the whole story, since BoxBar is an
  // isometry and the slice is one-dimensional.
  const double c = ref.dot(psi0);
  if (std::abs(c) < 1e-12)
    throw Error(Error::Code::ZeroOverlap,
                "initial state has no overlap with the stationary walk state");

  SampleRun run;
  run.shots = cfg.shots;
  run.seed = cfg.seed;
  run.success_probability = c * c;
  run.expected_repetitions = 1.0 / (c * c);
  run.fidelity = 1.0;  // the projected state is exactly the slice

  const Vector projected = apply_box_bar(chain.S, chain.T, chain.A, ref);
  finish_run(run, chain, projected);
  return run;
}

SampleRun algorithm1_qpe(const ExperimentConfig& cfg,
                         const std::optional<Vector>& initial_edge_state) {
  if (cfg.ancilla_bits < 1 || cfg.ancilla_bits > 20)
    throw Error(Error::Code::InvalidArgument,
                "phase-estimation register width must lie in [1, 20]");
  const PreparedChain chain = prepare_chain(cfg);
  const Index s = chain.S.size();
  const Vector psi0 = resolve_initial(initial_edge_state, s);
  const Vector ref = plus_sqrt_nu(chain.nu);

  const double c = ref.dot(psi0);
  if (std::abs(c) < 1e-12)
    throw Error(Error::Code::ZeroOverlap,
                "initial state has no overlap with the stationary walk state");

  // The zero-phase bin of t-bit phase estimation post-selects the uniform
  // average of the first 2^t walk powers: (1/2^t) sum_j W^j |psi>.
  const Matrix W = dual_walk_unitary(chain.S, chain.T, chain.A);
  const long reps = (1L << cfg.ancilla_bits);
  Vector cur = apply_box_bar(chain.S, chain.T, chain.A, psi0);
  Vector avg = cur;
  for (long j = 1; j < reps; ++j) {
    cur = W * cur;
    avg += cur;
  }
  avg /= static_cast<double>(reps);

  SampleRun run;
  run.shots = cfg.shots;
  run.seed = cfg.seed;
  run.success_probability = avg.squaredNorm();
  run.expected_repetitions = 1.0 / run.success_probability;

  // (2^t - 1) walk applications, each {O_T: 2, O_T_dag: 2, O_A: 2, O_A_dag: 2}.
  for (const char* key : {"O_T", "O_T_dag", "O_A", "O_A_dag"})
    add_calls(run.oracle_calls, key, 2 * (reps - 1));

  const Vector post = avg / avg.norm();
  const Vector exact = apply_box_bar(chain.S, chain.T, chain.A, ref);
  const double overlap = exact.dot(post);
  run.fidelity = overlap * overlap;

  finish_run(run, chain, post);
  return run;
}

std::vector<SweepPoint> two_well_sweep(const SweepConfig& cfg) {
  if (cfg.points < 1)
    throw Error(Error::Code::InvalidArgument, "sweep needs at least one point");
  if (!(cfg.from > 0.0) || !(cfg.to > 0.0))
    throw Error(Error::Code::InvalidArgument,
                "sweep endpoints must be positive (log-spaced grid)");
  if (cfg.variable != "beta" && cfg.variable != "tau" && cfg.variable != "scale")
    throw Error(Error::Code::InvalidArgument,
                "sweep variable must be beta, tau, or scale");

  const Vector base_potential = potential_values(cfg.grid);
  std::vector<SweepPoint> points;
  points.reserve(static_cast<size_t>(cfg.points));
  for (int i = 0; i < cfg.points; ++i) {
    const double t = cfg.points == 1
                         ? 0.0
                         : static_cast<double>(i) / (cfg.points - 1);
    const double value =
        std::exp(std::log(cfg.from) + t * (std::log(cfg.to) - std::log(cfg.from)));

    MalaConfig grid = cfg.grid;
    if (cfg.variable == "beta") {
      grid.beta = value;
    } else if (cfg.variable == "tau") {
      grid.tau = value;
    } else {  // scale the potential itself
      grid.potential.name = "table";
      grid.potential.values.assign(base_potential.data(),
                                   base_potential.data() + base_potential.size());
      for (double& u : grid.potential.values) u *= value;
    }

    const Vector pi = boltzmann_target(grid);
    const Matrix T = mala_proposal(grid);
    const Matrix A_full = metropolis_acceptance(pi, T);
    const Matrix P = mh_kernel(T, A_full);

    SweepPoint p;
    p.sweep_value = value;
    p.delta = spectral_gap(P, pi);

    const Matrix A = cfg.lazy ? Matrix(0.5 * A_full) : A_full;
    const EdgeSpace S = edge_space(T);
    const Vector nu = edge_measure(S, pi, T);
    const DeltaStarReport ds = dual_second_singular_value(S, T, A, nu);
    p.delta_star = ds.delta_star;
    p.lambda = ds.lambda;
    p.angular_gap = std::acos(std::clamp(ds.lambda, -1.0, 1.0));
    p.bound = std::acos(std::sqrt(std::clamp(1.0 - p.delta / 2.0, 0.0, 1.0)));
    p.bound_holds = p.angular_gap >= p.bound - 1e-9;
    points.push_back(p);
  }
  return points;
}

GapReport gap_report(const ExperimentConfig& cfg, double epsilon) {
  const PreparedChain chain = prepare_chain(cfg);
  GapReport rep;
  rep.epsilon = epsilon;
  rep.delta = spectral_gap(chain.P, chain.pi);

  const WalkSpectrumReport ws =
      walk_spectrum(chain.S, chain.T, chain.A, chain.nu, false, cfg.tolerances);
  rep.delta_star = ws.delta_star;
  rep.lambda = ws.lambda;
  rep.angular_gap = ws.angular_gap;
  rep.bound = std::acos(std::sqrt(std::clamp(1.0 - rep.delta / 2.0, 0.0, 1.0)));
  rep.bound_holds = rep.angular_gap >= rep.bound - 1e-9;

  const auto [lower, upper] =
      mixing_bounds(rep.delta, chain.pi.minCoeff(), epsilon);
  rep.mixing_lower = lower;
  rep.mixing_upper = upper;

  int m = 0;
  while ((Index{1} << m) < chain.pi.size()) ++m;
  rep.qubits = qubit_audit(m);
  return rep;
}

}  // namespace qmh
