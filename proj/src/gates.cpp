#include "qmh/gates.hpp"

#include "qmh/walk.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

namespace qmh {

namespace {

/** Canonical significance rank, most significant = largest. */
int slot_rank(Slot s) {
  switch (s) {
    case Slot::AAcc: return 6;
    case Slot::AHerm: return 5;
    case Slot::R1: return 4;
    case Slot::R2: return 3;
    case Slot::R3: return 2;
    case Slot::R4: return 1;
    case Slot::AFlag: return 0;
  }
  return -1;
}

int slot_width_of(Slot s, int m) {
  switch (s) {
    case Slot::R1:
    case Slot::R2:
    case Slot::R3:
    case Slot::R4:
      return m;
    default:
      return 1;
  }
}

}  // namespace

const char* to_string(Slot slot) {
  switch (slot) {
    case Slot::R1: return "r1";
    case Slot::R2: return "r2";
    case Slot::R3: return "r3";
    case Slot::R4: return "r4";
    case Slot::AFlag: return "a_flag";
    case Slot::AHerm: return "a_herm";
    case Slot::AAcc: return "a_acc";
  }
  return "?";
}

RegisterLayout RegisterLayout::walk(int m) {
  return {m, {Slot::AAcc, Slot::AHerm, Slot::R1, Slot::R2, Slot::R3, Slot::R4,
              Slot::AFlag}};
}

RegisterLayout RegisterLayout::edge_acceptance(int m) {
  return {m, {Slot::R1, Slot::R2, Slot::R3, Slot::AFlag}};
}

RegisterLayout RegisterLayout::coin(int m) {
  return {m, {Slot::R1, Slot::R2, Slot::AFlag}};
}

int RegisterLayout::total_qubits() const {
  int total = 0;
  for (Slot s : slots) total += slot_width_of(s, m);
  return total;
}

bool RegisterLayout::has(Slot s) const {
  return std::find(slots.begin(), slots.end(), s) != slots.end();
}

int RegisterLayout::slot_width(Slot s) const { return slot_width_of(s, m); }

int RegisterLayout::qubit(Slot s, int bit) const {
  if (!has(s) || bit < 0 || bit >= slot_width_of(s, m))
    throw Error(Error::Code::LayoutMismatch,
                std::string("layout has no qubit ") + to_string(s) + "[" +
                    std::to_string(bit) + "]");
  int offset = 0;  // total width of all less significant slots present
  for (Slot other : slots)
    if (slot_rank(other) < slot_rank(s)) offset += slot_width_of(other, m);
  return offset + bit;
}

std::vector<int> RegisterLayout::qubits(Slot s) const {
  std::vector<int> q;
  for (int bit = 0; bit < slot_width(s); ++bit) q.push_back(qubit(s, bit));
  return q;
}

namespace {

struct Engine {
  const RegisterLayout& layout;
  Index dim;

  explicit Engine(const RegisterLayout& l)
      : layout(l), dim(Index{1} << l.total_qubits()) {}

  Index slot_offset(Slot s) const { return layout.qubit(s, 0); }
  Index slot_mask(Slot s) const {
    return (Index{1} << layout.slot_width(s)) - 1;
  }
  Index value(Index i, Slot s) const {
    return (i >> slot_offset(s)) & slot_mask(s);
  }
  /** Index with the value of slot s replaced by v. */
  Index with_value(Index i, Slot s, Index v) const {
    const Index off = slot_offset(s);
    return (i & ~(slot_mask(s) << off)) | (v << off);
  }
  static bool bit(Index i, int q) { return (i >> q) & 1; }

  template <class Scalar, class MapFn>
  void permute(Eigen::Ref<MatrixX<Scalar>> state, MapFn&& map) const {
    MatrixX<Scalar> tmp = state;
    for (Index i = 0; i < dim; ++i) {
      const Index j = map(i);
      if (j != i) state.row(j) = tmp.row(i);
    }
  }

  /** Real 2x2 gate [[g00,g01],[g10,g11]] on one qubit. */
  template <class Scalar>
  void one_qubit(Eigen::Ref<MatrixX<Scalar>> state, int q, double g00,
                 double g01, double g10, double g11) const {
    const Index step = Index{1} << q;
    for (Index i = 0; i < dim; ++i) {
      if (bit(i, q)) continue;
      const auto v0 = state.row(i).eval();
      const auto v1 = state.row(i + step).eval();
      state.row(i) = g00 * v0 + g01 * v1;
      state.row(i + step) = g10 * v0 + g11 * v1;
    }
  }

  /** Acceptance value for register values (x, y); outside the table: 0. */
  static double accept_at(const Matrix& table, Index x, Index y) {
    if (x >= table.rows() || y >= table.cols()) return 0.0;
    return std::clamp(table(x, y), 0.0, 1.0);
  }

  template <class Scalar>
  void coin_rotation(const Gate& g, Eigen::Ref<MatrixX<Scalar>> state) const {
    const Index step = Index{1} << g.target;
    for (Index i = 0; i < dim; ++i) {
      if (bit(i, g.target)) continue;
      if (g.use_reg_c && value(i, g.reg_c) != 0) continue;
      const double a = accept_at(g.table, value(i, g.reg_a), value(i, g.reg_b));
      if (a == 0.0) continue;  // rotation is the identity
      const double c = std::sqrt(1.0 - a);
      const double s = g.adjoint ? -std::sqrt(a) : std::sqrt(a);
      const auto v0 = state.row(i).eval();
      const auto v1 = state.row(i + step).eval();
      state.row(i) = c * v0 - s * v1;
      state.row(i + step) = s * v0 + c * v1;
    }
  }

  void phase_block_z(const Gate& g, Eigen::Ref<CMatrix> state) const {
    const Index step = Index{1} << g.target;
    for (Index i = 0; i < dim; ++i) {
      if (bit(i, g.target)) continue;
      if (g.use_reg_c && value(i, g.reg_c) != 0) continue;
      const double a = accept_at(g.table, value(i, g.reg_a), value(i, g.reg_b));
      double theta = -std::asin(std::sqrt(a));
      if (g.adjoint) theta = -theta;
      state.row(i) *= std::exp(Complex(0.0, theta));
      state.row(i + step) *= std::exp(Complex(0.0, -theta));
    }
  }

  template <class Scalar>
  void reg_unitary(const Gate& g, Eigen::Ref<MatrixX<Scalar>> state) const {
    const int wa = layout.slot_width(g.reg_a);
    const Index da = Index{1} << wa;
    const bool pair = g.table.rows() != da;
    const int wb = pair ? layout.slot_width(g.reg_b) : 0;
    const Index db = Index{1} << wb;
    const Index block = da * db;
    if (g.table.rows() != block || g.table.cols() != block)
      throw Error(Error::Code::LayoutMismatch,
                  "register unitary table does not match the register widths");
    const Matrix M = g.adjoint ? Matrix(g.table.transpose()) : Matrix(g.table);
    MatrixX<Scalar> fiber(block, state.cols());
    for (Index i = 0; i < dim; ++i) {
      if (value(i, g.reg_a) != 0) continue;
      if (pair && value(i, g.reg_b) != 0) continue;
      for (Index va = 0; va < da; ++va)
        for (Index vb = 0; vb < db; ++vb) {
          Index j = with_value(i, g.reg_a, va);
          if (pair) j = with_value(j, g.reg_b, vb);
          fiber.row(va * db + vb) = state.row(j);
        }
      fiber = M.cast<Scalar>() * fiber;
      for (Index va = 0; va < da; ++va)
        for (Index vb = 0; vb < db; ++vb) {
          Index j = with_value(i, g.reg_a, va);
          if (pair) j = with_value(j, g.reg_b, vb);
          state.row(j) = fiber.row(va * db + vb);
        }
    }
  }

  template <class Scalar>
  void reflect_zero(const Gate& g, Eigen::Ref<MatrixX<Scalar>> state) const {
    for (Index i = 0; i < dim; ++i) {
      if (g.control >= 0 && bit(i, g.control) != g.control_value) continue;
      bool zero = true;
      for (int q : g.qubits)
        if (bit(i, q)) {
          zero = false;
          break;
        }
      if (!zero) state.row(i) = -state.row(i);
    }
  }

  template <class Scalar>
  void dispatch(const Gate& g, Eigen::Ref<MatrixX<Scalar>> state) const {
    constexpr bool is_complex = !std::is_same_v<Scalar, double>;
    switch (g.kind) {
      case Gate::Kind::X:
        one_qubit(state, g.target, 0.0, 1.0, 1.0, 0.0);
        break;
      case Gate::Kind::H: {
        const double h = 1.0 / std::sqrt(2.0);
        one_qubit(state, g.target, h, h, h, -h);
        break;
      }
      case Gate::Kind::Phase:
        if constexpr (!is_complex) {
          throw Error(Error::Code::InvalidArgument,
                      "phase gate requires a complex state");
        } else {
          const double theta = g.adjoint ? -g.theta : g.theta;
          const Complex ph = std::exp(Complex(0.0, theta));
          for (Index i = 0; i < dim; ++i)
            if (bit(i, g.target)) state.row(i) *= ph;
        }
        break;
      case Gate::Kind::CnotBlock:
        permute<Scalar>(state, [&](Index i) {
          const Index vb =
              value(i, g.reg_b) ^ value(i, g.reg_a);  // bitwise register XOR
          return with_value(i, g.reg_b, vb);
        });
        break;
      case Gate::Kind::Mcx:
        permute<Scalar>(state, [&](Index i) {
          for (size_t k = 0; k < g.controls.size(); ++k)
            if (bit(i, g.controls[k]) != g.control_values[k]) return i;
          return i ^ (Index{1} << g.target);
        });
        break;
      case Gate::Kind::CRegSwap:
        permute<Scalar>(state, [&](Index i) {
          if (g.control >= 0 && bit(i, g.control) != g.control_value) return i;
          const Index va = value(i, g.reg_a), vb = value(i, g.reg_b);
          return with_value(with_value(i, g.reg_a, vb), g.reg_b, va);
        });
        break;
      case Gate::Kind::DistinctCswap:
        permute<Scalar>(state, [&](Index i) {
          if (g.control >= 0 && bit(i, g.control) != g.control_value) return i;
          const Index va = value(i, g.reg_a), vb = value(i, g.reg_b),
                      vc = value(i, g.reg_c);
          if (va == vb || vb == vc || va == vc) return i;
          return with_value(with_value(i, g.reg_b, vc), g.reg_c, vb);
        });
        break;
      case Gate::Kind::CoinRotation:
        coin_rotation(g, state);
        break;
      case Gate::Kind::PhaseBlockZ:
        if constexpr (!is_complex)
          throw Error(Error::Code::InvalidArgument,
                      "phase-block gate requires a complex state");
        else
          phase_block_z(g, state);
        break;
      case Gate::Kind::RegUnitary:
        reg_unitary(g, state);
        break;
      case Gate::Kind::ReflectZero:
        reflect_zero(g, state);
        break;
    }
  }
};

template <class Scalar>
void apply_impl(const GateSequence& seq, Eigen::Ref<MatrixX<Scalar>> state) {
  const Engine eng(seq.layout);
  if (state.rows() != eng.dim)
    throw Error(Error::Code::LayoutMismatch,
                "state dimension " + std::to_string(state.rows()) +
                    " does not match the layout (2^" +
                    std::to_string(seq.layout.total_qubits()) + ")");
  for (const Gate& g : seq.gates) eng.dispatch(g, state);
}

}  // namespace

void apply(const GateSequence& seq, Eigen::Ref<Matrix> state) {
  apply_impl<double>(seq, state);
}

void apply(const GateSequence& seq, Eigen::Ref<CMatrix> state) {
  apply_impl<Complex>(seq, state);
}

Matrix dense_real(const GateSequence& seq) {
  const Index dim = Index{1} << seq.layout.total_qubits();
  Matrix M = Matrix::Identity(dim, dim);
  qmh::apply(seq, Eigen::Ref<Matrix>(M));
  return M;
}

CMatrix dense(const GateSequence& seq) {
  const Index dim = Index{1} << seq.layout.total_qubits();
  CMatrix M = CMatrix::Identity(dim, dim);
  qmh::apply(seq, Eigen::Ref<CMatrix>(M));
  return M;
}

std::map<std::string, int> call_audit(const GateSequence& seq) {
  std::map<std::string, int> audit;
  for (const Gate& g : seq.gates)
    if (!g.tag.empty()) ++audit[g.tag + (g.adjoint ? "_dag" : "")];
  return audit;
}

namespace {

Gate cnot_block(Slot src, Slot dst) {
  Gate g;
  g.kind = Gate::Kind::CnotBlock;
  g.reg_a = src;
  g.reg_b = dst;
  return g;
}

Gate reg_swap(Slot a, Slot b, int control = -1, bool control_value = true) {
  Gate g;
  g.kind = Gate::Kind::CRegSwap;
  g.reg_a = a;
  g.reg_b = b;
  g.control = control;
  g.control_value = control_value;
  return g;
}

Gate mcx_all_zero(const std::vector<int>& controls, int target) {
  Gate g;
  g.kind = Gate::Kind::Mcx;
  g.controls = controls;
  g.control_values.assign(controls.size(), false);
  g.target = target;
  return g;
}

/**
 * Edge-acceptance oracle gates for role registers (first, second, third) and
 * a flag qubit: the G1..G6 factor list, with the two equality tests and the
 * rotation control realized by XOR copy / all-zero test / XOR uncopy.
 */
std::vector<Gate> edge_acceptance_gates(const RegisterLayout& layout,
                                        Slot first, Slot second, Slot third,
                                        const Matrix& A) {
  const int flag = layout.qubit(Slot::AFlag);
  std::vector<Gate> gates;

  // G1: flip flag if first == second.
  gates.push_back(cnot_block(first, second));
  gates.push_back(mcx_all_zero(layout.qubits(second), flag));
  gates.push_back(cnot_block(first, second));

  // G2: swap(second, third) on flag == 1.
  gates.push_back(reg_swap(second, third, flag, true));

  // G3: acceptance rotation of the flag, controlled on third == first, with
  // the angle read from (first, second).
  gates.push_back(cnot_block(first, third));
  {
    Gate g;
    g.kind = Gate::Kind::CoinRotation;
    g.target = flag;
    g.reg_a = first;
    g.reg_b = second;
    g.reg_c = third;
    g.use_reg_c = true;
    g.table = A;
    g.tag = "O_A";
    gates.push_back(g);
  }
  gates.push_back(cnot_block(first, third));

  // G4: swap(second, third) on flag == 0.
  gates.push_back(reg_swap(second, third, flag, false));

  // G5: flip flag if first == third.
  gates.push_back(cnot_block(first, third));
  gates.push_back(mcx_all_zero(layout.qubits(third), flag));
  gates.push_back(cnot_block(first, third));

  // G6: restore pairwise-distinct states displaced by G4.
  {
    Gate g;
    g.kind = Gate::Kind::DistinctCswap;
    g.reg_a = first;
    g.reg_b = second;
    g.reg_c = third;
    g.control = flag;
    g.control_value = false;
    gates.push_back(g);
  }
  return gates;
}

Gate adjoint_of(Gate g) {
  switch (g.kind) {
    case Gate::Kind::Phase:
    case Gate::Kind::CoinRotation:
    case Gate::Kind::PhaseBlockZ:
    case Gate::Kind::RegUnitary:
      g.adjoint = !g.adjoint;
      break;
    default:
      break;  // X, H, permutations, and reflections are involutions
  }
  return g;
}

std::vector<Gate> reversed_adjoint(const std::vector<Gate>& gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it)
    out.push_back(adjoint_of(*it));
  return out;
}

void append(std::vector<Gate>& to, const std::vector<Gate>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

GateSequence assemble_O_cal_A(int m, const Eigen::Ref<const Matrix>& A) {
  GateSequence seq;
  seq.layout = RegisterLayout::edge_acceptance(m);
  seq.gates = edge_acceptance_gates(seq.layout, Slot::R1, Slot::R2, Slot::R3,
                                    Matrix(A));
  return seq;
}

GateSequence assemble_W(int m, const Eigen::Ref<const Matrix>& T,
                        const Eigen::Ref<const Matrix>& A) {
  const Index d = Index{1} << m;
  if (T.rows() != d || T.cols() != d || A.rows() != d || A.cols() != d)
    throw Error(Error::Code::LayoutMismatch,
                "walk assembly needs proposal and acceptance of size exactly 2^m");

  GateSequence seq;
  seq.layout = RegisterLayout::walk(m);
  const RegisterLayout& L = seq.layout;
  const int flag = L.qubit(Slot::AFlag);
  const int herm = L.qubit(Slot::AHerm);
  const Matrix OT = build_O_T(T);
  const Matrix Acc = A;

  auto proposal_gate = [&](Slot src, Slot dst) {
    Gate g;
    g.kind = Gate::Kind::RegUnitary;
    g.reg_a = src;
    g.reg_b = dst;
    g.table = OT;
    g.tag = "O_T";
    return g;
  };

  // Walk oracle O = O_calA^(r1,r3,r4) O_T^(r1,r3) COPY^(r1->r4), listed in
  // application order.
  std::vector<Gate> seq_O;
  seq_O.push_back(cnot_block(Slot::R1, Slot::R4));
  seq_O.push_back(proposal_gate(Slot::R1, Slot::R3));
  append(seq_O, edge_acceptance_gates(L, Slot::R1, Slot::R3, Slot::R4, Acc));

  // Adjoint-side oracle O* = O_T^(r3,r4) FOLD O_calA^(r1,r2,r3) COPY^(r1->r3);
  // the fold (x,y,z) -> (x, x^y^z, y) is swap(r2,r3); r2 ^= r1; r2 ^= r3.
  std::vector<Gate> seq_O_star;
  seq_O_star.push_back(cnot_block(Slot::R1, Slot::R3));
  append(seq_O_star, edge_acceptance_gates(L, Slot::R1, Slot::R2, Slot::R3, Acc));
  seq_O_star.push_back(reg_swap(Slot::R2, Slot::R3));
  seq_O_star.push_back(cnot_block(Slot::R1, Slot::R2));
  seq_O_star.push_back(cnot_block(Slot::R3, Slot::R2));
  seq_O_star.push_back(proposal_gate(Slot::R3, Slot::R4));

  auto reflect_step_space = [&](bool herm_value) {
    Gate g;
    g.kind = Gate::Kind::ReflectZero;
    g.qubits = L.qubits(Slot::R3);
    for (int q : L.qubits(Slot::R4)) g.qubits.push_back(q);
    g.qubits.push_back(flag);
    g.control = herm;
    g.control_value = herm_value;
    return g;
  };

  // Shift unitary X (x) SWAP_pairs ...
  {
    Gate x;
    x.kind = Gate::Kind::X;
    x.target = herm;
    seq.gates.push_back(x);
  }
  seq.gates.push_back(reg_swap(Slot::R1, Slot::R3));
  seq.gates.push_back(reg_swap(Slot::R2, Slot::R4));

  // ... then the herm-controlled reflections through the step subspaces,
  // each conjugated by its (unconditional) oracle: on herm = 0 the adjoint
  // pair O* (2|0><0| - 1) O*^T, on herm = 1 the forward pair.
  append(seq.gates, reversed_adjoint(seq_O_star));
  seq.gates.push_back(reflect_step_space(false));
  append(seq.gates, seq_O_star);

  append(seq.gates, reversed_adjoint(seq_O));
  seq.gates.push_back(reflect_step_space(true));
  append(seq.gates, seq_O);

  return seq;
}

QubitAudit qubit_audit(int m) {
  QubitAudit a;
  a.m = m;
  a.walk_total = 4 * m + 3;
  a.cswap_total = 2 * m + 1;
  a.literature_rows = "2N + m + 2; 5 p_f d + d_u";
  return a;
}

}  // namespace qmh
