#ifndef QMH_GATES_HPP
#define QMH_GATES_HPP

/**
 * @file gates.hpp
 * @brief Qubit-register layouts, gate sequences, and a dense statevector
 *        simulator for the walk circuits.
 *
 * Layout convention.  A layout holds some of the slots (r1, r2, r3, r4,
 * a_flag, a_herm, a_acc); each register has m qubits.  Significance order of
 * the slots present, most significant first:
 *     a_acc > a_herm > r1 > r2 > r3 > r4 > a_flag,
 * and within a register bit j of the value has weight 2^j (so a register's
 * qubit list runs lsb -> msb).  A basis index of the walk layout is therefore
 *     ((((x d + y) d + z) d + t) * 2 + flag  [+ herm, acc above],  d = 2^m,
 * which matches the register-picture matrix operators entry for entry.
 *
 * Gate application is left to right: apply(seq, psi) computes
 * G_k ... G_2 G_1 |psi>.
 */

#include "qmh/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qmh {

/** Named qubit slots of the walk circuits. */
enum class Slot { R1, R2, R3, R4, AFlag, AHerm, AAcc };

const char* to_string(Slot slot);

/**
 * Assignment of slots to global qubit indices.  The full walk layout has
 * 4m + 3 qubits; sub-layouts (e.g. the 3m + 1 qubits of the edge-acceptance
 * oracle) list only the slots they use.
 */
struct RegisterLayout {
  int m = 1;                     ///< qubits per state register
  std::vector<Slot> slots;       ///< slots present, any order

  /** Full walk layout: r1..r4, a_flag, a_herm, a_acc (4m + 3 qubits). */
  static RegisterLayout walk(int m);
  /** Edge-acceptance oracle layout: r1, r2, r3, a_flag (3m + 1 qubits). */
  static RegisterLayout edge_acceptance(int m);
  /** Coin encoding layout: r1, r2, a_flag (2m + 1 qubits), flag = coin. */
  static RegisterLayout coin(int m);

  int total_qubits() const;
  bool has(Slot s) const;
  int slot_width(Slot s) const;          ///< m for registers, 1 for ancillae
  /** Global index of bit `bit` (weight 2^bit) of slot `s`. */
  int qubit(Slot s, int bit = 0) const;  // @throws Error{LayoutMismatch}
  /** All qubits of a slot, lsb first. */
  std::vector<int> qubits(Slot s) const;
};

/** One gate.  Register-level gates address whole slots. */
struct Gate {
  enum class Kind {
    X,            ///< Pauli X on `target` qubit
    H,            ///< Hadamard on `target` qubit
    Phase,        ///< diag(1, e^{i theta}) on `target` qubit
    CnotBlock,    ///< bitwise reg_b ^= reg_a (m CNOTs)
    Mcx,          ///< X on `target` if all `controls` match `control_values`
    CRegSwap,     ///< swap reg_a, reg_b (qubit-wise), optionally 1-qubit controlled
    DistinctCswap,///< swap reg_b, reg_c if reg_a, reg_b, reg_c pairwise
                  ///< distinct and control qubit matches (value-symmetric in
                  ///< reg_b <-> reg_c, hence unitary)
    CoinRotation, ///< exp(i theta(x,y) Y) on `target` with theta = -asin(sqrt(A(x,y))),
                  ///< (x,y) read from (reg_a, reg_b); fires only when the
                  ///< qubits of reg_c (if set) are all |0> — the copy/uncopy
                  ///< equality trick supplies that pattern
    PhaseBlockZ,  ///< exp(i theta(x,y) Z) on `target`, (x,y) from (reg_a, reg_b)
    RegUnitary,   ///< dense unitary on one or two whole registers
    ReflectZero,  ///< 2|0..0><0..0| - 1 on `qubits`, optionally controlled
  };

  Kind kind;
  // qubit-addressed fields
  int target = -1;
  std::vector<int> controls;        ///< for Mcx
  std::vector<bool> control_values; ///< required values for Mcx
  std::vector<int> qubits;          ///< for ReflectZero
  int control = -1;                 ///< optional single control qubit (-1: none)
  bool control_value = true;
  // slot-addressed fields
  Slot reg_a = Slot::R1, reg_b = Slot::R1, reg_c = Slot::R1;
  bool use_reg_c = false;
  double theta = 0.0;    ///< Phase angle
  Matrix table;          ///< CoinRotation/PhaseBlockZ: A-values; RegUnitary: matrix
  bool adjoint = false;  ///< CoinRotation/PhaseBlockZ/RegUnitary: apply transpose/inverse
  std::string tag;       ///< oracle audit tag ("O_T", "O_A", ...; empty: untagged)
};

/** A gate list bound to a layout. */
struct GateSequence {
  RegisterLayout layout;
  std::vector<Gate> gates;

  int total_qubits() const { return layout.total_qubits(); }
};

/**
 * Apply a sequence to statevector columns in place (left to right).
 * @throws Error{LayoutMismatch} if the state dimension is not 2^total_qubits.
 * @throws Error{InvalidArgument} if a complex-only gate (Phase, PhaseBlockZ)
 *         is applied to a real state.
 */
void apply(const GateSequence& seq, Eigen::Ref<Matrix> state);
void apply(const GateSequence& seq, Eigen::Ref<CMatrix> state);

/** Dense matrix of a sequence (small layouts only). */
Matrix dense_real(const GateSequence& seq);
CMatrix dense(const GateSequence& seq);

/** Count of tagged oracle calls ("O_T", "O_T_dag", "O_A", "O_A_dag", ...). */
std::map<std::string, int> call_audit(const GateSequence& seq);

/**
 * Gate realization of the edge-acceptance oracle on layout
 * edge_acceptance(m), densely equal to build_O_cal_A of the zero-padded
 * acceptance matrix (d = 2^m).  Steps: equality flip (r1 vs r2) via
 * copy/MCX/uncopy; swap(r2,r3) on flag=1; acceptance rotation on the flag
 * coin controlled on r3 == r1 (copy/rotate/uncopy); swap(r2,r3) on flag=0;
 * equality flip (r1 vs r3); distinctness-controlled swap(r2,r3) on flag=0,
 * which restores pairwise-distinct inputs.
 */
GateSequence assemble_O_cal_A(int m, const Eigen::Ref<const Matrix>& A);

/**
 * Gate realization of the full walk W = (2 BoxBar BoxBar^T - 1)(X (x) SWAP)
 * on layout walk(m) (a_acc idle), densely equal to walk_register_unitary(T, A)
 * on the a_acc = 0 block; T and A must be exactly 2^m x 2^m:
 *   X on a_herm; pairwise register swap (r1,r2) <-> (r3,r4); then each
 *   herm-controlled reflection 2 Box Box^T - 1 realized as
 *   O (2|0><0| - 1)_(r3,r4,flag) O^T with O the walk oracle gate sequence.
 * Call audit per application: {O_T: 2, O_T_dag: 2, O_A: 2, O_A_dag: 2}.
 */
GateSequence assemble_W(int m, const Eigen::Ref<const Matrix>& T,
                        const Eigen::Ref<const Matrix>& A);

/** Static qubit budgets. */
struct QubitAudit {
  int m = 0;
  int walk_total = 0;        ///< 4m + 3 (four registers + flag, herm, coin)
  int cswap_total = 0;       ///< 2m + 1 (two registers + coin)
  /// Published budgets of the alternative constructions, for comparison
  /// tables: "2N + m + 2" (amplitude-update walk on N-spin systems) and
  /// "5 p_f d + d_u" (phase-estimated point sampler); not computed here.
  std::string literature_rows;
};

QubitAudit qubit_audit(int m);

}  // namespace qmh

#endif  // QMH_GATES_HPP
