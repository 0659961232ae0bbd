#ifndef QMH_TYPES_HPP
#define QMH_TYPES_HPP

/**
 * @file types.hpp
 * @brief Scalar/matrix aliases, the library error type, and shared tolerances.
 *
 * Dense Eigen types are the only linear-algebra representation used by the
 * library.  Real double precision is the working scalar everywhere except
 * spectra of non-symmetric kernels and phase gates, which are complex.
 */

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qmh {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix  = MatrixX<double>;
using Vector  = VectorX<double>;
using Complex = std::complex<double>;
using CMatrix = MatrixX<Complex>;
using CVector = VectorX<Complex>;

/** Numerical thresholds shared across the library.  All overridable. */
struct Tolerances {
  /// Row sums, normalization, unitarity: exact-arithmetic identities.
  double structural = 1e-12;
  /// Eigenvalue and singular-value comparisons.
  double spectral = 1e-9;
  /// Detailed-balance and measure-reversibility checks.
  double reversibility = 1e-10;
};

/** Error conditions surfaced by the library, each carrying a typed code. */
class Error : public std::runtime_error {
 public:
  enum class Code {
    InvalidArgument,    ///< malformed sizes, ranges, or configuration
    NonzeroDiagonal,    ///< proposal with T(x,x) != 0
    AsymmetricSupport,  ///< proposal support is not symmetric
    ZeroTargetMass,     ///< target distribution has a non-positive entry
    NegativeDiagonal,   ///< Metropolis-Hastings diagonal went negative
    NotErgodic,         ///< kernel has more than one unit-modulus eigenvalue
    NotReversible,      ///< detailed balance fails for the given target
    CapExceeded,        ///< mixing-time iteration hit its hard cap
    NotErgodicProduct,  ///< PP* has a repeated unit eigenvalue
    InputOffEdgeSet,    ///< state (x,y) outside the directed edge set
    LayoutMismatch,     ///< gate sequence applied to an incompatible layout
    DegenerateRow,      ///< proposal row with (numerically) zero mass
    NonIntegerShift,    ///< drift shift is not an integer number of grid steps
    NotStationaryInput, ///< extraction input is not the fixed walk state
    ZeroOverlap,        ///< initial state orthogonal to the target eigenvector
  };

  Error(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/** Human-readable name of an error code (stable, used in CLI output). */
const char* to_string(Error::Code code);

}  // namespace qmh

#endif  // QMH_TYPES_HPP
