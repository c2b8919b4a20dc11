#pragma once

// Shared numerical substrate: block-structured bases, Hermitian operators,
// exact unitary propagation by eigendecomposition, classical RK4 and
// expectation values.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace molsim::qdyn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Default numerical tolerances. Every routine that checks one of these
/// accepts an override.
struct Tolerances {
  double hermiticity = 1e-12;  // relative Frobenius
  double norm = 1e-10;
  double trace = 1e-8;
  double imag_residue = 1e-10;
};

/// Thrown when an integrator or solver produces non-finite numbers or an
/// invariant that is physically required is violated beyond tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A basis-state descriptor: the tuple of quantum numbers labelling it,
/// e.g. {n_l, n_r} or {n_b, s_1, ..., s_M}.
using Descriptor = std::vector<int>;

struct Block {
  long label = 0;  // conserved quantum number
  std::vector<Descriptor> states;
};

struct BasisIndex {
  std::size_t block = 0;
  std::size_t offset = 0;
  bool operator==(const BasisIndex&) const = default;
};

/// Basis decomposed into blocks of a conserved quantity.
class BlockBasis {
 public:
  explicit BlockBasis(std::vector<Block> blocks);

  std::size_t num_blocks() const { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_.at(b); }
  std::size_t block_dim(std::size_t b) const { return blocks_.at(b).states.size(); }
  std::size_t dim() const { return dim_; }

  std::optional<BasisIndex> find(const Descriptor& d) const;
  BasisIndex index_of(const Descriptor& d) const;
  std::optional<std::size_t> find_label(long label) const;
  const Descriptor& descriptor(const BasisIndex& idx) const;

 private:
  std::vector<Block> blocks_;
  std::map<Descriptor, BasisIndex> index_;
  std::map<long, std::size_t> label_index_;
  std::size_t dim_ = 0;
};

using BasisPtr = std::shared_ptr<const BlockBasis>;

/// Block-diagonal Hermitian operator; Hermiticity is validated on
/// construction.
class HermitianOperator {
 public:
  HermitianOperator(BasisPtr basis, std::vector<Matrix> blocks,
                    double tolerance = Tolerances{}.hermiticity);

  const BasisPtr& basis() const { return basis_; }
  const Matrix& block(std::size_t b) const { return blocks_.at(b); }
  std::size_t num_blocks() const { return blocks_.size(); }

 private:
  BasisPtr basis_;
  std::vector<Matrix> blocks_;
};

class StateVector {
 public:
  StateVector(BasisPtr basis, std::vector<Vector> blocks);
  /// Basis state |d>.
  static StateVector basis_state(BasisPtr basis, const Descriptor& d);

  const BasisPtr& basis() const { return basis_; }
  const Vector& block(std::size_t b) const { return blocks_.at(b); }
  Vector& block(std::size_t b) { return blocks_.at(b); }
  std::size_t num_blocks() const { return blocks_.size(); }

  double squared_norm() const;
  Complex amplitude(const Descriptor& d) const;

 private:
  BasisPtr basis_;
  std::vector<Vector> blocks_;
};

/// Block-diagonal density matrix.
class DensityMatrix {
 public:
  DensityMatrix(BasisPtr basis, std::vector<Matrix> blocks);
  static DensityMatrix pure(const StateVector& psi);

  const BasisPtr& basis() const { return basis_; }
  const Matrix& block(std::size_t b) const { return blocks_.at(b); }
  std::size_t num_blocks() const { return blocks_.size(); }
  Complex trace() const;

 private:
  BasisPtr basis_;
  std::vector<Matrix> blocks_;
};

/// Per-block eigenvalues (ascending) and unitary eigenvector matrices.
struct Spectrum {
  std::vector<RealVector> values;
  std::vector<Matrix> vectors;
};

Spectrum eig_decompose(const HermitianOperator& op);

/// exp(-i H t) |psi>, with H in units where hbar = 1.
StateVector propagate(const StateVector& psi, const HermitianOperator& op, double t);

/// Caches the eigendecomposition for repeated propagation with one
/// Hamiltonian.
class Propagator {
 public:
  explicit Propagator(const HermitianOperator& op);

  StateVector operator()(const StateVector& psi, double t) const;
  /// Eigenbasis coefficients c = V^dagger psi, per block.
  std::vector<Vector> to_eigenbasis(const StateVector& psi) const;
  /// Reconstruct psi(t) from eigenbasis coefficients.
  StateVector from_eigenbasis(const std::vector<Vector>& coeffs, double t) const;

  const Spectrum& spectrum() const { return spectrum_; }
  const BasisPtr& basis() const { return basis_; }

 private:
  BasisPtr basis_;
  Spectrum spectrum_;
};

/// Linear (or general) autonomous right-hand side dy/dt = f(y), written
/// into `out`.
using Derivative = std::function<void(const Vector& y, Vector& out)>;

struct Rk4Sample {
  double t = 0.0;
  Vector y;
};

/// Scratch buffers for repeated RK4 steps.
struct Rk4Workspace {
  Vector k1, k2, k3, k4, tmp;
};

/// One classical RK4 step in place. On return `ws.k1` holds f(y) evaluated
/// at the start of the step.
void rk4_step(const Derivative& f, Vector& y, double dt, Rk4Workspace& ws);

/// Integrates from t=0 to t_end with fixed step dt, sampling every
/// `sample_every` steps (the initial and final state are always sampled).
/// Throws NumericalError naming the step at which a NaN/Inf appears.
std::vector<Rk4Sample> rk4_integrate(const Derivative& f, Vector y0, double t_end,
                                     double dt, std::size_t sample_every = 1);

double expectation(const StateVector& psi, const HermitianOperator& op,
                   const Tolerances& tol = {});
double expectation(const DensityMatrix& rho, const HermitianOperator& op,
                   const Tolerances& tol = {});

/// Relative Frobenius distance between a matrix and its adjoint.
double hermiticity_defect(const Matrix& m);

bool all_finite(const Vector& v);

}  // namespace molsim::qdyn
