#include "molsim/qdyn.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>
#include <sstream>

namespace molsim::qdyn {

BlockBasis::BlockBasis(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!label_index_.emplace(blocks_[b].label, b).second) {
      throw std::invalid_argument("BlockBasis: duplicate block label " +
                                  std::to_string(blocks_[b].label));
    }
    const auto& states = blocks_[b].states;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!index_.emplace(states[i], BasisIndex{b, i}).second) {
        throw std::invalid_argument("BlockBasis: duplicate basis state in block " +
                                    std::to_string(blocks_[b].label));
      }
    }
    dim_ += states.size();
  }
}

std::optional<BasisIndex> BlockBasis::find(const Descriptor& d) const {
  auto it = index_.find(d);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

BasisIndex BlockBasis::index_of(const Descriptor& d) const {
  auto idx = find(d);
  if (!idx) throw std::out_of_range("BlockBasis: descriptor not in basis");
  return *idx;
}

std::optional<std::size_t> BlockBasis::find_label(long label) const {
  auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

const Descriptor& BlockBasis::descriptor(const BasisIndex& idx) const {
  return blocks_.at(idx.block).states.at(idx.offset);
}

double hermiticity_defect(const Matrix& m) {
  const double scale = m.norm();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / scale;
}

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

namespace {

void check_shape(const BlockBasis& basis, std::size_t nblocks, const char* what) {
  if (nblocks != basis.num_blocks()) {
    throw std::invalid_argument(std::string(what) + ": block count does not match basis");
  }
}

void require_same_basis(const BasisPtr& a, const BasisPtr& b, const char* what) {
  if (a.get() != b.get()) {
    throw std::invalid_argument(std::string(what) + ": operands live on different bases");
  }
}

}  // namespace

HermitianOperator::HermitianOperator(BasisPtr basis, std::vector<Matrix> blocks,
                                     double tolerance)
    : basis_(std::move(basis)), blocks_(std::move(blocks)) {
  check_shape(*basis_, blocks_.size(), "HermitianOperator");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto d = static_cast<Eigen::Index>(basis_->block_dim(b));
    if (blocks_[b].rows() != d || blocks_[b].cols() != d) {
      throw std::invalid_argument("HermitianOperator: block " +
                                  std::to_string(basis_->block(b).label) +
                                  " has wrong dimensions");
    }
    const double defect = hermiticity_defect(blocks_[b]);
    if (defect > tolerance) {
      std::ostringstream msg;
      msg << "HermitianOperator: block " << basis_->block(b).label
          << " is not Hermitian (relative defect " << defect << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

StateVector::StateVector(BasisPtr basis, std::vector<Vector> blocks)
    : basis_(std::move(basis)), blocks_(std::move(blocks)) {
  check_shape(*basis_, blocks_.size(), "StateVector");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].size() != static_cast<Eigen::Index>(basis_->block_dim(b))) {
      throw std::invalid_argument("StateVector: block size mismatch");
    }
  }
}

StateVector StateVector::basis_state(BasisPtr basis, const Descriptor& d) {
  const auto idx = basis->index_of(d);
  std::vector<Vector> blocks;
  blocks.reserve(basis->num_blocks());
  for (std::size_t b = 0; b < basis->num_blocks(); ++b) {
    blocks.push_back(Vector::Zero(static_cast<Eigen::Index>(basis->block_dim(b))));
  }
  blocks[idx.block][static_cast<Eigen::Index>(idx.offset)] = 1.0;
  return StateVector(std::move(basis), std::move(blocks));
}

double StateVector::squared_norm() const {
  double s = 0.0;
  for (const auto& v : blocks_) s += v.squaredNorm();
  return s;
}

Complex StateVector::amplitude(const Descriptor& d) const {
  const auto idx = basis_->index_of(d);
  return blocks_[idx.block][static_cast<Eigen::Index>(idx.offset)];
}

DensityMatrix::DensityMatrix(BasisPtr basis, std::vector<Matrix> blocks)
    : basis_(std::move(basis)), blocks_(std::move(blocks)) {
  check_shape(*basis_, blocks_.size(), "DensityMatrix");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  std::vector<Matrix> blocks;
  blocks.reserve(psi.num_blocks());
  for (std::size_t b = 0; b < psi.num_blocks(); ++b) {
    blocks.push_back(psi.block(b) * psi.block(b).adjoint());
  }
  return DensityMatrix(psi.basis(), std::move(blocks));
}

Complex DensityMatrix::trace() const {
  Complex t = 0.0;
  for (const auto& m : blocks_) t += m.trace();
  return t;
}

Spectrum eig_decompose(const HermitianOperator& op) {
  Spectrum s;
  s.values.reserve(op.num_blocks());
  s.vectors.reserve(op.num_blocks());
  for (std::size_t b = 0; b < op.num_blocks(); ++b) {
    const Matrix& h = op.block(b);
    if (h.rows() == 0) {
      s.values.emplace_back();
      s.vectors.emplace_back();
      continue;
    }
    if (h.imag().isZero(0.0)) {
      // real symmetric blocks are common (all counting and sector models); the
      // real solver is several times faster
      const Eigen::MatrixXd sym = 0.5 * (h.real() + h.real().transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
      if (solver.info() != Eigen::Success) {
        throw NumericalError("eig_decompose: eigensolver failed on block " +
                             std::to_string(op.basis()->block(b).label));
      }
      s.values.push_back(solver.eigenvalues());
      s.vectors.push_back(solver.eigenvectors().cast<Complex>());
      continue;
    }
    // Symmetrize so round-off asymmetry does not leak into the eigenvectors.
    const Matrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eig_decompose: eigensolver failed on block " +
                           std::to_string(op.basis()->block(b).label));
    }
    s.values.push_back(solver.eigenvalues());
    s.vectors.push_back(solver.eigenvectors());
  }
  return s;
}

Propagator::Propagator(const HermitianOperator& op)
    : basis_(op.basis()), spectrum_(eig_decompose(op)) {}

std::vector<Vector> Propagator::to_eigenbasis(const StateVector& psi) const {
  require_same_basis(basis_, psi.basis(), "Propagator");
  std::vector<Vector> c;
  c.reserve(psi.num_blocks());
  for (std::size_t b = 0; b < psi.num_blocks(); ++b) {
    c.push_back(spectrum_.vectors[b].adjoint() * psi.block(b));
  }
  return c;
}

StateVector Propagator::from_eigenbasis(const std::vector<Vector>& coeffs, double t) const {
  std::vector<Vector> out;
  out.reserve(coeffs.size());
  for (std::size_t b = 0; b < coeffs.size(); ++b) {
    const RealVector& lam = spectrum_.values[b];
    Vector phased(coeffs[b].size());
    for (Eigen::Index k = 0; k < phased.size(); ++k) {
      phased[k] = std::polar(1.0, -lam[k] * t) * coeffs[b][k];
    }
    out.push_back(spectrum_.vectors[b] * phased);
  }
  return StateVector(basis_, std::move(out));
}

StateVector Propagator::operator()(const StateVector& psi, double t) const {
  return from_eigenbasis(to_eigenbasis(psi), t);
}

StateVector propagate(const StateVector& psi, const HermitianOperator& op, double t) {
  require_same_basis(psi.basis(), op.basis(), "propagate");
  return Propagator(op)(psi, t);
}

void rk4_step(const Derivative& f, Vector& y, double dt, Rk4Workspace& ws) {
  ws.k1.resize(y.size());
  ws.k2.resize(y.size());
  ws.k3.resize(y.size());
  ws.k4.resize(y.size());
  f(y, ws.k1);
  ws.tmp = y + (0.5 * dt) * ws.k1;
  f(ws.tmp, ws.k2);
  ws.tmp = y + (0.5 * dt) * ws.k2;
  f(ws.tmp, ws.k3);
  ws.tmp = y + dt * ws.k3;
  f(ws.tmp, ws.k4);
  y += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

std::vector<Rk4Sample> rk4_integrate(const Derivative& f, Vector y0, double t_end,
                                     double dt, std::size_t sample_every) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_integrate: dt must be positive");
  if (t_end < 0.0) throw std::invalid_argument("rk4_integrate: t_end must be >= 0");
  if (sample_every == 0) sample_every = 1;

  const auto nsteps = static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9)));
  const double h = nsteps > 0 ? t_end / static_cast<double>(nsteps) : dt;

  std::vector<Rk4Sample> out;
  out.push_back({0.0, y0});
  Rk4Workspace ws;
  Vector y = std::move(y0);
  for (std::size_t step = 1; step <= nsteps; ++step) {
    rk4_step(f, y, h, ws);
    if (!all_finite(y)) {
      throw NumericalError("rk4_integrate: non-finite state at step " + std::to_string(step));
    }
    if (step % sample_every == 0 || step == nsteps) {
      out.push_back({static_cast<double>(step) * h, y});
    }
  }
  return out;
}

double expectation(const StateVector& psi, const HermitianOperator& op, const Tolerances& tol) {
  require_same_basis(psi.basis(), op.basis(), "expectation");
  const double n2 = psi.squared_norm();
  if (std::abs(n2 - 1.0) > tol.trace) {
    throw std::invalid_argument("expectation: state is not normalized");
  }
  Complex acc = 0.0;
  for (std::size_t b = 0; b < psi.num_blocks(); ++b) {
    acc += psi.block(b).dot(op.block(b) * psi.block(b));
  }
  if (std::abs(acc.imag()) > tol.imag_residue * std::max(1.0, std::abs(acc.real()))) {
    throw NumericalError("expectation: imaginary residue exceeds tolerance");
  }
  return acc.real();
}

double expectation(const DensityMatrix& rho, const HermitianOperator& op, const Tolerances& tol) {
  require_same_basis(rho.basis(), op.basis(), "expectation");
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw std::invalid_argument("expectation: density matrix trace differs from 1");
  }
  Complex acc = 0.0;
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    acc += (rho.block(b) * op.block(b)).trace();
  }
  if (std::abs(acc.imag()) > tol.imag_residue * std::max(1.0, std::abs(acc.real()))) {
    throw NumericalError("expectation: imaginary residue exceeds tolerance");
  }
  return acc.real();
}

}  // namespace molsim::qdyn
