#pragma once

// Double-well molecular micromaser: pulsed photo-association gain acting on
// each well, zero-temperature molecular loss, inter-well tunneling and
// on-site collisions, integrated as a coarse-grained master equation.
//
// Units: time in 1/gamma, rates in gamma. The density matrix is stored
// block-diagonally in the total molecule number N = n_l + n_r; inside block N
// the states are ordered by n_l.

#include "molsim/qdyn.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace molsim::micromaser {

using qdyn::Complex;
using qdyn::Matrix;
using qdyn::Vector;

enum class Well { left, right };

struct MicromaserParams {
  double n_ex = 10.0;     // pump cycles per molecule lifetime, 1/(gamma T)
  double theta = 3.141592653589793;  // pump parameter sqrt(N_ex)|chi|tau
  double u_b = 0.0;       // U_b / gamma
  double t_j = 0.0;       // J_b / gamma
  double eta = 0.0;       // (2 omega_f - omega_b) / 2|chi|
  double beta = 0.0;      // (2 U_x - U_b) / 2|chi|
  int n_max = 12;         // Fock cutoff per well; <= 0 selects automatically
  double dt = 1e-3;       // requested RK4 step (clamped for stability)
  double t_max = 50.0;    // integration horizon
  double steady_tol = 1e-8;       // on the entrywise 1-norm of drho/dt
  double sample_interval = 0.1;   // trajectory sampling period

  void validate() const;
  double gamma_t() const { return 1.0 / n_ex; }
  double chi_tau() const;
  bool resonant() const { return eta == 0.0 && beta == 0.0; }
};

/// Smallest per-well cutoff for which the isolated-well detailed-balance
/// tail beyond the cutoff is negligible (< 1e-10), with extra headroom when
/// tunneling mixes the wells. Starting cutoff when n_max <= 0.
int auto_n_max(const MicromaserParams& p);

/// Two-mode density matrix restricted to blocks of equal total molecule
/// number in bra and ket.
class TwoModeDensityMatrix {
 public:
  explicit TwoModeDensityMatrix(int n_max);
  static TwoModeDensityMatrix vacuum(int n_max);
  /// |psi><psi| for psi = sum_k amps[k] |n_l, n_r>, all terms with one N.
  struct Amplitude {
    int n_l;
    int n_r;
    Complex value;
  };
  static TwoModeDensityMatrix pure(int n_max, std::span<const Amplitude> amps);

  int n_max() const { return n_max_; }
  int max_total() const { return 2 * n_max_; }
  int block_lo(int total) const;
  int block_hi(int total) const;
  int block_dim(int total) const { return block_hi(total) - block_lo(total) + 1; }

  bool contains(int n_l, int n_r) const;
  /// rho(n_l, n_r; m_l, m_r); requires n_l + n_r == m_l + m_r.
  Complex& operator()(int n_l, int n_r, int m_l, int m_r);
  Complex operator()(int n_l, int n_r, int m_l, int m_r) const;

  Eigen::Map<Matrix> block(int total);
  Eigen::Map<const Matrix> block(int total) const;

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }
  std::size_t offset(int total) const { return offsets_.at(static_cast<std::size_t>(total)); }

  Complex trace() const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  /// Max |rho - P rho P| over entries, with P the l<->r exchange.
  double exchange_asymmetry() const;
  /// Population in states with n_l == n_max or n_r == n_max.
  double edge_population() const;

  qdyn::BasisPtr basis() const;
  qdyn::DensityMatrix to_density() const;

 private:
  int n_max_;
  std::vector<std::size_t> offsets_;
  Vector data_;
};

/// Single-well Kraus amplitudes of one photo-association pulse:
/// |e, n> -> stay[n] |e, n> + raise[n] |g, n+1>.
struct GainCoefficients {
  std::vector<Complex> stay;
  std::vector<Complex> raise;
};

GainCoefficients gain_coefficients(const MicromaserParams& p, int n_max);

struct GainResult {
  TwoModeDensityMatrix rho;
  double edge_population = 0.0;
  bool truncation_warning = false;
};

/// F_i(tau) rho for the given well.
GainResult gain_map(const TwoModeDensityMatrix& rho, Well well, const MicromaserParams& p);

/// sum_i (gamma/2)(2 b_i rho b_i^+ - n_i rho - rho n_i).
TwoModeDensityMatrix damping_superoperator(const TwoModeDensityMatrix& rho, double gamma);

/// -i [H_b, rho] with H_b = -t_J (b_l^+ b_r + h.c.) + (u_b/4)(n_l - n_r)^2.
TwoModeDensityMatrix hb_commutator(const TwoModeDensityMatrix& rho, double u_b, double t_j);

/// Right-hand side of the coarse-grained master equation on the flat
/// block storage.
class Liouvillian {
 public:
  explicit Liouvillian(const MicromaserParams& p);

  int n_max() const { return n_max_; }
  void apply(const Vector& rho, Vector& out) const;
  /// Upper bound on the spectral radius, used to clamp the RK4 step.
  double stability_bound() const { return stability_bound_; }

 private:
  int n_max_;
  double n_ex_;
  double u_b_;
  double t_j_;
  GainCoefficients gain_;
  TwoModeDensityMatrix layout_;
  double stability_bound_ = 0.0;
};

struct PhaseDistribution {
  std::vector<double> phi;   // grid points, starting at -pi
  std::vector<double> prob;  // density, sum(prob) * dphi == 1
  double dphi = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double mean_n_l = 0.0;
  double mean_n_r = 0.0;
  double trace = 1.0;
  double min_eigenvalue = 0.0;
  double jx = 0.0;
  double drho_norm = 0.0;
};

struct PhaseSnapshot {
  double t = 0.0;
  PhaseDistribution dist;
};

struct EvolveOptions {
  int phase_grid = 64;
  double phase_interval = 0.0;  // > 0 records relative-phase snapshots
  bool stop_at_steady_state = true;
};

struct SteadyStateResult {
  TwoModeDensityMatrix rho;
  bool converged = false;
  double t_final = 0.0;
  double dt_used = 0.0;
  int n_max = 0;
  double edge_population = 0.0;
  bool truncation_warning = false;
  std::vector<TrajectorySample> trajectory;
  std::vector<PhaseSnapshot> phases;
};

/// Integrates the master equation by RK4 from the vacuum until
/// ||drho/dt||_1 < steady_tol or t_max. Throws qdyn::NumericalError when a
/// density-matrix eigenvalue drops below -1e-6. With n_max <= 0 the run is
/// repeated with a larger cutoff (steps of 5, at most 40) while the edge
/// population exceeds 1e-5.
SteadyStateResult evolve_to_steady_state(const MicromaserParams& p, const EvolveOptions& opts = {});

std::vector<double> single_well_distribution(const TwoModeDensityMatrix& rho, Well well);

double mean_number(std::span<const double> p);
/// Mandel Q; empty when <n> == 0.
std::optional<double> mandel_q(std::span<const double> p);

double jx_coherence(const TwoModeDensityMatrix& rho);
double jy_coherence(const TwoModeDensityMatrix& rho);
double jz_expectation(const TwoModeDensityMatrix& rho);
double mean_total(const TwoModeDensityMatrix& rho);

PhaseDistribution relative_phase_distribution(const TwoModeDensityMatrix& rho, int grid_size = 64);

struct SweepRow {
  double theta = 0.0;
  double mean_n = 0.0;
  std::optional<double> q;
  bool converged = false;
  int n_max = 0;
  std::string error;  // non-empty when the point failed
};

/// Steady state per theta value; rows sorted by theta. Failures are recorded
/// per row and do not abort the sweep.
std::vector<SweepRow> theta_sweep(const MicromaserParams& tmpl, std::span<const double> thetas,
                                  unsigned workers = 1);

}  // namespace molsim::micromaser
