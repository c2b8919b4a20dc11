#pragma once

// Molecule counting statistics from three atomic initial states: a BEC
// (two-mode model), a normal Fermi gas and a BCS-paired Fermi gas (pseudo-spin
// models). Energies in hbar*chi, times in 1/chi.

#include "molsim/qdyn.hpp"

#include <optional>
#include <span>
#include <vector>

namespace molsim::counting {

enum class ModelKind { bec, nfg, bcs };

const char* to_string(ModelKind kind);

struct CountingModelSpec {
  ModelKind kind = ModelKind::bec;
  int n_max_pairs = 30;               // BEC: number of atom pairs
  std::vector<double> pair_energies;  // NFG/BCS: hbar*omega_i per pair
  std::vector<bool> occupied;         // NFG initial filling; empty = all filled
  double detuning = 0.0;              // delta
  double v = 0.0;                     // BCS attraction
  double mu = 0.1;                    // chemical potential (gap equation)
  std::vector<double> times;

  int modes() const { return static_cast<int>(pair_energies.size()); }
  void validate() const;
};

inline constexpr int kMaxModes = 14;

/// omega_i = mu (k_i/k_F)^2 with |k_i| = (i-1) 2 k_F/(M-1), i = 1..M.
std::vector<double> caption_pair_energies(int modes, double mu);

struct BCSGroundState {
  std::vector<double> u;
  std::vector<double> v;
  double gap = 0.0;
  double atom_number = 0.0;  // 2 sum v^2
  double residual = 0.0;     // |Delta - V sum u v|
  bool trivial = false;      // only the Delta = 0 solution exists

  double cooper_pairs() const;  // Delta / V, or 0 when V == 0
};

/// Discrete gap equation Delta = V sum u_i v_i with
/// v_i^2 = (1 - xi_i/E_i)/2, xi_i = omega_i - mu, solved by bisection.
BCSGroundState solve_bcs_ground_state(const CountingModelSpec& spec);

struct CountingStatistics {
  std::vector<double> times;
  std::vector<std::vector<double>> pn;  // pn[k][n] at times[k]
  std::vector<double> mean;
  std::vector<std::optional<double>> g2;
};

/// Exact evolution with a cached eigendecomposition of every block that the
/// initial state touches.
class CountingEvolver {
 public:
  /// The BCS ground state is solved internally when needed.
  explicit CountingEvolver(const CountingModelSpec& spec);
  CountingEvolver(const CountingModelSpec& spec, const BCSGroundState& ground);

  std::vector<double> distribution(double t) const;
  double mean(double t) const;
  double norm(double t) const;
  const qdyn::BasisPtr& basis() const { return basis_; }
  const qdyn::HermitianOperator& hamiltonian() const { return *hamiltonian_; }
  /// Full state at time t, block by block.
  qdyn::StateVector state(double t) const;
  int max_molecules() const { return max_molecules_; }
  std::size_t dimension() const;
  /// Earliest time with mean(t) >= target, by bracketing and bisection.
  double time_at_mean(double target) const;
  double energy() const;  // <H>, time independent

  CountingStatistics run(std::span<const double> times) const;

 private:
  void init(const CountingModelSpec& spec, const BCSGroundState* ground);

  int max_molecules_ = 0;
  qdyn::BasisPtr basis_;
  std::optional<qdyn::Propagator> propagator_;
  std::optional<qdyn::HermitianOperator> hamiltonian_;
  std::vector<qdyn::Vector> coeffs_;
  std::vector<std::vector<int>> nb_of_;  // per block, molecule number of each state
};

CountingStatistics evolve_bec(const CountingModelSpec& spec);
CountingStatistics evolve_nfg(const CountingModelSpec& spec);
CountingStatistics evolve_bcs(const CountingModelSpec& spec);

/// First-order short-time mean molecule number.
double perturbative_n(const CountingModelSpec& spec, double t,
                      const std::optional<BCSGroundState>& ground = std::nullopt);

/// g2 = <b+b+bb>/<b+b>^2 from a number distribution; empty when <n> < 1e-12.
std::optional<double> g2_equal_time(std::span<const double> pn);

struct ThermalFit {
  double mean = 0.0;      // pseudo-temperature <n> in exp(-n/<n>)
  double residual = 0.0;  // total-variation distance to the data
  std::vector<double> fitted;
};

/// Maximum-likelihood truncated-geometric fit over the support of pn.
ThermalFit thermal_fit(std::span<const double> pn);

struct GapPoint {
  double v = 0.0;
  double gap = 0.0;
  double atom_number = 0.0;
  double t0 = 0.0;
  std::optional<double> g2;
};

/// g2 at the early time where n(t0) = target_n, for each attraction V.
std::vector<GapPoint> g2_versus_gap(const CountingModelSpec& tmpl, std::span<const double> v_values,
                                    double target_n = 1e-3, unsigned workers = 1);

}  // namespace molsim::counting
