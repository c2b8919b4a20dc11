#pragma once

// Degenerate Tavis-Cummings dynamics of molecule formation from N fermion
// pairs: exact evolution in the conserved sector, passage-time statistics,
// the semiclassical short-time solution and the cubic effective potential.
//
// Units: energies in hbar*chi, times in 1/chi.

#include "molsim/qdyn.hpp"

#include <span>
#include <vector>

namespace molsim::passage {

enum class Initial { all_atoms, all_molecules };

/// Sector of fixed pair number N, basis |n_b>, n_b = 0..N.
struct TCSector {
  int n_pairs = 0;
  double detuning = 0.0;
  qdyn::BasisPtr basis;
  qdyn::HermitianOperator hamiltonian;
};

TCSector build_sector(int n_pairs, double detuning = 0.0);

/// P(n_b, t) on the given time grid; prob[k][n] belongs to times[k].
struct PopulationHistory {
  std::vector<double> times;
  std::vector<std::vector<double>> prob;
  std::vector<double> mean_nb;
};

PopulationHistory evolve_population(const TCSector& sector, Initial initial,
                                    std::span<const double> times);

/// Evolution with a cached eigendecomposition, for repeated queries.
class SectorEvolver {
 public:
  SectorEvolver(const TCSector& sector, Initial initial);
  std::vector<double> populations(double t) const;
  double mean_nb(double t) const;
  int n_pairs() const { return n_pairs_; }

 private:
  int n_pairs_;
  qdyn::Propagator propagator_;
  std::vector<qdyn::Vector> coeffs_;
};

/// <n_b(t)> ~ sinh^2(sqrt(N) chi t) from the linearized equations.
double semiclassical_nb(int n_pairs, double t);

struct PassageOptions {
  int points = 2000;
  double t_end = 0.0;        // <= 0 selects 5/sqrt(N)
  bool extend_window = true; // grow the horizon until C saturates or peaks
  double max_step_increment = 0.01;
};

struct PassageTimeResult {
  int n_ref = 0;
  std::vector<double> times;
  std::vector<double> cumulative;  // C(t)
  std::vector<double> density;     // W(t) on the retained window, zero beyond
  std::size_t window_end = 0;      // index of the last retained point
  double mean = 0.0;
  double stddev = 0.0;
  bool saturated = false;          // C reached 0.99 inside the window
  double max_increment = 0.0;      // largest C step on the grid
};

/// Distribution of the time needed to convert ceil(fraction * N) pairs (from
/// atoms to molecules, or back for the all-molecule start).
PassageTimeResult passage_time_distribution(const TCSector& sector, Initial initial,
                                            double fraction, const PassageOptions& opts = {});

/// -d^2 n_b/dt^2 potential (chi = 1), zero at n_b = 0.
double effective_potential(int n_pairs, double nb);
std::vector<double> effective_potential(int n_pairs, std::span<const double> nb);
/// d^2 n_b / dt^2 = -U'(n_b).
double effective_acceleration(int n_pairs, double nb);
/// Positive stationary point of U.
double potential_minimum(int n_pairs);

/// Quantum vs semiclassical comparison for <n_b>/N <= max_fraction.
struct SemiclassicalComparison {
  double max_population_deviation = 0.0;  // max |<n_b> - sinh^2| / <n_b>
  double max_time_deviation = 0.0;        // max |t_exact(n) - t_sc(n)| / t_exact(n)
  double t_limit = 0.0;                   // first time with <n_b> = max_fraction * N
};

SemiclassicalComparison compare_semiclassical(int n_pairs, double max_fraction = 0.2,
                                              int points = 4000);

}  // namespace molsim::passage
