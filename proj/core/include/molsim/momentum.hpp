#pragma once

// First-order molecular momentum distributions in the broad-resonance limit
// for molecules formed from a trapped BEC, a normal Fermi gas and a BCS
// paired gas, using Thomas-Fermi / local-density profiles.
//
// Values are molecule numbers per momentum mode in units of (g t)^2.
// BEC: hbar = m = omega_trap = 1, lengths in a_osc, momenta in hbar/a_osc.
// Fermions: hbar = m = 1, lengths in 1/k_F(0), momenta in hbar k_F(0).

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace molsim::momentum {

struct BecTrap {
  double atoms = 1e5;
  double scattering_length = 0.1;  // a / a_osc
  double temperature = 0.1;        // T / T_c

  void validate() const;
  double coupling() const;           // U_0 = 4 pi a
  double tf_radius() const;          // (15 N a)^{1/5}
  double central_mu() const;         // R^2 / 2
  double density(double r) const;    // Thomas-Fermi n(r)
  double critical_temperature() const;  // ideal-gas T_c in the trap
  double healing_length(double r) const;  // (8 pi a n)^{-1/2}
};

struct FermiTrap {
  double atoms = 1e5;
  double kf_a = 0.5;  // |k_F(0) a|, attractive
  double a_osc = 5.0;  // oscillator length in 1/k_F(0); only enters the LDA check

  void validate() const;
  double atoms_per_spin() const { return 0.5 * atoms; }
  /// Cloud radius fixed by the atom number: N_sigma = (k_F R)^3 / 48.
  double cloud_radius() const;
  double local_kf(double r) const;
};

struct RadialMomentumDistribution {
  std::string model;
  std::string units;
  std::vector<double> p;
  std::vector<double> coherent;
  std::vector<double> noise;
  std::vector<double> total;
  std::vector<bool> valid;               // inside the model's validity range
  std::vector<bool> quadrature_converged;
  std::map<std::string, double> metadata;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Richardson estimate
  bool converged = false;
};

/// Composite Simpson with interval doubling until the Richardson estimate is
/// below rel_tol relative to the integral of |f|.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-6,
                           int min_intervals = 64, int max_intervals = 1 << 17);

/// Fourier transform of the normalized Thomas-Fermi density at momentum p.
QuadratureResult bec_form_factor(const BecTrap& trap, double p);

RadialMomentumDistribution bec_coherent(const BecTrap& trap, std::span<const double> p,
                                        unsigned workers = 1);
RadialMomentumDistribution bec_noise_lda(const BecTrap& trap, std::span<const double> p,
                                         unsigned workers = 1);
/// Coherent + noise.
RadialMomentumDistribution bec_distribution(const BecTrap& trap, std::span<const double> p,
                                            unsigned workers = 1);

/// Volume of the intersection of two Fermi spheres of radius kf whose centers
/// are p apart.
double fermi_overlap_volume(double p, double kf);

RadialMomentumDistribution nfg_distribution(const FermiTrap& trap, std::span<const double> p,
                                            unsigned workers = 1);

struct LocalGapProfile {
  std::vector<double> r;
  std::vector<double> kf;
  std::vector<double> gap;             // Delta(r)
  std::vector<double> pair_amplitude;  // sum_k u_k v_k per unit volume
  std::vector<bool> solved;
};

/// Local gap equation 1 = |U_0| int_{k<2k_F} d^3k/(2pi)^3 1/(2E_k) at each
/// radius, with U_0 = 4 pi |a|.
double local_gap(double kf, double abs_a);
/// Pair amplitude Delta/|U_0| from the local gap.
double local_pair_amplitude(double kf, double abs_a);
LocalGapProfile local_gap_profile(const FermiTrap& trap, std::span<const double> r);

RadialMomentumDistribution bcs_distribution(const FermiTrap& trap, std::span<const double> p,
                                            unsigned workers = 1);

// ---- second-order correlations

struct G2Value {
  double value = 0.0;
  bool valid = true;
};

G2Value g2_bec(double atoms);                 // 1 - 6/N
G2Value g2_nfg(double n_eff);                 // 2 (1 - 1/N_eff)
/// Pair states allowed by momentum conservation in an LDA cell.
double nfg_effective_number(double p, double kf, double cell_volume);
/// Interpolates between coherent (1) and chaotic (2) production.
G2Value g2_bcs(double coherent, double noise);

// ---- shape helpers used by the figure checks

/// Full width at half maximum of a peak at p = 0 (linear interpolation).
double half_width_full(std::span<const double> p, std::span<const double> values);
/// Largest value among points flagged valid.
double valid_peak(const RadialMomentumDistribution& d, const std::vector<double>& values);

std::vector<double> linear_grid(double lo, double hi, int points);

// ------------------------------------------------------------------ inline

template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol, int min_intervals,
                           int max_intervals) {
  QuadratureResult out;
  if (b <= a) {
    out.converged = true;
    return out;
  }
  int n = min_intervals + (min_intervals % 2);
  // odd/even node sums are reused across doublings
  double ends = f(a) + f(b);
  double abs_ends = std::abs(f(a)) + std::abs(f(b));
  double odd = 0.0;
  double even = 0.0;
  double abs_interior = 0.0;
  double h = (b - a) / n;
  for (int k = 1; k < n; ++k) {
    const double v = f(a + k * h);
    (k % 2 ? odd : even) += v;
    abs_interior += std::abs(v);
  }
  double prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
  while (true) {
    const int n2 = 2 * n;
    const double h2 = (b - a) / n2;
    double fresh = 0.0;
    for (int k = 1; k < n2; k += 2) {
      const double v = f(a + k * h2);
      fresh += v;
      abs_interior += std::abs(v);
    }
    even += odd;
    odd = fresh;
    const double cur = h2 / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    const double scale = h2 * (abs_ends + abs_interior);
    out.error = std::abs(cur - prev) / 15.0;
    out.value = cur + (cur - prev) / 15.0;
    n = n2;
    if (out.error <= rel_tol * scale) {
      out.converged = true;
      return out;
    }
    if (n >= max_intervals) return out;
    prev = cur;
  }
}

}  // namespace molsim::momentum
