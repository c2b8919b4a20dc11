#include "molsim/momentum.hpp"

#include "molsim/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace molsim::momentum {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-6;

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

RadialMomentumDistribution empty_like(std::string model, std::string units,
                                      std::span<const double> p) {
  RadialMomentumDistribution d;
  d.model = std::move(model);
  d.units = std::move(units);
  d.p.assign(p.begin(), p.end());
  d.coherent.assign(p.size(), 0.0);
  d.noise.assign(p.size(), 0.0);
  d.total.assign(p.size(), 0.0);
  d.valid.assign(p.size(), true);
  d.quadrature_converged.assign(p.size(), true);
  return d;
}

void finish_totals(RadialMomentumDistribution& d) {
  for (std::size_t k = 0; k < d.p.size(); ++k) d.total[k] = d.coherent[k] + d.noise[k];
}

}  // namespace

// ---------------------------------------------------------------- traps

void BecTrap::validate() const {
  if (!(atoms > 1.0)) throw std::invalid_argument("BecTrap: atoms must be > 1");
  if (!(scattering_length > 0.0)) throw std::invalid_argument("BecTrap: a must be > 0");
  if (temperature < 0.0) throw std::invalid_argument("BecTrap: temperature must be >= 0");
}

double BecTrap::coupling() const { return 4.0 * kPi * scattering_length; }
double BecTrap::tf_radius() const { return std::pow(15.0 * atoms * scattering_length, 0.2); }
double BecTrap::central_mu() const {
  const double r = tf_radius();
  return 0.5 * r * r;
}
double BecTrap::density(double r) const {
  const double radius = tf_radius();
  if (r >= radius) return 0.0;
  return (radius * radius - r * r) / (2.0 * coupling());
}
double BecTrap::critical_temperature() const { return 0.94 * std::cbrt(atoms); }
double BecTrap::healing_length(double r) const {
  const double n = density(r);
  if (n <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(8.0 * kPi * scattering_length * n);
}

void FermiTrap::validate() const {
  if (!(atoms > 0.0)) throw std::invalid_argument("FermiTrap: atoms must be > 0");
  if (!(kf_a > 0.0)) throw std::invalid_argument("FermiTrap: kf_a must be > 0");
  if (!(a_osc > 0.0)) throw std::invalid_argument("FermiTrap: a_osc must be > 0");
}

double FermiTrap::cloud_radius() const { return std::cbrt(48.0 * atoms_per_spin()); }

double FermiTrap::local_kf(double r) const {
  const double radius = cloud_radius();
  if (r >= radius) return 0.0;
  return std::sqrt(1.0 - (r * r) / (radius * radius));
}

// ---------------------------------------------------------------- BEC

QuadratureResult bec_form_factor(const BecTrap& trap, double p) {
  trap.validate();
  const double radius = trap.tf_radius();
  const double n_atoms = trap.atoms;
  return integrate(
      [&](double r) { return 4.0 * kPi * r * r * trap.density(r) / n_atoms * sinc(p * r); }, 0.0,
      radius, kQuadTol);
}

RadialMomentumDistribution bec_coherent(const BecTrap& trap, std::span<const double> p,
                                        unsigned workers) {
  auto d = empty_like("bec", "p in hbar/a_osc; n(p) in (g t)^2", p);
  const double pairs = trap.atoms * (trap.atoms - 1.0);
  parallel_for(p.size(), workers, [&](std::size_t k) {
    const auto f = bec_form_factor(trap, p[k]);
    d.coherent[k] = pairs * f.value * f.value;
    d.quadrature_converged[k] = f.converged;
  });
  finish_totals(d);
  d.metadata["tf_radius"] = trap.tf_radius();
  return d;
}

RadialMomentumDistribution bec_noise_lda(const BecTrap& trap, std::span<const double> p,
                                         unsigned workers) {
  trap.validate();
  auto d = empty_like("bec", "p in hbar/a_osc; n(p) in (g t)^2", p);
  const double radius = trap.tf_radius();
  const double temp = trap.temperature * trap.critical_temperature();
  const double xi0 = trap.healing_length(0.0);
  const double p_valid = 2.0 * kPi / xi0;
  const double u0 = trap.coupling();

  parallel_for(p.size(), workers, [&](std::size_t k) {
    const double q = p[k];
    if (!(q > 0.0)) {
      throw std::invalid_argument("bec_noise_lda: the local-density noise term diverges at p = 0");
    }
    const double eps = 0.5 * q * q;
    // homogeneous Bogoliubov occupation at the local chemical potential
    auto occupation = [&](double r) {
      const double mu = u0 * trap.density(r);
      const double e = std::sqrt(eps * (eps + 2.0 * mu));
      const double v2 = 0.5 * ((eps + mu) / e - 1.0);
      const double u2 = v2 + 1.0;
      double thermal = 0.0;
      if (temp > 0.0) thermal = 1.0 / std::expm1(e / temp);
      return v2 + (u2 + v2) * thermal;
    };
    const auto res = integrate(
        [&](double r) { return 4.0 * 4.0 * kPi * r * r * trap.density(r) * occupation(r); }, 0.0,
        radius, kQuadTol);
    d.noise[k] = res.value;
    d.quadrature_converged[k] = res.converged;
    d.valid[k] = q >= p_valid;
  });
  finish_totals(d);
  d.metadata["tf_radius"] = radius;
  d.metadata["healing_length_center"] = xi0;
  d.metadata["p_valid_min"] = p_valid;
  d.metadata["temperature"] = temp;
  return d;
}

RadialMomentumDistribution bec_distribution(const BecTrap& trap, std::span<const double> p,
                                            unsigned workers) {
  auto coh = bec_coherent(trap, p, workers);
  auto noise = bec_noise_lda(trap, p, workers);
  noise.coherent = coh.coherent;
  for (std::size_t k = 0; k < p.size(); ++k) {
    noise.quadrature_converged[k] = noise.quadrature_converged[k] && coh.quadrature_converged[k];
  }
  finish_totals(noise);
  noise.metadata["central_mu"] = trap.central_mu();
  return noise;
}

// ---------------------------------------------------------------- normal Fermi gas

double fermi_overlap_volume(double p, double kf) {
  if (kf <= 0.0) return 0.0;
  const double x = std::abs(p) / kf;
  if (x >= 2.0) return 0.0;
  return 4.0 * kPi / 3.0 * kf * kf * kf * (1.0 - 0.75 * x + x * x * x / 16.0);
}

RadialMomentumDistribution nfg_distribution(const FermiTrap& trap, std::span<const double> p,
                                            unsigned workers) {
  trap.validate();
  auto d = empty_like("nfg", "p in hbar k_F(0); n(p) in (g t)^2", p);
  const double radius = trap.cloud_radius();
  const double r3 = radius * radius * radius;
  parallel_for(p.size(), workers, [&](std::size_t k) {
    const double q = std::abs(p[k]);
    if (q >= 2.0) return;
    // r = R sin(theta) makes k_F(r) = cos(theta) smooth at the cloud edge
    const double theta_max = std::acos(0.5 * q);
    const auto res = integrate(
        [&](double th) {
          const double s = std::sin(th);
          const double c = std::cos(th);
          return 4.0 * kPi * r3 * s * s * c * fermi_overlap_volume(q, c) / (8.0 * kPi * kPi * kPi);
        },
        0.0, theta_max, kQuadTol);
    d.noise[k] = res.value;
    d.quadrature_converged[k] = res.converged;
  });
  finish_totals(d);
  d.metadata["cloud_radius"] = radius;
  return d;
}

// ---------------------------------------------------------------- BCS

namespace {

// int_0^2 s^2 / (2 E(s)) ds with E = sqrt((s^2 - 1)^2 / 4 + delta^2); the
// substitution s = 1 + delta sinh(u) resolves the Fermi-surface peak.
double gap_integral(double delta) {
  const double u_lo = std::asinh(-1.0 / delta);
  const double u_hi = std::asinh(1.0 / delta);
  constexpr int n = 4000;
  const double h = (u_hi - u_lo) / n;
  auto f = [delta](double u) {
    const double w = delta * std::sinh(u);
    const double s = 1.0 + w;
    const double xi = 0.5 * w * (2.0 + w);
    const double e = std::sqrt(xi * xi + delta * delta);
    return s * s * delta * std::cosh(u) / (2.0 * e);
  };
  double sum = f(u_lo) + f(u_hi);
  for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(u_lo + k * h);
  return sum * h / 3.0;
}

// Dimensionless gap delta = Delta / k_F^2 at eta = k_F |a|; 0 if unresolvable.
std::optional<double> reduced_gap(double eta) {
  const double target = kPi / (2.0 * eta);
  auto g = [&](double log_delta) { return gap_integral(std::exp(log_delta)) - target; };
  double lo = -300.0;  // g(lo) > 0 needed; gaps below e^-300 count as unresolved
  double hi = std::log(10.0);
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo <= 0.0 || g_hi >= 0.0) return std::nullopt;
  // Illinois regula falsi on log(delta); g is nearly linear there.
  int side = 0;
  double x = lo;
  for (int it = 0; it < 200; ++it) {
    x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    const double gx = g(x);
    if (std::abs(gx) < 1e-13 * target || hi - lo < 1e-14) break;
    if (gx > 0.0) {
      lo = x;
      g_lo = gx;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      g_hi = gx;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
  }
  return std::exp(x);
}

}  // namespace

double local_gap(double kf, double abs_a) {
  if (kf <= 0.0 || abs_a <= 0.0) return 0.0;
  const auto delta = reduced_gap(kf * abs_a);
  return delta ? *delta * kf * kf : 0.0;
}

double local_pair_amplitude(double kf, double abs_a) {
  if (abs_a <= 0.0) return 0.0;
  return local_gap(kf, abs_a) / (4.0 * kPi * abs_a);
}

LocalGapProfile local_gap_profile(const FermiTrap& trap, std::span<const double> r) {
  trap.validate();
  LocalGapProfile prof;
  for (double x : r) {
    const double kf = trap.local_kf(x);
    const auto delta = kf > 0.0 ? reduced_gap(kf * trap.kf_a) : std::nullopt;
    prof.r.push_back(x);
    prof.kf.push_back(kf);
    prof.solved.push_back(delta.has_value());
    const double gap = delta ? *delta * kf * kf : 0.0;
    prof.gap.push_back(gap);
    prof.pair_amplitude.push_back(gap / (4.0 * kPi * trap.kf_a));
  }
  return prof;
}

RadialMomentumDistribution bcs_distribution(const FermiTrap& trap, std::span<const double> p,
                                            unsigned workers) {
  auto d = nfg_distribution(trap, p, workers);
  d.model = "bcs";
  const double radius = trap.cloud_radius();
  const double r3 = radius * radius * radius;

  // Pair amplitude on nested Simpson nodes in theta (r = R sin theta).
  constexpr int kLevels = 12;
  constexpr int nodes = (1 << kLevels) + 1;
  const double h = 0.5 * kPi / (nodes - 1);
  std::vector<double> phi(nodes, 0.0);
  std::vector<double> weight(nodes, 0.0);
  int unsolved = 0;
  parallel_for(static_cast<std::size_t>(nodes), workers, [&](std::size_t k) {
    const double th = static_cast<double>(k) * h;
    const double c = std::cos(th);
    const auto delta = c > 0.0 ? reduced_gap(c * trap.kf_a) : std::nullopt;
    phi[k] = delta ? *delta * c * c / (4.0 * kPi * trap.kf_a) : 0.0;
    weight[k] = 4.0 * kPi * r3 * std::sin(th) * std::sin(th) * c;
  });
  for (int k = 0; k + 1 < nodes; ++k) {
    if (phi[k] == 0.0) ++unsolved;
  }

  auto simpson = [&](const std::vector<double>& f, int stride) {
    const int n = (nodes - 1) / stride;
    double s = f[0] + f[static_cast<std::size_t>(n) * stride];
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f[static_cast<std::size_t>(k) * stride];
    return s * h * stride / 3.0;
  };

  parallel_for(p.size(), workers, [&](std::size_t k) {
    std::vector<double> f(nodes);
    std::vector<double> af(nodes);
    for (int j = 0; j < nodes; ++j) {
      const double r = radius * std::sin(j * h);
      f[j] = weight[j] * phi[j] * sinc(p[k] * r);
      af[j] = std::abs(f[j]);
    }
    const double fine = simpson(f, 1);
    const double coarse = simpson(f, 2);
    const double amp = fine + (fine - coarse) / 15.0;
    const double err = std::abs(fine - coarse) / 15.0;
    d.coherent[k] = amp * amp;
    d.quadrature_converged[k] = d.quadrature_converged[k] && err <= kQuadTol * simpson(af, 1);
  });
  finish_totals(d);

  const double gap0 = local_gap(1.0, trap.kf_a);
  d.metadata["gap_center"] = gap0;
  d.metadata["pair_amplitude_center"] = phi[0];
  d.metadata["unsolved_gap_nodes"] = unsolved;
  // Cooper-pair size v_F / (pi Delta) against the oscillator length
  d.metadata["lda_ratio"] = gap0 > 0.0 ? 1.0 / (kPi * gap0) / trap.a_osc
                                       : std::numeric_limits<double>::infinity();
  return d;
}

// ---------------------------------------------------------------- g2

G2Value g2_bec(double atoms) { return {1.0 - 6.0 / atoms, atoms > 6.0}; }

G2Value g2_nfg(double n_eff) {
  if (!(n_eff > 0.0)) return {0.0, false};
  return {2.0 * (1.0 - 1.0 / n_eff), true};
}

double nfg_effective_number(double p, double kf, double cell_volume) {
  return cell_volume * fermi_overlap_volume(p, kf) / (8.0 * kPi * kPi * kPi);
}

G2Value g2_bcs(double coherent, double noise) {
  if (coherent < 0.0 || noise < 0.0 || coherent + noise <= 0.0) return {0.0, false};
  const double f = coherent / (coherent + noise);
  return {2.0 - f * f, true};
}

// ---------------------------------------------------------------- helpers

double half_width_full(std::span<const double> p, std::span<const double> values) {
  if (p.size() != values.size() || p.size() < 2) {
    throw std::invalid_argument("half_width_full: mismatched or too short grid");
  }
  const double half = 0.5 * values[0];
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (values[k] <= half) {
      const double f = (values[k - 1] - half) / (values[k - 1] - values[k]);
      return 2.0 * (p[k - 1] + f * (p[k] - p[k - 1]));
    }
  }
  return std::numeric_limits<double>::infinity();
}

double valid_peak(const RadialMomentumDistribution& d, const std::vector<double>& values) {
  double best = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (d.valid[k]) best = std::max(best, values[k]);
  }
  return best;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("linear_grid: need at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[k] = lo + (hi - lo) * k / (points - 1);
  return g;
}

}  // namespace molsim::momentum
