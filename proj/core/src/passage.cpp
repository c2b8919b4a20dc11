#include "molsim/passage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace molsim::passage {

namespace {

qdyn::BasisPtr sector_basis(int n_pairs) {
  qdyn::Block block{n_pairs, {}};
  for (int nb = 0; nb <= n_pairs; ++nb) block.states.push_back({nb});
  return std::make_shared<const qdyn::BlockBasis>(std::vector<qdyn::Block>{std::move(block)});
}

qdyn::Matrix sector_matrix(int n_pairs, double detuning) {
  const int d = n_pairs + 1;
  qdyn::Matrix h = qdyn::Matrix::Zero(d, d);
  for (int nb = 0; nb <= n_pairs; ++nb) {
    h(nb, nb) = detuning * nb;
    if (nb < n_pairs) {
      // b^+ S^- : sqrt(n_b + 1) from the molecule, sqrt((N - n_b)(n_b + 1)) from the spin
      const double v = (nb + 1) * std::sqrt(static_cast<double>(n_pairs - nb));
      h(nb + 1, nb) = v;
      h(nb, nb + 1) = v;
    }
  }
  return h;
}

double trapezoid(std::span<const double> x, std::span<const double> y, std::size_t end) {
  double s = 0.0;
  for (std::size_t k = 1; k <= end && k < x.size(); ++k) {
    s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  }
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
  return v;
}

}  // namespace

TCSector build_sector(int n_pairs, double detuning) {
  if (n_pairs < 1) throw std::invalid_argument("build_sector: N must be >= 1");
  auto basis = sector_basis(n_pairs);
  qdyn::HermitianOperator h(basis, {sector_matrix(n_pairs, detuning)});
  return TCSector{n_pairs, detuning, basis, std::move(h)};
}

SectorEvolver::SectorEvolver(const TCSector& sector, Initial initial)
    : n_pairs_(sector.n_pairs), propagator_(sector.hamiltonian) {
  const int start = initial == Initial::all_atoms ? 0 : sector.n_pairs;
  const auto psi0 = qdyn::StateVector::basis_state(sector.basis, {start});
  coeffs_ = propagator_.to_eigenbasis(psi0);
}

std::vector<double> SectorEvolver::populations(double t) const {
  const auto psi = propagator_.from_eigenbasis(coeffs_, t);
  const auto& v = psi.block(0);
  std::vector<double> p(static_cast<std::size_t>(v.size()));
  for (Eigen::Index n = 0; n < v.size(); ++n) p[n] = std::norm(v[n]);
  return p;
}

double SectorEvolver::mean_nb(double t) const {
  const auto p = populations(t);
  double m = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
  return m;
}

PopulationHistory evolve_population(const TCSector& sector, Initial initial,
                                    std::span<const double> times) {
  const SectorEvolver evolver(sector, initial);
  PopulationHistory h;
  h.times.assign(times.begin(), times.end());
  h.prob.reserve(times.size());
  h.mean_nb.reserve(times.size());
  for (double t : times) {
    auto p = evolver.populations(t);
    double m = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
    h.prob.push_back(std::move(p));
    h.mean_nb.push_back(m);
  }
  return h;
}

double semiclassical_nb(int n_pairs, double t) {
  const double s = std::sinh(std::sqrt(static_cast<double>(n_pairs)) * t);
  return s * s;
}

PassageTimeResult passage_time_distribution(const TCSector& sector, Initial initial,
                                            double fraction, const PassageOptions& opts) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("passage_time_distribution: fraction must be in (0, 1]");
  }
  if (opts.points < 3) throw std::invalid_argument("passage_time_distribution: too few points");
  const int n = sector.n_pairs;
  const SectorEvolver evolver(sector, initial);

  PassageTimeResult r;
  r.n_ref = static_cast<int>(std::ceil(fraction * n - 1e-12));
  auto converted_cdf = [&](double t) {
    const auto p = evolver.populations(t);
    double c = 0.0;
    for (int nb = 0; nb <= n; ++nb) {
      const int converted = initial == Initial::all_atoms ? nb : n - nb;
      if (converted >= r.n_ref) c += p[nb];
    }
    return std::clamp(c, 0.0, 1.0);
  };

  double t_end = opts.t_end > 0.0 ? opts.t_end : 5.0 / std::sqrt(static_cast<double>(n));
  int points = opts.points;
  constexpr int kMaxPoints = 1 << 16;
  constexpr int kMaxDoublings = 10;

  auto first_peak = [](const std::vector<double>& c) -> std::size_t {
    for (std::size_t k = 1; k + 1 < c.size(); ++k) {
      if (c[k] > 1e-3 && c[k] >= c[k - 1] && c[k] > c[k + 1]) return k;
    }
    return c.size() - 1;
  };

  for (int attempt = 0;; ++attempt) {
    r.times = linspace(0.0, t_end, points);
    r.cumulative.resize(r.times.size());
    for (std::size_t k = 0; k < r.times.size(); ++k) r.cumulative[k] = converted_cdf(r.times[k]);
    r.window_end = first_peak(r.cumulative);
    r.max_increment = 0.0;
    for (std::size_t k = 1; k <= r.window_end; ++k) {
      r.max_increment = std::max(r.max_increment, std::abs(r.cumulative[k] - r.cumulative[k - 1]));
    }
    const bool peaked = r.window_end + 1 < r.cumulative.size();
    if (!opts.extend_window || attempt >= kMaxDoublings) break;
    if (r.max_increment > opts.max_step_increment && points < kMaxPoints) {
      points = 2 * points - 1;
      continue;
    }
    if (peaked) break;
    t_end *= 2.0;
  }

  r.saturated =
      *std::max_element(r.cumulative.begin(), r.cumulative.begin() + r.window_end + 1) >= 0.99;

  // W = dC/dt by centered differences, clipped at zero, normalized over the window.
  const std::size_t m = r.times.size();
  r.density.assign(m, 0.0);
  for (std::size_t k = 0; k <= r.window_end; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = std::min(k + 1, m - 1);
    const double w = (r.cumulative[b] - r.cumulative[a]) / (r.times[b] - r.times[a]);
    r.density[k] = std::max(0.0, w);
  }
  const double norm = trapezoid(r.times, r.density, r.window_end);
  if (norm > 0.0) {
    for (double& w : r.density) w /= norm;
  }
  std::vector<double> tw(m), t2w(m);
  for (std::size_t k = 0; k < m; ++k) {
    tw[k] = r.times[k] * r.density[k];
    t2w[k] = r.times[k] * r.times[k] * r.density[k];
  }
  r.mean = trapezoid(r.times, tw, r.window_end);
  r.stddev = std::sqrt(std::max(0.0, trapezoid(r.times, t2w, r.window_end) - r.mean * r.mean));
  return r;
}

double effective_potential(int n_pairs, double nb) {
  const double n = n_pairs;
  return 2.0 * (nb * nb * nb - 0.5 * (2.0 * n - 1.0) * nb * nb - n * nb);
}

std::vector<double> effective_potential(int n_pairs, std::span<const double> nb) {
  std::vector<double> u;
  u.reserve(nb.size());
  for (double x : nb) u.push_back(effective_potential(n_pairs, x));
  return u;
}

double effective_acceleration(int n_pairs, double nb) {
  const double n = n_pairs;
  return 2.0 * (-3.0 * nb * nb + (2.0 * n - 1.0) * nb + n);
}

double potential_minimum(int n_pairs) {
  const double b = 2.0 * n_pairs - 1.0;
  return (b + std::sqrt(b * b + 12.0 * n_pairs)) / 6.0;
}

SemiclassicalComparison compare_semiclassical(int n_pairs, double max_fraction, int points) {
  const auto sector = build_sector(n_pairs);
  const SectorEvolver evolver(sector, Initial::all_atoms);
  const double rate = std::sqrt(static_cast<double>(n_pairs));
  const double target = max_fraction * n_pairs;

  SemiclassicalComparison c;
  double horizon = 2.0 * std::asinh(std::sqrt(target)) / rate;
  std::vector<double> means;
  std::vector<double> grid;
  for (int attempt = 0; attempt < 8; ++attempt) {
    grid = linspace(0.0, horizon, points);
    means.clear();
    for (double t : grid) means.push_back(evolver.mean_nb(t));
    if (*std::max_element(means.begin(), means.end()) >= target) break;
    horizon *= 2.0;
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (means[k] > target) {
      // linear interpolation of the crossing
      const double f = (target - means[k - 1]) / (means[k] - means[k - 1]);
      c.t_limit = grid[k - 1] + f * (grid[k] - grid[k - 1]);
      break;
    }
    const double t = grid[k];
    const double sc = semiclassical_nb(n_pairs, t);
    c.max_population_deviation = std::max(c.max_population_deviation, std::abs(means[k] - sc) / means[k]);
    const double t_sc = std::asinh(std::sqrt(means[k])) / rate;
    c.max_time_deviation = std::max(c.max_time_deviation, std::abs(t - t_sc) / t);
  }
  return c;
}

}  // namespace molsim::passage
