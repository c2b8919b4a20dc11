#include "molsim/counting.hpp"

#include "molsim/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace molsim::counting {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::bec: return "bec";
    case ModelKind::nfg: return "nfg";
    case ModelKind::bcs: return "bcs";
  }
  return "?";
}

void CountingModelSpec::validate() const {
  if (kind == ModelKind::bec) {
    if (n_max_pairs < 1) throw std::invalid_argument("counting: n_max_pairs must be >= 1");
    return;
  }
  if (modes() < 1) throw std::invalid_argument("counting: at least one pair mode required");
  if (modes() > kMaxModes) {
    throw std::invalid_argument("counting: " + std::to_string(modes()) +
                                " pair modes exceed the limit of " + std::to_string(kMaxModes));
  }
  if (!occupied.empty() && occupied.size() != pair_energies.size()) {
    throw std::invalid_argument("counting: occupation mask size does not match pair modes");
  }
  if (v < 0.0) throw std::invalid_argument("counting: V must be >= 0");
}

std::vector<double> caption_pair_energies(int modes, double mu) {
  if (modes < 1) throw std::invalid_argument("caption_pair_energies: modes must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(modes), 0.0);
  if (modes == 1) return w;
  for (int i = 0; i < modes; ++i) {
    const double k = 2.0 * i / (modes - 1);  // in units of k_F
    w[i] = mu * k * k;
  }
  return w;
}

double BCSGroundState::cooper_pairs() const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return gap > 0.0 ? s : 0.0;
}

namespace {

void fill_amplitudes(BCSGroundState& g, std::span<const double> xi) {
  g.u.resize(xi.size());
  g.v.resize(xi.size());
  double na = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    double v2;
    if (g.gap > 0.0) {
      const double e = std::hypot(xi[i], g.gap);
      v2 = 0.5 * (1.0 - xi[i] / e);
    } else {
      v2 = xi[i] < 0.0 ? 1.0 : (xi[i] > 0.0 ? 0.0 : 0.5);
    }
    g.v[i] = std::sqrt(v2);
    g.u[i] = std::sqrt(1.0 - v2);
    na += 2.0 * v2;
  }
  g.atom_number = na;
}

}  // namespace

BCSGroundState solve_bcs_ground_state(const CountingModelSpec& spec) {
  if (spec.kind == ModelKind::bec) throw std::invalid_argument("solve_bcs_ground_state: fermion model required");
  spec.validate();
  std::vector<double> xi;
  for (double w : spec.pair_energies) xi.push_back(w - spec.mu);

  BCSGroundState g;
  // Nontrivial solutions satisfy 1 = V sum 1/(2 E_i(Delta)), decreasing in Delta.
  auto excess = [&](double gap) {
    double s = 0.0;
    for (double x : xi) s += 1.0 / (2.0 * std::hypot(x, gap));
    return spec.v * s - 1.0;
  };
  bool has_zero_xi = std::any_of(xi.begin(), xi.end(), [](double x) { return x == 0.0; });
  if (spec.v <= 0.0 || (!has_zero_xi && excess(0.0) <= 0.0)) {
    g.trivial = true;
    g.gap = 0.0;
    fill_amplitudes(g, xi);
    return g;
  }
  double lo = 0.0;
  double hi = spec.v * static_cast<double>(xi.size());  // excess(hi) < 0
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  g.gap = 0.5 * (lo + hi);
  fill_amplitudes(g, xi);
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) s += g.u[i] * g.v[i];
  g.residual = std::abs(g.gap - spec.v * s);
  return g;
}

// ---------------------------------------------------------------- evolution

CountingEvolver::CountingEvolver(const CountingModelSpec& spec) {
  if (spec.kind == ModelKind::bcs) {
    const auto ground = solve_bcs_ground_state(spec);
    init(spec, &ground);
  } else {
    init(spec, nullptr);
  }
}

CountingEvolver::CountingEvolver(const CountingModelSpec& spec, const BCSGroundState& ground) {
  init(spec, &ground);
}

void CountingEvolver::init(const CountingModelSpec& spec, const BCSGroundState* ground) {
  spec.validate();
  std::vector<qdyn::Block> blocks;
  std::vector<qdyn::Matrix> hblocks;
  std::vector<qdyn::Vector> psi0;

  if (spec.kind == ModelKind::bec) {
    const int n = spec.n_max_pairs;
    max_molecules_ = n;
    qdyn::Block b{n, {}};
    qdyn::Matrix h = qdyn::Matrix::Zero(n + 1, n + 1);
    for (int nb = 0; nb <= n; ++nb) {
      b.states.push_back({nb, 2 * (n - nb)});
      h(nb, nb) = spec.detuning * nb;
      if (nb < n) {
        const double atoms = 2.0 * (n - nb);
        const double amp = std::sqrt(nb + 1.0) * std::sqrt(atoms * (atoms - 1.0));
        h(nb + 1, nb) = amp;
        h(nb, nb + 1) = amp;
      }
    }
    nb_of_.emplace_back();
    for (int nb = 0; nb <= n; ++nb) nb_of_.back().push_back(nb);
    blocks.push_back(std::move(b));
    hblocks.push_back(std::move(h));
    qdyn::Vector v = qdyn::Vector::Zero(n + 1);
    v[0] = 1.0;
    psi0.push_back(std::move(v));
  } else {
    const int m_modes = spec.modes();
    max_molecules_ = m_modes;
    const unsigned configs = 1u << m_modes;

    // amplitude of each spin configuration in the initial atomic state
    std::vector<double> amp(configs, 0.0);
    if (spec.kind == ModelKind::nfg) {
      unsigned filled = 0;
      for (int i = 0; i < m_modes; ++i) {
        if (spec.occupied.empty() || spec.occupied[i]) filled |= 1u << i;
      }
      amp[filled] = 1.0;
    } else {
      if (ground == nullptr || static_cast<int>(ground->u.size()) != m_modes) {
        throw std::invalid_argument("counting: BCS evolution needs a matching ground state");
      }
      for (unsigned mask = 0; mask < configs; ++mask) {
        double a = 1.0;
        for (int i = 0; i < m_modes; ++i) a *= (mask >> i & 1u) ? ground->v[i] : ground->u[i];
        amp[mask] = a;
      }
    }

    // Conserved label: molecules + pairs. The initial state has no molecules,
    // so block m is seeded by the configurations with m pairs.
    for (int m = 0; m <= m_modes; ++m) {
      double weight = 0.0;
      for (unsigned mask = 0; mask < configs; ++mask) {
        if (std::popcount(mask) == m) weight += amp[mask] * amp[mask];
      }
      if (weight == 0.0) continue;

      qdyn::Block b{m, {}};
      std::vector<int> nbs;
      std::vector<unsigned> masks;
      std::vector<int> index(static_cast<std::size_t>(m_modes + 1) * configs, -1);
      for (int nb = 0; nb <= m; ++nb) {
        for (unsigned mask = 0; mask < configs; ++mask) {
          if (std::popcount(mask) != m - nb) continue;
          index[static_cast<std::size_t>(nb) * configs + mask] = static_cast<int>(masks.size());
          nbs.push_back(nb);
          masks.push_back(mask);
          qdyn::Descriptor d{nb};
          for (int i = 0; i < m_modes; ++i) d.push_back(static_cast<int>(mask >> i & 1u));
          b.states.push_back(std::move(d));
        }
      }
      const auto dim = static_cast<Eigen::Index>(masks.size());
      qdyn::Matrix h = qdyn::Matrix::Zero(dim, dim);
      qdyn::Vector v = qdyn::Vector::Zero(dim);
      for (Eigen::Index s = 0; s < dim; ++s) {
        const int nb = nbs[s];
        const unsigned mask = masks[s];
        double diag = spec.detuning * nb - spec.v * std::popcount(mask);
        for (int i = 0; i < m_modes; ++i) {
          if (!(mask >> i & 1u)) continue;
          diag += spec.pair_energies[i];
          // b^+ sigma_i^- : pair i becomes a molecule
          const int target = index[static_cast<std::size_t>(nb + 1) * configs + (mask & ~(1u << i))];
          const double c = std::sqrt(nb + 1.0);
          h(target, s) += c;
          h(s, target) += c;
          // -V sigma_k^+ sigma_i^- for k != i: the pair hops from i to k
          for (int k = 0; k < m_modes; ++k) {
            if (mask >> k & 1u) continue;
            const unsigned moved = (mask & ~(1u << i)) | (1u << k);
            const int t = index[static_cast<std::size_t>(nb) * configs + moved];
            h(t, s) -= spec.v;
          }
        }
        h(s, s) = diag;
        if (nb == 0) v[s] = amp[mask];
      }
      nb_of_.push_back(std::move(nbs));
      blocks.push_back(std::move(b));
      hblocks.push_back(std::move(h));
      psi0.push_back(std::move(v));
    }
  }

  basis_ = std::make_shared<const qdyn::BlockBasis>(std::move(blocks));
  hamiltonian_.emplace(basis_, std::move(hblocks));
  propagator_.emplace(*hamiltonian_);
  coeffs_ = propagator_->to_eigenbasis(qdyn::StateVector(basis_, std::move(psi0)));
}

qdyn::StateVector CountingEvolver::state(double t) const {
  return propagator_->from_eigenbasis(coeffs_, t);
}

std::vector<double> CountingEvolver::distribution(double t) const {
  const auto psi = state(t);
  std::vector<double> p(static_cast<std::size_t>(max_molecules_) + 1, 0.0);
  for (std::size_t b = 0; b < psi.num_blocks(); ++b) {
    const auto& v = psi.block(b);
    for (Eigen::Index s = 0; s < v.size(); ++s) p[nb_of_[b][s]] += std::norm(v[s]);
  }
  return p;
}

double CountingEvolver::mean(double t) const {
  const auto p = distribution(t);
  double m = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
  return m;
}

double CountingEvolver::norm(double t) const { return state(t).squared_norm(); }

std::size_t CountingEvolver::dimension() const { return basis_->dim(); }

double CountingEvolver::energy() const {
  const auto psi = state(0.0);
  qdyn::Complex e = 0.0;
  for (std::size_t b = 0; b < psi.num_blocks(); ++b) {
    e += psi.block(b).dot(hamiltonian_->block(b) * psi.block(b));
  }
  return e.real();
}

double CountingEvolver::time_at_mean(double target) const {
  if (!(target > 0.0)) throw std::invalid_argument("time_at_mean: target must be > 0");
  double lo = 0.0;
  double hi = 1e-6;
  int guard = 0;
  while (mean(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 80) throw std::runtime_error("time_at_mean: target mean never reached");
  }
  for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CountingStatistics CountingEvolver::run(std::span<const double> times) const {
  CountingStatistics s;
  s.times.assign(times.begin(), times.end());
  for (double t : times) {
    auto p = distribution(t);
    double m = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
    s.mean.push_back(m);
    s.g2.push_back(g2_equal_time(p));
    s.pn.push_back(std::move(p));
  }
  return s;
}

CountingStatistics evolve_bec(const CountingModelSpec& spec) {
  if (spec.kind != ModelKind::bec) throw std::invalid_argument("evolve_bec: spec kind must be bec");
  return CountingEvolver(spec).run(spec.times);
}

CountingStatistics evolve_nfg(const CountingModelSpec& spec) {
  if (spec.kind != ModelKind::nfg) throw std::invalid_argument("evolve_nfg: spec kind must be nfg");
  return CountingEvolver(spec).run(spec.times);
}

CountingStatistics evolve_bcs(const CountingModelSpec& spec) {
  if (spec.kind != ModelKind::bcs) throw std::invalid_argument("evolve_bcs: spec kind must be bcs");
  return CountingEvolver(spec).run(spec.times);
}

// ---------------------------------------------------------------- analysis

double perturbative_n(const CountingModelSpec& spec, double t,
                      const std::optional<BCSGroundState>& ground) {
  const double ct2 = t * t;
  switch (spec.kind) {
    case ModelKind::bec: {
      const double n = spec.n_max_pairs;
      return ct2 * 2.0 * n * (2.0 * n - 1.0);
    }
    case ModelKind::nfg: {
      // N_a atoms in the initial filling
      int pairs = 0;
      for (int i = 0; i < spec.modes(); ++i) pairs += spec.occupied.empty() || spec.occupied[i];
      return ct2 * 2.0 * (2.0 * pairs);
    }
    case ModelKind::bcs: {
      if (!ground) throw std::invalid_argument("perturbative_n: BCS needs a solved ground state");
      const double cooper = spec.v > 0.0 ? ground->gap / spec.v : 0.0;
      return ct2 * (cooper * cooper + ground->atom_number);
    }
  }
  return 0.0;
}

std::optional<double> g2_equal_time(std::span<const double> pn) {
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t n = 0; n < pn.size(); ++n) {
    const double x = static_cast<double>(n);
    n1 += x * pn[n];
    n2 += x * (x - 1.0) * pn[n];
  }
  if (n1 < 1e-12) return std::nullopt;
  return n2 / (n1 * n1);
}

ThermalFit thermal_fit(std::span<const double> pn) {
  ThermalFit fit;
  const std::size_t size = pn.size();
  fit.fitted.assign(size, 0.0);
  if (size == 0) return fit;
  double total = 0.0;
  double mean = 0.0;
  for (std::size_t n = 0; n < size; ++n) {
    total += pn[n];
    mean += static_cast<double>(n) * pn[n];
  }
  if (!(total > 0.0)) throw std::invalid_argument("thermal_fit: empty distribution");
  mean /= total;

  auto geometric = [&](double log_q) {
    std::vector<double> g(size);
    double z = 0.0;
    for (std::size_t n = 0; n < size; ++n) {
      g[n] = std::exp(log_q * static_cast<double>(n));
      z += g[n];
    }
    for (double& x : g) x /= z;
    return g;
  };
  auto mean_of = [&](double log_q) {
    const auto g = geometric(log_q);
    double m = 0.0;
    for (std::size_t n = 0; n < size; ++n) m += static_cast<double>(n) * g[n];
    return m;
  };

  if (mean <= 0.0 || size == 1) {
    fit.mean = 0.0;
    fit.fitted[0] = 1.0;
  } else {
    // The likelihood of the truncated geometric family is stationary where the
    // model mean equals the sample mean; the model mean is monotone in log q.
    double lo = -60.0;
    double hi = 0.0;
    const double cap = 0.5 * static_cast<double>(size - 1);  // mean at q = 1
    if (mean >= cap) {
      hi = 0.0;
      lo = 0.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_of(mid) < mean ? lo : hi) = mid;
    }
    const double log_q = 0.5 * (lo + hi);
    fit.mean = log_q < 0.0 ? -1.0 / log_q : std::numeric_limits<double>::infinity();
    fit.fitted = geometric(log_q);
  }
  double tv = 0.0;
  for (std::size_t n = 0; n < size; ++n) tv += std::abs(pn[n] / total - fit.fitted[n]);
  fit.residual = 0.5 * tv;
  return fit;
}

std::vector<GapPoint> g2_versus_gap(const CountingModelSpec& tmpl, std::span<const double> v_values,
                                    double target_n, unsigned workers) {
  std::vector<GapPoint> out(v_values.size());
  parallel_for(v_values.size(), workers, [&](std::size_t i) {
    CountingModelSpec spec = tmpl;
    spec.kind = ModelKind::bcs;
    spec.v = v_values[i];
    const auto ground = solve_bcs_ground_state(spec);
    const CountingEvolver evolver(spec, ground);
    GapPoint& p = out[i];
    p.v = spec.v;
    p.gap = ground.gap;
    p.atom_number = ground.atom_number;
    p.t0 = evolver.time_at_mean(target_n);
    p.g2 = g2_equal_time(evolver.distribution(p.t0));
  });
  return out;
}

}  // namespace molsim::counting
