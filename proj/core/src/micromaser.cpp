#include "molsim/micromaser.hpp"

#include "molsim/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace molsim::micromaser {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegativeEigenvalueAbort = -1e-6;
constexpr double kEdgeWarning = 1e-6;
constexpr double kAutoEdgeTolerance = 1e-5;
constexpr int kAutoCutoffCap = 40;

// Flat block layout shared by the kernels below.
struct BlockView {
  int lo;
  int dim;
  std::size_t off;
};

std::vector<BlockView> block_views(const TwoModeDensityMatrix& layout) {
  std::vector<BlockView> v;
  v.reserve(static_cast<std::size_t>(layout.max_total()) + 1);
  for (int total = 0; total <= layout.max_total(); ++total) {
    v.push_back({layout.block_lo(total), layout.block_dim(total), layout.offset(total)});
  }
  return v;
}

// out += gamma * sum_i (b_i rho b_i^+ - (n_i rho + rho n_i)/2)
void add_damping(const std::vector<BlockView>& blocks, int n_max, const Complex* in, Complex* out,
                 double gamma) {
  const int top = static_cast<int>(blocks.size()) - 1;
  for (int total = 0; total <= top; ++total) {
    const BlockView& b = blocks[static_cast<std::size_t>(total)];
    const bool has_up = total < top;
    const BlockView up = has_up ? blocks[static_cast<std::size_t>(total + 1)] : BlockView{};
    for (int j = 0; j < b.dim; ++j) {
      const int m_l = b.lo + j;
      const int m_r = total - m_l;
      for (int i = 0; i < b.dim; ++i) {
        const int n_l = b.lo + i;
        const int n_r = total - n_l;
        Complex acc = -static_cast<double>(total) * in[b.off + i + b.dim * j];
        if (has_up) {
          // left well: (n_l+1, n_r) and (m_l+1, m_r) in block total+1
          if (n_l < n_max && m_l < n_max) {
            const int ui = n_l + 1 - up.lo;
            const int uj = m_l + 1 - up.lo;
            acc += std::sqrt(static_cast<double>((n_l + 1) * (m_l + 1))) *
                   in[up.off + ui + up.dim * uj];
          }
          if (n_r < n_max && m_r < n_max) {
            const int ui = n_l - up.lo;
            const int uj = m_l - up.lo;
            acc += std::sqrt(static_cast<double>((n_r + 1) * (m_r + 1))) *
                   in[up.off + ui + up.dim * uj];
          }
        }
        out[b.off + i + b.dim * j] += gamma * acc;
      }
    }
  }
}

// out += scale * (F_well rho) + shift * rho
void add_gain(const std::vector<BlockView>& blocks, const GainCoefficients& g, Well well,
              const Complex* in, Complex* out, double scale, double shift) {
  const bool left = well == Well::left;
  for (int total = 0; total < static_cast<int>(blocks.size()); ++total) {
    const BlockView& b = blocks[static_cast<std::size_t>(total)];
    const BlockView down = total > 0 ? blocks[static_cast<std::size_t>(total - 1)] : BlockView{};
    for (int j = 0; j < b.dim; ++j) {
      const int m_l = b.lo + j;
      const int m = left ? m_l : total - m_l;
      for (int i = 0; i < b.dim; ++i) {
        const int n_l = b.lo + i;
        const int n = left ? n_l : total - n_l;
        const std::size_t k = b.off + i + b.dim * j;
        Complex acc = g.stay[n] * std::conj(g.stay[m]) * in[k];
        if (n > 0 && m > 0) {
          // source state has one fewer molecule in the pumped well
          const int si = (left ? n_l - 1 : n_l) - down.lo;
          const int sj = (left ? m_l - 1 : m_l) - down.lo;
          if (si >= 0 && si < down.dim && sj >= 0 && sj < down.dim) {
            acc += g.raise[n - 1] * std::conj(g.raise[m - 1]) * in[down.off + si + down.dim * sj];
          }
        }
        out[k] += scale * acc + shift * in[k];
      }
    }
  }
}

// out += -i [H_b, rho]; H_b is tridiagonal inside each block.
void add_commutator(const std::vector<BlockView>& blocks, const Complex* in, Complex* out,
                    double u_b, double t_j) {
  const Complex minus_i(0.0, -1.0);
  std::vector<double> diag;
  std::vector<double> hop;  // hop[i] = <i+1|H|i>
  for (int total = 0; total < static_cast<int>(blocks.size()); ++total) {
    const BlockView& b = blocks[static_cast<std::size_t>(total)];
    diag.assign(static_cast<std::size_t>(b.dim), 0.0);
    hop.assign(static_cast<std::size_t>(b.dim), 0.0);
    for (int i = 0; i < b.dim; ++i) {
      const int n_l = b.lo + i;
      const double imbalance = static_cast<double>(2 * n_l - total);
      diag[i] = 0.25 * u_b * imbalance * imbalance;
      if (i + 1 < b.dim) {
        hop[i] = -t_j * std::sqrt(static_cast<double>(n_l + 1)) *
                 std::sqrt(static_cast<double>(total - n_l));
      }
    }
    const Complex* r = in + b.off;
    Complex* o = out + b.off;
    const int d = b.dim;
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) {
        Complex c = (diag[i] - diag[j]) * r[i + d * j];
        if (i > 0) c += hop[i - 1] * r[i - 1 + d * j];
        if (i + 1 < d) c += hop[i] * r[i + 1 + d * j];
        if (j > 0) c -= hop[j - 1] * r[i + d * (j - 1)];
        if (j + 1 < d) c -= hop[j] * r[i + d * (j + 1)];
        o[i + d * j] += minus_i * c;
      }
    }
  }
}

double hb_spread(int n_max, double u_b, double t_j) {
  double spread = 0.0;
  TwoModeDensityMatrix layout(n_max);
  for (int total = 0; total <= layout.max_total(); ++total) {
    const int lo = layout.block_lo(total);
    const int d = layout.block_dim(total);
    if (d < 2) continue;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      const int n_l = lo + i;
      const double imbalance = static_cast<double>(2 * n_l - total);
      h(i, i) = 0.25 * u_b * imbalance * imbalance;
      if (i + 1 < d) {
        const double v = -t_j * std::sqrt(static_cast<double>(n_l + 1)) *
                         std::sqrt(static_cast<double>(total - n_l));
        h(i + 1, i) = v;
        h(i, i + 1) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    spread = std::max(spread, es.eigenvalues()(d - 1) - es.eigenvalues()(0));
  }
  return spread;
}

}  // namespace

// ---------------------------------------------------------------- params

void MicromaserParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("micromaser: " + what); };
  if (!(n_ex > 0.0) || !std::isfinite(n_ex)) fail("n_ex must be > 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) fail("theta must be > 0");
  if (!(dt > 0.0)) fail("dt must be > 0");
  if (!(t_max > 0.0)) fail("t_max must be > 0");
  if (u_b < 0.0 || t_j < 0.0) fail("u_b and t_j must be >= 0");
  if (!std::isfinite(eta) || !std::isfinite(beta)) fail("eta and beta must be finite");
  if (!(steady_tol > 0.0)) fail("steady_tol must be > 0");
  if (!(sample_interval > 0.0)) fail("sample_interval must be > 0");
  if (n_max > 200) fail("n_max too large");
}

double MicromaserParams::chi_tau() const { return theta / std::sqrt(n_ex); }

int auto_n_max(const MicromaserParams& p) {
  constexpr int cap = 200;
  const double ct = p.chi_tau();
  std::vector<double> prob(cap + 1, 0.0);
  prob[0] = 1.0;
  double total = 1.0;
  for (int n = 1; n <= cap; ++n) {
    const double s = std::sin(ct * std::sqrt(static_cast<double>(n)));
    prob[n] = prob[n - 1] * p.n_ex * s * s / n;
    total += prob[n];
  }
  int cutoff = cap;
  double tail = 0.0;
  for (int n = cap; n >= 1; --n) {
    tail += prob[n] / total;
    if (tail >= 1e-10) {
      cutoff = n;
      break;
    }
    cutoff = n - 1;
  }
  if (p.t_j > 0.0) cutoff += 4;
  return std::clamp(cutoff, 4, kAutoCutoffCap);
}

// ---------------------------------------------------------------- state

TwoModeDensityMatrix::TwoModeDensityMatrix(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw std::invalid_argument("TwoModeDensityMatrix: n_max must be >= 1");
  std::size_t off = 0;
  offsets_.reserve(static_cast<std::size_t>(max_total()) + 1);
  for (int total = 0; total <= max_total(); ++total) {
    offsets_.push_back(off);
    const auto d = static_cast<std::size_t>(block_dim(total));
    off += d * d;
  }
  data_ = Vector::Zero(static_cast<Eigen::Index>(off));
}

TwoModeDensityMatrix TwoModeDensityMatrix::vacuum(int n_max) {
  TwoModeDensityMatrix rho(n_max);
  rho(0, 0, 0, 0) = 1.0;
  return rho;
}

TwoModeDensityMatrix TwoModeDensityMatrix::pure(int n_max, std::span<const Amplitude> amps) {
  TwoModeDensityMatrix rho(n_max);
  for (const auto& a : amps) {
    for (const auto& b : amps) {
      if (a.n_l + a.n_r != b.n_l + b.n_r) {
        throw std::invalid_argument("TwoModeDensityMatrix::pure: mixed total molecule numbers");
      }
      rho(a.n_l, a.n_r, b.n_l, b.n_r) += a.value * std::conj(b.value);
    }
  }
  return rho;
}

int TwoModeDensityMatrix::block_lo(int total) const { return std::max(0, total - n_max_); }
int TwoModeDensityMatrix::block_hi(int total) const { return std::min(total, n_max_); }

bool TwoModeDensityMatrix::contains(int n_l, int n_r) const {
  return n_l >= 0 && n_r >= 0 && n_l <= n_max_ && n_r <= n_max_;
}

Complex& TwoModeDensityMatrix::operator()(int n_l, int n_r, int m_l, int m_r) {
  if (!contains(n_l, n_r) || !contains(m_l, m_r) || n_l + n_r != m_l + m_r) {
    throw std::out_of_range("TwoModeDensityMatrix: index outside stored blocks");
  }
  const int total = n_l + n_r;
  const int lo = block_lo(total);
  const int d = block_dim(total);
  return data_[static_cast<Eigen::Index>(offset(total)) + (n_l - lo) + d * (m_l - lo)];
}

Complex TwoModeDensityMatrix::operator()(int n_l, int n_r, int m_l, int m_r) const {
  return const_cast<TwoModeDensityMatrix&>(*this)(n_l, n_r, m_l, m_r);
}

Eigen::Map<Matrix> TwoModeDensityMatrix::block(int total) {
  const int d = block_dim(total);
  return {data_.data() + offset(total), d, d};
}

Eigen::Map<const Matrix> TwoModeDensityMatrix::block(int total) const {
  const int d = block_dim(total);
  return {data_.data() + offset(total), d, d};
}

Complex TwoModeDensityMatrix::trace() const {
  Complex t = 0.0;
  for (int total = 0; total <= max_total(); ++total) t += block(total).trace();
  return t;
}

double TwoModeDensityMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (int total = 0; total <= max_total(); ++total) {
    const auto b = block(total);
    worst = std::max(worst, (b - b.adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double TwoModeDensityMatrix::min_eigenvalue() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (int total = 0; total <= max_total(); ++total) {
    const Matrix b = block(total);
    const Matrix sym = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, es.eigenvalues()(0));
  }
  return lowest;
}

double TwoModeDensityMatrix::exchange_asymmetry() const {
  double worst = 0.0;
  for (int total = 0; total <= max_total(); ++total) {
    const int lo = block_lo(total);
    const int hi = block_hi(total);
    for (int n_l = lo; n_l <= hi; ++n_l) {
      for (int m_l = lo; m_l <= hi; ++m_l) {
        const Complex a = (*this)(n_l, total - n_l, m_l, total - m_l);
        const Complex b = (*this)(total - n_l, n_l, total - m_l, m_l);
        worst = std::max(worst, std::abs(a - b));
      }
    }
  }
  return worst;
}

double TwoModeDensityMatrix::edge_population() const {
  double edge = 0.0;
  for (int total = 0; total <= max_total(); ++total) {
    const int lo = block_lo(total);
    const int hi = block_hi(total);
    for (int n_l = lo; n_l <= hi; ++n_l) {
      if (n_l == n_max_ || total - n_l == n_max_) {
        edge += (*this)(n_l, total - n_l, n_l, total - n_l).real();
      }
    }
  }
  return edge;
}

qdyn::BasisPtr TwoModeDensityMatrix::basis() const {
  std::vector<qdyn::Block> blocks;
  for (int total = 0; total <= max_total(); ++total) {
    qdyn::Block b{total, {}};
    for (int n_l = block_lo(total); n_l <= block_hi(total); ++n_l) {
      b.states.push_back({n_l, total - n_l});
    }
    blocks.push_back(std::move(b));
  }
  return std::make_shared<const qdyn::BlockBasis>(std::move(blocks));
}

qdyn::DensityMatrix TwoModeDensityMatrix::to_density() const {
  std::vector<Matrix> blocks;
  for (int total = 0; total <= max_total(); ++total) blocks.emplace_back(block(total));
  return qdyn::DensityMatrix(basis(), std::move(blocks));
}

// ---------------------------------------------------------------- gain

GainCoefficients gain_coefficients(const MicromaserParams& p, int n_max) {
  const double ct = p.chi_tau();
  GainCoefficients g;
  g.stay.resize(static_cast<std::size_t>(n_max) + 1);
  g.raise.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n < n_max; ++n) {
    const double coupling = ct * std::sqrt(static_cast<double>(n + 1));
    if (p.resonant()) {
      g.stay[n] = std::cos(coupling);
      g.raise[n] = Complex(0.0, -std::sin(coupling));
      continue;
    }
    // |e,n>, |g,n+1> manifold; the manifold-mean energy only adds a global
    // phase per manifold and cancels in the traced-out map.
    const double half_detuning = ct * (p.eta + p.beta * n);
    Eigen::Matrix2d h;
    h << half_detuning, coupling, coupling, -half_detuning;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    const Eigen::Matrix2cd v = es.eigenvectors().cast<Complex>();
    Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
    phase(0, 0) = std::polar(1.0, -es.eigenvalues()(0));
    phase(1, 1) = std::polar(1.0, -es.eigenvalues()(1));
    const Eigen::Matrix2cd u = v * phase * v.adjoint();
    g.stay[n] = u(0, 0);
    g.raise[n] = u(1, 0);
  }
  // A pair arriving at the cutoff is not converted; this keeps the truncated
  // map trace preserving and completely positive.
  g.stay[n_max] = 1.0;
  g.raise[n_max] = 0.0;
  return g;
}

GainResult gain_map(const TwoModeDensityMatrix& rho, Well well, const MicromaserParams& p) {
  p.validate();
  const auto g = gain_coefficients(p, rho.n_max());
  GainResult r{TwoModeDensityMatrix(rho.n_max()), 0.0, false};
  add_gain(block_views(rho), g, well, rho.data().data(), r.rho.data().data(), 1.0, 0.0);
  r.edge_population = r.rho.edge_population();
  r.truncation_warning = r.edge_population > kEdgeWarning;
  return r;
}

TwoModeDensityMatrix damping_superoperator(const TwoModeDensityMatrix& rho, double gamma) {
  TwoModeDensityMatrix out(rho.n_max());
  add_damping(block_views(rho), rho.n_max(), rho.data().data(), out.data().data(), gamma);
  return out;
}

TwoModeDensityMatrix hb_commutator(const TwoModeDensityMatrix& rho, double u_b, double t_j) {
  TwoModeDensityMatrix out(rho.n_max());
  add_commutator(block_views(rho), rho.data().data(), out.data().data(), u_b, t_j);
  return out;
}

// ---------------------------------------------------------------- Liouvillian

Liouvillian::Liouvillian(const MicromaserParams& p)
    : n_max_(p.n_max > 0 ? p.n_max : auto_n_max(p)),
      n_ex_(p.n_ex),
      u_b_(p.u_b),
      t_j_(p.t_j),
      gain_(gain_coefficients(p, n_max_)),
      layout_(n_max_) {
  p.validate();
  stability_bound_ = hb_spread(n_max_, u_b_, t_j_) + 4.0 * n_ex_ + 2.0 * n_max_;
}

void Liouvillian::apply(const Vector& rho, Vector& out) const {
  static thread_local std::vector<BlockView> views;
  if (views.size() != static_cast<std::size_t>(layout_.max_total()) + 1 ||
      views.back().off != layout_.offset(layout_.max_total())) {
    views = block_views(layout_);
  }
  out.setZero(rho.size());
  const Complex* in = rho.data();
  Complex* o = out.data();
  add_damping(views, n_max_, in, o, 1.0);
  add_gain(views, gain_, Well::left, in, o, n_ex_, -n_ex_);
  add_gain(views, gain_, Well::right, in, o, n_ex_, -n_ex_);
  if (u_b_ != 0.0 || t_j_ != 0.0) add_commutator(views, in, o, u_b_, t_j_);
}

// ---------------------------------------------------------------- observables

std::vector<double> single_well_distribution(const TwoModeDensityMatrix& rho, Well well) {
  std::vector<double> p(static_cast<std::size_t>(rho.n_max()) + 1, 0.0);
  for (int total = 0; total <= rho.max_total(); ++total) {
    for (int n_l = rho.block_lo(total); n_l <= rho.block_hi(total); ++n_l) {
      const int n = well == Well::left ? n_l : total - n_l;
      p[n] += rho(n_l, total - n_l, n_l, total - n_l).real();
    }
  }
  return p;
}

double mean_number(std::span<const double> p) {
  double m = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
  return m;
}

std::optional<double> mandel_q(std::span<const double> p) {
  const double mean = mean_number(p);
  if (!(mean > 0.0)) return std::nullopt;
  double second = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) second += static_cast<double>(n * n) * p[n];
  const double var = second - mean * mean;
  return (var - mean) / mean;
}

namespace {

// <b_l^+ b_r>
Complex hopping_expectation(const TwoModeDensityMatrix& rho) {
  Complex acc = 0.0;
  for (int total = 1; total <= rho.max_total(); ++total) {
    const int lo = rho.block_lo(total);
    const int hi = rho.block_hi(total);
    for (int a_l = lo; a_l < hi; ++a_l) {
      const int a_r = total - a_l;
      acc += std::sqrt(static_cast<double>((a_l + 1) * a_r)) * rho(a_l, a_r, a_l + 1, a_r - 1);
    }
  }
  return acc;
}

}  // namespace

double jx_coherence(const TwoModeDensityMatrix& rho) { return hopping_expectation(rho).real(); }
double jy_coherence(const TwoModeDensityMatrix& rho) { return hopping_expectation(rho).imag(); }

double jz_expectation(const TwoModeDensityMatrix& rho) {
  return 0.5 * (mean_number(single_well_distribution(rho, Well::left)) -
                mean_number(single_well_distribution(rho, Well::right)));
}

double mean_total(const TwoModeDensityMatrix& rho) {
  double m = 0.0;
  for (int total = 0; total <= rho.max_total(); ++total) m += total * rho.block(total).trace().real();
  return m;
}

PhaseDistribution relative_phase_distribution(const TwoModeDensityMatrix& rho, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("relative_phase_distribution: grid_size < 2");
  PhaseDistribution out;
  out.dphi = 2.0 * kPi / grid_size;
  out.phi.resize(static_cast<std::size_t>(grid_size));
  out.prob.assign(static_cast<std::size_t>(grid_size), 0.0);

  // Fold the density matrix onto the phase-difference harmonics
  // c_s = sum_k rho(k, k+s) within each block; P(phi) is then a trig series.
  const int max_shift = rho.n_max();
  std::vector<Complex> harmonic(static_cast<std::size_t>(max_shift) + 1, 0.0);
  for (int total = 0; total <= rho.max_total(); ++total) {
    const auto b = rho.block(total);
    const int d = static_cast<int>(b.rows());
    for (int s = 0; s < d; ++s) {
      for (int i = 0; i + s < d; ++i) harmonic[s] += b(i, i + s);
    }
  }
  for (int m = 0; m < grid_size; ++m) {
    const double phi = -kPi + m * out.dphi;
    // sum_{k,k'} rho_{k k'} e^{-i (k - k') phi}, with k' = k + s
    double v = harmonic[0].real();
    for (int s = 1; s <= max_shift; ++s) {
      v += 2.0 * (harmonic[s] * std::polar(1.0, s * phi)).real();
    }
    out.phi[m] = phi;
    out.prob[m] = std::max(0.0, v / (2.0 * kPi));
  }
  double norm = 0.0;
  for (double p : out.prob) norm += p * out.dphi;
  if (norm > 0.0) {
    for (double& p : out.prob) p /= norm;
  }
  return out;
}

// ---------------------------------------------------------------- evolution

namespace {

SteadyStateResult evolve_fixed(const MicromaserParams& p, const EvolveOptions& opts) {
  const Liouvillian liouvillian(p);
  const int n_max = liouvillian.n_max();

  SteadyStateResult res{.rho = TwoModeDensityMatrix::vacuum(n_max), .trajectory = {}, .phases = {}};
  res.n_max = n_max;
  res.dt_used = std::min(p.dt, 2.0 / liouvillian.stability_bound());
  // land exactly on sample times
  const auto per_sample = static_cast<long>(std::ceil(p.sample_interval / res.dt_used - 1e-9));
  res.dt_used = p.sample_interval / static_cast<double>(per_sample);
  const auto total_steps = static_cast<long>(std::ceil(p.t_max / res.dt_used - 1e-9));
  const long phase_every =
      opts.phase_interval > 0.0
          ? std::max(1L, std::lround(opts.phase_interval / res.dt_used))
          : 0L;

  const qdyn::Derivative f = [&liouvillian](const Vector& y, Vector& out) {
    liouvillian.apply(y, out);
  };
  qdyn::Rk4Workspace ws;
  Vector& y = res.rho.data();

  auto record = [&](double t, double drho) {
    TrajectorySample s;
    s.t = t;
    s.mean_n_l = mean_number(single_well_distribution(res.rho, Well::left));
    s.mean_n_r = mean_number(single_well_distribution(res.rho, Well::right));
    s.trace = res.rho.trace().real();
    s.min_eigenvalue = res.rho.min_eigenvalue();
    s.jx = jx_coherence(res.rho);
    s.drho_norm = drho;
    res.trajectory.push_back(s);
    if (s.min_eigenvalue < kNegativeEigenvalueAbort) {
      std::ostringstream msg;
      msg << "micromaser: density matrix lost positivity at t=" << t
          << " (min eigenvalue " << s.min_eigenvalue << ")";
      throw qdyn::NumericalError(msg.str());
    }
  };

  Vector derivative(y.size());
  liouvillian.apply(y, derivative);
  record(0.0, derivative.cwiseAbs().sum());
  if (phase_every > 0) res.phases.push_back({0.0, relative_phase_distribution(res.rho, opts.phase_grid)});

  double t = 0.0;
  for (long step = 1; step <= total_steps; ++step) {
    qdyn::rk4_step(f, y, res.dt_used, ws);
    t = static_cast<double>(step) * res.dt_used;
    // k1 is the derivative at the start of this step
    const double drho = ws.k1.cwiseAbs().sum();
    if (!qdyn::all_finite(y)) {
      throw qdyn::NumericalError("micromaser: non-finite state at step " + std::to_string(step));
    }
    const bool sample = step % per_sample == 0 || step == total_steps;
    if (phase_every > 0 && step % phase_every == 0) {
      res.phases.push_back({t, relative_phase_distribution(res.rho, opts.phase_grid)});
    }
    if (opts.stop_at_steady_state && drho < p.steady_tol) {
      liouvillian.apply(y, derivative);
      record(t, derivative.cwiseAbs().sum());
      res.converged = true;
      break;
    }
    if (sample) record(t, drho);
  }
  res.t_final = t;
  if (!res.converged) {
    liouvillian.apply(y, derivative);
    res.converged = derivative.cwiseAbs().sum() < p.steady_tol;
  }
  res.edge_population = res.rho.edge_population();
  res.truncation_warning = res.edge_population > kEdgeWarning;
  return res;
}

}  // namespace

SteadyStateResult evolve_to_steady_state(const MicromaserParams& p, const EvolveOptions& opts) {
  p.validate();
  if (p.n_max > 0) return evolve_fixed(p, opts);
  // The detailed-balance estimate misses population that tunneling pushes
  // past a trapping state, so grow the cutoff until the edge is empty.
  MicromaserParams q = p;
  q.n_max = auto_n_max(p);
  for (;;) {
    auto res = evolve_fixed(q, opts);
    if (res.edge_population <= kAutoEdgeTolerance || q.n_max >= kAutoCutoffCap) return res;
    q.n_max = std::min(kAutoCutoffCap, q.n_max + 5);
  }
}

std::vector<SweepRow> theta_sweep(const MicromaserParams& tmpl, std::span<const double> thetas,
                                  unsigned workers) {
  std::vector<double> sorted(thetas.begin(), thetas.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SweepRow> rows(sorted.size());
  parallel_for(sorted.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.theta = sorted[i];
    try {
      MicromaserParams p = tmpl;
      p.theta = sorted[i];
      const auto res = evolve_to_steady_state(p);
      const auto dist = single_well_distribution(res.rho, Well::left);
      row.mean_n = mean_number(dist);
      row.q = mandel_q(dist);
      row.converged = res.converged;
      row.n_max = res.n_max;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace molsim::micromaser
