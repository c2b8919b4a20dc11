#include "molsim/micromaser.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace molsim::micromaser;
using oracle::kPi;

namespace {

// ---- dense two-mode oracle on the full (n_max+1)^2 space

struct Dense {
  int n_max;
  int dim;
  Matrix bl, br;

  explicit Dense(int n) : n_max(n), dim((n + 1) * (n + 1)) {
    bl = Matrix::Zero(dim, dim);
    br = Matrix::Zero(dim, dim);
    for (int l = 0; l <= n; ++l) {
      for (int r = 0; r <= n; ++r) {
        if (l > 0) bl(idx(l - 1, r), idx(l, r)) = std::sqrt(static_cast<double>(l));
        if (r > 0) br(idx(l, r - 1), idx(l, r)) = std::sqrt(static_cast<double>(r));
      }
    }
  }
  int idx(int l, int r) const { return l * (n_max + 1) + r; }

  Matrix from(const TwoModeDensityMatrix& rho) const {
    Matrix m = Matrix::Zero(dim, dim);
    for (int total = 0; total <= rho.max_total(); ++total) {
      for (int nl = rho.block_lo(total); nl <= rho.block_hi(total); ++nl) {
        for (int ml = rho.block_lo(total); ml <= rho.block_hi(total); ++ml) {
          m(idx(nl, total - nl), idx(ml, total - ml)) = rho(nl, total - nl, ml, total - ml);
        }
      }
    }
    return m;
  }

  // Kraus pair for one well: stay on the diagonal, raise one step up
  std::pair<Matrix, Matrix> kraus(bool left, double chi_tau) const {
    Matrix a = Matrix::Zero(dim, dim);
    Matrix b = Matrix::Zero(dim, dim);
    for (int l = 0; l <= n_max; ++l) {
      for (int r = 0; r <= n_max; ++r) {
        const int n = left ? l : r;
        if (n == n_max) {
          a(idx(l, r), idx(l, r)) = 1.0;
          continue;
        }
        const double x = chi_tau * std::sqrt(n + 1.0);
        a(idx(l, r), idx(l, r)) = std::cos(x);
        const int to = left ? idx(l + 1, r) : idx(l, r + 1);
        b(to, idx(l, r)) = Complex(0.0, -std::sin(x));
      }
    }
    return {a, b};
  }

  Matrix generator(const Matrix& rho, const MicromaserParams& p) const {
    Matrix out = Matrix::Zero(dim, dim);
    for (const Matrix* b : {&bl, &br}) {
      const Matrix n = b->adjoint() * *b;
      out += *b * rho * b->adjoint() - 0.5 * (n * rho + rho * n);
    }
    const double ct = p.theta / std::sqrt(p.n_ex);
    for (bool left : {true, false}) {
      const auto [a, b] = kraus(left, ct);
      out += p.n_ex * (a * rho * a.adjoint() + b * rho * b.adjoint() - rho);
    }
    const Matrix nl = bl.adjoint() * bl;
    const Matrix nr = br.adjoint() * br;
    const Matrix imb = nl - nr;
    const Matrix h = -p.t_j * (bl.adjoint() * br + br.adjoint() * bl) + 0.25 * p.u_b * imb * imb;
    out += Complex(0.0, -1.0) * (h * rho - rho * h);
    return out;
  }
};

TwoModeDensityMatrix random_block_state(std::mt19937& rng, int n_max) {
  TwoModeDensityMatrix rho(n_max);
  double tr = 0.0;
  for (int total = 0; total <= rho.max_total(); ++total) {
    const int d = rho.block_dim(total);
    const auto v = oracle::random_state(rng, d);
    const double w = oracle::uniform(rng, 0.0, 1.0);
    rho.block(total) = w * v * v.adjoint();
    tr += w;
  }
  rho.data() /= tr;
  return rho;
}

}  // namespace

TEST_CASE("parameter validation") {
  MicromaserParams p;
  CHECK_NOTHROW(p.validate());
  p.n_ex = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.dt = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("block storage layout") {
  TwoModeDensityMatrix rho(3);
  CHECK(rho.max_total() == 6);
  CHECK(rho.block_lo(5) == 2);
  CHECK(rho.block_hi(5) == 3);
  CHECK(rho.block_dim(3) == 4);
  CHECK(rho.contains(3, 3));
  CHECK_FALSE(rho.contains(4, 0));
  const auto vac = TwoModeDensityMatrix::vacuum(3);
  CHECK(vac.trace().real() == doctest::Approx(1.0));
  CHECK(vac(0, 0, 0, 0) == Complex(1.0));
}

TEST_CASE("gain coefficients are unitary columns with an inert cutoff") {
  MicromaserParams p;
  p.theta = 1.7 * kPi;
  const auto g = gain_coefficients(p, 8);
  for (int n = 0; n <= 8; ++n) {
    CHECK(std::norm(g.stay[n]) + std::norm(g.raise[n]) == doctest::Approx(1.0));
  }
  CHECK(g.stay[8] == Complex(1.0));
  CHECK(g.raise[8] == Complex(0.0));
  // off resonance the manifold is still unitary
  p.eta = 0.4;
  p.beta = 0.1;
  const auto h = gain_coefficients(p, 8);
  for (int n = 0; n < 8; ++n) {
    CHECK(std::norm(h.stay[n]) + std::norm(h.raise[n]) == doctest::Approx(1.0));
  }
}

TEST_CASE("generator matches the dense full-space oracle") {
  std::mt19937 rng(3);
  for (const auto& [t_j, u_b] : {std::pair{0.0, 0.0}, {1.3, 0.0}, {0.7, 2.1}}) {
    MicromaserParams p;
    p.n_ex = 7.0;
    p.theta = 1.3 * kPi;
    p.t_j = t_j;
    p.u_b = u_b;
    p.n_max = 4;
    const Dense dense(4);
    const auto rho = random_block_state(rng, 4);
    Vector out;
    Liouvillian(p).apply(rho.data(), out);
    TwoModeDensityMatrix got(4);
    got.data() = out;
    const Matrix ref = dense.generator(dense.from(rho), p);
    // block diagonality: the oracle has nothing outside equal-N blocks
    CHECK((dense.from(got) - ref).norm() < 1e-12 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("commutator and damping pieces agree with the dense oracle") {
  std::mt19937 rng(4);
  const Dense dense(3);
  const auto rho = random_block_state(rng, 3);
  const Matrix r = dense.from(rho);
  const Matrix nl = dense.bl.adjoint() * dense.bl;
  const Matrix nr = dense.br.adjoint() * dense.br;
  const Matrix h = -0.8 * (dense.bl.adjoint() * dense.br + dense.br.adjoint() * dense.bl) +
                   0.25 * 1.9 * (nl - nr) * (nl - nr);
  const Matrix comm = Complex(0.0, -1.0) * (h * r - r * h);
  CHECK((dense.from(hb_commutator(rho, 1.9, 0.8)) - comm).norm() < 1e-12);

  Matrix damp = Matrix::Zero(dense.dim, dense.dim);
  for (const Matrix* b : {&dense.bl, &dense.br}) {
    const Matrix n = b->adjoint() * *b;
    damp += 0.5 * 0.6 * (2.0 * *b * r * b->adjoint() - n * r - r * n);
  }
  CHECK((dense.from(damping_superoperator(rho, 0.6)) - damp).norm() < 1e-12);
}

TEST_CASE("gain map is completely positive (Choi matrix)") {
  for (int n_max : {2, 3}) {
    MicromaserParams p;
    p.theta = 0.83 * kPi;
    p.eta = n_max == 3 ? 0.3 : 0.0;
    TwoModeDensityMatrix layout(n_max);
    // enumerate basis states, then |a><b| for a, b in the same block
    std::vector<std::pair<int, int>> states;
    for (int total = 0; total <= layout.max_total(); ++total) {
      for (int nl = layout.block_lo(total); nl <= layout.block_hi(total); ++nl) {
        states.emplace_back(nl, total - nl);
      }
    }
    const int d = static_cast<int>(states.size());
    auto index = [&](int nl, int nr) {
      for (int k = 0; k < d; ++k) {
        if (states[k] == std::pair{nl, nr}) return k;
      }
      return -1;
    };
    for (Well well : {Well::left, Well::right}) {
      Matrix choi = Matrix::Zero(d * d, d * d);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          const auto [al, ar] = states[a];
          const auto [bl, br] = states[b];
          if (al + ar != bl + br) continue;
          TwoModeDensityMatrix unit(n_max);
          unit(al, ar, bl, br) = 1.0;
          const auto out = gain_map(unit, well, p).rho;
          for (int total = 0; total <= out.max_total(); ++total) {
            for (int xl = out.block_lo(total); xl <= out.block_hi(total); ++xl) {
              for (int yl = out.block_lo(total); yl <= out.block_hi(total); ++yl) {
                const int x = index(xl, total - xl);
                const int y = index(yl, total - yl);
                choi(a * d + x, b * d + y) = out(xl, total - xl, yl, total - yl);
              }
            }
          }
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()));
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
  }
}

TEST_CASE("gain map preserves trace and positivity on random states") {
  std::mt19937 rng(21);
  MicromaserParams p;
  p.theta = 2.3 * kPi;
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = random_block_state(rng, 5);
    const auto out = gain_map(rho, trial % 2 ? Well::left : Well::right, p);
    CHECK(out.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.rho.min_eigenvalue() > -1e-12);
    CHECK(out.rho.hermiticity_defect() < 1e-12);
  }
}

TEST_CASE("uncoupled steady state equals the detailed-balance distribution") {
  for (double theta_over_pi : {1.0, 2.0}) {
    MicromaserParams p;
    p.theta = theta_over_pi * kPi;
    p.n_max = 12;
    p.dt = 0.05;
    p.t_max = 400.0;
    const auto res = evolve_to_steady_state(p);
    CHECK(res.converged);
    const auto pn = single_well_distribution(res.rho, Well::left);
    const auto ref = oracle::detailed_balance(p.n_ex, p.theta, 12);
    CHECK(oracle::total_variation(pn, ref) < 1e-6);
  }
}

TEST_CASE("steady state does not depend on the requested step") {
  MicromaserParams p;
  p.n_max = 6;
  p.t_j = 1.0;
  p.u_b = 0.5;
  p.t_max = 400.0;
  p.dt = 0.05;
  const auto a = evolve_to_steady_state(p);
  p.dt = 0.01;
  const auto b = evolve_to_steady_state(p);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.rho.data() - b.rho.data()).cwiseAbs().sum() < 1e-6);
}

TEST_CASE("symmetry consequences: J_y = J_z = 0, and J_x = 0 without collisions") {
  MicromaserParams p;
  p.n_max = 8;
  p.t_j = 2.5;
  p.dt = 0.05;
  p.t_max = 400.0;
  auto res = evolve_to_steady_state(p);
  REQUIRE(res.converged);
  CHECK(std::abs(jx_coherence(res.rho)) < 1e-6);
  CHECK(std::abs(jy_coherence(res.rho)) < 1e-8);
  CHECK(std::abs(jz_expectation(res.rho)) < 1e-8);
  CHECK(res.rho.exchange_asymmetry() < 1e-10);

  p.u_b = 1.4;
  res = evolve_to_steady_state(p);
  REQUIRE(res.converged);
  CHECK(std::abs(jx_coherence(res.rho)) > 1e-3);
  CHECK(std::abs(jz_expectation(res.rho)) < 1e-8);
}

TEST_CASE("truncation robustness at the default cutoff") {
  MicromaserParams p;
  p.dt = 0.05;
  p.t_max = 400.0;
  p.n_max = 12;
  const auto a = evolve_to_steady_state(p);
  p.n_max = 14;
  const auto b = evolve_to_steady_state(p);
  const double na = mean_number(single_well_distribution(a.rho, Well::left));
  const double nb = mean_number(single_well_distribution(b.rho, Well::left));
  CHECK(std::abs(na - nb) < 1e-4);
}

TEST_CASE("automatic cutoff grows with the pump and with tunneling") {
  MicromaserParams p;
  p.theta = 0.2 * kPi;
  const int small = auto_n_max(p);
  p.theta = 0.5 * kPi;
  const int large = auto_n_max(p);
  CHECK(small < large);
  p.t_j = 5.0;
  CHECK(auto_n_max(p) == std::min(40, large + 4));
  CHECK(small >= 4);
}

TEST_CASE("automatic cutoff grows past a trapping state broken by tunneling") {
  MicromaserParams p;
  p.theta = std::sqrt(5.0) * kPi;
  p.t_j = 5.0;
  p.n_max = 0;
  p.dt = 0.05;
  p.t_max = 400.0;
  REQUIRE(auto_n_max(p) < 10);  // the estimate alone sees the trap
  const auto res = evolve_to_steady_state(p);
  CHECK(res.n_max > auto_n_max(p));
  CHECK(res.edge_population <= 1e-5);
}

TEST_CASE("number statistics helpers") {
  const std::vector<double> fock{0.0, 0.0, 0.0, 1.0};
  CHECK(mean_number(fock) == doctest::Approx(3.0));
  CHECK(*mandel_q(fock) == doctest::Approx(-1.0));
  std::vector<double> poisson(60);
  double term = std::exp(-4.0);
  for (int n = 0; n < 60; ++n) {
    poisson[n] = term;
    term *= 4.0 / (n + 1);
  }
  CHECK(*mandel_q(poisson) == doctest::Approx(0.0).epsilon(1e-9));
  const std::vector<double> vac{1.0};
  CHECK_FALSE(mandel_q(vac).has_value());
}

TEST_CASE("relative phase of a symmetric single-molecule state") {
  const double s = 1.0 / std::sqrt(2.0);
  const TwoModeDensityMatrix::Amplitude amps[] = {{1, 0, s}, {0, 1, s}};
  const auto rho = TwoModeDensityMatrix::pure(3, amps);
  const auto d = relative_phase_distribution(rho, 64);
  REQUIRE(d.phi.size() == 64);
  CHECK(d.phi.front() == doctest::Approx(-kPi));
  double norm = 0.0;
  for (std::size_t k = 0; k < d.phi.size(); ++k) {
    norm += d.prob[k] * d.dphi;
    CHECK(d.prob[k] == doctest::Approx((1.0 + std::cos(d.phi[k])) / (2.0 * kPi)).epsilon(1e-9));
  }
  CHECK(norm == doctest::Approx(1.0));
  CHECK(jx_coherence(rho) == doctest::Approx(0.5));  // <(b_l^+ b_r + h.c.)/2>
}

TEST_CASE("sweep records per-point results in theta order") {
  MicromaserParams p;
  p.n_max = 6;
  p.dt = 0.05;
  p.t_max = 200.0;
  const std::vector<double> thetas{2.0 * kPi, 0.5 * kPi, kPi};
  const auto rows = theta_sweep(p, thetas, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].theta < rows[1].theta);
  CHECK(rows[1].theta < rows[2].theta);
  for (const auto& r : rows) CHECK(r.error.empty());
}
