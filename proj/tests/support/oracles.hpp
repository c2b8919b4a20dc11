#pragma once

// Independent reference implementations used by the test suites. None of
// these share code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;

/// Eigenvalues of a real symmetric tridiagonal matrix by Sturm-sequence
/// bisection, ascending.
inline std::vector<double> sturm_eigenvalues(const std::vector<double>& diag,
                                             const std::vector<double>& off) {
  const int n = static_cast<int>(diag.size());
  double lo = 0.0;
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {  // Gershgorin
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  // number of eigenvalues strictly below x
  auto count_below = [&](double x) {
    int count = 0;
    double q = 1.0;
    for (int i = 0; i < n; ++i) {
      const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      q = diag[i] - x - (i > 0 ? b2 / q : 0.0);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  };
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    double a = lo - 1.0;
    double b = hi + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      (count_below(m) > k ? b : a) = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

/// exp(A) by scaling and squaring of a truncated Taylor series.
inline Matrix expm_taylor(const Matrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Matrix x = a / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Single-well micromaser steady state from detailed balance:
/// P(n+1)/P(n) = N_ex sin^2(theta sqrt((n+1)/N_ex)) / (n+1), truncated at n_max.
inline std::vector<double> detailed_balance(double n_ex, double theta, int n_max) {
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  p[0] = 1.0;
  for (int n = 0; n < n_max; ++n) {
    const double s = std::sin(theta * std::sqrt((n + 1.0) / n_ex));
    p[n + 1] = p[n] * n_ex * s * s / (n + 1.0);
  }
  double z = 0.0;
  for (double v : p) z += v;
  for (double& v : p) v /= z;
  return p;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    s += std::abs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0));
  }
  return 0.5 * s;
}

/// Overlap volume of two spheres of radius r with centers d apart, sampled
/// uniformly in the first sphere.
inline double mc_overlap_volume(double d, double r, int samples, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-r, r);
  int inside_first = 0;
  int inside_both = 0;
  while (inside_first < samples) {
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    if (x * x + y * y + z * z > r * r) continue;
    ++inside_first;
    const double xs = x - d;
    if (xs * xs + y * y + z * z <= r * r) ++inside_both;
  }
  return 4.0 / 3.0 * kPi * r * r * r * inside_both / inside_first;
}

/// Normalized Fourier transform of a Thomas-Fermi profile (1 - r^2/R^2),
/// q = p R.
inline double tf_form_factor(double q) {
  if (q < 1e-3) return 1.0 - q * q / 14.0;
  return 15.0 * ((3.0 - q * q) * std::sin(q) - 3.0 * q * std::cos(q)) / std::pow(q, 5);
}

struct VariationalBcs {
  std::vector<double> angle;  // u = cos, v = sin
  double energy = 0.0;
  double gap = 0.0;           // V sum u v
  double atom_number = 0.0;   // 2 sum v^2
};

/// Minimizes E = sum 2 xi v^2 - V (sum u v)^2 over the angles by coordinate
/// descent with golden-section line searches, from random starts.
inline VariationalBcs minimize_bcs(const std::vector<double>& xi, double v, std::mt19937& rng,
                                   int restarts = 4) {
  const std::size_t m = xi.size();
  auto energy = [&](const std::vector<double>& a) {
    double kin = 0.0;
    double pair = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = std::sin(a[i]);
      kin += 2.0 * xi[i] * s * s;
      pair += std::cos(a[i]) * s;
    }
    return kin - v * pair * pair;
  };
  std::uniform_real_distribution<double> start(0.05, kPi / 2 - 0.05);
  VariationalBcs best;
  best.energy = 1e300;
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> a(m);
    for (auto& x : a) x = start(rng);
    for (int sweep = 0; sweep < 400; ++sweep) {
      for (std::size_t i = 0; i < m; ++i) {
        double lo = 0.0;
        double hi = kPi / 2;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 80; ++it) {
          const double c = hi - g * (hi - lo);
          const double d = lo + g * (hi - lo);
          a[i] = c;
          const double fc = energy(a);
          a[i] = d;
          const double fd = energy(a);
          (fc < fd ? hi : lo) = fc < fd ? d : c;
        }
        a[i] = 0.5 * (lo + hi);
      }
    }
    const double e = energy(a);
    if (e < best.energy) {
      best.energy = e;
      best.angle = a;
    }
  }
  double pair = 0.0;
  double n = 0.0;
  for (double x : best.angle) {
    pair += std::cos(x) * std::sin(x);
    n += 2.0 * std::sin(x) * std::sin(x);
  }
  best.gap = v * pair;
  best.atom_number = n;
  return best;
}

// ---- hand-rolled generators

inline Matrix random_hermitian(std::mt19937& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

inline Eigen::VectorXcd random_state(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v / v.norm();
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace oracle
