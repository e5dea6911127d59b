// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace unisphere {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  require(n >= 1, "gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int k = 0; k < half; ++k) {
    // Tricomi-type initial guess, then Newton on P_n.
    double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // One clean-up evaluation for the weight.
    double p0 = 1.0, p1 = x;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // Nodes come out in decreasing x from the cosine guess; store so that
    // theta = acos(x) increases with the index.
    nodes[k] = x;
    nodes[n - 1 - k] = -x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[k] = w;
    weights[n - 1 - k] = w;
  }
}

namespace {

// Normalized associated Legendre recurrences (Condon-Shortley phase folded
// in). Fills one column (all l, m at a fixed x = cos theta) of values and
// first theta-derivatives.
void legendre_column(int bandlimit, double x, double sin_theta,
                     double* p0_col, double* p1_col) {
  const int L = bandlimit;
  auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
  // Diagonal p_m^m and first off-diagonal p_{m+1}^m, then upward recurrence.
  p0_col[tri(0, 0)] = std::sqrt(1.0 / kFourPi);
  for (int m = 1; m <= L; ++m) {
    p0_col[tri(m, m)] =
        -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta * p0_col[tri(m - 1, m - 1)];
  }
  for (int m = 0; m < L; ++m) {
    p0_col[tri(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p0_col[tri(m, m)];
  }
  for (int m = 0; m <= L; ++m) {
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
      const double b = std::sqrt(
          ((static_cast<double>(l - 1) * (l - 1) - m * m)) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p0_col[tri(l, m)] = a * (x * p0_col[tri(l - 1, m)] - b * p0_col[tri(l - 2, m)]);
    }
  }
  // d/dtheta via  sin(theta) p1 = l x P_l^m - e_l P_{l-1}^m.
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      double e = 0.0;
      if (l > m) {
        e = std::sqrt((static_cast<double>(l) * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0));
      }
      const double upper = (l > m) ? p0_col[tri(l - 1, m)] : 0.0;
      p1_col[tri(l, m)] = (l * x * p0_col[tri(l, m)] - e * upper) / sin_theta;
    }
  }
}

}  // namespace

Grid::Grid(int bandlimit) : Grid(bandlimit, bandlimit + 2, 2 * bandlimit + 4) {}

Grid::Grid(int bandlimit, int n_theta, int n_phi)
    : bandlimit_(bandlimit), n_theta_(n_theta), n_phi_(n_phi) {
  require(bandlimit_ >= 4, "Grid: bandlimit must be at least 4");
  require(n_theta_ >= bandlimit_ + 1, "Grid: need n_theta >= bandlimit + 1");
  require(n_phi_ >= 2 * bandlimit_ + 1, "Grid: need n_phi >= 2*bandlimit + 1");
  build();
}

void Grid::build() {
  gauss_legendre(n_theta_, x_, w_);
  dphi_ = kTwoPi / n_phi_;
  theta_.resize(n_theta_);
  sin_theta_.resize(n_theta_);
  cot_theta_.resize(n_theta_);
  csc_theta_.resize(n_theta_);
  for (int i = 0; i < n_theta_; ++i) {
    theta_[i] = std::acos(x_[i]);
    sin_theta_[i] = std::sqrt(1.0 - x_[i] * x_[i]);
    csc_theta_[i] = 1.0 / sin_theta_[i];
    cot_theta_[i] = x_[i] / sin_theta_[i];
  }
  phi_.resize(n_phi_);
  for (int j = 0; j < n_phi_; ++j) phi_[j] = dphi_ * j;

  p0_.resize(n_tri(), n_theta_);
  p1_.resize(n_tri(), n_theta_);
  std::vector<double> c0(n_tri()), c1(n_tri());
  for (int i = 0; i < n_theta_; ++i) {
    legendre_column(bandlimit_, x_[i], sin_theta_[i], c0.data(), c1.data());
    for (int t = 0; t < n_tri(); ++t) {
      p0_(t, i) = c0[t];
      p1_(t, i) = c1[t];
    }
  }

  phase_.resize(bandlimit_ + 1, n_phi_);
  for (int m = 0; m <= bandlimit_; ++m) {
    for (int j = 0; j < n_phi_; ++j) {
      phase_(m, j) = Complex(std::cos(m * phi_[j]), std::sin(m * phi_[j]));
    }
  }

  // Derivative chains of cot and csc, used when building covariant
  // derivative stacks: with c = cot, s = csc,
  //   cot:  c, -s^2, 2s^2 c, -4s^2c^2 - 2s^4, 8s^2c^3 + 16s^4 c
  //   csc:  s, -sc, sc^2 + s^3, -sc^3 - 5s^3 c, sc^4 + 18 s^3 c^2 + 5 s^5.
  cot_chain_.resize(5, n_theta_);
  csc_chain_.resize(5, n_theta_);
  for (int i = 0; i < n_theta_; ++i) {
    const double c = cot_theta_[i], s = csc_theta_[i];
    cot_chain_(0, i) = c;
    cot_chain_(1, i) = -s * s;
    cot_chain_(2, i) = 2 * s * s * c;
    cot_chain_(3, i) = -4 * s * s * c * c - 2 * s * s * s * s;
    cot_chain_(4, i) = 8 * s * s * c * c * c + 16 * s * s * s * s * c;
    csc_chain_(0, i) = s;
    csc_chain_(1, i) = -s * c;
    csc_chain_(2, i) = s * c * c + s * s * s;
    csc_chain_(3, i) = -s * c * c * c - 5 * s * s * s * c;
    csc_chain_(4, i) = s * c * c * c * c + 18 * s * s * s * c * c + 5 * std::pow(s, 5);
  }
}

double Grid::integrate(const Eigen::MatrixXd& values) const {
  require(values.rows() == n_theta_ && values.cols() == n_phi_,
          "Grid::integrate: value shape does not match the grid");
  double total = 0.0;
  for (int i = 0; i < n_theta_; ++i) total += w_[i] * values.row(i).sum();
  return total * dphi_;
}

GridPtr build_grid(int bandlimit) {
  // Grids are immutable, so equal bandlimits share one instance; pointer
  // equality then identifies "same grid" across independently loaded data.
  static std::mutex mutex;
  static std::map<int, std::weak_ptr<const Grid>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  if (GridPtr hit = cache[bandlimit].lock()) return hit;
  GridPtr fresh = std::make_shared<Grid>(bandlimit);
  cache[bandlimit] = fresh;
  return fresh;
}

void legendre_chain_at(int bandlimit, double theta, int depth,
                       std::vector<Eigen::VectorXd>& out) {
  require(depth >= 0 && depth <= 4, "legendre_chain_at: depth must be in [0, 4]");
  const int L = bandlimit;
  const int n_tri = (L + 1) * (L + 2) / 2;
  out.assign(depth + 1, Eigen::VectorXd::Zero(n_tri));
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  require(s > 1e-12, "legendre_chain_at: point too close to a pole");
  auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };
  std::vector<double> c0(n_tri), c1(n_tri);
  legendre_column(L, x, s, c0.data(), c1.data());
  for (int t = 0; t < n_tri; ++t) out[0][t] = c0[t];
  if (depth >= 1)
    for (int t = 0; t < n_tri; ++t) out[1][t] = c1[t];
  if (depth >= 2) {
    const double cot = x / s, csc = 1.0 / s, csc2 = csc * csc;
    for (int m = 0; m <= L; ++m) {
      for (int l = m; l <= L; ++l) {
        const int t = tri(l, m);
        const double lam = lambda_of(l), mu = lam - m * m * csc2;
        const double p0 = out[0][t], p1 = out[1][t];
        const double p2 = -cot * p1 - mu * p0;
        out[2][t] = p2;
        if (depth >= 3) {
          const double p3 = -cot * p2 + ((1.0 + m * m) * csc2 - lam) * p1 -
                            2.0 * m * m * csc2 * cot * p0;
          out[3][t] = p3;
          if (depth >= 4) {
            out[4][t] = -cot * p3 + (2.0 * csc2 - mu) * p2 -
                        2.0 * csc2 * cot * (1.0 + 2.0 * m * m) * p1 +
                        2.0 * m * m * csc2 * (2.0 * cot * cot + csc2) * p0;
          }
        }
      }
    }
  }
}

}  // namespace unisphere
