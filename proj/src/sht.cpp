// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/sht.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace unisphere {
namespace {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSymmetryTol = 1e-8;

// F(i, m) = dphi * sum_j values(i, j) e^{-i m phi_j}, exact for bandlimited
// integrands since n_phi > 2 * bandlimit.
MatrixXcd phi_analysis(const Grid& g, const MatrixXd& values) {
  MatrixXcd phase(g.bandlimit() + 1, g.n_phi());
  for (int m = 0; m <= g.bandlimit(); ++m)
    for (int j = 0; j < g.n_phi(); ++j) phase(m, j) = g.phase(m, j);
  return g.dphi() * (values * phase.adjoint());
}

// out(i, j) = sum_{m >= 0} c_m Re(rows(i, m) e^{i m phi_j}), c_0 = 1, c_m = 2;
// this is the m-sum of a real field whose negative-m terms are conjugates.
MatrixXd phi_synthesis(const Grid& g, MatrixXcd rows) {
  MatrixXcd phase(g.bandlimit() + 1, g.n_phi());
  for (int m = 0; m <= g.bandlimit(); ++m)
    for (int j = 0; j < g.n_phi(); ++j) phase(m, j) = g.phase(m, j);
  for (int m = 1; m <= g.bandlimit(); ++m) rows.col(m) *= 2.0;
  return (rows * phase).real();
}

void check_real_symmetry(const Coeffs& a, const char* where) {
  const double scale = 1.0 + std::sqrt(a.squared_sum());
  require(a.real_symmetry_defect() <= kSymmetryTol * scale, std::string(where) +
          ": coefficients lack the conjugate symmetry of a real field");
}

void check_grid_covers(const Grid& g, const Coeffs& a, const char* where) {
  require(g.bandlimit() >= a.bandlimit(),
          std::string(where) + ": grid bandlimit below coefficient bandlimit");
}

ArrayXd plm_row(const Grid& g, int l, int m) {
  ArrayXd out(g.n_theta());
  for (int i = 0; i < g.n_theta(); ++i) out[i] = g.plm(l, m, i);
  return out;
}

ArrayXd dplm_row(const Grid& g, int l, int m) {
  ArrayXd out(g.n_theta());
  for (int i = 0; i < g.n_theta(); ++i) out[i] = g.dplm(l, m, i);
  return out;
}

// ---------------------------------------------------------------------------
// Derivative-chain machinery.
//
// A Chain holds the theta-derivatives (orders 0..depth) of one complex
// longitudinal mode t(theta) e^{i m phi} at the colatitude nodes. Covariant
// differentiation in the frame {e_theta, e_phi} maps chains to chains one
// depth lower: the e_theta component is the derivative shift, the e_phi
// component multiplies by (i m csc) and adds cot-weighted connection terms,
// both evaluated with Leibniz products against cached cot/csc derivative
// chains so that every order stays spectrally exact.
// ---------------------------------------------------------------------------

struct FuncChain {
  std::array<ArrayXd, 5> d;
};

FuncChain cot_func_chain(const Grid& g) {
  FuncChain fc;
  for (int k = 0; k <= 4; ++k) {
    fc.d[k].resize(g.n_theta());
    for (int i = 0; i < g.n_theta(); ++i) fc.d[k][i] = g.cot_chain(k, i);
  }
  return fc;
}

FuncChain csc_func_chain(const Grid& g) {
  FuncChain fc;
  for (int k = 0; k <= 4; ++k) {
    fc.d[k].resize(g.n_theta());
    for (int i = 0; i < g.n_theta(); ++i) fc.d[k][i] = g.csc_chain(k, i);
  }
  return fc;
}

struct Chain {
  int depth = -1;
  std::array<ArrayXcd, 5> d;
};

Chain zero_chain(int depth, int n_theta) {
  Chain q;
  q.depth = depth;
  for (int k = 0; k <= depth; ++k) q.d[k] = ArrayXcd::Zero(n_theta);
  return q;
}

constexpr double kBinom[5][5] = {{1, 0, 0, 0, 0},
                                 {1, 1, 0, 0, 0},
                                 {1, 2, 1, 0, 0},
                                 {1, 3, 3, 1, 0},
                                 {1, 4, 6, 4, 1}};

// Derivative shift: the chain of q'.
Chain shift_theta(const Chain& q) {
  Chain out;
  out.depth = q.depth - 1;
  for (int k = 0; k <= out.depth; ++k) out.d[k] = q.d[k + 1];
  return out;
}

// acc += scale * (fc * q), with product derivatives by the Leibniz rule.
void add_product(Chain& acc, Complex scale, const FuncChain& fc, const Chain& q) {
  for (int k = 0; k <= acc.depth; ++k) {
    ArrayXcd term = ArrayXcd::Zero(acc.d[k].size());
    for (int j = 0; j <= k; ++j) term += kBinom[k][j] * fc.d[j] * q.d[k - j];
    acc.d[k] += scale * term;
  }
}

void add_scaled(Chain& acc, Complex scale, const Chain& q) {
  for (int k = 0; k <= acc.depth; ++k) acc.d[k] += scale * q.d[k];
}

// Aggregated chain of one longitudinal mode of a scalar expansion:
// sum_l a_{l,m} [d^k/dtheta^k P_l^m](theta_i), k = 0..depth. Orders >= 2
// come from the Legendre ODE, p'' = -cot p' - (lambda - m^2 csc^2) p,
// differentiated through.
Chain scalar_mode_chain(const Grid& g, const Coeffs& a, int m, int depth) {
  const int nt = g.n_theta();
  Chain q = zero_chain(depth, nt);

  ArrayXd ct(nt), s2(nt);
  for (int i = 0; i < nt; ++i) {
    ct[i] = g.cot_theta(i);
    s2[i] = g.csc_theta(i) * g.csc_theta(i);
  }
  const double m2 = static_cast<double>(m) * m;

  std::array<ArrayXd, 5> p;
  for (int l = std::max(m, 0); l <= a.bandlimit(); ++l) {
    const Complex alm = a.at(l, m);
    if (alm == Complex(0.0)) continue;
    const double lam = lambda_of(l);
    p[0] = plm_row(g, l, m);
    if (depth >= 1) p[1] = dplm_row(g, l, m);
    if (depth >= 2) p[2] = -ct * p[1] - (lam - m2 * s2) * p[0];
    if (depth >= 3)
      p[3] = -ct * p[2] + ((1.0 + m2) * s2 - lam) * p[1] - 2.0 * m2 * s2 * ct * p[0];
    if (depth >= 4)
      p[4] = -ct * p[3] + ((2.0 + m2) * s2 - lam) * p[2] -
             2.0 * (1.0 + 2.0 * m2) * s2 * ct * p[1] +
             2.0 * m2 * s2 * (2.0 * ct * ct + s2) * p[0];
    for (int k = 0; k <= depth; ++k) q.d[k] += alm * p[k];
  }
  return q;
}

// One covariant derivative of a rank-r frame-component stack (2^r chains,
// component bits MSB-first, 0 = e_theta, 1 = e_phi). The new slot becomes the
// most significant bit; output chains lose one depth.
std::vector<Chain> raise_rank(const std::vector<Chain>& comps, int rank, int m,
                              const FuncChain& fc_cot, const FuncChain& fc_csc,
                              int n_theta) {
  const int n_in = 1 << rank;
  std::vector<Chain> out(2 * n_in);
  const Complex im_m(0.0, static_cast<double>(m));
  for (int mask = 0; mask < n_in; ++mask) {
    out[mask] = shift_theta(comps[mask]);

    Chain t = zero_chain(comps[mask].depth - 1, n_theta);
    add_product(t, im_m, fc_csc, comps[mask]);
    for (int slot = 0; slot < rank; ++slot) {
      const int bitpos = rank - 1 - slot;
      if (((mask >> bitpos) & 1) == 0) {
        add_product(t, -1.0, fc_cot, comps[mask | (1 << bitpos)]);
      } else {
        add_product(t, +1.0, fc_cot, comps[mask & ~(1 << bitpos)]);
      }
    }
    out[n_in + mask] = std::move(t);
  }
  return out;
}

// Base frame components (rank 1, chains of depth `depth`) of the one-form
// d f + *d g for longitudinal mode m; inputs must carry depth + 1.
std::vector<Chain> one_form_mode(const Grid& g, const Coeffs& f, const Coeffs& cg,
                                 int m, int depth, const FuncChain& fc_cot,
                                 const FuncChain& fc_csc) {
  const int nt = g.n_theta();
  const Chain bf = scalar_mode_chain(g, f, m, depth + 1);
  const Chain bg = scalar_mode_chain(g, cg, m, depth + 1);
  const std::vector<Chain> df =
      raise_rank({bf}, 0, m, fc_cot, fc_csc, nt);
  const std::vector<Chain> dg =
      raise_rank({bg}, 0, m, fc_cot, fc_csc, nt);
  std::vector<Chain> comps(2);
  comps[0] = zero_chain(depth, nt);
  add_scaled(comps[0], 1.0, df[0]);
  add_scaled(comps[0], -1.0, dg[1]);  // (*d g)_theta = -(d g)_phi
  comps[1] = zero_chain(depth, nt);
  add_scaled(comps[1], 1.0, df[1]);
  add_scaled(comps[1], 1.0, dg[0]);  // (*d g)_phi = (d g)_theta
  return comps;
}

// Base frame components (rank 2, depth `depth`) of CK(d f) + CK(*d g);
// inputs must carry depth + 2.
std::vector<Chain> tensor_mode(const Grid& g, const Coeffs& f, const Coeffs& cg,
                               int m, int depth, const FuncChain& fc_cot,
                               const FuncChain& fc_csc) {
  const int nt = g.n_theta();
  const Chain bf = scalar_mode_chain(g, f, m, depth + 2);
  const Chain bg = scalar_mode_chain(g, cg, m, depth + 2);
  std::vector<Chain> hf = raise_rank({bf}, 0, m, fc_cot, fc_csc, nt);
  hf = raise_rank(hf, 1, m, fc_cot, fc_csc, nt);
  std::vector<Chain> hg = raise_rank({bg}, 0, m, fc_cot, fc_csc, nt);
  hg = raise_rank(hg, 1, m, fc_cot, fc_csc, nt);

  // CK(d f) is the trace-free part of the Hessian of f; CK(*d g) is its
  // Hodge rotation on the first index applied to the Hessian of g.
  std::vector<Chain> comps(4);
  Chain t00 = zero_chain(depth, nt);
  add_scaled(t00, 0.5, hf[0]);
  add_scaled(t00, -0.5, hf[3]);
  add_scaled(t00, -0.5, hg[1]);
  add_scaled(t00, -0.5, hg[2]);
  Chain t01 = zero_chain(depth, nt);
  add_scaled(t01, 0.5, hf[1]);
  add_scaled(t01, 0.5, hf[2]);
  add_scaled(t01, 0.5, hg[0]);
  add_scaled(t01, -0.5, hg[3]);
  Chain t11 = zero_chain(depth, nt);
  add_scaled(t11, -1.0, t00);
  comps[0] = std::move(t00);
  comps[1] = t01;
  comps[2] = std::move(t01);
  comps[3] = std::move(t11);
  return comps;
}

std::vector<MatrixXd> stack_from_modes(
    const GridPtr& grid, int bandlimit, int base_rank, int extra_rank,
    const std::function<std::vector<Chain>(int m, const FuncChain&, const FuncChain&)>&
        base_mode) {
  const Grid& g = *grid;
  const FuncChain fc_cot = cot_func_chain(g);
  const FuncChain fc_csc = csc_func_chain(g);
  const int rank = base_rank + extra_rank;
  const int ncomp = 1 << rank;
  std::vector<MatrixXcd> rows(
      ncomp, MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1));

  for (int m = 0; m <= bandlimit; ++m) {
    std::vector<Chain> comps = base_mode(m, fc_cot, fc_csc);
    for (int r = base_rank; r < rank; ++r)
      comps = raise_rank(comps, r, m, fc_cot, fc_csc, g.n_theta());
    for (int c = 0; c < ncomp; ++c) rows[c].col(m) = comps[c].d[0].matrix();
  }

  std::vector<MatrixXd> out(ncomp);
  for (int c = 0; c < ncomp; ++c) out[c] = phi_synthesis(g, rows[c]);
  return out;
}

// Shape profiles of the tensor-basis elements at colatitude node values:
// d Y_l^m       = (C, i D) e^{i m phi},   C = p1, D = m csc p0
// CK(d Y_l^m)   = (A, i B) e^{i m phi},
//   A = -cot p1 - (lambda/2 - m^2 csc^2) p0,  B = m csc (p1 - cot p0),
// with *d and CK(*d) the Hodge rotations (-iD, C) and (-iB, A).
struct OneFormShape {
  ArrayXd c, d;
};
OneFormShape one_form_shape(const Grid& g, int l, int m) {
  OneFormShape s;
  s.c = dplm_row(g, l, m);
  s.d.resize(g.n_theta());
  const ArrayXd p0 = plm_row(g, l, m);
  for (int i = 0; i < g.n_theta(); ++i) s.d[i] = m * g.csc_theta(i) * p0[i];
  return s;
}

struct TensorShape {
  ArrayXd a, b;
};
TensorShape tensor_shape(const Grid& g, int l, int m) {
  TensorShape s;
  const ArrayXd p0 = plm_row(g, l, m);
  const ArrayXd p1 = dplm_row(g, l, m);
  const double lam = lambda_of(l);
  s.a.resize(g.n_theta());
  s.b.resize(g.n_theta());
  for (int i = 0; i < g.n_theta(); ++i) {
    const double ct = g.cot_theta(i);
    const double cs = g.csc_theta(i);
    s.a[i] = -ct * p1[i] - (0.5 * lam - m * m * cs * cs) * p0[i];
    s.b[i] = m * cs * (p1[i] - ct * p0[i]);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Real basis conversions
// ---------------------------------------------------------------------------

Coeffs real_basis_to_complex(const VectorXd& real_coeffs, int bandlimit) {
  require(static_cast<int>(real_coeffs.size()) == (bandlimit + 1) * (bandlimit + 1),
          "real_basis_to_complex: size mismatch");
  Coeffs a(bandlimit);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int l = 0; l <= bandlimit; ++l) {
    a.at(l, 0) = real_coeffs[Coeffs::index(l, 0)];
    for (int m = 1; m <= l; ++m) {
      const double x = real_coeffs[Coeffs::index(l, m)];
      const double y = real_coeffs[Coeffs::index(l, -m)];
      a.at(l, m) = Complex(x, -y) * inv_sqrt2;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      a.at(l, -m) = sign * std::conj(a.at(l, m));
    }
  }
  return a;
}

VectorXd complex_to_real_basis(const Coeffs& coeffs) {
  check_real_symmetry(coeffs, "complex_to_real_basis");
  const int L = coeffs.bandlimit();
  VectorXd r = VectorXd::Zero((L + 1) * (L + 1));
  const double sqrt2 = std::sqrt(2.0);
  for (int l = 0; l <= L; ++l) {
    r[Coeffs::index(l, 0)] = coeffs.at(l, 0).real();
    for (int m = 1; m <= l; ++m) {
      r[Coeffs::index(l, m)] = sqrt2 * coeffs.at(l, m).real();
      r[Coeffs::index(l, -m)] = -sqrt2 * coeffs.at(l, m).imag();
    }
  }
  return r;
}

Eigen::MatrixXd real_basis_matrix(const GridPtr& grid) {
  const int L = grid->bandlimit();
  const int n_phi = grid->n_phi();
  const int n_basis = (L + 1) * (L + 1);
  const double sqrt2 = std::sqrt(2.0);
  Eigen::MatrixXd B(grid->n_theta() * n_phi, n_basis);
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const int row = i * n_phi + j;
      for (int l = 0; l <= L; ++l) {
        B(row, Coeffs::index(l, 0)) = grid->plm(l, 0, i);
        for (int m = 1; m <= l; ++m) {
          const double p = grid->plm(l, m, i);
          B(row, Coeffs::index(l, m)) = sqrt2 * p * std::cos(m * grid->phi(j));
          B(row, Coeffs::index(l, -m)) = sqrt2 * p * std::sin(m * grid->phi(j));
        }
      }
    }
  }
  return B;
}

// ---------------------------------------------------------------------------
// Scalar transforms
// ---------------------------------------------------------------------------

Coeffs analyze(const ScalarField& f) {
  require(f.grid != nullptr, "analyze: empty field");
  require(f.values.allFinite(), "analyze: non-finite field values");
  const Grid& g = *f.grid;
  const MatrixXcd F = phi_analysis(g, f.values);
  Coeffs a(g.bandlimit());
  for (int m = 0; m <= g.bandlimit(); ++m) {
    for (int l = m; l <= g.bandlimit(); ++l) {
      Complex acc = 0.0;
      for (int i = 0; i < g.n_theta(); ++i)
        acc += g.weight(i) * g.plm(l, m, i) * F(i, m);
      a.at(l, m) = acc;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        a.at(l, -m) = sign * std::conj(acc);
      }
    }
  }
  return a;
}

ScalarField synthesize(const Coeffs& a, const GridPtr& grid) {
  check_grid_covers(*grid, a, "synthesize");
  check_real_symmetry(a, "synthesize");
  const Grid& g = *grid;
  MatrixXcd rows = MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1);
  for (int m = 0; m <= a.bandlimit(); ++m)
    for (int l = m; l <= a.bandlimit(); ++l) {
      const Complex alm = a.at(l, m);
      if (alm == Complex(0.0)) continue;
      for (int i = 0; i < g.n_theta(); ++i) rows(i, m) += alm * g.plm(l, m, i);
    }
  return ScalarField(grid, phi_synthesis(g, rows));
}

double synthesize_at(const Coeffs& a, double theta, double phi) {
  return evaluate_jet(a, theta, phi, 0).value;
}

PointJet evaluate_jet(const Coeffs& a, double theta, double phi, int depth) {
  require(depth >= 0 && depth <= 2, "evaluate_jet: depth must be 0, 1, or 2");
  check_real_symmetry(a, "evaluate_jet");
  const double s = std::sin(theta);
  require(s > 1e-8, "evaluate_jet: point too close to a pole");
  const double ct = std::cos(theta) / s;
  const double cs = 1.0 / s;

  std::vector<VectorXd> p;
  legendre_chain_at(a.bandlimit(), theta, std::min(depth, 2), p);

  PointJet jet;
  for (int m = 0; m <= a.bandlimit(); ++m) {
    const Complex phase(std::cos(m * phi), std::sin(m * phi));
    const double cm = (m == 0) ? 1.0 : 2.0;
    for (int l = m; l <= a.bandlimit(); ++l) {
      const Complex w = a.at(l, m) * phase;
      const int t = l * (l + 1) / 2 + m;
      jet.value += cm * (w * p[0][t]).real();
      if (depth >= 1) {
        jet.d1 += cm * (w * p[1][t]).real();
        jet.d2 += cm * (w * Complex(0.0, m * cs * p[0][t])).real();
      }
      if (depth >= 2) {
        jet.h11 += cm * (w * p[2][t]).real();
        jet.h12 += cm * (w * Complex(0.0, m * cs * (p[1][t] - ct * p[0][t]))).real();
        jet.h22 += cm * (w * (ct * p[1][t] - m * m * cs * cs * p[0][t])).real();
      }
    }
  }
  return jet;
}

// ---------------------------------------------------------------------------
// Coefficient-space operators
// ---------------------------------------------------------------------------

Coeffs laplacian(const Coeffs& a) {
  Coeffs out = a;
  out.scale_by_degree([](int l) { return -lambda_of(l); });
  return out;
}

Coeffs inverse_laplacian(const Coeffs& a) {
  Coeffs out = a;
  out.scale_by_degree([](int l) { return l == 0 ? 0.0 : -1.0 / lambda_of(l); });
  return out;
}

// ---------------------------------------------------------------------------
// First-order geometry
// ---------------------------------------------------------------------------

OneForm gradient(const Coeffs& a, const GridPtr& grid) {
  check_grid_covers(*grid, a, "gradient");
  check_real_symmetry(a, "gradient");
  const Grid& g = *grid;
  MatrixXcd rows1 = MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1);
  MatrixXcd rows2 = rows1;
  for (int m = 0; m <= a.bandlimit(); ++m)
    for (int l = std::max(m, 1); l <= a.bandlimit(); ++l) {
      const Complex alm = a.at(l, m);
      if (alm == Complex(0.0)) continue;
      const OneFormShape s = one_form_shape(g, l, m);
      for (int i = 0; i < g.n_theta(); ++i) {
        rows1(i, m) += alm * s.c[i];
        rows2(i, m) += alm * Complex(0.0, s.d[i]);
      }
    }
  OneForm w(grid);
  w.comp1 = phi_synthesis(g, rows1);
  w.comp2 = phi_synthesis(g, rows2);
  return w;
}

OneForm hodge_star(const OneForm& w) {
  OneForm out(w.grid);
  out.comp1 = -w.comp2;
  out.comp2 = w.comp1;
  return out;
}

TraceFreeTensor hodge_star(const TraceFreeTensor& T) {
  TraceFreeTensor out(T.grid);
  out.t11 = -T.t12;
  out.t12 = T.t11;
  return out;
}

SymTensor2 hessian(const Coeffs& a, const GridPtr& grid) {
  check_grid_covers(*grid, a, "hessian");
  check_real_symmetry(a, "hessian");
  const Grid& g = *grid;
  MatrixXcd rows11 = MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1);
  MatrixXcd rows12 = rows11, rows22 = rows11;
  for (int m = 0; m <= a.bandlimit(); ++m)
    for (int l = std::max(m, 1); l <= a.bandlimit(); ++l) {
      const Complex alm = a.at(l, m);
      if (alm == Complex(0.0)) continue;
      const double lam = lambda_of(l);
      const ArrayXd p0 = plm_row(g, l, m);
      const ArrayXd p1 = dplm_row(g, l, m);
      for (int i = 0; i < g.n_theta(); ++i) {
        const double ct = g.cot_theta(i);
        const double cs = g.csc_theta(i);
        const double p2 = -ct * p1[i] - (lam - m * m * cs * cs) * p0[i];
        rows11(i, m) += alm * p2;
        rows12(i, m) += alm * Complex(0.0, m * cs * (p1[i] - ct * p0[i]));
        rows22(i, m) += alm * (ct * p1[i] - m * m * cs * cs * p0[i]);
      }
    }
  SymTensor2 h(grid);
  h.t11 = phi_synthesis(g, rows11);
  h.t12 = phi_synthesis(g, rows12);
  h.t22 = phi_synthesis(g, rows22);
  return h;
}

// ---------------------------------------------------------------------------
// Helmholtz / trace-free decompositions
// ---------------------------------------------------------------------------

OneFormPotentials analyze_one_form(const OneForm& w) {
  require(w.grid != nullptr, "analyze_one_form: empty field");
  require(w.comp1.allFinite() && w.comp2.allFinite(),
          "analyze_one_form: non-finite components");
  const Grid& g = *w.grid;
  const MatrixXcd F1 = phi_analysis(g, w.comp1);
  const MatrixXcd F2 = phi_analysis(g, w.comp2);
  OneFormPotentials p(g.bandlimit());
  for (int m = 0; m <= g.bandlimit(); ++m)
    for (int l = std::max(m, 1); l <= g.bandlimit(); ++l) {
      const OneFormShape s = one_form_shape(g, l, m);
      Complex f = 0.0, gg = 0.0;
      for (int i = 0; i < g.n_theta(); ++i) {
        const Complex iD(0.0, s.d[i]);
        f += g.weight(i) * (s.c[i] * F1(i, m) - iD * F2(i, m));
        gg += g.weight(i) * (iD * F1(i, m) + s.c[i] * F2(i, m));
      }
      const double lam = lambda_of(l);
      p.grad_part.at(l, m) = f / lam;
      p.curl_part.at(l, m) = gg / lam;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        p.grad_part.at(l, -m) = sign * std::conj(p.grad_part.at(l, m));
        p.curl_part.at(l, -m) = sign * std::conj(p.curl_part.at(l, m));
      }
    }
  return p;
}

OneForm synthesize_one_form(const OneFormPotentials& p, const GridPtr& grid) {
  check_grid_covers(*grid, p.grad_part, "synthesize_one_form");
  check_real_symmetry(p.grad_part, "synthesize_one_form");
  check_real_symmetry(p.curl_part, "synthesize_one_form");
  const Grid& g = *grid;
  MatrixXcd rows1 = MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1);
  MatrixXcd rows2 = rows1;
  for (int m = 0; m <= p.grad_part.bandlimit(); ++m)
    for (int l = std::max(m, 1); l <= p.grad_part.bandlimit(); ++l) {
      const Complex f = p.grad_part.at(l, m);
      const Complex cg = p.curl_part.at(l, m);
      if (f == Complex(0.0) && cg == Complex(0.0)) continue;
      const OneFormShape s = one_form_shape(g, l, m);
      for (int i = 0; i < g.n_theta(); ++i) {
        const Complex iD(0.0, s.d[i]);
        rows1(i, m) += f * s.c[i] - cg * iD;
        rows2(i, m) += f * iD + cg * s.c[i];
      }
    }
  OneForm w(grid);
  w.comp1 = phi_synthesis(g, rows1);
  w.comp2 = phi_synthesis(g, rows2);
  return w;
}

void trace_free_at(const TensorPotentials& p, double theta, double phi,
                   double& t11, double& t12) {
  const PointJet jf = evaluate_jet(p.grad_part, theta, phi, 2);
  const PointJet jg = evaluate_jet(p.curl_part, theta, phi, 2);
  // CK(d f) is the trace-free Hessian of f; CK(*d g) its Hodge rotation.
  t11 = 0.5 * (jf.h11 - jf.h22) - jg.h12;
  t12 = jf.h12 + 0.5 * (jg.h11 - jg.h22);
}

void one_form_at(const OneFormPotentials& p, double theta, double phi,
                 double& w1, double& w2) {
  const PointJet jf = evaluate_jet(p.grad_part, theta, phi, 1);
  const PointJet jg = evaluate_jet(p.curl_part, theta, phi, 1);
  w1 = jf.d1 - jg.d2;
  w2 = jf.d2 + jg.d1;
}

TensorPotentials analyze_trace_free(const TraceFreeTensor& T) {
  require(T.grid != nullptr, "analyze_trace_free: empty field");
  require(T.t11.allFinite() && T.t12.allFinite(),
          "analyze_trace_free: non-finite components");
  const Grid& g = *T.grid;
  const MatrixXcd F11 = phi_analysis(g, T.t11);
  const MatrixXcd F12 = phi_analysis(g, T.t12);
  TensorPotentials p(g.bandlimit());
  for (int m = 0; m <= g.bandlimit(); ++m)
    for (int l = std::max(m, 2); l <= g.bandlimit(); ++l) {
      const TensorShape s = tensor_shape(g, l, m);
      Complex e = 0.0, b = 0.0;
      for (int i = 0; i < g.n_theta(); ++i) {
        const Complex iB(0.0, s.b[i]);
        e += g.weight(i) * (s.a[i] * F11(i, m) - iB * F12(i, m));
        b += g.weight(i) * (iB * F11(i, m) + s.a[i] * F12(i, m));
      }
      const double lam = lambda_of(l);
      const double ml = 0.5 * lam * (lam - 2.0);  // |CK(d Y_l)|^2_{L2}
      p.grad_part.at(l, m) = 2.0 * e / ml;
      p.curl_part.at(l, m) = 2.0 * b / ml;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        p.grad_part.at(l, -m) = sign * std::conj(p.grad_part.at(l, m));
        p.curl_part.at(l, -m) = sign * std::conj(p.curl_part.at(l, m));
      }
    }
  return p;
}

TraceFreeTensor synthesize_trace_free(const TensorPotentials& p, const GridPtr& grid) {
  check_grid_covers(*grid, p.grad_part, "synthesize_trace_free");
  check_real_symmetry(p.grad_part, "synthesize_trace_free");
  check_real_symmetry(p.curl_part, "synthesize_trace_free");
  const Grid& g = *grid;
  MatrixXcd rows11 = MatrixXcd::Zero(g.n_theta(), g.bandlimit() + 1);
  MatrixXcd rows12 = rows11;
  for (int m = 0; m <= p.grad_part.bandlimit(); ++m)
    for (int l = std::max(m, 2); l <= p.grad_part.bandlimit(); ++l) {
      const Complex e = p.grad_part.at(l, m);
      const Complex b = p.curl_part.at(l, m);
      if (e == Complex(0.0) && b == Complex(0.0)) continue;
      const TensorShape s = tensor_shape(g, l, m);
      for (int i = 0; i < g.n_theta(); ++i) {
        const Complex iB(0.0, s.b[i]);
        rows11(i, m) += e * s.a[i] - b * iB;
        rows12(i, m) += e * iB + b * s.a[i];
      }
    }
  TraceFreeTensor T(grid);
  T.t11 = phi_synthesis(g, rows11);
  T.t12 = phi_synthesis(g, rows12);
  return T;
}

TensorPotentials conformal_killing(const OneFormPotentials& p) {
  TensorPotentials out(p.grad_part.bandlimit());
  out.grad_part = p.grad_part;
  out.curl_part = p.curl_part;
  out.grad_part.drop_below(2);
  out.curl_part.drop_below(2);
  return out;
}

TraceFreeTensor conformal_killing(const OneForm& w) {
  return synthesize_trace_free(conformal_killing(analyze_one_form(w)), w.grid);
}

OneFormPotentials divergence_trace_free(const TensorPotentials& p) {
  OneFormPotentials out(p.grad_part.bandlimit());
  out.grad_part = p.grad_part;
  out.curl_part = p.curl_part;
  const auto mult = [](int l) { return 0.5 * (2.0 - lambda_of(l)); };
  out.grad_part.scale_by_degree(mult);
  out.curl_part.scale_by_degree(mult);
  return out;
}

OneForm divergence_trace_free(const TraceFreeTensor& T) {
  return synthesize_one_form(divergence_trace_free(analyze_trace_free(T)), T.grid);
}

Coeffs divergence_one_form(const OneForm& w) {
  return laplacian(analyze_one_form(w).grad_part);
}

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

double inner(const ScalarField& a, const ScalarField& b) {
  return a.grid->integrate(a.values.cwiseProduct(b.values));
}

double inner(const OneForm& a, const OneForm& b) {
  return a.grid->integrate(a.comp1.cwiseProduct(b.comp1) +
                           a.comp2.cwiseProduct(b.comp2));
}

double inner(const TraceFreeTensor& a, const TraceFreeTensor& b) {
  return 2.0 * a.grid->integrate(a.t11.cwiseProduct(b.t11) +
                                 a.t12.cwiseProduct(b.t12));
}

// ---------------------------------------------------------------------------
// Derivative stacks
// ---------------------------------------------------------------------------

std::vector<MatrixXd> derivative_stack(const Coeffs& scalar, const GridPtr& grid,
                                       int rank) {
  require(rank >= 0 && rank <= 4, "derivative_stack: scalar rank must be <= 4");
  check_grid_covers(*grid, scalar, "derivative_stack");
  check_real_symmetry(scalar, "derivative_stack");
  const Grid& g = *grid;
  return stack_from_modes(grid, scalar.bandlimit(), 0, rank,
                          [&](int m, const FuncChain&, const FuncChain&) {
                            return std::vector<Chain>{
                                scalar_mode_chain(g, scalar, m, rank)};
                          });
}

std::vector<MatrixXd> derivative_stack(const OneFormPotentials& p,
                                       const GridPtr& grid, int extra_rank) {
  require(extra_rank >= 0 && extra_rank <= 3,
          "derivative_stack: one-form extra rank must be <= 3");
  check_grid_covers(*grid, p.grad_part, "derivative_stack");
  check_real_symmetry(p.grad_part, "derivative_stack");
  check_real_symmetry(p.curl_part, "derivative_stack");
  const Grid& g = *grid;
  return stack_from_modes(
      grid, p.grad_part.bandlimit(), 1, extra_rank,
      [&](int m, const FuncChain& fc_cot, const FuncChain& fc_csc) {
        return one_form_mode(g, p.grad_part, p.curl_part, m, extra_rank, fc_cot,
                             fc_csc);
      });
}

std::vector<MatrixXd> derivative_stack(const TensorPotentials& p,
                                       const GridPtr& grid, int extra_rank) {
  require(extra_rank >= 0 && extra_rank <= 2,
          "derivative_stack: tensor extra rank must be <= 2");
  check_grid_covers(*grid, p.grad_part, "derivative_stack");
  check_real_symmetry(p.grad_part, "derivative_stack");
  check_real_symmetry(p.curl_part, "derivative_stack");
  const Grid& g = *grid;
  return stack_from_modes(
      grid, p.grad_part.bandlimit(), 2, extra_rank,
      [&](int m, const FuncChain& fc_cot, const FuncChain& fc_csc) {
        return tensor_mode(g, p.grad_part, p.curl_part, m, extra_rank, fc_cot,
                           fc_csc);
      });
}

// ---------------------------------------------------------------------------
// Basis elements and graded norms
// ---------------------------------------------------------------------------

namespace {

bool is_tensor_family(BasisFamily family) {
  return family == BasisFamily::kCKGrad || family == BasisFamily::kCKStarGrad;
}

bool is_star_family(BasisFamily family) {
  return family == BasisFamily::kStarGradScalar ||
         family == BasisFamily::kCKStarGrad;
}

// Potentials of the (real-basis) element; the star families place the
// coefficient in the curl potential.
void element_potentials(BasisFamily family, int l, int m, Coeffs& f, Coeffs& cg) {
  require(l >= 1 && l <= f.bandlimit(), "basis element: degree out of range");
  require(!is_tensor_family(family) || l >= 2,
          "basis element: CK families require l >= 2 (l = 1 is the kernel)");
  require(std::abs(m) <= l, "basis element: order out of range");
  VectorXd r = VectorXd::Zero((f.bandlimit() + 1) * (f.bandlimit() + 1));
  r[Coeffs::index(l, m)] = 1.0;
  const Coeffs c = real_basis_to_complex(r, f.bandlimit());
  if (is_star_family(family)) {
    cg = c;
  } else {
    f = c;
  }
}

}  // namespace

OneForm one_form_basis_element(BasisFamily family, int l, int m,
                               const GridPtr& grid) {
  require(!is_tensor_family(family),
          "one_form_basis_element: tensor family requested");
  OneFormPotentials p(grid->bandlimit());
  element_potentials(family, l, m, p.grad_part, p.curl_part);
  return synthesize_one_form(p, grid);
}

TraceFreeTensor tensor_basis_element(BasisFamily family, int l, int m,
                                     const GridPtr& grid) {
  require(is_tensor_family(family),
          "tensor_basis_element: one-form family requested");
  TensorPotentials p(grid->bandlimit());
  element_potentials(family, l, m, p.grad_part, p.curl_part);
  return synthesize_trace_free(p, grid);
}

BasisNorm basis_norm(BasisFamily family, int l, int n, const GridPtr& grid) {
  const bool tensor = is_tensor_family(family);
  const int max_extra = tensor ? 2 : 3;
  const int kmax = std::abs(n);
  require(kmax <= max_extra,
          "basis_norm: derivative order exceeds the supported stack depth");
  require(l <= grid->bandlimit(), "basis_norm: degree above grid bandlimit");

  // L2 masses of the iterated covariant derivatives, k = 0..|n|.
  std::vector<double> mass(kmax + 1, 0.0);
  if (tensor) {
    TensorPotentials p(grid->bandlimit());
    element_potentials(family, l, 0, p.grad_part, p.curl_part);
    for (int k = 0; k <= kmax; ++k) {
      const std::vector<MatrixXd> stack = derivative_stack(p, grid, k);
      MatrixXd sq = MatrixXd::Zero(grid->n_theta(), grid->n_phi());
      for (const MatrixXd& c : stack) sq += c.cwiseProduct(c);
      mass[k] = grid->integrate(sq);
    }
  } else {
    OneFormPotentials p(grid->bandlimit());
    element_potentials(family, l, 0, p.grad_part, p.curl_part);
    for (int k = 0; k <= kmax; ++k) {
      const std::vector<MatrixXd> stack = derivative_stack(p, grid, k);
      MatrixXd sq = MatrixXd::Zero(grid->n_theta(), grid->n_phi());
      for (const MatrixXd& c : stack) sq += c.cwiseProduct(c);
      mass[k] = grid->integrate(sq);
    }
  }

  BasisNorm out;
  if (n >= 0) {
    for (int k = 0; k <= n; ++k) out.value += mass[k];
  } else {
    // Dual-space norm: the pairing sup is attained at the element itself
    // because the family is orthogonal in every graded inner product.
    double graded = 0.0;
    for (int k = 0; k <= kmax; ++k) graded += mass[k];
    out.value = mass[0] * mass[0] / graded;
  }
  const double lam = lambda_of(l);
  out.reference_power = std::pow(lam, n + (tensor ? 2 : 1));
  out.ratio = out.value / out.reference_power;
  return out;
}

}  // namespace unisphere
