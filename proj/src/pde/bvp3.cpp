#include "chaosflow/pde/bvp3.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosflow/core/hermite.h"
#include "chaosflow/core/quadrature.h"
#include "chaosflow/pde/killed.h"

namespace chaosflow::pde {

std::size_t SpaceTimeGrid::points() const { return static_cast<std::size_t>(std::llround(x_max / h)) + 1; }

void SpaceTimeGrid::validate() const {
  if (!(h > 0.0) || !(x_max > 2.0 * h)) throw std::invalid_argument("SpaceTimeGrid: need 0 < 2h < x_max");
  if (!(t > 0.0) || steps == 0) throw std::invalid_argument("SpaceTimeGrid: need t > 0 and steps >= 1");
}

HermiteSeriesField::HermiteSeriesField(SpaceTimeGrid grid, double horizon, std::vector<Eigen::MatrixXd> coeffs)
    : grid_(grid), T_(horizon), V_(std::move(coeffs)) {
  if (V_.empty()) throw std::invalid_argument("HermiteSeriesField: no coefficients");
}

double HermiteSeriesField::coeff_at(int k, double x, std::size_t n) const {
  const auto& V = coeff(k);
  const double u = std::clamp(x / grid_.h, 0.0, static_cast<double>(V.rows() - 1));
  const auto i = std::min(static_cast<Eigen::Index>(u), V.rows() - 2);
  const double w = u - static_cast<double>(i);
  const auto col = static_cast<Eigen::Index>(n);
  return (1.0 - w) * V(i, col) + w * V(i + 1, col);
}

double HermiteSeriesField::value(double x, std::size_t n, double eta) const {
  std::vector<double> H(V_.size());
  core::hermite_table(eta, std::span<double>(H));
  double v = 0.0;
  for (std::size_t k = 0; k < V_.size(); ++k) v += H[k] * coeff_at(static_cast<int>(k), x, n);
  return v;
}

double HermiteSeriesField::weighted(double x, std::size_t n, double eta) const {
  return std::exp(-0.5 * eta * eta) * value(x, n, eta);
}

double HermiteSeriesField::tail(double x, std::size_t n, double eta) const {
  const int K = depth();
  double t = std::abs(core::hermite(K, eta) * coeff_at(K, x, n));
  if (K >= 1) t += std::abs(core::hermite(K - 1, eta) * coeff_at(K - 1, x, n));
  return t;
}

double curvature_at_zero(const RealFn& f, double step) {
  auto d2 = [&](double e) { return (f(0.0) - 2.0 * f(e) + f(2.0 * e)) / (e * e); };
  return 2.0 * d2(0.5 * step) - d2(step);
}

namespace {

struct Setup {
  double T;
  double b0;
};

Setup prepare(const RealFn& f, const SpaceTimeGrid& grid, const Bvp3Options& opt) {
  grid.validate();
  if (opt.depth < 0) throw std::invalid_argument("bvp3: depth must be nonnegative");
  const double T = opt.horizon > 0.0 ? opt.horizon : 2.0 * grid.t;
  if (T < grid.t) throw std::invalid_argument("bvp3: projector horizon shorter than t");
  const double curv = curvature_at_zero(f);
  if (std::abs(curv) > opt.curvature_tol) throw std::domain_error("bvp3: terminal data has f''(0) != 0");
  return {T, opt.boundary.value_or(f(0.0))};
}

// Banded row storage: row i holds columns [first[i], first[i] + vals[i].size()).
struct Band {
  std::vector<std::size_t> first;
  std::vector<std::vector<double>> vals;

  void apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    for (std::size_t i = 0; i < first.size(); ++i) {
      double s = 0.0;
      const auto& v = vals[i];
      for (std::size_t q = 0; q < v.size(); ++q) s += v[q] * u(static_cast<Eigen::Index>(first[i] + q));
      out(static_cast<Eigen::Index>(i)) = s;
    }
  }
};

// Integrals of N(y; c, sd) over [a, b]: I0 = mass, I1 = int (y - a) N dy.
struct Seg {
  double I0, I1;
};

Seg gauss_seg(double c, double sd, double a, double b) {
  const double A = (a - c) / sd, B = (b - c) / sd;
  const double I0 = normal_cdf(B) - normal_cdf(A);
  return {I0, (c - a) * I0 + sd * (normal_pdf(A) - normal_pdf(B))};
}

// Killed kernel segment: direct minus mirrored Gaussian.
Seg killed_seg(double x, double sd, double a, double b) {
  const Seg d = gauss_seg(x, sd, a, b);
  const Seg r = gauss_seg(-x, sd, a, b);
  return {d.I0 - r.I0, d.I1 - r.I1};
}

struct Operators {
  Band M;                // int q_ds(x_i, y) phi_j(y) dy
  Band SA, SB;           // int_0^ds w(r) int q_r(x_i, y) phi_j'(y) dy dr, w = 1 - r/ds and r/ds
  Eigen::VectorXd tail;  // int_{x_max}^inf q_ds
};

Operators build_operators(const SpaceTimeGrid& grid) {
  const std::size_t P = grid.points() - 1;
  const double h = grid.h;
  const double ds = grid.ds();
  // the hat interpolant adds h^2/12 u'' per step, i.e. extra variance h^2/6
  const double var = ds - h * h / 6.0;
  if (!(var > 0.0)) throw std::invalid_argument("bvp3: time step too small for the spatial grid");
  const double sd = std::sqrt(var);
  const auto band = static_cast<std::size_t>(std::ceil(12.0 * std::sqrt(ds) / h)) + 1;
  // r = ds u^2 resolves the boundary layer of q_r near r = 0
  const auto& gl = core::gauss_legendre(16);
  std::vector<double> rs, wa, wb;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double u = 0.5 * (gl.nodes[q] + 1.0);
    const double r = ds * u * u;
    const double jac = 0.5 * gl.weights[q] * 2.0 * ds * u;
    rs.push_back(r);
    wa.push_back(jac * (1.0 - r / ds));
    wb.push_back(jac * (r / ds));
  }
  Operators op;
  for (Band* b : {&op.M, &op.SA, &op.SB}) {
    b->first.assign(P + 1, 0);
    b->vals.assign(P + 1, {});
  }
  op.tail = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P + 1));
  std::vector<double> mass(rs.size());
  for (std::size_t i = 1; i <= P; ++i) {
    const double x = grid.x(i);
    const std::size_t lo = i > band ? i - band : 1;
    const std::size_t hi = std::min(P, i + band);
    op.M.first[i] = op.SA.first[i] = op.SB.first[i] = lo;
    for (std::size_t j = lo; j <= hi; ++j) {
      const Seg L = killed_seg(x, sd, grid.x(j - 1), grid.x(j));
      double m = L.I1 / h;
      if (j < P) {
        const Seg R = killed_seg(x, sd, grid.x(j), grid.x(j + 1));
        m += R.I0 - R.I1 / h;
      }
      op.M.vals[i].push_back(m);
      // phi_j' is 1/h on the left cell and -1/h on the right cell
      double a = 0.0, b = 0.0;
      for (std::size_t q = 0; q < rs.size(); ++q) {
        const double s = std::sqrt(rs[q]);
        double d = killed_seg(x, s, grid.x(j - 1), grid.x(j)).I0;
        if (j < P) d -= killed_seg(x, s, grid.x(j), grid.x(j + 1)).I0;
        a += wa[q] * d / h;
        b += wb[q] * d / h;
      }
      op.SA.vals[i].push_back(a);
      op.SB.vals[i].push_back(b);
    }
    const double A = (grid.x_max - x) / sd, B = (grid.x_max + x) / sd;
    op.tail(static_cast<Eigen::Index>(i)) = normal_cdf(-A) - normal_cdf(-B);
  }
  return op;
}

// Central first differences, second-order one-sided at the far end; node 0 gets a one-sided value.
void diff1(const Eigen::VectorXd& u, double h, Eigen::VectorXd& out) {
  const auto P = u.size() - 1;
  out(0) = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
  for (Eigen::Index i = 1; i < P; ++i) out(i) = (u(i + 1) - u(i - 1)) / (2.0 * h);
  out(P) = (3.0 * u(P) - 4.0 * u(P - 1) + u(P - 2)) / (2.0 * h);
}

}  // namespace

HermiteSeriesField bvp3_solve(const RealFn& f, const SpaceTimeGrid& grid, const Bvp3Options& options) {
  const Setup st = prepare(f, grid, options);
  const Operators op = build_operators(grid);
  const auto np = static_cast<Eigen::Index>(grid.points());
  const auto ns = static_cast<Eigen::Index>(grid.steps);
  const double src = 1.0 / std::sqrt(st.T);
  std::vector<Eigen::MatrixXd> V;
  Eigen::VectorXd next(np), cur(np), work(np);
  for (int k = 0; k <= options.depth; ++k) {
    Eigen::MatrixXd Vk = Eigen::MatrixXd::Zero(np, ns + 1);
    if (k == 0) {
      for (Eigen::Index i = 1; i < np; ++i) Vk(i, ns) = f(grid.x(static_cast<std::size_t>(i))) - st.b0;
    }
    for (Eigen::Index n = ns - 1; n >= 0; --n) {
      next = Vk.col(n + 1);
      op.M.apply(next, cur);
      if (k == 0) {
        cur += op.tail * next(np - 1);
      } else {
        // source linear in time between s_n and s_{n+1}
        const auto& Vp = V.back();
        op.SA.apply(Vp.col(n), work);
        cur += src * work;
        op.SB.apply(Vp.col(n + 1), work);
        cur += src * work;
      }
      cur(0) = 0.0;
      Vk.col(n) = cur;
    }
    V.push_back(std::move(Vk));
  }
  V[0].array() += st.b0;
  // restore the exact terminal row at x = 0
  V[0](0, ns) = st.b0;
  return HermiteSeriesField(grid, st.T, std::move(V));
}

HermiteSeriesField bvp3_solve_fd(const RealFn& f, const SpaceTimeGrid& grid, const Bvp3Options& options) {
  const Setup st = prepare(f, grid, options);
  const auto np = static_cast<Eigen::Index>(grid.points());
  const auto P = np - 1;
  const auto ns = static_cast<Eigen::Index>(grid.steps);
  const double ds = grid.ds();
  const double h = grid.h;
  const double src = 1.0 / std::sqrt(st.T);
  const double r = ds / (4.0 * h * h);  // (ds/2) * (1/2) / h^2
  std::vector<Eigen::MatrixXd> V;
  // Thomas factorization of tridiag(-r, 1 + 2r, -r) on nodes 1..P-1
  const Eigen::Index nu = P - 1;
  std::vector<double> cprime(static_cast<std::size_t>(nu)), denom(static_cast<std::size_t>(nu));
  for (Eigen::Index i = 0; i < nu; ++i) {
    const double b = 1.0 + 2.0 * r;
    denom[static_cast<std::size_t>(i)] = i == 0 ? b : b + r * cprime[static_cast<std::size_t>(i - 1)];
    cprime[static_cast<std::size_t>(i)] = -r / denom[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd rhs(nu), d_now(np), d_next(np);
  for (int k = 0; k <= options.depth; ++k) {
    Eigen::MatrixXd Vk = Eigen::MatrixXd::Zero(np, ns + 1);
    double right = 0.0;
    if (k == 0) {
      for (Eigen::Index i = 1; i < np; ++i) Vk(i, ns) = f(grid.x(static_cast<std::size_t>(i))) - st.b0;
      right = Vk(P, ns);
      Vk.row(P).setConstant(right);
    }
    for (Eigen::Index n = ns - 1; n >= 0; --n) {
      const auto u = Vk.col(n + 1);
      for (Eigen::Index i = 1; i < P; ++i) {
        rhs(i - 1) = u(i) + r * (u(i - 1) - 2.0 * u(i) + u(i + 1));
      }
      if (k > 0) {
        diff1(V.back().col(n), h, d_now);
        diff1(V.back().col(n + 1), h, d_next);
        for (Eigen::Index i = 1; i < P; ++i) rhs(i - 1) += 0.5 * ds * src * (d_now(i) + d_next(i));
      }
      rhs(nu - 1) += r * right;
      // forward sweep and back substitution
      for (Eigen::Index i = 0; i < nu; ++i) {
        const double prev = i == 0 ? 0.0 : rhs(i - 1);
        rhs(i) = (rhs(i) + r * prev) / denom[static_cast<std::size_t>(i)];
      }
      for (Eigen::Index i = nu - 2; i >= 0; --i) rhs(i) -= cprime[static_cast<std::size_t>(i)] * rhs(i + 1);
      Vk(0, n) = 0.0;
      Vk.col(n).segment(1, nu) = rhs;
      Vk(P, n) = right;
    }
    V.push_back(std::move(Vk));
  }
  V[0].array() += st.b0;
  V[0](0, ns) = st.b0;
  return HermiteSeriesField(grid, st.T, std::move(V));
}

double bvp3_closed_form(const RealFn& f, double b0, double tau, double horizon, int k, double x) {
  if (tau < 0.0 || !(horizon > 0.0) || k < 0 || x < 0.0) throw std::invalid_argument("bvp3_closed_form: bad arguments");
  if (tau == 0.0) return k == 0 ? f(x) : 0.0;
  if (x == 0.0) return k == 0 ? b0 : 0.0;
  const double sd = std::sqrt(tau);
  const double lo = std::max(0.0, x - 14.0 * sd);
  const double hi = x + 14.0 * sd;
  const double integral = core::integrate_gl(
      [&](double y) { return killed_kernel(tau, x, y) * core::hermite(k, (y - x) / sd) * (f(y) - b0); }, lo, hi, 64,
      20);
  const double scale = std::pow(tau / horizon, 0.5 * k) / core::factorial(k);
  return scale * integral + (k == 0 ? b0 : 0.0);
}

double bvp3_residual(const HermiteSeriesField& field, std::span<const double> etas, double x_hi, double eta_step) {
  const auto& g = field.grid();
  const double h = g.h;
  const double ds = g.ds();
  const double src = 1.0 / std::sqrt(field.horizon());
  const auto imax = std::min<std::size_t>(static_cast<std::size_t>(x_hi / h), g.points() - 2);
  const int K = field.depth();
  double worst = 0.0;
  for (double eta : etas) {
    std::vector<double> H(static_cast<std::size_t>(K) + 2), Hp(H.size()), Hm(H.size());
    core::hermite_table(eta, std::span<double>(H));
    core::hermite_table(eta + eta_step, std::span<double>(Hp));
    core::hermite_table(eta - eta_step, std::span<double>(Hm));
    // W = eta V - d_eta V with a central difference in eta
    auto V = [&](Eigen::Index i, Eigen::Index n) {
      double v = 0.0;
      for (int k = 0; k <= K; ++k) v += H[static_cast<std::size_t>(k)] * field.coeff(k)(i, n);
      return v;
    };
    auto W = [&](Eigen::Index i, Eigen::Index n) {
      double v = 0.0, dp = 0.0, dm = 0.0;
      for (int k = 0; k <= K; ++k) {
        const double c = field.coeff(k)(i, n);
        v += H[static_cast<std::size_t>(k)] * c;
        dp += Hp[static_cast<std::size_t>(k)] * c;
        dm += Hm[static_cast<std::size_t>(k)] * c;
      }
      return eta * v - (dp - dm) / (2.0 * eta_step);
    };
    auto L = [&](Eigen::Index i, Eigen::Index n) {
      const double vxx = (V(i - 1, n) - 2.0 * V(i, n) + V(i + 1, n)) / (h * h);
      const double wx = (W(i + 1, n) - W(i - 1, n)) / (2.0 * h);
      return 0.5 * vxx + src * wx;
    };
    for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(g.steps); ++n) {
      for (Eigen::Index i = 1; i <= static_cast<Eigen::Index>(imax); ++i) {
        const double r = (V(i, n + 1) - V(i, n)) / ds + 0.5 * (L(i, n) + L(i, n + 1));
        worst = std::max(worst, std::abs(r));
      }
    }
  }
  return worst;
}

}  // namespace chaosflow::pde
