#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace chaosflow::pde {

// Uniform nodes x_i = i h on [0, x_max] and times s_n = n ds on [0, t].
struct SpaceTimeGrid {
  double x_max = 0.0;
  double h = 0.01;
  double t = 1.0;
  std::size_t steps = 100;

  std::size_t points() const;  // number of spatial nodes
  double x(std::size_t i) const { return static_cast<double>(i) * h; }
  double ds() const { return t / static_cast<double>(steps); }
  double s(std::size_t n) const { return static_cast<double>(n) * ds(); }
  void validate() const;
};

struct Bvp3Options {
  int depth = 30;                       // K
  double horizon = 0.0;                 // T of e = 1_{[0,T]}/sqrt(T); 0 means 2t
  std::optional<double> boundary;       // V_0(0, s); defaults to f(0) (stopped semantics)
  double curvature_tol = 1e-4;          // allowed |f''(0)|
};

// Coefficients V_0..V_K of V(x, s, eta) = sum_k H_k(eta) V_k(x, s).
class HermiteSeriesField {
 public:
  HermiteSeriesField(SpaceTimeGrid grid, double horizon, std::vector<Eigen::MatrixXd> coeffs);

  const SpaceTimeGrid& grid() const { return grid_; }
  double horizon() const { return T_; }
  int depth() const { return static_cast<int>(V_.size()) - 1; }
  // Rows are spatial nodes, column n is time s_n.
  const Eigen::MatrixXd& coeff(int k) const { return V_.at(static_cast<std::size_t>(k)); }
  // V_k(x, s_n) by linear interpolation in x.
  double coeff_at(int k, double x, std::size_t n) const;
  // V(x, s_n, eta).
  double value(double x, std::size_t n, double eta) const;
  // e^{-eta^2/2} V(x, s_n, eta).
  double weighted(double x, std::size_t n, double eta) const;
  // |H_{K-1}(eta) V_{K-1}| + |H_K(eta) V_K| at (x, s_n), used as the truncation error estimate.
  double tail(double x, std::size_t n, double eta) const;

 private:
  SpaceTimeGrid grid_;
  double T_;
  std::vector<Eigen::MatrixXd> V_;
};

using RealFn = std::function<double(double)>;

// Backward system d_s V_0 + V_0''/2 = 0, d_s V_k + V_k''/2 + T^{-1/2} d_x V_{k-1} = 0 on x > 0,
// V_0(x, t) = f, V_k(x, t) = 0, Dirichlet V_0(0, s) = b0, V_k(0, s) = 0. Solved by exact killed-kernel
// steps on the piecewise-linear interpolant; the Duhamel source is taken linear in time over a step.
HermiteSeriesField bvp3_solve(const RealFn& f, const SpaceTimeGrid& grid, const Bvp3Options& options = {});

// Same system by Crank-Nicolson finite differences (independent validation).
HermiteSeriesField bvp3_solve_fd(const RealFn& f, const SpaceTimeGrid& grid, const Bvp3Options& options = {});

// V_k(x, s) with tau = t - s: (1/k!) (tau/T)^{k/2} int q_tau(x,y) H_k((y-x)/sqrt(tau)) (f(y) - b0) dy,
// plus b0 for k = 0.
double bvp3_closed_form(const RealFn& f, double b0, double tau, double horizon, int k, double x);

// Max over eta in etas, interior nodes x <= x_hi and steps of the finite-difference residual of
// d_s V + V_xx/2 + T^{-1/2} d_x (eta V - d_eta V) = 0 (central in x and eta, trapezoidal in s).
double bvp3_residual(const HermiteSeriesField& field, std::span<const double> etas, double x_hi, double eta_step);

// Second-order estimate of f''(0) from one-sided differences with Richardson extrapolation.
double curvature_at_zero(const RealFn& f, double step = 1e-3);

}  // namespace chaosflow::pde
