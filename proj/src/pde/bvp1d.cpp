#include "chaosflow/pde/bvp1d.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chaosflow::pde {

namespace {

// Solves a tridiagonal system in place; sub[0] and sup[n-1] are ignored.
void thomas(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

double interpolate(const std::vector<double>& u, double h, double x) {
  const double s = std::clamp(x / h, 0.0, static_cast<double>(u.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(s), u.size() - 2);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * u[i] + w * u[i + 1];
}

}  // namespace

double reflected_path(double x0, const Diffusion1d& coef, double dt, std::span<const double> xi, std::size_t cells) {
  if (x0 < 0.0) throw std::invalid_argument("reflected_path: start must be nonnegative");
  if (cells > xi.size()) throw std::invalid_argument("reflected_path: too few increments");
  const double sd = std::sqrt(dt);
  double x = x0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double next = x + coef.drift(x) * dt + coef.sigma(x) * sd * xi[c];
    if (!std::isfinite(next)) throw std::runtime_error("reflected_path: Euler step unstable");
    x = std::abs(next);
  }
  return x;
}

core::Estimate reflected_bvp_1d(const sq::BoundedOp& C, const CoefFn& f, const Diffusion1d& coef, double x0, double t,
                                const core::TimeGrid& grid, std::span<const double> xi, std::size_t n,
                                std::uint64_t seed) {
  const std::size_t cells = grid.cells_until(t);
  return sq::gamma_mc(
      C, [&](std::span<const double> eta) { return f(reflected_path(x0, coef, grid.dt(), eta, cells)); }, xi, n, seed);
}

double reflected_fd_oracle(const CoefFn& f, const Diffusion1d& coef, double x0, double t, double x_max,
                           std::size_t points, std::size_t steps) {
  if (points < 3 || steps == 0 || !(x_max > 0.0) || !(t > 0.0)) throw std::invalid_argument("reflected_fd_oracle: bad grid");
  const double h = x_max / static_cast<double>(points - 1);
  const double k = t / static_cast<double>(steps);
  std::vector<double> u(points), a(points), b(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * h;
    u[i] = f(x);
    const double s = coef.sigma(x);
    a[i] = 0.5 * s * s / (h * h);
    b[i] = coef.drift(x) / (2.0 * h);
  }
  // L u_i = a_i (u_{i-1} - 2u_i + u_{i+1}) + b_i (u_{i+1} - u_{i-1}); ghost nodes mirror at both ends
  std::vector<double> lo(points), di(points), up(points);
  for (std::size_t i = 0; i < points; ++i) {
    lo[i] = a[i] - b[i];
    di[i] = -2.0 * a[i];
    up[i] = a[i] + b[i];
  }
  up[0] += lo[0];
  lo[0] = 0.0;
  lo[points - 1] += up[points - 1];
  up[points - 1] = 0.0;
  std::vector<double> sub(points), diag(points), sup(points), rhs(points);
  for (std::size_t i = 0; i < points; ++i) {
    sub[i] = -0.5 * k * lo[i];
    diag[i] = 1.0 - 0.5 * k * di[i];
    sup[i] = -0.5 * k * up[i];
  }
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t i = 0; i < points; ++i) {
      double Lu = di[i] * u[i];
      if (i > 0) Lu += lo[i] * u[i - 1];
      if (i + 1 < points) Lu += up[i] * u[i + 1];
      rhs[i] = u[i] + 0.5 * k * Lu;
    }
    thomas(sub, diag, sup, rhs);
    u.swap(rhs);
  }
  return interpolate(u, h, x0);
}

HarmonicExtension::HarmonicExtension(const StoppedProblem& problem, std::size_t nodes)
    : L_(problem.length), g0_(problem.g0), gL_(problem.gL), scale_(nodes, 0.0) {
  if (!(L_ > 0.0) || nodes < 3) throw std::invalid_argument("HarmonicExtension: bad interval");
  // s'(x) = exp(-int_0^x 2b/sigma^2), trapezoidal in both integrals
  const double h = L_ / static_cast<double>(nodes - 1);
  auto rate = [&](double x) {
    const double s = problem.coef.sigma(x);
    return 2.0 * problem.coef.drift(x) / (s * s);
  };
  double expo = 0.0;
  double prev_rate = rate(0.0);
  double prev_slope = 1.0;
  for (std::size_t i = 1; i < nodes; ++i) {
    const double x = static_cast<double>(i) * h;
    const double r = rate(x);
    expo += 0.5 * h * (prev_rate + r);
    const double slope = std::exp(-expo);
    scale_[i] = scale_[i - 1] + 0.5 * h * (prev_slope + slope);
    prev_rate = r;
    prev_slope = slope;
  }
}

double HarmonicExtension::operator()(double x) const {
  if (x <= 0.0) return g0_;
  if (x >= L_) return gL_;
  const double h = L_ / static_cast<double>(scale_.size() - 1);
  return g0_ + (gL_ - g0_) * interpolate(scale_, h, x) / scale_.back();
}

double stopped_path_value(const StoppedProblem& problem, const HarmonicExtension& gt, double x0, std::size_t start,
                          double dt, std::span<const double> xi) {
  const double L = problem.length;
  if (x0 <= 0.0) return problem.g0;
  if (x0 >= L) return problem.gL;
  const double sd = std::sqrt(dt);
  double y = x0;
  double weight = 1.0;
  double running = 0.0;
  double value = 0.0;
  for (std::size_t c = start; c < xi.size() && weight > 0.0; ++c) {
    const double s = problem.coef.sigma(y);
    const double next = y + problem.coef.drift(y) * dt + s * sd * xi[c];
    if (!std::isfinite(next)) throw std::runtime_error("stopped_path_value: Euler step unstable");
    const double var = s * s * dt;
    const double p0 = next <= 0.0 ? 1.0 : std::exp(-2.0 * y * next / var);
    const double pL = next >= L ? 1.0 : std::exp(-2.0 * (L - y) * (L - next) / var);
    const double survive = (next <= 0.0 || next >= L) ? 0.0 : (1.0 - p0) * (1.0 - pL);
    const double fy = problem.running(y);
    if (survive < 1.0) {
      // exits are charged half a step of running cost
      const double killed = 1.0 - survive;
      const double share0 = p0 / (p0 + pL);
      const double exit_value = share0 * problem.g0 + (1.0 - share0) * problem.gL;
      value += weight * killed * (running + 0.5 * fy * dt + exit_value);
    }
    if (survive > 0.0) running += 0.5 * (fy + problem.running(next)) * dt;
    weight *= survive;
    y = next;
  }
  if (weight > 0.0) value += weight * (running + gt(y));
  return value;
}

core::Estimate stopped_bvp_1d(const sq::BoundedOp& C, const StoppedProblem& problem, double x0, double t,
                              const core::TimeGrid& grid, std::span<const double> xi, std::size_t n,
                              std::uint64_t seed) {
  const std::size_t start = grid.cells_until(t);
  const HarmonicExtension gt(problem);
  return sq::gamma_mc(
      C, [&](std::span<const double> eta) { return stopped_path_value(problem, gt, x0, start, grid.dt(), eta); }, xi,
      n, seed);
}

double stopped_fd_oracle(const StoppedProblem& problem, double x0, double t, double horizon, std::size_t points,
                         std::size_t steps) {
  if (points < 3 || steps == 0 || !(horizon > t)) throw std::invalid_argument("stopped_fd_oracle: bad grid");
  const double L = problem.length;
  if (x0 <= 0.0) return problem.g0;
  if (x0 >= L) return problem.gL;
  const HarmonicExtension gt(problem);
  const double h = L / static_cast<double>(points - 1);
  const double k = (horizon - t) / static_cast<double>(steps);
  const std::size_t ni = points - 2;  // interior nodes
  std::vector<double> q(points), lo(points), di(points), up(points), src(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * h;
    q[i] = gt(x);
    const double s = problem.coef.sigma(x);
    const double a = 0.5 * s * s / (h * h);
    const double b = problem.coef.drift(x) / (2.0 * h);
    lo[i] = a - b;
    di[i] = -2.0 * a;
    up[i] = a + b;
    src[i] = problem.running(x);
  }
  q[0] = problem.g0;
  q[points - 1] = problem.gL;
  std::vector<double> sub(ni), diag(ni), sup(ni), rhs(ni);
  for (std::size_t r = 0; r < ni; ++r) {
    const std::size_t i = r + 1;
    sub[r] = -0.5 * k * lo[i];
    diag[r] = 1.0 - 0.5 * k * di[i];
    sup[r] = -0.5 * k * up[i];
  }
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t r = 0; r < ni; ++r) {
      const std::size_t i = r + 1;
      const double Lq = lo[i] * q[i - 1] + di[i] * q[i] + up[i] * q[i + 1];
      rhs[r] = q[i] + 0.5 * k * Lq + k * src[i];
    }
    // Dirichlet values are constant in time and enter both half steps
    rhs[0] += 0.5 * k * lo[1] * q[0];
    rhs[ni - 1] += 0.5 * k * up[ni] * q[points - 1];
    thomas(sub, diag, sup, rhs);
    for (std::size_t r = 0; r < ni; ++r) q[r + 1] = rhs[r];
  }
  return interpolate(q, h, x0);
}

}  // namespace chaosflow::pde
