#include "chaosflow/pde/linear_sde.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosflow/core/hermite.h"
#include "chaosflow/core/quadrature.h"

namespace chaosflow::pde {

std::vector<double> indicator_coords(const core::TimeGrid& grid, double t) {
  std::vector<double> h(grid.cells(), 0.0);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const double lo = grid.time(c);
    const double overlap = std::clamp(t - lo, 0.0, grid.dt());
    h[c] = overlap / grid.sqrt_dt();
  }
  return h;
}

core::SymmetricTensor simplex_weights(const core::TimeGrid& grid, double t, int k) {
  const auto h = indicator_coords(grid, t);
  core::SymmetricTensor W(grid.cells(), k);
  core::SymmetricTensor::for_each_index(grid.cells(), k, [&](std::size_t r, std::span<const int> idx) {
    double w = 1.0;
    std::size_t run = 0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      w *= h[static_cast<std::size_t>(idx[p])];
      run = (p > 0 && idx[p] == idx[p - 1]) ? run + 1 : 1;
      w /= static_cast<double>(run);
    }
    W[r] = w;
  });
  return W;
}

std::vector<core::ChaosVector> simplex_integrals(const core::ChaosVector& alpha, const core::TimeGrid& grid, double t) {
  if (alpha.dim() != grid.cells()) throw std::invalid_argument("simplex_integrals: dimension mismatch");
  const int deg = std::max(alpha.max_degree(), 0);
  const std::size_t m = alpha.dim();
  std::vector<core::ChaosVector> S;
  for (int k = 0; k <= deg; ++k) {
    const auto W = simplex_weights(grid, t, k);
    std::vector<std::vector<int>> sidx;
    std::vector<double> sw;
    core::SymmetricTensor::for_each_index(m, k, [&](std::size_t r, std::span<const int> idx) {
      if (W[r] != 0.0) {
        sidx.emplace_back(idx.begin(), idx.end());
        sw.push_back(W[r]);
      }
    });
    core::ChaosVector Sk(m, alpha.order());
    for (int j = k; j <= alpha.order(); ++j) {
      const auto& A = alpha.coeff(j);
      if (A.is_zero()) continue;
      // D^k A_j has coefficient j!/(j-k)! on the remaining j-k slots
      const double c = core::factorial(j) / core::factorial(j - k);
      auto& B = Sk.coeff(j - k);
      std::vector<int> full;
      core::SymmetricTensor::for_each_index(m, j - k, [&](std::size_t r, std::span<const int> rest) {
        double s = 0.0;
        for (std::size_t q = 0; q < sidx.size(); ++q) {
          full.resize(sidx[q].size() + rest.size());
          std::merge(sidx[q].begin(), sidx[q].end(), rest.begin(), rest.end(), full.begin());
          s += sw[q] * A[core::SymmetricTensor::rank(full)];
        }
        B[r] = c * s;
      });
    }
    S.push_back(std::move(Sk));
  }
  return S;
}

namespace {

double path_value(const core::TimeGrid& grid, double t, std::span<const double> xi) {
  const auto h = indicator_coords(grid, t);
  double w = 0.0;
  for (std::size_t c = 0; c < h.size(); ++c) w += h[c] * xi[c];
  return w;
}

void check_inputs(const core::ChaosVector& alpha, const core::TimeGrid& grid, std::span<const double> xi) {
  if (alpha.dim() != grid.cells() || xi.size() != grid.cells()) throw std::invalid_argument("linear sde: dimension mismatch");
}

}  // namespace

std::complex<double> complex_linear_sde(double a, double b, const core::ChaosVector& alpha, const core::TimeGrid& grid,
                                        double t, std::span<const double> xi) {
  check_inputs(alpha, grid, xi);
  const auto h = indicator_coords(grid, t);
  std::vector<std::complex<double>> z(xi.size());
  for (std::size_t c = 0; c < xi.size(); ++c) z[c] = {xi[c], -b * h[c]};
  const std::complex<double> val = chaos_eval(alpha, std::span<const std::complex<double>>(z));
  const double w = path_value(grid, t, xi);
  return std::exp(std::complex<double>(a * t + 0.5 * b * b * t, b * w)) * val;
}

std::array<double, 2> matrix_series_solution(double a, double b, const core::ChaosVector& alpha,
                                             const core::TimeGrid& grid, double t, std::span<const double> xi) {
  check_inputs(alpha, grid, xi);
  const auto S = simplex_integrals(alpha, grid, t);
  // Y(0,t) as a product of per-cell flows e^{(a + b^2/2) l_c} R(b dw_c)
  const auto h = indicator_coords(grid, t);
  double y00 = 1.0, y01 = 0.0, y10 = 0.0, y11 = 1.0;
  for (std::size_t c = 0; c < h.size(); ++c) {
    if (h[c] == 0.0) continue;
    const double len = h[c] * grid.sqrt_dt();
    const double g = std::exp((a + 0.5 * b * b) * len);
    const double th = b * h[c] * xi[c];
    const double r00 = g * std::cos(th), r01 = -g * std::sin(th), r10 = g * std::sin(th), r11 = g * std::cos(th);
    const double n00 = r00 * y00 + r01 * y10, n01 = r00 * y01 + r01 * y11;
    const double n10 = r10 * y00 + r11 * y10, n11 = r10 * y01 + r11 * y11;
    y00 = n00;
    y01 = n01;
    y10 = n10;
    y11 = n11;
  }
  // v_k = (-B)^k u with B = [[0, -b], [b, 0]], u = (1, 0)
  std::array<double, 2> out{0.0, 0.0};
  double v0 = 1.0, v1 = 0.0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double sk = core::chaos_eval(S[k], xi);
    out[0] += sk * (y00 * v0 + y01 * v1);
    out[1] += sk * (y10 * v0 + y11 * v1);
    const double n0 = b * v1;
    const double n1 = -b * v0;
    v0 = n0;
    v1 = n1;
  }
  return out;
}

double series_solution_cauchy(const SmoothFn& phi, const core::ChaosVector& alpha, const core::TimeGrid& grid, double x,
                              double t, std::span<const double> xi) {
  check_inputs(alpha, grid, xi);
  const auto S = simplex_integrals(alpha, grid, t);
  const double w = path_value(grid, t, xi);
  double u = 0.0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    u += sign * phi(static_cast<int>(k), x + w) * core::chaos_eval(S[k], xi);
  }
  return u;
}

CauchyPairing::CauchyPairing(const core::ChaosVector& alpha, const core::TimeGrid& grid, std::span<const double> psi,
                             double t) {
  if (psi.size() != grid.cells()) throw std::invalid_argument("CauchyPairing: dimension mismatch");
  const auto S = simplex_integrals(alpha, grid, t);
  const auto h = indicator_coords(grid, t);
  double var = 0.0;
  for (std::size_t c = 0; c < h.size(); ++c) {
    shift_ += h[c] * psi[c];
    var += h[c] * h[c];
  }
  sd_ = std::sqrt(var);
  for (std::size_t k = 0; k < S.size(); ++k) {
    const auto P = core::shift(S[k], psi);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    for (int n = 0; n <= P.order(); ++n) {
      core::ChaosVector Pn(P.dim(), P.order());
      Pn.coeff(n) = P.coeff(n);
      const double c = core::pair_wick(Pn, h);
      if (c != 0.0) terms_.push_back({static_cast<int>(k) + n, sign * c});
    }
  }
}

double CauchyPairing::operator()(const SmoothFn& phi, double x) const {
  double total = 0.0;
  for (const auto& term : terms_) {
    const double eg = sd_ > 0.0
                          ? core::normal_expect([&](double w) { return phi(term.order, x + shift_ + w); }, 0.0, sd_, 48)
                          : phi(term.order, x + shift_);
    total += term.coef * eg;
  }
  return total;
}

double cauchy_wick_pairing(const SmoothFn& phi, const core::ChaosVector& alpha, const core::TimeGrid& grid,
                           std::span<const double> psi, double x, double t) {
  return CauchyPairing(alpha, grid, psi, t)(phi, x);
}

}  // namespace chaosflow::pde
