#include "chaosflow/pde/hitting.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosflow/pde/killed.h"

namespace chaosflow::pde {

double first_passage_probability(double x, double t) {
  if (!(x > 0.0) || !(t > 0.0)) throw std::invalid_argument("first_passage_probability: need x > 0, t > 0");
  return std::erfc(x / std::sqrt(2.0 * t));
}

namespace {

// Survival probability through cells with endpoint values a -> b and bridge variance var per cell.
double bridge_survival(double a, double b, double var) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return -std::expm1(-2.0 * a * b / var);
}

}  // namespace

double hit_probability_given_path(double x, double dt, std::span<const double> xi, std::size_t cells) {
  if (!(x > 0.0)) throw std::invalid_argument("hit_probability_given_path: x must be positive");
  if (cells > xi.size()) throw std::invalid_argument("hit_probability_given_path: too few increments");
  const double sd = std::sqrt(dt);
  double pos = x;
  double survive = 1.0;
  for (std::size_t c = 0; c < cells && survive > 0.0; ++c) {
    const double next = pos + sd * xi[c];
    survive *= bridge_survival(pos, next, dt);
    pos = next;
  }
  return 1.0 - survive;
}

double mollified_indicator(double y, double eps) {
  if (y <= 0.0) return 0.0;
  const double u = y / eps;
  return -std::expm1(-u * u * u);
}

HittingSeries::HittingSeries(double t, double x_max, const HittingOptions& options)
    : t_(t), T_(options.horizon > 0.0 ? options.horizon : 2.0 * t), widths_(options.widths) {
  if (widths_.empty() || widths_.size() > 2) throw std::invalid_argument("HittingSeries: need one or two widths");
  SpaceTimeGrid grid{x_max + options.pad * std::sqrt(t), options.h, t, options.steps};
  Bvp3Options bo;
  bo.depth = options.depth;
  bo.horizon = T_;
  bo.boundary = 0.0;
  for (double eps : widths_) {
    fields_.push_back(bvp3_solve([eps](double y) { return mollified_indicator(y, eps); }, grid, bo));
  }
}

HittingResult HittingSeries::operator()(double x, double eta) const {
  HittingResult r;
  double tail = 0.0;
  for (const auto& F : fields_) {
    r.raw.push_back(1.0 - F.value(x, 0, eta));
    tail = std::max(tail, F.tail(x, 0, eta));
  }
  if (r.raw.size() == 1) {
    r.value = r.raw[0];
    r.error = tail;
    return r;
  }
  // error is O(eps^2): extrapolate from (eps1, eps2)
  const double e1 = widths_[0] * widths_[0], e2 = widths_[1] * widths_[1];
  r.value = (e1 * r.raw[1] - e2 * r.raw[0]) / (e1 - e2);
  r.error = std::abs(r.value - r.raw[1]) + tail;
  return r;
}

core::Estimate hitting_mc(double x, double t, const sq::BoundedOp& C, const core::TimeGrid& grid,
                          std::span<const double> xi, std::size_t n, std::uint64_t seed) {
  const std::size_t cells = grid.cells_until(t);
  return sq::gamma_mc(
      C, [&](std::span<const double> eta) { return hit_probability_given_path(x, grid.dt(), eta, cells); }, xi, n,
      seed);
}

HittingResult hitting_functional(double x, double t, const sq::BoundedOp& C, HittingMethod method,
                                 std::span<const double> xi, const HittingOptions& options) {
  const double T = options.horizon > 0.0 ? options.horizon : 2.0 * t;
  const core::TimeGrid grid(T, options.cells);
  if (C.dim() != grid.cells() || xi.size() != grid.cells()) throw std::invalid_argument("hitting_functional: dimension mismatch");
  if (method == HittingMethod::MonteCarlo) {
    const auto est = hitting_mc(x, t, C, grid, xi, options.samples, options.seed);
    return {est.value, est.std_error, {}};
  }
  const double e = 1.0 / std::sqrt(static_cast<double>(grid.cells()));
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Constant(C.matrix().rows(), C.matrix().cols(), e * e);
  if ((C.matrix() - expected).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("hitting_functional: series route needs the projector on 1_{[0,T]}");
  }
  double eta = 0.0;
  for (double v : xi) eta += e * v;
  HittingOptions opt = options;
  opt.horizon = T;
  return HittingSeries(t, x, opt)(x, eta);
}

core::Estimate two_path_hitting_mc(double x, double t, const core::TimeGrid& grid, std::span<const double> inc1,
                                   std::size_t n, std::uint64_t seed) {
  const std::size_t cells = grid.cells_until(t);
  if (inc1.size() < cells) throw std::invalid_argument("two_path_hitting_mc: too few increments");
  const double dt = grid.dt();
  return core::mc_estimate(n, seed, [&](core::Rng& rng) {
    // gap x + w2 - w1 hits 0; its bridge variance per cell is 2 dt
    double gap = x;
    double survive = 1.0;
    for (std::size_t c = 0; c < cells && survive > 0.0; ++c) {
      const double dw2 = std::sqrt(dt) * rng.normal();
      const double next = gap + dw2 - inc1[c];
      survive *= bridge_survival(gap, next, 2.0 * dt);
      gap = next;
    }
    return 1.0 - survive;
  });
}

}  // namespace chaosflow::pde
