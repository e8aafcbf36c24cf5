#include "chaosflow/core/quadrature.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace chaosflow::core {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the squared
// first eigenvector components times the total mass.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, int n, double mass) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    q.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    q.weights[static_cast<std::size_t>(i)] = mass * v * v;
  }
  return q;
}

std::mutex cache_mutex;

}  // namespace

const QuadratureRule& gauss_hermite(int order) {
  if (order < 1 || order > 200) throw std::invalid_argument("gauss_hermite: order must be in [1, 200]");
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int i = 0; i + 1 < order; ++i) off(i) = std::sqrt(static_cast<double>(i + 1));
  return cache.emplace(order, golub_welsch(off, order, 1.0)).first->second;
}

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 400) throw std::invalid_argument("gauss_legendre: order must be in [1, 400]");
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int i = 0; i + 1 < order; ++i) {
    const double k = i + 1;
    off(i) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return cache.emplace(order, golub_welsch(off, order, 2.0)).first->second;
}

double normal_expect(const std::function<double(double)>& f, double mean, double sd, int order) {
  const auto& q = gauss_hermite(order);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(mean + sd * q.nodes[i]);
  return s;
}

double gh_expect(const std::function<double(std::span<const double>)>& f, std::size_t m, int order) {
  if (m > 4) throw std::invalid_argument("gh_expect: dimension too large (m <= 4)");
  const auto& q = gauss_hermite(order);
  const std::size_t n = q.nodes.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= n;
  std::vector<double> x(m);
  double s = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t r = flat;
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = r % n;
      r /= n;
      x[j] = q.nodes[i];
      w *= q.weights[i];
    }
    s += w * f(x);
  }
  return s;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels, int n) {
  if (panels < 1) throw std::invalid_argument("integrate_gl: need at least one panel");
  const auto& q = gauss_legendre(n);
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(lo + 0.5 * h * (q.nodes[i] + 1.0));
  }
  return 0.5 * h * s;
}

}  // namespace chaosflow::core
