#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "chaosflow/core/symmetric_tensor.h"

namespace chaosflow::core {

// Truncated Ito-Wiener expansion: symmetric kernels of degrees 0..N over m
// coordinates of the discrete white noise xi.
class ChaosVector {
 public:
  ChaosVector() = default;
  ChaosVector(std::size_t dim, int order);

  static ChaosVector constant(std::size_t dim, int order, double c);
  // Degree-1 chaos (phi, xi).
  static ChaosVector linear(std::span<const double> phi, int order);

  int order() const { return static_cast<int>(coef_.size()) - 1; }
  std::size_t dim() const { return m_; }
  SymmetricTensor& coeff(int k) { return coef_.at(static_cast<std::size_t>(k)); }
  const SymmetricTensor& coeff(int k) const { return coef_.at(static_cast<std::size_t>(k)); }
  double mean() const { return coef_[0][0]; }

  // Highest degree with a coefficient above tol, or -1 for the zero chaos.
  int max_degree(double tol = 0.0) const;
  // Same chaos with a different truncation; throws if nonzero terms would be dropped.
  ChaosVector with_order(int order, double tol = 0.0) const;

  ChaosVector& operator+=(const ChaosVector& o);
  ChaosVector& operator-=(const ChaosVector& o);
  ChaosVector& operator*=(double s);

 private:
  std::size_t m_ = 0;
  std::vector<SymmetricTensor> coef_;
};

ChaosVector operator+(ChaosVector a, const ChaosVector& b);
ChaosVector operator-(ChaosVector a, const ChaosVector& b);
ChaosVector operator*(double s, ChaosVector a);

// H-valued chaos: one ChaosVector per coordinate of the free index.
class HChaosVector {
 public:
  HChaosVector() = default;
  HChaosVector(std::size_t free_dim, std::size_t dim, int order);

  static HChaosVector deterministic(std::span<const double> h, std::size_t dim, int order);

  std::size_t free_dim() const { return comp_.size(); }
  std::size_t dim() const { return m_; }
  int order() const { return order_; }
  ChaosVector& operator[](std::size_t s) { return comp_.at(s); }
  const ChaosVector& operator[](std::size_t s) const { return comp_.at(s); }

  HChaosVector& operator+=(const HChaosVector& o);
  HChaosVector& operator-=(const HChaosVector& o);
  HChaosVector& operator*=(double s);

 private:
  std::size_t m_ = 0;
  int order_ = 0;
  std::vector<ChaosVector> comp_;
};

HChaosVector operator+(HChaosVector a, const HChaosVector& b);
HChaosVector operator-(HChaosVector a, const HChaosVector& b);

// Precomputed evaluation plan for repeated chaos_eval calls.
class ChaosEvaluator {
 public:
  explicit ChaosEvaluator(const ChaosVector& c);
  double operator()(std::span<const double> xi) const;
  std::complex<double> operator()(std::span<const std::complex<double>> xi) const;
  std::size_t dim() const { return m_; }

 private:
  struct Term {
    double coef;
    std::size_t first;  // offset into factors_
    std::size_t count;
  };
  template <class T>
  T eval(std::span<const T> xi) const;

  std::size_t m_ = 0;
  int order_ = 0;
  std::vector<Term> terms_;
  std::vector<std::pair<int, int>> factors_;  // (coordinate, Hermite order)
};

double chaos_eval(const ChaosVector& c, std::span<const double> xi);
std::complex<double> chaos_eval(const ChaosVector& c, std::span<const std::complex<double>> xi);

// E[c^2] = sum_k k! ||A_k||^2.
double moment2(const ChaosVector& c);
// Sum of component second moments (free index treated as Euclidean).
double moment2(const HChaosVector& x);
// E[a b].
double expect_product(const ChaosVector& a, const ChaosVector& b);
// E[(x, y)_H].
double expect_product(const HChaosVector& x, const HChaosVector& y);

// e^{s} sum_{k>N} s^k/k! with s = ||phi||^2.
double wick_tail_bound(double phi_norm2, int order);
// Kernels phi^{(x)k}/k!; throws when the tail bound is not below tol.
ChaosVector wick_exp(std::span<const double> phi, int order, double tol = 1e-10);
// sum_k A_k(phi,...,phi) = E[c * wick_exp(phi)].
double pair_wick(const ChaosVector& c, std::span<const double> phi);

// Degree-k output kernel with free index s is (k+1) A_{k+1}(s, .). Output keeps order N.
HChaosVector stoch_derivative(const ChaosVector& c);
// Component i of the result is (D x_i, .), so the free index of x comes first.
std::vector<HChaosVector> stoch_derivative(const HChaosVector& x);
// (Dc, h).
ChaosVector derivative_along(const ChaosVector& c, std::span<const double> h);
// Component i is (D x_i, h).
HChaosVector derivative_along(const HChaosVector& x, std::span<const double> h);
// Divergence: degree-(k+1) kernel is the full symmetrization of B_k.
ChaosVector skorokhod(const HChaosVector& x);

// (1/k!) D^k c (h,...,h): degree-(j-k) kernel is C(j,k) A_j(h^k, .).
ChaosVector contract_direction(const ChaosVector& c, std::span<const double> h, int k);
// Chaos of xi -> c(xi + psi).
ChaosVector shift(const ChaosVector& c, std::span<const double> psi);

// Product a*b truncated at order (order < 0 means a.order() + b.order());
// throws if the exact product has terms above order.
ChaosVector multiply(const ChaosVector& a, const ChaosVector& b, int order = -1);
HChaosVector multiply(const ChaosVector& a, const HChaosVector& x, int order = -1);
// (x, y)_H as a chaos.
ChaosVector inner(const HChaosVector& x, const HChaosVector& y, int order = -1);
// (x, h)_H for deterministic h.
ChaosVector inner(const HChaosVector& x, std::span<const double> h);
// Free-index map: out_i = sum_a M(i, a) x_a.
HChaosVector apply_free(const Eigen::MatrixXd& M, const HChaosVector& x);
// Noise-slot map: every kernel contracted with M (dim x dim_out) on each slot.
ChaosVector contract_noise(const ChaosVector& c, const Eigen::MatrixXd& M);

// Random chaos with N(0,1) coefficients scaled by 1/sqrt(k!) per degree.
template <class Rng>
ChaosVector random_chaos(std::size_t dim, int order, Rng& rng);

}  // namespace chaosflow::core

#include "chaosflow/core/chaos_random.h"
