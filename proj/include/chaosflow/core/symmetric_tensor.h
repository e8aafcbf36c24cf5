#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chaosflow::core {

// Dense symmetric k-tensor over m coordinates, one value per sorted
// multi-index i_1 <= ... <= i_k. Entries are stored in colex rank order.
class SymmetricTensor {
 public:
  SymmetricTensor() = default;
  SymmetricTensor(std::size_t dim, int degree);

  static std::size_t count(std::size_t dim, int degree);
  // Rank of a sorted multi-index.
  static std::size_t rank(std::span<const int> sorted);
  // Visits all sorted multi-indices in rank order.
  static void for_each_index(std::size_t dim, int degree,
                             const std::function<void(std::size_t, std::span<const int>)>& fn);
  // k! / prod n_j! for a sorted multi-index with multiplicities n_j.
  static double multiplicity(std::span<const int> sorted);

  int degree() const { return k_; }
  std::size_t dim() const { return m_; }
  std::size_t size() const { return v_.size(); }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double& operator[](std::size_t r) { return v_[r]; }
  double operator[](std::size_t r) const { return v_[r]; }

  // Value at an arbitrary (unsorted) multi-index.
  double at(std::span<const int> idx) const;
  void set(std::span<const int> idx, double value);
  void add(std::span<const int> idx, double value);

  // Squared Frobenius norm of the full symmetric tensor.
  double norm2() const;
  // Full-tensor inner product.
  double dot(const SymmetricTensor& other) const;
  bool is_zero(double tol = 0.0) const;

  // Full tensor, flat index sum_p i_p m^p.
  std::vector<double> to_full() const;
  // Symmetrized projection of an arbitrary full tensor.
  static SymmetricTensor from_full(std::size_t dim, int degree, std::span<const double> full);

  // A'[i_1..i_k] = sum_j A[j_1..j_k] prod_p M(j_p, i_p); M is dim x dim_out.
  SymmetricTensor contract_modes(const Eigen::MatrixXd& M) const;

  SymmetricTensor& operator+=(const SymmetricTensor& o);
  SymmetricTensor& operator-=(const SymmetricTensor& o);
  SymmetricTensor& operator*=(double s);

 private:
  std::size_t m_ = 0;
  int k_ = 0;
  std::vector<double> v_;
};

SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b);
SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b);
SymmetricTensor operator*(double s, SymmetricTensor a);

}  // namespace chaosflow::core
