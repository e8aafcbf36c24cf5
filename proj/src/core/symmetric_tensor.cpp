#include "chaosflow/core/symmetric_tensor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chaosflow/core/hermite.h"

namespace chaosflow::core {

namespace {

std::size_t choose(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<int> sorted_copy(std::span<const int> idx) {
  std::vector<int> s(idx.begin(), idx.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

SymmetricTensor::SymmetricTensor(std::size_t dim, int degree) : m_(dim), k_(degree) {
  if (degree < 0) throw std::invalid_argument("SymmetricTensor: negative degree");
  if (dim == 0 && degree > 0) throw std::invalid_argument("SymmetricTensor: zero dimension");
  v_.assign(count(dim, degree), 0.0);
}

std::size_t SymmetricTensor::count(std::size_t dim, int degree) {
  if (degree == 0) return 1;
  return choose(dim + static_cast<std::size_t>(degree) - 1, static_cast<std::size_t>(degree));
}

std::size_t SymmetricTensor::rank(std::span<const int> sorted) {
  std::size_t r = 0;
  for (std::size_t p = 0; p < sorted.size(); ++p) {
    r += choose(static_cast<std::size_t>(sorted[p]) + p, p + 1);
  }
  return r;
}

void SymmetricTensor::for_each_index(std::size_t dim, int degree,
                                     const std::function<void(std::size_t, std::span<const int>)>& fn) {
  const auto k = static_cast<std::size_t>(degree);
  std::vector<int> idx(k, 0);
  const std::size_t total = count(dim, degree);
  for (std::size_t r = 0; r < total; ++r) {
    fn(r, std::span<const int>(idx));
    // colex successor: bump the first position that may grow, reset the ones before it
    for (std::size_t p = 0; p < k; ++p) {
      const int limit = (p + 1 < k) ? idx[p + 1] : static_cast<int>(dim) - 1;
      if (idx[p] < limit) {
        ++idx[p];
        for (std::size_t q = 0; q < p; ++q) idx[q] = 0;
        break;
      }
    }
  }
}

double SymmetricTensor::multiplicity(std::span<const int> sorted) {
  double denom = 1.0;
  std::size_t run = 1;
  for (std::size_t p = 1; p <= sorted.size(); ++p) {
    if (p < sorted.size() && sorted[p] == sorted[p - 1]) {
      ++run;
    } else {
      denom *= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return factorial(static_cast<int>(sorted.size())) / denom;
}

double SymmetricTensor::at(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != k_) throw std::invalid_argument("SymmetricTensor::at: wrong index length");
  auto s = sorted_copy(idx);
  for (int i : s) {
    if (i < 0 || static_cast<std::size_t>(i) >= m_) throw std::invalid_argument("SymmetricTensor::at: index out of range");
  }
  return v_[rank(s)];
}

void SymmetricTensor::set(std::span<const int> idx, double value) {
  if (static_cast<int>(idx.size()) != k_) throw std::invalid_argument("SymmetricTensor::set: wrong index length");
  auto s = sorted_copy(idx);
  for (int i : s) {
    if (i < 0 || static_cast<std::size_t>(i) >= m_) throw std::invalid_argument("SymmetricTensor::set: index out of range");
  }
  v_[rank(s)] = value;
}

void SymmetricTensor::add(std::span<const int> idx, double value) {
  auto s = sorted_copy(idx);
  v_[rank(s)] += value;
}

double SymmetricTensor::norm2() const { return dot(*this); }

double SymmetricTensor::dot(const SymmetricTensor& o) const {
  if (o.m_ != m_ || o.k_ != k_) throw std::invalid_argument("SymmetricTensor::dot: shape mismatch");
  if (k_ == 0) return v_[0] * o.v_[0];
  double s = 0.0;
  for_each_index(m_, k_, [&](std::size_t r, std::span<const int> idx) {
    if (v_[r] != 0.0 && o.v_[r] != 0.0) s += multiplicity(idx) * v_[r] * o.v_[r];
  });
  return s;
}

bool SymmetricTensor::is_zero(double tol) const {
  return std::all_of(v_.begin(), v_.end(), [tol](double x) { return std::abs(x) <= tol; });
}

std::vector<double> SymmetricTensor::to_full() const {
  std::size_t n = 1;
  for (int p = 0; p < k_; ++p) n *= m_;
  std::vector<double> full(n);
  std::vector<int> idx(static_cast<std::size_t>(k_));
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t f = flat;
    for (int p = 0; p < k_; ++p) {
      idx[static_cast<std::size_t>(p)] = static_cast<int>(f % m_);
      f /= m_;
    }
    std::sort(idx.begin(), idx.end());
    full[flat] = v_[rank(idx)];
  }
  return full;
}

SymmetricTensor SymmetricTensor::from_full(std::size_t dim, int degree, std::span<const double> full) {
  SymmetricTensor t(dim, degree);
  std::size_t n = 1;
  for (int p = 0; p < degree; ++p) n *= dim;
  if (full.size() != n) throw std::invalid_argument("SymmetricTensor::from_full: size mismatch");
  std::vector<double> counts(t.size(), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(degree));
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t f = flat;
    for (int p = 0; p < degree; ++p) {
      idx[static_cast<std::size_t>(p)] = static_cast<int>(f % dim);
      f /= dim;
    }
    std::sort(idx.begin(), idx.end());
    const std::size_t r = rank(idx);
    t.v_[r] += full[flat];
    counts[r] += 1.0;
  }
  for (std::size_t r = 0; r < t.size(); ++r) t.v_[r] /= counts[r];
  return t;
}

SymmetricTensor SymmetricTensor::contract_modes(const Eigen::MatrixXd& M) const {
  if (static_cast<std::size_t>(M.rows()) != m_) {
    throw std::invalid_argument("SymmetricTensor::contract_modes: matrix rows must equal tensor dimension");
  }
  const auto mo = static_cast<std::size_t>(M.cols());
  if (k_ == 0) {
    SymmetricTensor t(mo, 0);
    t.v_[0] = v_[0];
    return t;
  }
  // Contract one mode at a time. After p steps the intermediate is symmetric in the p new indices and in
  // the k - p old ones, so it is stored as (sorted new index) x (sorted old index):
  // T_{p+1}[I + {i}; J] = sum_j T_p[I; J + {j}] M(j, i), taking i as the largest new index.
  std::vector<double> cur = v_;
  std::vector<int> merged;
  for (int p = 0; p < k_; ++p) {
    const int rest = k_ - p - 1;
    const std::size_t n_old = count(m_, rest + 1);
    const std::size_t n_rest = count(m_, rest);
    // rank of J + {j} for every sorted J of size rest and every j
    std::vector<std::size_t> insert(n_rest * m_);
    for_each_index(m_, rest, [&](std::size_t rj, std::span<const int> J) {
      for (std::size_t j = 0; j < m_; ++j) {
        merged.assign(J.begin(), J.end());
        merged.insert(std::upper_bound(merged.begin(), merged.end(), static_cast<int>(j)), static_cast<int>(j));
        insert[rj * m_ + j] = rank(merged);
      }
    });
    std::vector<double> next(count(mo, p + 1) * n_rest, 0.0);
    for_each_index(mo, p + 1, [&](std::size_t ri, std::span<const int> I) {
      const std::size_t rprev = rank(I.first(static_cast<std::size_t>(p)));
      const auto last = static_cast<Eigen::Index>(I[static_cast<std::size_t>(p)]);
      const double* src = &cur[rprev * n_old];
      double* dst = &next[ri * n_rest];
      for (std::size_t rj = 0; rj < n_rest; ++rj) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m_; ++j) acc += src[insert[rj * m_ + j]] * M(static_cast<Eigen::Index>(j), last);
        dst[rj] = acc;
      }
    });
    cur.swap(next);
  }
  SymmetricTensor t(mo, k_);
  t.v_ = std::move(cur);
  return t;
}

SymmetricTensor& SymmetricTensor::operator+=(const SymmetricTensor& o) {
  if (o.m_ != m_ || o.k_ != k_) throw std::invalid_argument("SymmetricTensor: shape mismatch");
  for (std::size_t r = 0; r < v_.size(); ++r) v_[r] += o.v_[r];
  return *this;
}

SymmetricTensor& SymmetricTensor::operator-=(const SymmetricTensor& o) {
  if (o.m_ != m_ || o.k_ != k_) throw std::invalid_argument("SymmetricTensor: shape mismatch");
  for (std::size_t r = 0; r < v_.size(); ++r) v_[r] -= o.v_[r];
  return *this;
}

SymmetricTensor& SymmetricTensor::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b) { return a += b; }
SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b) { return a -= b; }
SymmetricTensor operator*(double s, SymmetricTensor a) { return a *= s; }

}  // namespace chaosflow::core
