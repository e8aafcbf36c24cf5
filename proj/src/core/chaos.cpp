#include "chaosflow/core/chaos.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "chaosflow/core/hermite.h"

namespace chaosflow::core {

namespace {

void require_same_shape(const ChaosVector& a, const ChaosVector& b, const char* what) {
  if (a.dim() != b.dim() || a.order() != b.order()) throw std::invalid_argument(what);
}

std::vector<int> merged(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin());
  return out;
}

// Hermite-basis view of a chaos: key = sorted multi-index (the multiset of
// coordinates), value = coefficient of prod_j He_{n_j}(xi_j).
using HermiteTerms = std::map<std::vector<int>, double>;

HermiteTerms to_terms(const ChaosVector& c) {
  HermiteTerms t;
  for (int k = 0; k <= c.order(); ++k) {
    const auto& A = c.coeff(k);
    SymmetricTensor::for_each_index(c.dim(), k, [&](std::size_t r, std::span<const int> idx) {
      if (A[r] != 0.0) t.emplace(std::vector<int>(idx.begin(), idx.end()), SymmetricTensor::multiplicity(idx) * A[r]);
    });
  }
  return t;
}

// Run-length form of a sorted multi-index: (coordinate, multiplicity).
std::vector<std::pair<int, int>> runs(std::span<const int> idx) {
  std::vector<std::pair<int, int>> r;
  for (int i : idx) {
    if (!r.empty() && r.back().first == i) {
      ++r.back().second;
    } else {
      r.emplace_back(i, 1);
    }
  }
  return r;
}

void product_terms(const std::vector<std::pair<int, int>>& a, const std::vector<std::pair<int, int>>& b,
                   double coef, HermiteTerms& out) {
  // Coordinates present in only one factor pass through; shared ones expand.
  std::vector<std::pair<int, int>> fixed;
  std::vector<std::pair<int, std::vector<double>>> shared;
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < a.size() || ib < b.size()) {
    if (ib == b.size() || (ia < a.size() && a[ia].first < b[ib].first)) {
      fixed.push_back(a[ia++]);
    } else if (ia == a.size() || b[ib].first < a[ia].first) {
      fixed.push_back(b[ib++]);
    } else {
      shared.emplace_back(a[ia].first, hermite_product(a[ia].second, b[ib].second));
      ++ia;
      ++ib;
    }
  }
  std::vector<std::pair<int, int>> chosen(shared.size());
  auto emit = [&](double w) {
    std::vector<int> key;
    for (const auto& [j, n] : fixed) key.insert(key.end(), static_cast<std::size_t>(n), j);
    for (const auto& [j, n] : chosen) key.insert(key.end(), static_cast<std::size_t>(n), j);
    std::sort(key.begin(), key.end());
    out[key] += w;
  };
  auto rec = [&](auto&& self, std::size_t p, double w) -> void {
    if (p == shared.size()) {
      emit(w);
      return;
    }
    const auto& coeffs = shared[p].second;
    for (std::size_t d = 0; d < coeffs.size(); ++d) {
      if (coeffs[d] == 0.0) continue;
      chosen[p] = {shared[p].first, static_cast<int>(d)};
      self(self, p + 1, w * coeffs[d]);
    }
  };
  rec(rec, 0, coef);
}

ChaosVector from_terms(const HermiteTerms& t, std::size_t dim, int order) {
  ChaosVector c(dim, order);
  for (const auto& [key, v] : t) {
    const int k = static_cast<int>(key.size());
    if (k > order) {
      if (std::abs(v) > 1e-14) throw std::overflow_error("chaos product exceeds truncation order");
      continue;
    }
    c.coeff(k)[SymmetricTensor::rank(key)] += v / SymmetricTensor::multiplicity(key);
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------- ChaosVector

ChaosVector::ChaosVector(std::size_t dim, int order) : m_(dim) {
  if (order < 0) throw std::invalid_argument("ChaosVector: negative truncation order");
  if (dim == 0) throw std::invalid_argument("ChaosVector: zero dimension");
  coef_.reserve(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) coef_.emplace_back(dim, k);
}

ChaosVector ChaosVector::constant(std::size_t dim, int order, double c) {
  ChaosVector v(dim, order);
  v.coeff(0)[0] = c;
  return v;
}

ChaosVector ChaosVector::linear(std::span<const double> phi, int order) {
  if (order < 1) throw std::invalid_argument("ChaosVector::linear: order must be at least 1");
  ChaosVector v(phi.size(), order);
  std::copy(phi.begin(), phi.end(), v.coeff(1).values().begin());
  return v;
}

int ChaosVector::max_degree(double tol) const {
  for (int k = order(); k >= 0; --k) {
    if (!coeff(k).is_zero(tol)) return k;
  }
  return -1;
}

ChaosVector ChaosVector::with_order(int order, double tol) const {
  if (order < this->order() && max_degree(tol) > order) {
    throw std::overflow_error("ChaosVector::with_order: nonzero coefficients above new order");
  }
  ChaosVector c(m_, order);
  for (int k = 0; k <= std::min(order, this->order()); ++k) c.coeff(k) = coeff(k);
  return c;
}

ChaosVector& ChaosVector::operator+=(const ChaosVector& o) {
  require_same_shape(*this, o, "ChaosVector: shape mismatch");
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] += o.coef_[k];
  return *this;
}

ChaosVector& ChaosVector::operator-=(const ChaosVector& o) {
  require_same_shape(*this, o, "ChaosVector: shape mismatch");
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] -= o.coef_[k];
  return *this;
}

ChaosVector& ChaosVector::operator*=(double s) {
  for (auto& t : coef_) t *= s;
  return *this;
}

ChaosVector operator+(ChaosVector a, const ChaosVector& b) { return a += b; }
ChaosVector operator-(ChaosVector a, const ChaosVector& b) { return a -= b; }
ChaosVector operator*(double s, ChaosVector a) { return a *= s; }

// ---------------------------------------------------------------- HChaosVector

HChaosVector::HChaosVector(std::size_t free_dim, std::size_t dim, int order)
    : m_(dim), order_(order), comp_(free_dim, ChaosVector(dim, order)) {}

HChaosVector HChaosVector::deterministic(std::span<const double> h, std::size_t dim, int order) {
  HChaosVector x(h.size(), dim, order);
  for (std::size_t s = 0; s < h.size(); ++s) x[s].coeff(0)[0] = h[s];
  return x;
}

HChaosVector& HChaosVector::operator+=(const HChaosVector& o) {
  if (o.free_dim() != free_dim()) throw std::invalid_argument("HChaosVector: free dimension mismatch");
  for (std::size_t s = 0; s < comp_.size(); ++s) comp_[s] += o.comp_[s];
  return *this;
}

HChaosVector& HChaosVector::operator-=(const HChaosVector& o) {
  if (o.free_dim() != free_dim()) throw std::invalid_argument("HChaosVector: free dimension mismatch");
  for (std::size_t s = 0; s < comp_.size(); ++s) comp_[s] -= o.comp_[s];
  return *this;
}

HChaosVector& HChaosVector::operator*=(double s) {
  for (auto& c : comp_) c *= s;
  return *this;
}

HChaosVector operator+(HChaosVector a, const HChaosVector& b) { return a += b; }
HChaosVector operator-(HChaosVector a, const HChaosVector& b) { return a -= b; }

// ---------------------------------------------------------------- evaluation

ChaosEvaluator::ChaosEvaluator(const ChaosVector& c) : m_(c.dim()), order_(c.order()) {
  for (int k = 0; k <= c.order(); ++k) {
    const auto& A = c.coeff(k);
    SymmetricTensor::for_each_index(m_, k, [&](std::size_t r, std::span<const int> idx) {
      if (A[r] == 0.0) return;
      const auto rl = runs(idx);
      terms_.push_back({SymmetricTensor::multiplicity(idx) * A[r], factors_.size(), rl.size()});
      factors_.insert(factors_.end(), rl.begin(), rl.end());
    });
  }
}

template <class T>
T ChaosEvaluator::eval(std::span<const T> xi) const {
  if (xi.size() != m_) throw std::invalid_argument("chaos_eval: noise dimension mismatch");
  const auto w = static_cast<std::size_t>(order_) + 1;
  std::vector<T> table(m_ * w);
  for (std::size_t j = 0; j < m_; ++j) hermite_table<T>(xi[j], std::span<T>(&table[j * w], w));
  T sum(0);
  for (const auto& t : terms_) {
    T p(t.coef);
    for (std::size_t f = t.first; f < t.first + t.count; ++f) {
      const auto& [j, n] = factors_[f];
      p *= table[static_cast<std::size_t>(j) * w + static_cast<std::size_t>(n)];
    }
    sum += p;
  }
  return sum;
}

double ChaosEvaluator::operator()(std::span<const double> xi) const { return eval<double>(xi); }

std::complex<double> ChaosEvaluator::operator()(std::span<const std::complex<double>> xi) const {
  return eval<std::complex<double>>(xi);
}

double chaos_eval(const ChaosVector& c, std::span<const double> xi) { return ChaosEvaluator(c)(xi); }

std::complex<double> chaos_eval(const ChaosVector& c, std::span<const std::complex<double>> xi) {
  return ChaosEvaluator(c)(xi);
}

// ---------------------------------------------------------------- moments

double moment2(const ChaosVector& c) { return expect_product(c, c); }

double moment2(const HChaosVector& x) { return expect_product(x, x); }

double expect_product(const ChaosVector& a, const ChaosVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("expect_product: dimension mismatch");
  double s = 0.0;
  for (int k = 0; k <= std::min(a.order(), b.order()); ++k) s += factorial(k) * a.coeff(k).dot(b.coeff(k));
  return s;
}

double expect_product(const HChaosVector& x, const HChaosVector& y) {
  if (x.free_dim() != y.free_dim()) throw std::invalid_argument("expect_product: free dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.free_dim(); ++i) s += expect_product(x[i], y[i]);
  return s;
}

// ---------------------------------------------------------------- Wick exponent

double wick_tail_bound(double s, int order) {
  if (s < 0.0) throw std::invalid_argument("wick_tail_bound: negative norm");
  // tail = e^s - sum_{k<=N} s^k/k!, accumulated from the series itself to avoid cancellation
  double term = 1.0;
  for (int k = 1; k <= order; ++k) term *= s / k;
  double tail = 0.0;
  double t = term;
  for (int k = order + 1; k < order + 400; ++k) {
    t *= s / k;
    tail += t;
    if (t < 1e-300 || t < tail * 1e-17) break;
  }
  return std::exp(s) * tail;
}

ChaosVector wick_exp(std::span<const double> phi, int order, double tol) {
  double s = 0.0;
  for (double p : phi) s += p * p;
  const double bound = wick_tail_bound(s, order);
  if (!(bound < tol)) {
    throw std::domain_error("wick_exp: truncation tail bound " + std::to_string(bound) +
                            " not below tolerance; raise the order");
  }
  ChaosVector c(phi.size(), order);
  for (int k = 0; k <= order; ++k) {
    auto& A = c.coeff(k);
    const double inv = 1.0 / factorial(k);
    SymmetricTensor::for_each_index(phi.size(), k, [&](std::size_t r, std::span<const int> idx) {
      double p = inv;
      for (int i : idx) p *= phi[static_cast<std::size_t>(i)];
      A[r] = p;
    });
  }
  return c;
}

double pair_wick(const ChaosVector& c, std::span<const double> phi) {
  if (phi.size() != c.dim()) throw std::invalid_argument("pair_wick: dimension mismatch");
  double s = 0.0;
  for (int k = 0; k <= c.order(); ++k) {
    const auto& A = c.coeff(k);
    SymmetricTensor::for_each_index(c.dim(), k, [&](std::size_t r, std::span<const int> idx) {
      if (A[r] == 0.0) return;
      double p = SymmetricTensor::multiplicity(idx) * A[r];
      for (int i : idx) p *= phi[static_cast<std::size_t>(i)];
      s += p;
    });
  }
  return s;
}

// ---------------------------------------------------------------- derivative / divergence

HChaosVector stoch_derivative(const ChaosVector& c) {
  const std::size_t m = c.dim();
  const int N = c.order();
  HChaosVector out(m, m, N);
  for (int k = 0; k + 1 <= N; ++k) {
    const auto& A = c.coeff(k + 1);
    for (std::size_t s = 0; s < m; ++s) {
      auto& B = out[s].coeff(k);
      const int si = static_cast<int>(s);
      SymmetricTensor::for_each_index(m, k, [&](std::size_t r, std::span<const int> idx) {
        const int one[1] = {si};
        const auto full = merged(idx, one);
        B[r] = (k + 1) * A[SymmetricTensor::rank(full)];
      });
    }
  }
  return out;
}

std::vector<HChaosVector> stoch_derivative(const HChaosVector& x) {
  std::vector<HChaosVector> out;
  out.reserve(x.free_dim());
  for (std::size_t i = 0; i < x.free_dim(); ++i) out.push_back(stoch_derivative(x[i]));
  return out;
}

ChaosVector derivative_along(const ChaosVector& c, std::span<const double> h) { return contract_direction(c, h, 1); }

HChaosVector derivative_along(const HChaosVector& x, std::span<const double> h) {
  HChaosVector out(x.free_dim(), x.dim(), x.order());
  for (std::size_t i = 0; i < x.free_dim(); ++i) out[i] = derivative_along(x[i], h);
  return out;
}

ChaosVector skorokhod(const HChaosVector& x) {
  const std::size_t m = x.dim();
  if (x.free_dim() != m) throw std::invalid_argument("skorokhod: free index must match the noise dimension");
  const int N = x.order();
  for (std::size_t s = 0; s < m; ++s) {
    if (!x[s].coeff(N).is_zero()) {
      throw std::overflow_error("skorokhod: degree-N coefficient is nonzero, divergence would exceed truncation");
    }
  }
  ChaosVector out(m, N);
  std::vector<int> rest;
  for (int k = 0; k + 1 <= N; ++k) {
    auto& C = out.coeff(k + 1);
    const double w = 1.0 / (k + 1);
    SymmetricTensor::for_each_index(m, k + 1, [&](std::size_t r, std::span<const int> idx) {
      double s = 0.0;
      for (std::size_t p = 0; p < idx.size(); ++p) {
        rest.assign(idx.begin(), idx.end());
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(p));
        s += x[static_cast<std::size_t>(idx[p])].coeff(k)[SymmetricTensor::rank(rest)];
      }
      C[r] = w * s;
    });
  }
  return out;
}

// ---------------------------------------------------------------- contractions

ChaosVector contract_direction(const ChaosVector& c, std::span<const double> h, int k) {
  const std::size_t m = c.dim();
  if (h.size() != m) throw std::invalid_argument("contract_direction: dimension mismatch");
  if (k < 0) throw std::invalid_argument("contract_direction: negative order");
  const int N = c.order();
  ChaosVector out(m, N);
  if (k > N) return out;
  // sum over sorted s of mult(s) prod h_s, restricted to nonzero weights
  std::vector<std::vector<int>> svals;
  std::vector<double> sw;
  SymmetricTensor::for_each_index(m, k, [&](std::size_t, std::span<const int> idx) {
    double w = SymmetricTensor::multiplicity(idx);
    for (int i : idx) w *= h[static_cast<std::size_t>(i)];
    if (w != 0.0) {
      svals.emplace_back(idx.begin(), idx.end());
      sw.push_back(w);
    }
  });
  for (int j = k; j <= N; ++j) {
    const auto& A = c.coeff(j);
    if (A.is_zero()) continue;
    auto& B = out.coeff(j - k);
    const double cb = binomial(j, k);
    SymmetricTensor::for_each_index(m, j - k, [&](std::size_t r, std::span<const int> idx) {
      double s = 0.0;
      for (std::size_t q = 0; q < svals.size(); ++q) s += sw[q] * A[SymmetricTensor::rank(merged(svals[q], idx))];
      B[r] = cb * s;
    });
  }
  return out;
}

ChaosVector shift(const ChaosVector& c, std::span<const double> psi) {
  ChaosVector out(c.dim(), c.order());
  for (int k = 0; k <= c.order(); ++k) out += contract_direction(c, psi, k);
  return out;
}

ChaosVector multiply(const ChaosVector& a, const ChaosVector& b, int order) {
  if (a.dim() != b.dim()) throw std::invalid_argument("multiply: dimension mismatch");
  if (order < 0) order = a.order() + b.order();
  const auto ta = to_terms(a);
  const auto tb = to_terms(b);
  HermiteTerms out;
  for (const auto& [ka, va] : ta) {
    const auto ra = runs(ka);
    for (const auto& [kb, vb] : tb) product_terms(ra, runs(kb), va * vb, out);
  }
  return from_terms(out, a.dim(), order);
}

HChaosVector multiply(const ChaosVector& a, const HChaosVector& x, int order) {
  if (order < 0) order = a.order() + x.order();
  HChaosVector out(x.free_dim(), x.dim(), order);
  for (std::size_t s = 0; s < x.free_dim(); ++s) out[s] = multiply(a, x[s], order);
  return out;
}

ChaosVector inner(const HChaosVector& x, const HChaosVector& y, int order) {
  if (x.free_dim() != y.free_dim()) throw std::invalid_argument("inner: free dimension mismatch");
  if (order < 0) order = x.order() + y.order();
  ChaosVector out(x.dim(), order);
  for (std::size_t s = 0; s < x.free_dim(); ++s) out += multiply(x[s], y[s], order);
  return out;
}

ChaosVector inner(const HChaosVector& x, std::span<const double> h) {
  if (h.size() != x.free_dim()) throw std::invalid_argument("inner: free dimension mismatch");
  ChaosVector out(x.dim(), x.order());
  for (std::size_t s = 0; s < h.size(); ++s) {
    if (h[s] != 0.0) out += h[s] * x[s];
  }
  return out;
}

HChaosVector apply_free(const Eigen::MatrixXd& M, const HChaosVector& x) {
  if (static_cast<std::size_t>(M.cols()) != x.free_dim()) throw std::invalid_argument("apply_free: shape mismatch");
  HChaosVector out(static_cast<std::size_t>(M.rows()), x.dim(), x.order());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index a = 0; a < M.cols(); ++a) {
      if (M(i, a) != 0.0) out[static_cast<std::size_t>(i)] += M(i, a) * x[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

ChaosVector contract_noise(const ChaosVector& c, const Eigen::MatrixXd& M) {
  ChaosVector out(static_cast<std::size_t>(M.cols()), c.order());
  for (int k = 0; k <= c.order(); ++k) out.coeff(k) = c.coeff(k).contract_modes(M);
  return out;
}

}  // namespace chaosflow::core
