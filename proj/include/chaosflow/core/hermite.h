#pragma once

#include <span>
#include <vector>

namespace chaosflow::core {

// Probabilists' Hermite polynomial He_k with leading coefficient 1.
double hermite(int k, double x);

// Fills out[0..n-1] with He_0(x) .. He_{n-1}(x). Works for real and complex x.
template <class T>
void hermite_table(T x, std::span<T> out) {
  if (out.empty()) return;
  out[0] = T(1);
  if (out.size() > 1) out[1] = x;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    out[k + 1] = x * out[k] - static_cast<double>(k) * out[k - 1];
  }
}

// Linearization He_a He_b = sum_r r! C(a,r) C(b,r) He_{a+b-2r}; returns
// coefficients indexed by the output degree (size a+b+1).
std::vector<double> hermite_product(int a, int b);

double factorial(int n);
double binomial(int n, int k);

}  // namespace chaosflow::core
