#pragma once

#include <functional>
#include <span>
#include <vector>

namespace chaosflow::core {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes/weights for E f(Z), Z ~ N(0,1) (probabilists' Hermite weight, total mass 1).
const QuadratureRule& gauss_hermite(int order);
// Gauss-Legendre on [-1, 1].
const QuadratureRule& gauss_legendre(int order);

// E f(a Z + b) for Z ~ N(0,1).
double normal_expect(const std::function<double(double)>& f, double mean, double sd, int order = 40);

// Tensor-product Gauss-Hermite value of E f(xi), xi ~ N(0, I_m); m <= 4.
double gh_expect(const std::function<double(std::span<const double>)>& f, std::size_t m, int order);

// int_a^b f using n-point Gauss-Legendre on each of `panels` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels = 1, int n = 20);

}  // namespace chaosflow::core
