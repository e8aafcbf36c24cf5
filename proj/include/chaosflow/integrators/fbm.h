#pragma once

#include <Eigen/Dense>

#include "chaosflow/core/time_grid.h"
#include "chaosflow/integrators/gsro.h"

namespace chaosflow::integrators {

struct FbmSpec {
  double alpha = 0.7;                    // Hurst index in (1/2, 1)
  core::TimeGrid grid{1.0, 16};          // coarse grid: path times and integrands
  std::size_t refine = 64;               // noise cells per coarse cell
  int quad_order = 16;                   // Gauss-Legendre points per cell
};

// c_alpha with Var B(1) = 1.
double fbm_constant(double alpha);
// R(s, t) = (t^{2a} + s^{2a} - |t - s|^{2a}) / 2.
double fbm_covariance(double alpha, double s, double t);

// Volterra kernel K(t, s) of the Mandelbrot-van Ness type representation
// B(t) = int_0^t K(t, s) dw(s).
class FbmKernel {
 public:
  explicit FbmKernel(const FbmSpec& spec);

  const FbmSpec& spec() const { return spec_; }
  double kernel(double t, double s) const;
  std::size_t noise_cells() const { return spec_.grid.cells() * spec_.refine; }
  double noise_dt() const { return spec_.grid.horizon() / static_cast<double>(noise_cells()); }
  // Row i: degree-1 kernel of B(t_{i+1}) over the fine noise coordinates.
  const Eigen::MatrixXd& path_kernels() const { return paths_; }

 private:
  double cell_integral(double t, double a, double b) const;

  FbmSpec spec_;
  double c_;
  double e_;
  Eigen::MatrixXd paths_;
};

// GSRO with (A phi)(t_i) = int_0^{t_i} phi dB for coarse step functions phi.
Gsro fbm_gsro(const FbmKernel& K);

}  // namespace chaosflow::integrators
