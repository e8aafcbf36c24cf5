#pragma once

namespace chaosflow::pde {

// Transition density of Brownian motion killed at 0: (2 pi t)^{-1/2} (e^{-(x-y)^2/2t} - e^{-(x+y)^2/2t}).
double killed_kernel(double t, double x, double y);
// int_0^inf q_t(x, y) dy = P(no hit of 0 by time t | start x) = 2 Phi(x / sqrt t) - 1.
double killed_survival(double t, double x);
// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace chaosflow::pde
