#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosflow/smoothing/density.h"
#include "chaosflow/sq/second_quant.h"

namespace chaosflow::smoothing {

// Standardized increments of a path given at grid times t_0..t_m.
std::vector<double> noise_from_path(const core::TimeGrid& grid, std::span<const double> path);

// pi_t: atoms w1^{(i)}(t) with w1 drawn from conditional_law_w1(u), weights p^{(i)} / sum p.
struct SmoothedMeasure {
  sq::ParticleMeasure measure;
  double normalization = 0.0;  // (1/n) sum p = estimate of E(p | w2 = u)
  double ess = 0.0;            // (sum p)^2 / sum p^2
};

// u is the observed path (values at grid times); samples are drawn chunk by chunk with chunk_seed.
SmoothedMeasure pi_t(const JointModel& model, const DriftPair& drifts, std::span<const double> u, double t,
                     std::size_t n, std::uint64_t seed);

struct BayesEstimate {
  double value = 0.0;
  double std_error = 0.0;  // delta-method error of the ratio
  double ess = 0.0;
  bool ess_ok = false;     // ess >= ess_fraction * n
};

// psi(u) = sum f(w1_i(t)) p_i / sum p_i, the self-normalized estimate of E(f(x1(t)) | x2 = u).
BayesEstimate bayes_psi(const JointModel& model, const DriftPair& drifts, const std::function<double(double)>& f,
                        double t, std::span<const double> u, std::size_t n, std::uint64_t seed,
                        double ess_fraction = 0.1);

}  // namespace chaosflow::smoothing
