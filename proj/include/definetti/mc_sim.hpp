#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "definetti/model.hpp"

namespace definetti {

struct SimConfig {
  double dt = 1e-3;
  /// Simulated time; 0 selects 20 / q.
  double horizon = 0.0;
  long n_paths = 100000;
  std::uint64_t seed = 20240601;
  /// Pairs paths driven by (Z, -Z); n_paths must then be even.
  bool antithetic = false;
  /// Worker threads; 0 selects the hardware concurrency. Results do not
  /// depend on this value.
  int workers = 0;
  /// Permits q * horizon < 20.
  bool allow_short_horizon = false;
  /// Keeps per-sample payoffs in the estimate.
  bool keep_samples = false;

  double horizon_for(double q) const { return horizon > 0.0 ? horizon : 20.0 / q; }
  void validate(double q) const;
};

struct MCEstimate {
  double mean = 0.0;
  /// Sample standard deviation / sqrt(samples).
  double std_error = 0.0;
  long n_paths = 0;
  /// Bound on the bias from stopping at the horizon.
  double discount_tail_bound = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  bool antithetic = false;
  /// Per-sample payoffs (antithetic pairs averaged), if requested.
  std::vector<double> samples;

  /// (analytic - mean) / stderr, or 0 when both agree exactly with zero spread.
  double z_score(double analytic) const;
};

/// Stationary Markov control rate; clipped into [0, F(u)] at every step.
using RateRule = std::function<double(double)>;

/// Weak-error allowance for the Euler scheme with absorption checked at grid
/// times only. `boundary_slope` is |d estimate / d boundary level|, which
/// multiplies the effective boundary shift 0.5826 sigma sqrt(dt); `rate_scale`
/// multiplies dt for the O(dt) drift and quadrature error. Both terms carry a
/// safety factor of 2.
double discretization_allowance(const SimConfig& cfg, double sigma, double boundary_slope,
                                double rate_scale);

/// Value of the barrier strategy: rate F(U) above b, 0 at or below b.
MCEstimate estimate_value(const ModelParams& p, const BoundFn& f, double b, double x0,
                          const SimConfig& cfg);

/// E_x[e^{-q tau_b}; tau_b < tau_0] for the uncontrolled process.
MCEstimate estimate_two_sided_laplace(const ModelParams& p, double x, double b, const SimConfig& cfg);

/// E_x[e^{-q tau_0}] for dU = (mu - F(U)) dt + sigma dW.
MCEstimate estimate_phi(const ModelParams& p, const BoundFn& f, double x, const SimConfig& cfg);

/// E_x[int_0^inf e^{-qt} F(U_t) dt] without absorption, trapezoidal in time.
MCEstimate estimate_IF(const ModelParams& p, const BoundFn& f, double x, const SimConfig& cfg);

MCEstimate evaluate_strategy(const ModelParams& p, const BoundFn& f, const RateRule& rule, double x0,
                             const SimConfig& cfg);

}  // namespace definetti
