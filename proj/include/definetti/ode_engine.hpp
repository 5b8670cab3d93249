#pragma once

#include <vector>

#include "definetti/model.hpp"
#include "definetti/numerics.hpp"

namespace definetti {

struct ProfileMeta {
  double truncation_L = 0.0;
  double truncation_M = 0.0;
  double mesh_h = 0.0;
  /// Sup of |Gamma_F(f) - rhs| at cell midpoints of the interpolant.
  double residual = 0.0;
  /// Sup change on [0, L/2] when the domain is doubled.
  double truncation_change = 0.0;
  std::vector<double> residual_history;
};

/// A function tabulated on a strictly increasing grid with first and second
/// derivatives. Between nodes it is the quintic Hermite interpolant of
/// (value, d1, d2), so it is C^2 across nodes.
///
/// Values may carry a low-order part (value = values[i] + values_lo[i]); the
/// interpolant then uses increments accurate beyond double rounding, which
/// keeps interpolated second derivatives free of an O(eps |f| / h^2) floor.
class FnProfile {
 public:
  FnProfile() = default;
  FnProfile(std::vector<double> nodes, std::vector<double> values, std::vector<double> d1,
            std::vector<double> d2, ProfileMeta meta = {}, std::vector<double> values_lo = {});

  /// Profile of a constant on [left, right].
  static FnProfile constant(double value, double left, double right);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& d1() const noexcept { return d1_; }
  const std::vector<double>& d2() const noexcept { return d2_; }
  const std::vector<double>& values_lo() const noexcept { return values_lo_; }
  const ProfileMeta& meta() const noexcept { return meta_; }
  FnProfile with_meta(ProfileMeta meta) const {
    FnProfile out = *this;
    out.meta_ = std::move(meta);
    return out;
  }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  double domain_left() const { return nodes_.front(); }
  double domain_right() const { return nodes_.back(); }

  /// Value and derivatives at x; throws DomainError outside the domain.
  numerics::Jet eval(double x) const;
  /// Interpolant on cell [nodes[i], nodes[i+1]].
  numerics::Jet eval_cell(std::size_t i, double x) const;
  double value(double x) const { return eval(x).v; }
  double deriv(double x) const { return eval(x).d1; }

 private:
  std::vector<double> nodes_, values_, d1_, d2_;
  ProfileMeta meta_;
  std::vector<double> values_lo_;
};

struct SolveConfig {
  /// Right cutoff; 0 selects max(2 x_query, x_query + 10 sigma / sqrt(2q)).
  double truncation_L = 0.0;
  /// Left cutoff below 0 for I_F; negative selects the default.
  double truncation_M = -1.0;
  /// Minimum node count of the working mesh.
  int mesh_n = 64;
  /// Target for the midpoint residual of the returned profile.
  double tol = 1e-7;
  /// Mesh refinements and domain doublings allowed, each.
  int refine_max = 8;
  /// Right end of the region the caller will query.
  double x_query = 10.0;

  void validate() const;
};

/// Decreasing solution of Gamma_F(f) = 0 on [0, L] with f(0) = 1 and the
/// frozen-coefficient Robin condition f'(L) + lambda(L) f(L) = 0.
FnProfile solve_phi_F(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg = {});

/// Solution of Gamma_F(f) = -F on [-M, L] with the asymptotic Neumann slopes
/// F'(x)/(q + F'(x)) at both ends.
FnProfile solve_I_F(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg = {});

/// max over nodes of |(sigma^2/2) f'' + (mu - F) f' - q f - rhs|, with rhs 0 or -F.
double gamma_residual(const ModelParams& p, const BoundFn& f, const FnProfile& profile,
                      bool rhs_is_minus_F);

/// Same operator evaluated through the interpolant at every cell midpoint.
double gamma_midpoint_residual(const ModelParams& p, const BoundFn& f, const FnProfile& profile,
                               bool rhs_is_minus_F, double from = -1e300, double to = 1e300);

/// Decay rate of e^{-lambda x} for the ODE frozen at level F: positive root of
/// (sigma^2/2) l^2 - (mu - F) l - q = 0.
double frozen_decay_rate(const ModelParams& p, double F_level);

}  // namespace definetti
