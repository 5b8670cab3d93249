#pragma once

#include <string>
#include <vector>

#include "definetti/closed_forms.hpp"
#include "definetti/model.hpp"
#include "definetti/ode_engine.hpp"

namespace definetti {

/// psi (closed form), phi_F and I_F (ODE engine) for one problem.
class Fundamentals {
 public:
  Fundamentals(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg = {});

  const ModelParams& params() const noexcept { return p_; }
  const BoundFn& bound() const noexcept { return f_; }
  const FnProfile& phi_profile() const noexcept { return phi_; }
  const FnProfile& IF_profile() const noexcept { return I_; }
  double b_hat() const noexcept { return b_hat_; }

  numerics::Jet psi(double x) const;
  numerics::Jet phi(double x) const { return phi_.eval(x); }
  numerics::Jet IF(double x) const { return I_.eval(x); }

  /// I_F'(0) - I_F(0) phi_F'(0).
  double regime_statistic() const;

 private:
  ModelParams p_;
  BoundFn f_;
  ScaleFunction psi_;
  FnProfile phi_, I_;
  double b_hat_;
};

enum class Regime { ZeroBarrier, PositiveBarrier };
std::string to_string(Regime r);

/// Value of the mean-reverting strategy with barrier b on a grid.
struct BarrierValue {
  double b = 0.0;
  double C1_b = 0.0;
  double C2_b = 0.0;
  FnProfile value;
  /// |V_b'(b-) - V_b'(b+)| and |V_b''(b-) - V_b''(b+)|.
  double d1_jump = 0.0;
  double d2_jump = 0.0;
};

struct PolicyDiagnostics {
  double regime_statistic = 0.0;
  bool borderline = false;
  /// Sign changes of g - h on the 512-point scan of (0, b_hat].
  int sign_changes = 0;
  double root_residual = 0.0;
  double b_hat = 0.0;
  double d1_jump = 0.0;
  double d2_jump = 0.0;
  double phi_residual = 0.0;
  double IF_residual = 0.0;
  double phi_mesh_h = 0.0;
  double IF_mesh_h = 0.0;
  double truncation_L = 0.0;
  /// The bound has kinks; its admissibility rests on the smoothing argument.
  bool kinked_bound = false;
};

/// The solved control problem. The value profile holds (x, V, V', V'') on the
/// output grid, with b* inserted as a node; at b* the left branch is stored.
struct Policy {
  Regime regime = Regime::ZeroBarrier;
  double b_star = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  FnProfile value;
  ModelParams params{1.0, 1.0, 1.0};
  BoundFn bound = BoundFn::constant(0.0);
  PolicyDiagnostics diagnostics;

  /// V and its derivatives by interpolation of the value profile.
  numerics::Jet evaluate(double x) const;
};

/// Borderline band around the regime threshold assigned to ZeroBarrier.
inline constexpr double kBorderlineBand = 1e-9;

bool regime_test(const Fundamentals& fund);
bool regime_test(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg = {});

/// Smallest root of g - h on (1e-8 b_hat, b_hat].
numerics::RootScan find_bstar(const Fundamentals& fund);
double find_bstar(const ModelParams& p, const BoundFn& f, const SolveConfig& cfg = {});

/// g(b) - h(b) with g = I_F - I_F' phi_F/phi_F' and h = psi/psi' - phi_F/phi_F'.
double barrier_gap(const Fundamentals& fund, double b);

/// C1(b), C2(b) from the general formulas; throws InconsistencyError when the
/// Wronskian psi' phi - psi phi' is not positive.
std::pair<double, double> barrier_coefficients(const Fundamentals& fund, double b);

BarrierValue value_at_barrier(const Fundamentals& fund, double b, const std::vector<double>& grid);
BarrierValue value_at_barrier(const ModelParams& p, const BoundFn& f, double b,
                              const std::vector<double>& grid, const SolveConfig& cfg = {});

/// Uniform grid of `points` nodes on [0, max(x_query, 4 b_hat)].
std::vector<double> default_value_grid(const ModelParams& p, double x_query = 0.0, int points = 401);

Policy solve(const Fundamentals& fund, const std::vector<double>& grid);
/// Solves with the grid's right end added to the region the ODE profiles cover.
/// An empty grid selects default_value_grid.
Policy solve(const ModelParams& p, const BoundFn& f, std::vector<double> grid = {},
             SolveConfig cfg = {});

}  // namespace definetti
