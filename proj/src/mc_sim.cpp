#include "definetti/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "definetti/errors.hpp"
#include "definetti/numerics.hpp"

namespace definetti {

namespace {

constexpr double kBoundaryShift = 0.5826;  // -zeta(1/2) / sqrt(2 pi)

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index, double sign)
      : eng_(splitmix64(splitmix64(seed) + index)), sign_(sign) {}
  double normal() { return sign_ * dist_(eng_); }

 private:
  std::mt19937_64 eng_;
  boost::random::normal_distribution<double> dist_;
  double sign_;
};

struct Steps {
  long n;
  double dt, sqdt, decay;
};

Steps make_steps(const SimConfig& cfg, double q) {
  const double H = cfg.horizon_for(q);
  const long n = static_cast<long>(std::ceil(H / cfg.dt - 1e-9));
  return {n, cfg.dt, std::sqrt(cfg.dt), std::exp(-q * cfg.dt)};
}

// Runs path(stream) for every sample; antithetic samples average the pair.
// Each sample owns its stream, so the result is independent of the workers.
template <class Path>
MCEstimate run(const SimConfig& cfg, double q, double tail, Path path) {
  cfg.validate(q);
  const long n_samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  std::vector<double> xs(static_cast<std::size_t>(n_samples));
  auto work = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      double v;
      if (cfg.antithetic) {
        Stream a(cfg.seed, idx, 1.0), b(cfg.seed, idx, -1.0);
        v = 0.5 * (path(a) + path(b));
      } else {
        Stream a(cfg.seed, idx, 1.0);
        v = path(a);
      }
      xs[static_cast<std::size_t>(i)] = v;
    }
  };
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const long workers = std::min<long>(cfg.workers > 0 ? cfg.workers : hw, n_samples);
  if (workers <= 1) {
    work(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    for (long w = 0; w < workers; ++w)
      pool.emplace_back(work, n_samples * w / workers, n_samples * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }

  MCEstimate est;
  est.mean = numerics::pairwise_sum(xs) / static_cast<double>(n_samples);
  std::vector<double> dev(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - est.mean) * (xs[i] - est.mean);
  const double var = n_samples > 1 ? numerics::pairwise_sum(dev) / static_cast<double>(n_samples - 1) : 0.0;
  est.std_error = std::sqrt(var / static_cast<double>(n_samples));
  est.n_paths = cfg.n_paths;
  est.discount_tail_bound = tail;
  est.dt = cfg.dt;
  est.horizon = cfg.horizon_for(q);
  est.seed = cfg.seed;
  est.antithetic = cfg.antithetic;
  if (cfg.keep_samples) est.samples = std::move(xs);
  return est;
}

// Controlled path absorbed at 0; rate(u) is already admissible.
template <class Rate>
MCEstimate controlled_value(const ModelParams& p, const SimConfig& cfg, double x0, double rate_sup,
                            Rate rate) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("initial state must be finite and >= 0");
  const Steps st = make_steps(cfg, p.q());
  const double mu = p.mu(), sig = p.sigma();
  const double tail = std::exp(-p.q() * cfg.horizon_for(p.q())) * rate_sup / p.q();
  return run(cfg, p.q(), tail, [&](Stream& rng) {
    double u = x0, disc = 1.0, pay = 0.0;
    if (u <= 0.0) return 0.0;
    for (long k = 0; k < st.n; ++k) {
      const double l = rate(u);
      pay += disc * l * st.dt;
      u += (mu - l) * st.dt + sig * st.sqdt * rng.normal();
      disc *= st.decay;
      if (u <= 0.0) break;
    }
    return pay;
  });
}

// Rough bound on sup F over the region a path reaches before the horizon.
double rate_bound(const ModelParams& p, const BoundFn& f, double x0, double H) {
  return std::max(0.0, f(x0 + p.mu() * H + 6.0 * p.sigma() * std::sqrt(H)));
}

}  // namespace

void SimConfig::validate(double q) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt must be > 0");
  if (horizon < 0.0 || !std::isfinite(horizon)) throw ConfigError("sim.horizon must be >= 0");
  const double H = horizon_for(q);
  if (dt > H) throw ConfigError("sim.dt must not exceed sim.horizon");
  if (!allow_short_horizon && q * H < 20.0 - 1e-12)
    throw ConfigError(fmt::format("sim.horizon = {} gives q * horizon < 20", H));
  if (n_paths < 2) throw ConfigError("sim.n_paths must be >= 2");
  if (antithetic && n_paths % 2 != 0) throw ConfigError("sim.n_paths must be even with antithetic");
  if (workers < 0) throw ConfigError("sim.workers must be >= 0");
}

double MCEstimate::z_score(double analytic) const {
  const double d = analytic - mean;
  if (std_error > 0.0) return d / std_error;
  return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
}

double discretization_allowance(const SimConfig& cfg, double sigma, double boundary_slope,
                                double rate_scale) {
  return 2.0 * (kBoundaryShift * sigma * std::sqrt(cfg.dt) * std::abs(boundary_slope) +
                cfg.dt * std::abs(rate_scale));
}

MCEstimate estimate_value(const ModelParams& p, const BoundFn& f, double b, double x0,
                          const SimConfig& cfg) {
  if (!(b >= 0.0)) throw DomainError("barrier must be >= 0");
  const double H = cfg.horizon_for(p.q());
  return controlled_value(p, cfg, x0, rate_bound(p, f, x0, H),
                          [&](double u) { return u > b ? f(u) : 0.0; });
}

MCEstimate evaluate_strategy(const ModelParams& p, const BoundFn& f, const RateRule& rule, double x0,
                             const SimConfig& cfg) {
  if (!rule) throw ConfigError("rate rule is empty");
  const double H = cfg.horizon_for(p.q());
  return controlled_value(p, cfg, x0, rate_bound(p, f, x0, H), [&](double u) {
    const double cap = std::max(0.0, f(u));
    const double r = rule(u);
    return std::isfinite(r) ? std::clamp(r, 0.0, cap) : 0.0;
  });
}

MCEstimate estimate_two_sided_laplace(const ModelParams& p, double x, double b, const SimConfig& cfg) {
  if (!(b > 0.0) || !(x >= 0.0 && x <= b)) throw DomainError("two-sided Laplace transform needs 0 <= x <= b");
  const Steps st = make_steps(cfg, p.q());
  const double mu = p.mu(), sig = p.sigma();
  const double tail = std::exp(-p.q() * cfg.horizon_for(p.q()));
  return run(cfg, p.q(), tail, [&](Stream& rng) {
    if (x >= b) return 1.0;
    if (x <= 0.0) return 0.0;
    double u = x, disc = 1.0;
    for (long k = 0; k < st.n; ++k) {
      u += mu * st.dt + sig * st.sqdt * rng.normal();
      disc *= st.decay;
      if (u >= b) return disc;
      if (u <= 0.0) return 0.0;
    }
    return 0.0;
  });
}

MCEstimate estimate_phi(const ModelParams& p, const BoundFn& f, double x, const SimConfig& cfg) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("estimate_phi needs x >= 0");
  const Steps st = make_steps(cfg, p.q());
  const double mu = p.mu(), sig = p.sigma();
  const double tail = std::exp(-p.q() * cfg.horizon_for(p.q()));
  return run(cfg, p.q(), tail, [&](Stream& rng) {
    if (x <= 0.0) return 1.0;
    double u = x, disc = 1.0;
    for (long k = 0; k < st.n; ++k) {
      u += (mu - f(u)) * st.dt + sig * st.sqdt * rng.normal();
      disc *= st.decay;
      if (u <= 0.0) return disc;
    }
    return 0.0;
  });
}

MCEstimate estimate_IF(const ModelParams& p, const BoundFn& f, double x, const SimConfig& cfg) {
  if (!std::isfinite(x)) throw DomainError("estimate_IF needs a finite x");
  const Steps st = make_steps(cfg, p.q());
  const double mu = p.mu(), sig = p.sigma(), q = p.q();
  // Lipschitz growth: |F(U_t)| <= |F(x)| + F'(0+) |U_t - x|, and the drift is
  // bounded by |mu| + |F(x)| + F'(0+) |U_t - x|; past the horizon this gives a
  // Gaussian-scale excursion estimate rather than a proof.
  const double H = cfg.horizon_for(q);
  const double L = f.slope_at_zero();
  const double T = H + 1.0 / q;
  const double excursion = (std::abs(mu) + std::abs(f(x))) * T + 3.0 * sig * std::sqrt(T);
  const double tail = std::exp(-q * H) * (std::abs(f(x)) + L * excursion) / q;
  return run(cfg, q, tail, [&](Stream& rng) {
    double u = x, disc = 1.0;
    double prev = f(u);
    double acc = 0.0;
    for (long k = 0; k < st.n; ++k) {
      u += (mu - prev) * st.dt + sig * st.sqdt * rng.normal();
      const double next_disc = disc * st.decay;
      const double cur = f(u);
      acc += 0.5 * st.dt * (disc * prev + next_disc * cur);
      disc = next_disc;
      prev = cur;
    }
    return acc;
  });
}

}  // namespace definetti
