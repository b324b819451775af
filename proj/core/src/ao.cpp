#include "irsec/ao.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "irsec/errors.hpp"
#include "irsec/random.hpp"

namespace irsec {

void AoConfig::validate() const {
  if (max_outer_iters < 1 || grad_steps_per_outer < 1 || restarts < 1 || max_halvings < 0) {
    throw ConfigError("AoConfig: iteration counts must be positive");
  }
  if (!(step_size > 0.0)) throw ConfigError("AoConfig: step_size must be > 0");
  if (!(step_decay > 0.0 && step_decay <= 1.0)) throw ConfigError("AoConfig: step_decay must be in (0, 1]");
  if (!(tol_objective > 0.0)) throw ConfigError("AoConfig: tol_objective must be > 0");
}

namespace {

// Objective pieces that stay fixed while only theta moves: with v = H b,
// u(theta) = H_b b + sum_n e^{j theta_n} g_n v_n and
// objective = (c / D) (t + ||u||^2), D = beta_d^2 + beta_r^2 ||v||^2.
class FixedBeamObjective {
 public:
  FixedBeamObjective(const ChannelRealization& real, const Beamformer& beam, const SystemParams& params)
      : real_(real), direct_(real.h_b * beam.b()), v_(real.h * beam.b()) {
    const double two_rs = std::exp2(params.r_s);
    const double c = params.sigma2_e / (two_rs * params.sigma2);
    t_ = params.sigma2 * (1.0 - two_rs) / params.p_t;
    const double d = params.beta_d * params.beta_d + params.beta_r * params.beta_r * v_.squared_norm();
    scale_ = c / d;
  }

  CVec received(std::span<const double> theta) const {
    CVec u = direct_;
    for (std::size_t n = 0; n < v_.size(); ++n) {
      const cplx coeff = std::polar(1.0, theta[n]) * v_[n];
      for (std::size_t r = 0; r < u.size(); ++r) u[r] += real_.g_r(r, n) * coeff;
    }
    return u;
  }

  double value(std::span<const double> theta) const {
    return scale_ * (t_ + received(theta).squared_norm());
  }

  std::vector<double> gradient(std::span<const double> theta) const {
    const CVec u = received(theta);
    std::vector<double> g(v_.size());
    for (std::size_t n = 0; n < v_.size(); ++n) {
      cplx ug = 0.0;  // u^H g_n
      for (std::size_t r = 0; r < u.size(); ++r) ug += std::conj(u[r]) * real_.g_r(r, n);
      const cplx term = cplx(0.0, 1.0) * std::polar(1.0, theta[n]) * v_[n] * ug;
      g[n] = 2.0 * scale_ * term.real();
    }
    return g;
  }

 private:
  const ChannelRealization& real_;
  CVec direct_;
  CVec v_;
  double t_ = 0.0;
  double scale_ = 0.0;
};

std::string format_trace(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(10);
  os << "objective trace [";
  for (std::size_t i = 0; i < trace.size(); ++i) os << (i ? ", " : "") << trace[i];
  os << "]";
  return os.str();
}

PhaseConfig random_phases(std::size_t n_s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(n_s);
  for (double& t : theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return PhaseConfig(std::move(theta));
}

AoTrace single_start(const ChannelRealization& real, const SystemParams& params, const AoConfig& cfg,
                     PhaseConfig start) {
  AoTrace out;
  std::vector<double> theta(start.theta().begin(), start.theta().end());
  Beamformer beam = optimal_beam(real, PhaseConfig(theta), params);
  double obj = FixedBeamObjective(real, beam, params).value(theta);
  out.objective_trace.push_back(obj);
  if (!std::isfinite(obj)) {
    throw NumericalError("ao_solve: non-finite objective at init; " + format_trace(out.objective_trace), obj);
  }

  if (real.n_s() > 0) {
    std::vector<double> candidate(theta.size());
    double outer_eta = cfg.step_size;
    for (int k = 0; k < cfg.max_outer_iters; ++k, outer_eta *= cfg.step_decay) {
      const double before = obj;
      const FixedBeamObjective f(real, beam, params);
      double eta = outer_eta;
      for (int s = 0; s < cfg.grad_steps_per_outer; ++s) {
        const std::vector<double> g = f.gradient(theta);
        bool accepted = false;
        for (int h = 0; h <= cfg.max_halvings; ++h) {
          for (std::size_t n = 0; n < theta.size(); ++n) candidate[n] = wrap_angle(theta[n] + eta * g[n]);
          const double value = f.value(candidate);
          if (value >= obj) {
            theta.swap(candidate);
            obj = value;
            accepted = true;
            break;
          }
          eta *= 0.5;
        }
        if (!accepted) break;
      }

      Beamformer next = optimal_beam(real, PhaseConfig(theta), params);
      const double updated = FixedBeamObjective(real, next, params).value(theta);
      // The closed-form beam is optimal for these phases; only round-off can
      // make it look worse, in which case the previous beam is kept.
      if (updated >= obj) {
        beam = std::move(next);
        obj = updated;
      }
      out.objective_trace.push_back(obj);
      out.outer_iterations = k + 1;
      if (!std::isfinite(obj)) {
        throw NumericalError("ao_solve: non-finite objective at outer iteration " + std::to_string(k) +
                                 "; " + format_trace(out.objective_trace),
                             obj);
      }
      if (obj - before < cfg.tol_objective) break;
    }
  }

  out.solution = make_solution(real, PhaseConfig(std::move(theta)), std::move(beam), params, Method::kAo);
  return out;
}

}  // namespace

std::vector<double> phase_gradient(const ChannelRealization& real, const PhaseConfig& phase,
                                   const Beamformer& beam, const SystemParams& params) {
  real.validate();
  if (phase.size() != real.n_s() || beam.size() != real.n_t()) {
    throw DomainError("phase_gradient: dimension mismatch");
  }
  if (!(params.p_t > 0.0)) throw DomainError("phase_gradient: P_t must be > 0");
  return FixedBeamObjective(real, beam, params).gradient(phase.theta());
}

AoTrace ao_solve_traced(const ChannelRealization& real, const SystemParams& params,
                        const AoConfig& cfg, const std::optional<PhaseConfig>& init) {
  cfg.validate();
  real.validate();
  if (init && init->size() != real.n_s()) throw DomainError("ao_solve: init phase has wrong length");

  AoTrace best;
  bool have_best = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    PhaseConfig start = (r == 0 && init) ? *init : random_phases(real.n_s(), derive_seed(cfg.rng_seed, r));
    AoTrace run = single_start(real, params, cfg, std::move(start));
    if (!have_best || run.solution.eval.objective > best.solution.eval.objective) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

Solution ao_solve(const ChannelRealization& real, const SystemParams& params, const AoConfig& cfg,
                  const std::optional<PhaseConfig>& init) {
  return ao_solve_traced(real, params, cfg, init).solution;
}

}  // namespace irsec
