#include "irsec/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "irsec/errors.hpp"
#include "irsec/random.hpp"

namespace irsec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dims(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam) {
  real.validate();
  if (phase.size() != real.n_s()) {
    throw DomainError("phase vector has " + std::to_string(phase.size()) + " entries, expected N_s = " +
                      std::to_string(real.n_s()));
  }
  if (beam.size() != real.n_t()) {
    throw DomainError("beamformer has " + std::to_string(beam.size()) + " entries, expected N_t = " +
                      std::to_string(real.n_t()));
  }
}

// Theta H b.
CVec reflected_beam(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam) {
  CVec v = real.h * beam.b();
  for (std::size_t n = 0; n < v.size(); ++n) v[n] *= phase.coefficient(n);
  return v;
}

double quadratic_form(const CMat& m, const CVec& x) { return dot(x, m * x).real(); }

}  // namespace

// ---------------------------------------------------------------- PhaseConfig

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

PhaseConfig::PhaseConfig(std::vector<double> theta) : theta_(std::move(theta)) {
  for (double& t : theta_) {
    if (!std::isfinite(t)) throw DomainError("PhaseConfig: non-finite phase");
    if (t < 0.0 || t >= kTwoPi) t = wrap_angle(t);
  }
}

PhaseConfig PhaseConfig::from_z(std::span<const double> z) {
  std::vector<double> theta(z.size());
  for (std::size_t n = 0; n < z.size(); ++n) {
    if (!(z[n] > 0.0 && z[n] < 1.0)) {
      throw DomainError("PhaseConfig::from_z: z[" + std::to_string(n) + "] = " + std::to_string(z[n]) +
                        " outside (0, 1)");
    }
    theta[n] = kTwoPi * z[n];
  }
  return PhaseConfig(std::move(theta));
}

std::vector<cplx> PhaseConfig::coefficients() const {
  std::vector<cplx> out(theta_.size());
  for (std::size_t n = 0; n < theta_.size(); ++n) out[n] = coefficient(n);
  return out;
}

std::vector<double> PhaseConfig::z() const {
  std::vector<double> out(theta_.size());
  for (std::size_t n = 0; n < theta_.size(); ++n) out[n] = theta_[n] / kTwoPi;
  return out;
}

CMat PhaseConfig::matrix() const {
  const auto coeffs = coefficients();
  return CMat::diagonal(coeffs);
}

// ---------------------------------------------------------------- Beamformer

Beamformer::Beamformer(CVec b) : b_(std::move(b)) {
  if (b_.empty()) throw DomainError("Beamformer: empty vector");
  if (std::abs(b_.norm() - 1.0) > 1e-12) {
    throw DomainError("Beamformer: vector is not unit norm (||b|| = " + std::to_string(b_.norm()) + ")");
  }
}

Beamformer Beamformer::from_direction(const CVec& v) { return Beamformer(v.normalized()); }

CVec Beamformer::w(double p_t) const { return std::sqrt(p_t) * b_; }

// ---------------------------------------------------------------- capacities

CMat composite_channel(const ChannelRealization& real, const PhaseConfig& phase) {
  real.validate();
  if (phase.size() != real.n_s()) throw DomainError("composite_channel: phase/N_s mismatch");
  CMat a = real.h_b;
  const std::size_t n_r = real.n_r();
  const std::size_t n_t = real.n_t();
  for (std::size_t n = 0; n < real.n_s(); ++n) {
    const cplx e = phase.coefficient(n);
    for (std::size_t r = 0; r < n_r; ++r) {
      const cplx g = real.g_r(r, n) * e;
      for (std::size_t t = 0; t < n_t; ++t) a(r, t) += g * real.h(n, t);
    }
  }
  return a;
}

double capacity_main(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                     const SystemParams& params) {
  require_dims(real, phase, beam);
  const double gain = (composite_channel(real, phase) * beam.b()).squared_norm();
  return std::log2(1.0 + params.p_t / params.sigma2 * gain);
}

double wiretap_gain(const WiretapDraw& draw, const ChannelRealization& real, const PhaseConfig& phase,
                    const Beamformer& beam, const SystemParams& params) {
  require_dims(real, phase, beam);
  if (draw.z.cols() != real.n_t() || draw.c.cols() != real.n_s() || draw.z.rows() != draw.c.rows()) {
    throw DomainError("wiretap_gain: wiretap draw dimensions do not match the realization");
  }
  CVec y = params.beta_d * (draw.z * beam.b());
  if (real.n_s() > 0) y += params.beta_r * (draw.c * reflected_beam(real, phase, beam));
  return y.squared_norm();
}

double capacity_wiretap(const WiretapDraw& draw, const ChannelRealization& real,
                        const PhaseConfig& phase, const Beamformer& beam, const SystemParams& params) {
  return std::log2(1.0 + params.p_t / params.sigma2_e * wiretap_gain(draw, real, phase, beam, params));
}

double phi(double c_m, const SystemParams& params) {
  if (!(params.p_t > 0.0)) throw DomainError("phi: P_t must be > 0");
  return params.sigma2_e * (std::exp2(c_m - params.r_s) - 1.0) / params.p_t;
}

// ---------------------------------------------------------------- objective

CMat QuotientForm::numerator() const {
  CMat m = q1;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += t;
  return m;
}

CMat QuotientForm::denominator(double beta_d) const {
  CMat m = q2;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += beta_d * beta_d;
  return m;
}

QuotientForm quotient_form(const ChannelRealization& real, const PhaseConfig& phase,
                           const SystemParams& params) {
  if (!(params.p_t > 0.0)) throw DomainError("quotient_form: P_t must be > 0");
  QuotientForm f;
  const double two_rs = std::exp2(params.r_s);
  f.c = params.sigma2_e / (two_rs * params.sigma2);
  f.t = params.sigma2 * (1.0 - two_rs) / params.p_t;
  f.q1 = gram(composite_channel(real, phase));
  f.q2 = (params.beta_r * params.beta_r) * gram(real.h);
  return f;
}

namespace {

struct DirectEval {
  double c_m;
  double phi;
  double denominator;
  double objective;
};

DirectEval evaluate_direct(const ChannelRealization& real, const PhaseConfig& phase,
                           const Beamformer& beam, const SystemParams& params) {
  DirectEval d{};
  d.c_m = capacity_main(real, phase, beam, params);
  d.phi = phi(d.c_m, params);
  const double reflected = real.n_s() > 0 ? reflected_beam(real, phase, beam).squared_norm() : 0.0;
  d.denominator = params.beta_d * params.beta_d + params.beta_r * params.beta_r * reflected;
  d.objective = d.phi / d.denominator;
  return d;
}

double checked_objective(const ChannelRealization& real, const PhaseConfig& phase,
                         const Beamformer& beam, const SystemParams& params, const DirectEval& d) {
  const QuotientForm f = quotient_form(real, phase, params);
  const CVec& b = beam.b();
  const double q1_form = quadratic_form(f.q1, b);
  const double num = f.t * b.squared_norm() + q1_form;
  const double den = quadratic_form(f.denominator(params.beta_d), b);
  const double quotient = f.c * num / den;

  // Round-off in either form is bounded by the size of t and Q1, not by the
  // (possibly cancelling) value of the numerator.
  const double scale =
      f.c * (std::abs(f.t) + f.q1.frobenius_norm()) / std::min(den, d.denominator);
  if (!(std::abs(quotient - d.objective) <= 1e-10 * std::max(scale, 1e-300))) {
    throw InternalConsistencyError("objective: direct form " + std::to_string(d.objective) +
                                   " and quotient form " + std::to_string(quotient) + " disagree");
  }
  return d.objective;
}

}  // namespace

double objective(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                 const SystemParams& params) {
  const DirectEval d = evaluate_direct(real, phase, beam, params);
  return checked_objective(real, phase, beam, params, d);
}

EvalResult outage_closed_form(const ChannelRealization& real, const PhaseConfig& phase,
                              const Beamformer& beam, const SystemParams& params) {
  if (!(params.beta_d > 0.0)) throw DomainError("outage_closed_form: beta_d must be > 0");
  const DirectEval d = evaluate_direct(real, phase, beam, params);
  EvalResult r;
  r.c_m = d.c_m;
  r.phi = d.phi;
  r.objective = checked_objective(real, phase, beam, params, d);
  r.p_out = d.phi <= 0.0 ? 1.0 : gamma_upper_regularized(params.n_e, d.phi / d.denominator);
  return r;
}

McEstimate mc_outage(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                     const SystemParams& params, std::uint64_t num_draws, std::uint64_t seed) {
  if (num_draws < 1) throw DomainError("mc_outage: num_draws must be >= 1");
  require_dims(real, phase, beam);
  const double threshold = phi(capacity_main(real, phase, beam, params), params);

  McEstimate est;
  est.draws = num_draws;
  if (threshold <= 0.0) {
    est.p_hat = 1.0;
    return est;
  }

  const CVec reflected = real.n_s() > 0 ? reflected_beam(real, phase, beam) : CVec();
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < num_draws; ++i) {
    const WiretapDraw draw = sample_wiretap(params, derive_seed(seed, i));
    CVec y = params.beta_d * (draw.z * beam.b());
    if (real.n_s() > 0) y += params.beta_r * (draw.c * reflected);
    if (y.squared_norm() >= threshold) ++hits;
  }
  const double n = static_cast<double>(num_draws);
  est.p_hat = static_cast<double>(hits) / n;
  est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
  return est;
}

double lower_bound_no_irs(const CMat& h_b, const SystemParams& params) {
  if (!(params.beta_d > 0.0)) throw DomainError("lower_bound_no_irs: beta_d must be > 0");
  const double lambda_max = spectral_norm_sq_of_channel(h_b);
  const double x = params.sigma2_e * lambda_max /
                   (params.sigma2 * std::exp2(params.r_s) * params.beta_d * params.beta_d);
  return gamma_upper_regularized(params.n_e, x);
}

}  // namespace irsec
