#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irsec/channel.hpp"
#include "irsec/numerics.hpp"

namespace irsec {

// IRS phase shifts stored as angles in [0, 2pi), so every reflection
// coefficient exp(j theta_n) has unit modulus by construction.
class PhaseConfig {
 public:
  PhaseConfig() = default;
  // Angles are wrapped into [0, 2pi). Throws DomainError on non-finite input.
  explicit PhaseConfig(std::vector<double> theta);

  static PhaseConfig zeros(std::size_t n_s) { return PhaseConfig(std::vector<double>(n_s, 0.0)); }
  // theta = 2 pi z; requires every z in (0, 1).
  static PhaseConfig from_z(std::span<const double> z);

  std::size_t size() const noexcept { return theta_.size(); }
  std::span<const double> theta() const noexcept { return theta_; }
  double theta(std::size_t n) const { return theta_[n]; }
  cplx coefficient(std::size_t n) const { return std::polar(1.0, theta_[n]); }
  std::vector<cplx> coefficients() const;
  std::vector<double> z() const;
  CMat matrix() const;  // diag(exp(j theta))

  bool operator==(const PhaseConfig&) const = default;

 private:
  std::vector<double> theta_;
};

double wrap_angle(double theta);

// Unit-norm precoder b; the transmitted beam is w = sqrt(P_t) b.
class Beamformer {
 public:
  Beamformer() = default;
  // Requires | ||b|| - 1 | <= 1e-12.
  explicit Beamformer(CVec b);
  // Normalizes any nonzero direction.
  static Beamformer from_direction(const CVec& v);

  const CVec& b() const noexcept { return b_; }
  CVec w(double p_t) const;
  std::size_t size() const noexcept { return b_.size(); }

 private:
  CVec b_;
};

struct EvalResult {
  double c_m = 0.0;  // legitimate capacity, bit/s/Hz
  double phi = 0.0;  // outage threshold on Eve's gain
  double objective = 0.0;  // phi / (beta_d^2 + beta_r^2 ||Theta H b||^2)
  double p_out = 1.0;  // closed-form secrecy outage probability
};

// H_b + G_r Theta H.
CMat composite_channel(const ChannelRealization& real, const PhaseConfig& phase);

double capacity_main(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                     const SystemParams& params);

// ||(beta_d Z + beta_r C Theta H) b||^2 for one wiretap draw.
double wiretap_gain(const WiretapDraw& draw, const ChannelRealization& real, const PhaseConfig& phase,
                    const Beamformer& beam, const SystemParams& params);

double capacity_wiretap(const WiretapDraw& draw, const ChannelRealization& real,
                        const PhaseConfig& phase, const Beamformer& beam, const SystemParams& params);

// sigma_e^2 (2^{C_m - R_s} - 1) / P_t; negative whenever C_m < R_s.
double phi(double c_m, const SystemParams& params);

// The pieces of the Rayleigh-quotient form of the objective:
//   objective = c * (b^H (t I + Q1) b) / (b^H (beta_d^2 I + Q2) b).
struct QuotientForm {
  double c = 0.0;
  double t = 0.0;
  CMat q1;  // A^H A with A = H_b + G_r Theta H
  CMat q2;  // beta_r^2 H^H H
  CMat numerator() const;  // t I + Q1
  CMat denominator(double beta_d) const;  // beta_d^2 I + Q2
};

QuotientForm quotient_form(const ChannelRealization& real, const PhaseConfig& phase,
                           const SystemParams& params);

// Objective value. Both the direct phi/(...) form and the quotient form are
// evaluated; InternalConsistencyError if they differ by more than 1e-10
// relative to the magnitude of their terms.
double objective(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                 const SystemParams& params);

// Full evaluation with the closed-form outage Q(N_e, phi / denominator);
// p_out = 1 whenever phi <= 0.
EvalResult outage_closed_form(const ChannelRealization& real, const PhaseConfig& phase,
                              const Beamformer& beam, const SystemParams& params);

struct McEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t draws = 0;
};

// Monte Carlo estimate of P(X >= phi), one wiretap draw per trial with trial
// seeds derived from `seed` by counter.
McEstimate mc_outage(const ChannelRealization& real, const PhaseConfig& phase, const Beamformer& beam,
                     const SystemParams& params, std::uint64_t num_draws, std::uint64_t seed);

// High-power floor of the no-IRS outage: Q(N_e, sigma_e^2 lambda_max / (sigma^2 2^{R_s} beta_d^2)).
double lower_bound_no_irs(const CMat& h_b, const SystemParams& params);

}  // namespace irsec
