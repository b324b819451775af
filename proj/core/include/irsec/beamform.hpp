#pragma once

#include <cstdint>
#include <string_view>

#include "irsec/channel.hpp"
#include "irsec/secrecy.hpp"

namespace irsec {

enum class Method { kClosedForm, kMrtNoIrs, kRandomPhase, kAo, kNeural };

std::string_view method_name(Method m);
// Accepts the names produced by method_name plus the CLI aliases
// "no_irs" and "neural". Throws ConfigError otherwise.
Method parse_method(std::string_view name);

struct Solution {
  PhaseConfig phase;
  Beamformer beam;
  EvalResult eval;
  Method method = Method::kClosedForm;
};

// Evaluates (phase, beam) through the secrecy metrics.
Solution make_solution(const ChannelRealization& real, PhaseConfig phase, Beamformer beam,
                       const SystemParams& params, Method method);

// Maximizer of the generalized Rayleigh quotient
//   b^H (t I + Q1) b / b^H (beta_d^2 I + Q2) b
// over unit vectors, for the given phases. The denominator is whitened by its
// Cholesky factor L so that only a Hermitian eigenproblem remains:
//   y = top eigvec of L^{-1} (t I + Q1) L^{-H},  b = L^{-H} y / ||L^{-H} y||.
Beamformer optimal_beam(const ChannelRealization& real, const PhaseConfig& phase,
                        const SystemParams& params);
Beamformer optimal_beam(const QuotientForm& form, double beta_d);

// No-IRS baseline: maximum ratio transmission along the top eigenvector of
// H_b^H H_b. Throws DegenerateChannelError when H_b = 0.
Solution mrt_no_irs(const CMat& h_b, const SystemParams& params);

// Phases uniform on [0, 2pi), then the closed-form beam.
Solution random_phase(const ChannelRealization& real, const SystemParams& params, std::uint64_t seed);

}  // namespace irsec
