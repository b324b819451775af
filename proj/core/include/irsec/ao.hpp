#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "irsec/beamform.hpp"

namespace irsec {

// Alternating optimization: projected gradient ascent on the IRS phases
// (the angle parameterization keeps every iterate unit-modulus) alternated
// with the closed-form beam update.
struct AoConfig {
  int max_outer_iters = 100;
  int grad_steps_per_outer = 10;
  double step_size = 0.5;
  double step_decay = 0.95;
  double tol_objective = 1e-8;
  std::uint64_t rng_seed = 0;
  int restarts = 1;  // best-of random starts
  int max_halvings = 20;  // backtracking budget per gradient step

  void validate() const;
  bool operator==(const AoConfig&) const = default;
};

// d(objective)/d(theta_n) with b held fixed. The denominator does not depend
// on theta, so component n is
//   (c / D) * 2 Re{ j e^{j theta_n} (A b)^H F_n b }.
std::vector<double> phase_gradient(const ChannelRealization& real, const PhaseConfig& phase,
                                   const Beamformer& beam, const SystemParams& params);

struct AoTrace {
  Solution solution;
  std::vector<double> objective_trace;  // after init, then after each outer iteration
  int outer_iterations = 0;
};

Solution ao_solve(const ChannelRealization& real, const SystemParams& params, const AoConfig& cfg,
                  const std::optional<PhaseConfig>& init = std::nullopt);
AoTrace ao_solve_traced(const ChannelRealization& real, const SystemParams& params,
                        const AoConfig& cfg, const std::optional<PhaseConfig>& init = std::nullopt);

}  // namespace irsec
