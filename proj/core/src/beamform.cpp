#include "irsec/beamform.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "irsec/errors.hpp"
#include "irsec/random.hpp"

namespace irsec {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kClosedForm:
      return "closed_form";
    case Method::kMrtNoIrs:
      return "no_irs";
    case Method::kRandomPhase:
      return "random_phase";
    case Method::kAo:
      return "ao";
    case Method::kNeural:
      return "neural";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "closed_form") return Method::kClosedForm;
  if (name == "no_irs" || name == "mrt_no_irs") return Method::kMrtNoIrs;
  if (name == "random_phase") return Method::kRandomPhase;
  if (name == "ao") return Method::kAo;
  if (name == "neural") return Method::kNeural;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Solution make_solution(const ChannelRealization& real, PhaseConfig phase, Beamformer beam,
                       const SystemParams& params, Method method) {
  Solution s;
  s.eval = outage_closed_form(real, phase, beam, params);
  s.phase = std::move(phase);
  s.beam = std::move(beam);
  s.method = method;
  return s;
}

Beamformer optimal_beam(const QuotientForm& form, double beta_d) {
  if (!(beta_d > 0.0)) throw DomainError("optimal_beam: beta_d must be > 0");
  const std::size_t n_t = form.q1.rows();
  if (n_t == 1) return Beamformer(CVec{1.0});

  const CMat l = cholesky(form.denominator(beta_d));
  // L^{-1} N L^{-H} = L^{-1} (L^{-1} N)^H for Hermitian N.
  const CMat half = solve_lower(l, form.numerator());
  CMat whitened = solve_lower(l, half.adjoint());
  for (std::size_t i = 0; i < n_t; ++i) {
    for (std::size_t j = i + 1; j < n_t; ++j) {
      const cplx avg = 0.5 * (whitened(i, j) + std::conj(whitened(j, i)));
      whitened(i, j) = avg;
      whitened(j, i) = std::conj(avg);
    }
    whitened(i, i) = whitened(i, i).real();
  }

  const EigPair top = hermitian_eig_max(whitened);
  const CVec b = solve_lower_adjoint(l, top.vector);
  return Beamformer(canonical_phase(b.normalized()));
}

Beamformer optimal_beam(const ChannelRealization& real, const PhaseConfig& phase,
                        const SystemParams& params) {
  return optimal_beam(quotient_form(real, phase, params), params.beta_d);
}

Solution mrt_no_irs(const CMat& h_b, const SystemParams& params) {
  const CMat q = gram(h_b);
  if (q.max_abs() == 0.0) throw DegenerateChannelError("mrt_no_irs: H_b is zero");
  const EigPair top = hermitian_eig_max(q);
  ChannelRealization bare = without_irs(h_b);
  return make_solution(bare, PhaseConfig(), Beamformer(top.vector), params, Method::kMrtNoIrs);
}

Solution random_phase(const ChannelRealization& real, const SystemParams& params, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(real.n_s());
  for (double& t : theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  PhaseConfig phase(std::move(theta));
  Beamformer beam = optimal_beam(real, phase, params);
  return make_solution(real, std::move(phase), std::move(beam), params, Method::kRandomPhase);
}

}  // namespace irsec
