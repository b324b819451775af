#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "irsec/numerics.hpp"

namespace irsec {

// Scalar constants of one problem instance.
struct SystemParams {
  int n_t = 4;  // transmit antennas at Alice
  int n_r = 2;  // receive antennas at Bob
  int n_e = 2;  // antennas at Eve
  int n_s = 16;  // IRS reflecting elements
  double p_t = 10.0;  // transmit power, linear
  double r_s = 3.5;  // target secrecy rate, bit/s/Hz
  double sigma2 = 1.0;  // Bob noise power
  double sigma2_e = 1.0;  // Eve noise power
  double beta_d = 0.5;  // large-scale fading of the direct wiretap link
  double beta_r = 0.5;  // large-scale fading of the IRS-to-Eve link

  // Throws DomainError. n_s = 0 (no IRS) and beta_r = 0 are accepted.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

// Transmit power for an SNR given in dB relative to sigma2.
double power_from_snr_db(double snr_db, double sigma2 = 1.0);

// Legitimate CSI known at the transmitter.
struct ChannelRealization {
  CMat h_b;  // N_r x N_t, Alice -> Bob
  CMat g_r;  // N_r x N_s, IRS -> Bob
  CMat h;  // N_s x N_t, Alice -> IRS

  std::size_t n_t() const { return h_b.cols(); }
  std::size_t n_r() const { return h_b.rows(); }
  std::size_t n_s() const { return h.rows(); }

  // Throws DomainError on inconsistent shapes.
  void validate() const;
  void validate(const SystemParams& params) const;

  bool operator==(const ChannelRealization&) const = default;
};

// The same realization with the IRS removed (N_s = 0).
ChannelRealization without_irs(const CMat& h_b);

// Per-element cascaded channels F_n = g_{r,n} h_n^H, each N_r x N_t.
struct CascadedChannels {
  std::vector<CMat> f;
};

// Standard-normal wiretap factors; the physical channels are
// H_e = beta_d * Z and G_e = beta_r * C.
struct WiretapDraw {
  CMat z;  // N_e x N_t
  CMat c;  // N_e x N_s
};

ChannelRealization sample_legit(const SystemParams& params, std::uint64_t seed);
WiretapDraw sample_wiretap(const SystemParams& params, std::uint64_t seed);
CascadedChannels cascade(const ChannelRealization& real);

// Uniform draws on (1e-6, 1) for (beta_d, beta_r).
inline constexpr double kMinLargeScaleFading = 1e-6;
std::pair<double, double> sample_large_scale(std::uint64_t seed);

// One entry of a training/evaluation dataset.
struct DatasetSample {
  ChannelRealization channels;
  SystemParams params;

  bool operator==(const DatasetSample&) const = default;
};

// IRSD v1 binary format (little-endian):
//   "IRSD" | u32 version=1 | u64 count | u32 N_t | u32 N_r | u32 N_s
//   per sample: H_b, G_r, H as complex128 row-major (re, im) followed by
//   f64 P_t, R_s, sigma2, sigma2_e, beta_d, beta_r.
// N_e is not stored; read_dataset fills params.n_e from `n_e`.
inline constexpr std::uint32_t kDatasetVersion = 1;

// When `samples` is empty the header dimensions come from `empty_dims`.
void write_dataset(const std::filesystem::path& path, std::span<const DatasetSample> samples,
                   const SystemParams& empty_dims = {});
std::vector<DatasetSample> read_dataset(const std::filesystem::path& path, int n_e = 1);

std::vector<std::uint8_t> encode_dataset(std::span<const DatasetSample> samples,
                                         const SystemParams& empty_dims = {});
std::vector<DatasetSample> decode_dataset(std::span<const std::uint8_t> bytes, int n_e = 1);

// FNV-1a over a file's bytes; identifies the dataset in training metadata.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace irsec
