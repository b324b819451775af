#include "irsec/channel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "irsec/errors.hpp"
#include "irsec/random.hpp"

namespace irsec {

static_assert(std::endian::native == std::endian::little,
              "dataset encoding assumes a little-endian host");

void SystemParams::validate() const {
  if (n_t < 1 || n_r < 1 || n_e < 1) throw DomainError("SystemParams: antenna counts must be >= 1");
  if (n_s < 0) throw DomainError("SystemParams: n_s must be >= 0");
  if (!(p_t >= 0.0) || !std::isfinite(p_t)) throw DomainError("SystemParams: p_t must be >= 0");
  if (!(r_s >= 0.0) || !std::isfinite(r_s)) throw DomainError("SystemParams: r_s must be >= 0");
  if (!(sigma2 > 0.0) || !(sigma2_e > 0.0)) {
    throw DomainError("SystemParams: noise powers must be > 0");
  }
  if (!(beta_d > 0.0) || beta_d > 1.0) throw DomainError("SystemParams: beta_d must be in (0, 1]");
  if (!(beta_r >= 0.0) || beta_r > 1.0) throw DomainError("SystemParams: beta_r must be in [0, 1]");
}

double power_from_snr_db(double snr_db, double sigma2) { return sigma2 * std::pow(10.0, snr_db / 10.0); }

void ChannelRealization::validate() const {
  if (h_b.empty()) throw DomainError("ChannelRealization: H_b is empty");
  if (g_r.rows() != h_b.rows()) throw DomainError("ChannelRealization: G_r rows != N_r");
  if (h.cols() != h_b.cols()) throw DomainError("ChannelRealization: H cols != N_t");
  if (g_r.cols() != h.rows()) throw DomainError("ChannelRealization: G_r cols != H rows");
}

void ChannelRealization::validate(const SystemParams& params) const {
  validate();
  if (n_t() != static_cast<std::size_t>(params.n_t) || n_r() != static_cast<std::size_t>(params.n_r) ||
      n_s() != static_cast<std::size_t>(params.n_s)) {
    throw DomainError("ChannelRealization: dimensions do not match SystemParams");
  }
}

ChannelRealization without_irs(const CMat& h_b) {
  return {h_b, CMat(h_b.rows(), 0), CMat(0, h_b.cols())};
}

ChannelRealization sample_legit(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  ChannelRealization out;
  out.h_b = complex_normal_matrix(rng, params.n_r, params.n_t);
  out.g_r = complex_normal_matrix(rng, params.n_r, params.n_s);
  out.h = complex_normal_matrix(rng, params.n_s, params.n_t);
  return out;
}

WiretapDraw sample_wiretap(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  WiretapDraw out;
  out.z = complex_normal_matrix(rng, params.n_e, params.n_t);
  out.c = complex_normal_matrix(rng, params.n_e, params.n_s);
  return out;
}

CascadedChannels cascade(const ChannelRealization& real) {
  real.validate();
  CascadedChannels out;
  out.f.reserve(real.n_s());
  for (std::size_t n = 0; n < real.n_s(); ++n) {
    CMat f(real.n_r(), real.n_t());
    for (std::size_t r = 0; r < real.n_r(); ++r)
      for (std::size_t t = 0; t < real.n_t(); ++t) f(r, t) = real.g_r(r, n) * real.h(n, t);
    out.f.push_back(std::move(f));
  }
  return out;
}

std::pair<double, double> sample_large_scale(std::uint64_t seed) {
  Rng rng(seed);
  auto draw = [&rng] {
    for (;;) {
      const double u = rng.uniform(kMinLargeScaleFading, 1.0);
      if (u > kMinLargeScaleFading && u < 1.0) return u;
    }
  };
  const double beta_d = draw();
  const double beta_r = draw();
  return {beta_d, beta_r};
}

// ---------------------------------------------------------------- IRSD v1

namespace {

constexpr char kMagic[4] = {'I', 'R', 'S', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 3 * 4;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

void put_matrix(std::vector<std::uint8_t>& out, const CMat& m) {
  for (const cplx& z : m.entries()) {
    put(out, z.real());
    put(out, z.imag());
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw FormatError(std::string("truncated dataset while reading ") + what, pos_);
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  CMat matrix(std::size_t rows, std::size_t cols, const char* what) {
    const std::size_t start = pos_;
    std::vector<cplx> entries(rows * cols);
    for (cplx& z : entries) {
      const double re = get<double>(what);
      const double im = get<double>(what);
      z = {re, im};
    }
    try {
      return CMat(rows, cols, std::move(entries));
    } catch (const DomainError& e) {
      throw FormatError(std::string(what) + ": " + e.what(), start);
    }
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_dataset(std::span<const DatasetSample> samples,
                                         const SystemParams& empty_dims) {
  std::uint32_t n_t = static_cast<std::uint32_t>(empty_dims.n_t);
  std::uint32_t n_r = static_cast<std::uint32_t>(empty_dims.n_r);
  std::uint32_t n_s = static_cast<std::uint32_t>(empty_dims.n_s);
  if (!samples.empty()) {
    const auto& first = samples.front().channels;
    n_t = static_cast<std::uint32_t>(first.n_t());
    n_r = static_cast<std::uint32_t>(first.n_r());
    n_s = static_cast<std::uint32_t>(first.n_s());
  }

  const std::size_t per_sample = 16 * (n_r * n_t + n_r * n_s + n_s * n_t) + 6 * 8;
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + per_sample * samples.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kDatasetVersion);
  put<std::uint64_t>(out, samples.size());
  put<std::uint32_t>(out, n_t);
  put<std::uint32_t>(out, n_r);
  put<std::uint32_t>(out, n_s);

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    s.channels.validate();
    if (s.channels.n_t() != n_t || s.channels.n_r() != n_r || s.channels.n_s() != n_s) {
      throw FormatError("sample " + std::to_string(i) + " has dimensions different from sample 0",
                        out.size());
    }
    put_matrix(out, s.channels.h_b);
    put_matrix(out, s.channels.g_r);
    put_matrix(out, s.channels.h);
    put(out, s.params.p_t);
    put(out, s.params.r_s);
    put(out, s.params.sigma2);
    put(out, s.params.sigma2_e);
    put(out, s.params.beta_d);
    put(out, s.params.beta_r);
  }
  return out;
}

std::vector<DatasetSample> decode_dataset(std::span<const std::uint8_t> bytes, int n_e) {
  Reader in(bytes);
  for (std::size_t i = 0; i < 4; ++i) {
    if (in.remaining() == 0 || static_cast<char>(in.get<std::uint8_t>("magic")) != kMagic[i]) {
      throw FormatError("bad magic, expected \"IRSD\"", 0);
    }
  }
  const std::size_t version_at = in.pos();
  const auto version = in.get<std::uint32_t>("version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  }
  const auto count = in.get<std::uint64_t>("sample count");
  const std::size_t dims_at = in.pos();
  const auto n_t = in.get<std::uint32_t>("N_t");
  const auto n_r = in.get<std::uint32_t>("N_r");
  const auto n_s = in.get<std::uint32_t>("N_s");
  if (n_t == 0 || n_r == 0) throw FormatError("N_t and N_r must be nonzero", dims_at);

  const std::uint64_t per_sample = 16ull * (n_r * n_t + n_r * n_s + n_s * n_t) + 6 * 8;
  if (count > 0 && in.remaining() / per_sample < count) {
    throw FormatError("truncated dataset: header declares " + std::to_string(count) +
                          " samples but only " + std::to_string(in.remaining()) +
                          " payload bytes remain",
                      bytes.size());
  }

  std::vector<DatasetSample> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    DatasetSample s;
    s.channels.h_b = in.matrix(n_r, n_t, "H_b");
    s.channels.g_r = in.matrix(n_r, n_s, "G_r");
    s.channels.h = in.matrix(n_s, n_t, "H");
    s.params.n_t = static_cast<int>(n_t);
    s.params.n_r = static_cast<int>(n_r);
    s.params.n_s = static_cast<int>(n_s);
    s.params.n_e = n_e;
    s.params.p_t = in.get<double>("P_t");
    s.params.r_s = in.get<double>("R_s");
    s.params.sigma2 = in.get<double>("sigma2");
    s.params.sigma2_e = in.get<double>("sigma2_e");
    s.params.beta_d = in.get<double>("beta_d");
    s.params.beta_r = in.get<double>("beta_r");
    out.push_back(std::move(s));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after last sample", in.pos());
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetSample> samples,
                   const SystemParams& empty_dims) {
  const auto bytes = encode_dataset(samples, empty_dims);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

namespace {
std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}
}  // namespace

std::vector<DatasetSample> read_dataset(const std::filesystem::path& path, int n_e) {
  const auto bytes = slurp(path);
  return decode_dataset(bytes, n_e);
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : slurp(path)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace irsec
