#include "wmfcc/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "wmfcc/random.hpp"

namespace wmfcc {

namespace {

constexpr double kPcmScale = 32768.0;
constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioClip::AudioClip(VectorXd samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (samples_.size() == 0) fail(ErrorCode::EmptySignal, "audio clip has no samples");
  if (sample_rate_hz_ <= 0) fail(ErrorCode::BadParams, "sample rate must be positive");
  for (Index i = 0; i < samples_.size(); ++i) {
    const double v = samples_[i];
    if (!(v >= -1.0 && v <= 1.0))
      fail(ErrorCode::BadParams, "sample " + std::to_string(i) + " outside [-1, 1]");
  }
}

AudioClip parse_wav(const std::uint8_t* data, std::size_t size) {
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    fail(ErrorCode::MalformedFile, "missing RIFF/WAVE header");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint8_t* chunk = data + pos;
    const std::uint32_t chunk_size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > size - body) fail(ErrorCode::MalformedFile, "truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) fail(ErrorCode::MalformedFile, "fmt chunk too short");
      format = read_u16(data + body);
      channels = read_u16(data + body + 2);
      rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data + body;
      pcm_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) fail(ErrorCode::MalformedFile, "no fmt chunk");
  if (pcm == nullptr) fail(ErrorCode::MalformedFile, "no data chunk");
  if (format != kFormatPcm)
    fail(ErrorCode::UnsupportedFormat, "format tag " + std::to_string(format) + " is not PCM");
  if (bits != 16)
    fail(ErrorCode::UnsupportedFormat, std::to_string(bits) + "-bit samples; need 16");
  if (channels != 1)
    fail(ErrorCode::UnsupportedFormat, std::to_string(channels) + " channels; need mono");
  if (rate == 0) fail(ErrorCode::MalformedFile, "zero sample rate");
  if (pcm_bytes % 2 != 0) fail(ErrorCode::MalformedFile, "odd-sized 16-bit data chunk");
  if (pcm_bytes == 0) fail(ErrorCode::MalformedFile, "empty data chunk");

  const Index n = static_cast<Index>(pcm_bytes / 2);
  VectorXd samples(n);
  for (Index i = 0; i < n; ++i) {
    const auto v = static_cast<std::int16_t>(read_u16(pcm + 2 * i));
    samples[i] = v / kPcmScale;
  }
  return AudioClip(std::move(samples), static_cast<int>(rate));
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_wav(bytes.data(), bytes.size());
}

void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate_hz());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (Index i = 0; i < clip.size(); ++i) {
    const double q = std::clamp(std::round(clip.samples()[i] * kPcmScale), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::Io, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::Io, "short write to " + path.string());
}

AudioClip add_awgn(const AudioClip& clip, double snr_db, std::uint64_t seed, AwgnStats* stats) {
  const double power = clip.mean_square_power();
  if (power <= 0.0) fail(ErrorCode::ZeroSignalPower, "cannot set an SNR against a silent clip");
  const double variance = awgn_variance(power, snr_db);
  const double sigma = std::sqrt(variance);

  Rng rng(seed);
  VectorXd noisy(clip.size());
  std::size_t clipped = 0;
  for (Index i = 0; i < clip.size(); ++i) {
    const double v = clip.samples()[i] + sigma * rng.gaussian();
    if (v > 1.0 || v < -1.0) ++clipped;
    noisy[i] = std::clamp(v, -1.0, 1.0);
  }
  if (stats) *stats = {power, variance, clipped};
  return AudioClip(std::move(noisy), clip.sample_rate_hz());
}

}  // namespace wmfcc
