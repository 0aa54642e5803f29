#include "neurotrack/signal_io.hpp"

#include "neurotrack/dsp.hpp"
#include "neurotrack/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace neurotrack::io {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void spit(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::int32_t sign_extend_24(const unsigned char* p) {
  std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16);
  if (v & 0x800000u) v |= 0xFF000000u;
  return static_cast<std::int32_t>(v);
}

}  // namespace

void write_ntf(const Matrix& data, double rate, const fs::path& path) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("NTF1: rate must be positive");
  if (!data.allFinite()) throw InvalidArgument("NTF1: refusing to store non-finite values");
  std::string out;
  out.reserve(kNtfHeaderBytes + static_cast<std::size_t>(data.size()) * 4);
  out.append(kNtfMagic, 4);
  put_le<std::uint32_t>(out, kNtfVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.cols()));
  put_le<double>(out, rate);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const auto v = static_cast<float>(data(r, c));
      if (!std::isfinite(v)) throw InvalidArgument("NTF1: value overflows 32-bit float");
      put_le<float>(out, v);
    }
  }
  spit(path, out);
}

RateMatrix read_ntf(const fs::path& path) {
  const std::string bytes = slurp(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(p, kNtfMagic, 4) != 0) {
    throw FormatError("'" + path.string() + "': bad magic, not an NTF1 file");
  }
  if (bytes.size() < kNtfHeaderBytes) throw FormatError("'" + path.string() + "': truncated header");
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kNtfVersion) {
    throw FormatError("'" + path.string() + "': unsupported NTF1 version " + std::to_string(version));
  }
  const auto rows = get_le<std::uint64_t>(p + 8);
  const auto cols = get_le<std::uint64_t>(p + 16);
  const auto rate = get_le<double>(p + 24);
  if (!(rate > 0.0) || !std::isfinite(rate)) throw FormatError("'" + path.string() + "': invalid rate");
  const std::uint64_t payload = bytes.size() - kNtfHeaderBytes;
  if (cols != 0 && rows > payload / 4 / cols) {
    throw FormatError("'" + path.string() + "': payload shorter than " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  if (rows * cols * 4 != payload) {
    throw FormatError("'" + path.string() + "': payload length does not match dimensions");
  }
  RateMatrix m{Matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)), rate};
  const unsigned char* q = p + kNtfHeaderBytes;
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c, q += 4) {
      const float v = get_le<float>(q);
      if (!std::isfinite(v)) {
        throw FormatError("'" + path.string() + "': non-finite value at row " + std::to_string(r) +
                          ", column " + std::to_string(c));
      }
      m.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

AudioSignal read_wav(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("WAV file not found: '" + path.string() + "'");
  const std::string bytes = slurp(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  const std::string where = "'" + path.string() + "': ";
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw FormatError(where + "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char* chunk = p + pos;
    const auto size = get_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > n) throw FormatError(where + "malformed fmt chunk");
      format = get_le<std::uint16_t>(p + body);
      channels = get_le<std::uint16_t>(p + body + 2);
      rate = get_le<std::uint32_t>(p + body + 4);
      block_align = get_le<std::uint16_t>(p + body + 12);
      bits = get_le<std::uint16_t>(p + body + 14);
      if (format == 0xFFFE) {
        if (size < 26) throw FormatError(where + "malformed extensible fmt chunk");
        format = get_le<std::uint16_t>(p + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > n) {
        throw FormatError(where + "truncated data chunk (" + std::to_string(n - body) + " of " +
                          std::to_string(size) + " bytes present)");
      }
      data = p + body;
      data_len = size;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw FormatError(where + "missing fmt chunk");
  if (data == nullptr) throw FormatError(where + "missing data chunk");
  if (channels == 0 || rate == 0) throw FormatError(where + "zero channels or sample rate");

  const bool pcm = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool ieee = format == 3 && (bits == 32 || bits == 64);
  if (!pcm && !ieee) {
    throw FormatError(where + "unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)");
  }
  const std::size_t width = bits / 8;
  if (block_align != width * channels) throw FormatError(where + "inconsistent block alignment");
  if (data_len % block_align != 0) throw FormatError(where + "truncated data chunk (partial frame)");
  const std::size_t frames = data_len / block_align;

  AudioSignal audio;
  audio.sample_rate = rate;
  audio.channels.assign(channels, Vector(static_cast<Eigen::Index>(frames)));
  const unsigned char* q = data;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c, q += width) {
      double v = 0.0;
      if (pcm) {
        switch (bits) {
          case 8: v = (static_cast<double>(*q) - 128.0) / 128.0; break;
          case 16: v = get_le<std::int16_t>(q) / 32768.0; break;
          case 24: v = sign_extend_24(q) / 8388608.0; break;
          default: v = get_le<std::int32_t>(q) / 2147483648.0; break;
        }
      } else {
        v = bits == 32 ? static_cast<double>(get_le<float>(q)) : get_le<double>(q);
        if (!std::isfinite(v)) throw FormatError(where + "non-finite float sample");
      }
      audio.channels[c][static_cast<Eigen::Index>(f)] = v;
    }
  }
  return audio;
}

void write_wav(const AudioSignal& audio, const fs::path& path) {
  audio.validate();
  const double rate = std::round(audio.sample_rate);
  if (rate != audio.sample_rate || rate > 4.0e9) {
    throw InvalidArgument("write_wav: sample rate must be an integer");
  }
  const auto channels = static_cast<std::uint16_t>(audio.channel_count());
  const auto frames = static_cast<std::uint64_t>(audio.length());
  const std::uint64_t data_len = frames * channels * 2;
  if (data_len + 36 > 0xFFFFFFFFull) throw InvalidArgument("write_wav: data exceeds 4 GiB");

  std::string out;
  out.reserve(static_cast<std::size_t>(44 + data_len));
  out.append("RIFF", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(36 + data_len));
  out.append("WAVEfmt ", 8);
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint16_t>(out, channels);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate) * channels * 2);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(channels * 2));
  put_le<std::uint16_t>(out, 16);
  out.append("data", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data_len));
  for (std::uint64_t f = 0; f < frames; ++f) {
    for (const auto& ch : audio.channels) {
      const double v = std::clamp(ch[static_cast<Eigen::Index>(f)], -1.0, 1.0);
      const double scaled = std::round(v * 32768.0);
      put_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    }
  }
  spit(path, out);
}

AudioSignal to_mono_resampled(const AudioSignal& audio, double target_rate) {
  if (!(target_rate > 0.0)) throw InvalidArgument("to_mono_resampled: target rate must be positive");
  audio.validate();
  Vector mono = audio.channels.front();
  if (audio.channel_count() > 1) {
    for (std::size_t c = 1; c < audio.channel_count(); ++c) mono += audio.channels[c];
    mono /= static_cast<double>(audio.channel_count());
  }
  AudioSignal out;
  out.sample_rate = target_rate;
  out.channels.push_back(dsp::resample(mono, audio.sample_rate, target_rate));
  return out;
}

void write_feature_matrix(const FeatureMatrix& m, const fs::path& path) {
  m.validate();
  write_ntf(m.data, m.frame_rate, path);
}

FeatureMatrix read_feature_matrix(const fs::path& path) {
  auto raw = read_ntf(path);
  FeatureMatrix m;
  m.data = std::move(raw.data);
  m.frame_rate = raw.rate;
  m.names.reserve(static_cast<std::size_t>(m.data.cols()));
  for (Eigen::Index c = 0; c < m.data.cols(); ++c) m.names.push_back("f" + std::to_string(c));
  if (m.data.rows() < 1 || m.data.cols() < 1) {
    throw FormatError("'" + path.string() + "': feature matrix has no rows or columns");
  }
  return m;
}

fs::path sidecar_path(const fs::path& path) {
  fs::path side = path;
  side += ".yaml";
  return side;
}

void write_eeg(const EegRecording& rec, const fs::path& path) {
  rec.validate();
  write_ntf(rec.data, rec.sample_rate, path);
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << "eeg";
  out << YAML::Key << "sample_rate" << YAML::Value << rec.sample_rate;
  out << YAML::Key << "channels" << YAML::Value << YAML::Flow << rec.channel_names;
  out << YAML::EndMap;
  spit(sidecar_path(path), std::string(out.c_str()) + "\n");
}

EegRecording read_eeg(const fs::path& path) {
  auto raw = read_ntf(path);
  const fs::path side = sidecar_path(path);
  if (!fs::exists(side)) throw IoError("EEG sidecar not found: '" + side.string() + "'");
  YAML::Node meta;
  try {
    meta = YAML::LoadFile(side.string());
  } catch (const YAML::Exception& e) {
    throw FormatError("'" + side.string() + "': " + e.what());
  }
  EegRecording rec;
  try {
    rec.sample_rate = meta["sample_rate"].as<double>();
    rec.channel_names = meta["channels"].as<std::vector<std::string>>();
  } catch (const YAML::Exception& e) {
    throw FormatError("'" + side.string() + "': missing or malformed field: " + e.what());
  }
  if (static_cast<Eigen::Index>(rec.channel_names.size()) != raw.data.cols()) {
    throw FormatError("'" + side.string() + "': channel-count mismatch, sidecar lists " +
                      std::to_string(rec.channel_names.size()) + " names for " +
                      std::to_string(raw.data.cols()) + " columns");
  }
  if (rec.sample_rate != raw.rate) {
    throw FormatError("'" + side.string() + "': sample rate disagrees with matrix header");
  }
  rec.data = std::move(raw.data);
  return rec;
}

}  // namespace neurotrack::io
