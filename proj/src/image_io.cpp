#include "invkit/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace invkit {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Netpbm-style header tokenizer: whitespace separated, '#' comments.
class HeaderReader {
public:
  HeaderReader(const std::string& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  std::string token(const char* field) {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) fail(field, "missing");
    return bytes_.substr(start, pos_ - start);
  }

  long integer(const char* field) {
    const std::string s = token(field);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) fail(field, "invalid value '" + s + "'");
    return v;
  }

  double real(const char* field) {
    const std::string s = token(field);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v) || v == 0.0) fail(field, "invalid value '" + s + "'");
    return v;
  }

  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      fail("header", "no separator before payload");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const char* field, const std::string& why) const {
    throw FormatError(path_.string() + ": header field '" + field + "' " + why);
  }

private:
  void skip_space() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
  }

  const std::string& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

Tensor read_pgm(const fs::path& path) {
  const std::string bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token("magic");
  if (magic != "P5") header.fail("magic", "unsupported magic number '" + magic + "'");
  const long w = header.integer("width");
  const long h = header.integer("height");
  const long maxval = header.integer("maxval");
  if (maxval > 255) header.fail("maxval", "16-bit PGM (maxval " + std::to_string(maxval) + ") unsupported");
  const std::size_t off = header.payload_offset();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < off + n)
    throw FormatError(path.string() + ": payload truncated (expected " + std::to_string(n) + " bytes)");
  Tensor t({h, w});
  for (std::size_t i = 0; i < n; ++i)
    t[static_cast<Index>(i)] = static_cast<unsigned char>(bytes[off + i]) / static_cast<double>(maxval);
  return t;
}

Tensor read_pfm(const fs::path& path) {
  const std::string bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token("magic");
  Index channels;
  if (magic == "Pf")
    channels = 1;
  else if (magic == "PF")
    channels = 3;
  else
    header.fail("magic", "unsupported magic number '" + magic + "'");
  const long w = header.integer("width");
  const long h = header.integer("height");
  const double scale = header.real("scale");
  const bool little = scale < 0.0;
  const std::size_t off = header.payload_offset();
  const std::size_t count = static_cast<std::size_t>(channels * w * h);
  if (bytes.size() < off + 4 * count)
    throw FormatError(path.string() + ": payload truncated (expected " + std::to_string(4 * count) + " bytes)");

  const bool swap = little != (std::endian::native == std::endian::little);
  Tensor t = channels == 1 ? Tensor({h, w}) : Tensor({channels, h, w});
  // PFM rows run bottom to top; color samples are interleaved.
  for (long r = 0; r < h; ++r) {
    const long row = h - 1 - r;
    for (long c = 0; c < w; ++c) {
      for (Index ch = 0; ch < channels; ++ch) {
        std::uint32_t bits;
        std::memcpy(&bits, bytes.data() + off + 4 * ((r * w + c) * channels + ch), 4);
        if (swap) bits = __builtin_bswap32(bits);
        const float v = std::bit_cast<float>(bits);
        t[(ch * h + row) * w + c] = static_cast<double>(v);
      }
    }
  }
  return t;
}

void write_pfm(const Tensor& t, const fs::path& path) {
  const Index h = t.height(), w = t.width();
  const Index channels = t.shape().size() == 2 ? 1 : t.shape()[0];
  if (t.shape().size() > 3 || (channels != 1 && channels != 3))
    throw ShapeError("PFM holds 1 or 3 channels, got shape " + to_string(t.shape()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << (channels == 1 ? "Pf" : "PF") << '\n' << w << ' ' << h << '\n' << "-1.0" << '\n';
  std::string payload(static_cast<std::size_t>(4 * channels * h * w), '\0');
  for (Index r = 0; r < h; ++r) {
    const Index row = h - 1 - r;
    for (Index c = 0; c < w; ++c)
      for (Index ch = 0; ch < channels; ++ch) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(t[(ch * h + row) * w + c].real()));
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        std::memcpy(payload.data() + 4 * ((r * w + c) * channels + ch), &bits, 4);
      }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

void write_pgm(const Tensor& t, const fs::path& path) {
  const Index h = t.height(), w = t.width();
  if (t.planes() != 1) throw ShapeError("PGM holds one channel, got shape " + to_string(t.shape()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  std::string payload(static_cast<std::size_t>(h * w), '\0');
  for (Index i = 0; i < h * w; ++i) payload[static_cast<std::size_t>(i)] = static_cast<char>(quantize_u8(t[i].real()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

} // namespace

int quantize_u8(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<int>(std::floor(255.0 * std::min(v, 1.0) + 0.5));
}

Tensor read_image(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext != ".pfm") throw FormatError(path.string() + ": unsupported image suffix '" + ext + "'");
  if (!fs::exists(path)) {
    const fs::path re = with_suffix(path, "_re"), im = with_suffix(path, "_im");
    if (fs::exists(re) && fs::exists(im)) {
      Tensor a = read_pfm(re), b = read_pfm(im);
      require_same_shape(a, b, "complex PFM pair");
      Vector data = a.data().real().cast<cplx>() + cplx(0.0, 1.0) * b.data().real().cast<cplx>();
      return Tensor(a.shape(), std::move(data), DType::Complex);
    }
  }
  return read_pfm(path);
}

void write_image(const Tensor& t, const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm") {
    write_pgm(t, path);
  } else if (ext == ".pfm") {
    if (t.is_complex()) {
      write_pfm(t.real_part(), with_suffix(path, "_re"));
      write_pfm(Tensor(t.shape(), t.data().imag().cast<cplx>(), DType::Real), with_suffix(path, "_im"));
    } else {
      write_pfm(t, path);
    }
  } else {
    throw FormatError(path.string() + ": unsupported image suffix '" + ext + "'");
  }
}

} // namespace invkit
