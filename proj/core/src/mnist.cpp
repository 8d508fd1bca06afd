#include "tilr/mnist.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "tilr/error.hpp"

namespace tilr {

namespace {

std::vector<std::uint8_t> Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t BigEndian32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                          const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw FormatError(path.string() + ": truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void PutBigEndian32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

void CheckMagic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ": magic 0x%08x, expected 0x%08x", got, want);
    throw FormatError(path.string() + buf);
  }
}

}  // namespace

IdxImages ReadIdxImages(const std::filesystem::path& path) {
  const auto bytes = Slurp(path);
  CheckMagic(BigEndian32(bytes, 0, path), kIdxImageMagic, path);
  IdxImages out;
  out.count = BigEndian32(bytes, 4, path);
  out.rows = BigEndian32(bytes, 8, path);
  out.cols = BigEndian32(bytes, 12, path);
  const std::size_t payload = out.count * out.rows * out.cols;
  if (bytes.size() - 16 < payload) {
    throw FormatError(path.string() + ": truncated, " + std::to_string(bytes.size() - 16) +
                      " pixel bytes for " + std::to_string(payload));
  }
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  return out;
}

std::vector<std::uint8_t> ReadIdxLabels(const std::filesystem::path& path) {
  const auto bytes = Slurp(path);
  CheckMagic(BigEndian32(bytes, 0, path), kIdxLabelMagic, path);
  const std::size_t count = BigEndian32(bytes, 4, path);
  if (bytes.size() - 8 < count) throw FormatError(path.string() + ": truncated label payload");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

void WriteIdxImages(const std::filesystem::path& path, const IdxImages& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  PutBigEndian32(out, kIdxImageMagic);
  PutBigEndian32(out, static_cast<std::uint32_t>(images.count));
  PutBigEndian32(out, static_cast<std::uint32_t>(images.rows));
  PutBigEndian32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()),
            static_cast<std::streamsize>(images.pixels.size()));
}

void WriteIdxLabels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  PutBigEndian32(out, kIdxLabelMagic);
  PutBigEndian32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

std::string_view ToString(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split ParseSplit(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

MnistStore::MnistStore(Split split, const IdxImages& images, std::vector<std::uint8_t> labels)
    : split_(split), rows_(images.rows), cols_(images.cols), labels_(std::move(labels)), by_digit_(10) {
  if (images.count != labels_.size()) {
    throw FormatError("image file holds " + std::to_string(images.count) + " images but label file " +
                      std::to_string(labels_.size()) + " labels");
  }
  pixels_.resize(images.pixels.size());
  for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] = static_cast<float>(images.pixels[i]) / 255.0f;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > 9) throw FormatError("label " + std::to_string(labels_[i]) + " is not a digit");
    by_digit_[labels_[i]].push_back(static_cast<std::uint32_t>(i));
  }
}

std::span<const float> MnistStore::image(std::size_t index) const {
  if (index >= size()) throw ValidationError("image index " + std::to_string(index) + " out of range");
  return {pixels_.data() + index * pixels(), pixels()};
}

MnistStore LoadMnist(const std::filesystem::path& dir, Split split) {
  const std::string prefix = split == Split::kTrain ? "train" : "t10k";
  auto images = ReadIdxImages(dir / (prefix + "-images-idx3-ubyte"));
  auto labels = ReadIdxLabels(dir / (prefix + "-labels-idx1-ubyte"));
  return MnistStore(split, images, std::move(labels));
}

}  // namespace tilr
