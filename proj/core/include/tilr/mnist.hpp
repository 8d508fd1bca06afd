#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace tilr {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

/// Big-endian IDX readers. Throw IoError if the file cannot be opened and
/// FormatError on a wrong magic number or truncated payload.
IdxImages ReadIdxImages(const std::filesystem::path& path);
std::vector<std::uint8_t> ReadIdxLabels(const std::filesystem::path& path);

void WriteIdxImages(const std::filesystem::path& path, const IdxImages& images);
void WriteIdxLabels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

enum class Split { kTrain, kTest };
std::string_view ToString(Split split);
Split ParseSplit(std::string_view text);

/// One MNIST split with pixels scaled to [0,1].
class MnistStore {
 public:
  MnistStore(Split split, const IdxImages& images, std::vector<std::uint8_t> labels);

  Split split() const noexcept { return split_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t pixels() const noexcept { return rows_ * cols_; }
  std::span<const float> image(std::size_t index) const;
  std::uint8_t label(std::size_t index) const { return labels_.at(index); }
  /// Indices of all images of one digit, ascending.
  const std::vector<std::uint32_t>& by_digit(std::size_t digit) const { return by_digit_.at(digit); }

 private:
  Split split_;
  std::size_t rows_, cols_;
  std::vector<float> pixels_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::vector<std::uint32_t>> by_digit_;
};

/// Loads train-images-idx3-ubyte / train-labels-idx1-ubyte (train) or the
/// t10k- pair (test) from `dir`. Throws FormatError if counts disagree.
MnistStore LoadMnist(const std::filesystem::path& dir, Split split);

}  // namespace tilr
