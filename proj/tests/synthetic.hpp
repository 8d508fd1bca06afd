#pragma once

// Tiny MNIST stand-in: digit d lights up band d of the image, plus noise.

#include <cstdint>
#include <random>

#include "tilr/mnist.hpp"

namespace synthetic {

inline tilr::IdxImages Images(std::size_t per_digit, std::uint64_t seed, std::vector<std::uint8_t>& labels) {
  tilr::IdxImages img;
  img.count = per_digit * 10;
  img.rows = 28;
  img.cols = 28;
  img.pixels.assign(img.count * 784, 0);
  labels.clear();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < img.count; ++i) {
    const std::size_t digit = i % 10;
    labels.push_back(static_cast<std::uint8_t>(digit));
    for (std::size_t p = 0; p < 784; ++p) {
      const bool band = p / 78 == digit;
      img.pixels[i * 784 + p] = static_cast<std::uint8_t>(band ? 200 + rng() % 56 : rng() % 40);
    }
  }
  return img;
}

inline tilr::MnistStore Store(tilr::Split split, std::size_t per_digit = 4, std::uint64_t seed = 1) {
  std::vector<std::uint8_t> labels;
  const auto img = Images(per_digit, seed, labels);
  return tilr::MnistStore(split, img, labels);
}

}  // namespace synthetic
