#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tilr/autograd.hpp"

namespace tilr {

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::vector<grad::Tensor> m;
  std::vector<grad::Tensor> v;
};

/// One bias-corrected Adam update. Moment buffers are created on the first
/// call. Throws ValidationError if shapes disagree.
void AdamStep(std::span<grad::Tensor* const> params, std::span<const grad::Tensor> grads,
              AdamState& state);

}  // namespace tilr
