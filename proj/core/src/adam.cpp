#include "tilr/adam.hpp"

#include <cmath>

#include "tilr/error.hpp"

namespace tilr {

void AdamStep(std::span<grad::Tensor* const> params, std::span<const grad::Tensor> grads,
              AdamState& state) {
  if (params.size() != grads.size()) throw ValidationError("adam: one gradient per parameter required");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i])) throw ValidationError("adam: gradient shape mismatch");
  }
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->shape(), 0.0);
      state.v.emplace_back(p->shape(), 0.0);
    }
  } else if (state.m.size() != params.size()) {
    throw ValidationError("adam: parameter count changed between steps");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i]->data();
    const auto& g = grads[i].data();
    auto& m = state.m[i].data();
    auto& v = state.v[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      p[k] -= state.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + state.epsilon);
    }
  }
}

}  // namespace tilr
