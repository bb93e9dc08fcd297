#pragma once

#include <cmath>
#include <vector>

#include "icupred/nn.hpp"
#include "icupred/prng.hpp"

namespace testsupport {

// Central finite differences over every parameter against the analytic BPTT
// gradients, on one random window. Returns the maximum relative error, with
// the denominator floored so near-zero gradient pairs do not explode.
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline GradCheckResult gradient_check(int hidden, int steps, icupred::nn::Task task,
                                      std::uint64_t seed, double epsilon = 1e-5) {
  using namespace icupred;

  RngStream rng(seed);
  nn::LstmParams params = nn::LstmParams::init(hidden, data::kNumChannels, rng);
  nn::HeadParams head = nn::HeadParams::init(nn::output_classes(task), hidden, rng);

  preprocess::ChannelGrid grid;
  grid.stay_id = "gradcheck";
  grid.frame_hours = steps;
  grid.values = Matrix(steps, data::kNumChannels);
  grid.mask.assign(static_cast<std::size_t>(steps) * data::kNumChannels, 1);
  for (double& v : grid.values.data) v = rng.normal(0.0, 1.0);

  const int label = task == nn::Task::binary ? static_cast<int>(rng.uniform_int(2))
                                             : static_cast<int>(rng.uniform_int(4));

  auto forward_loss = [&]() {
    const auto r = nn::forward_sequence(grid, params, head, task);
    return nn::loss(r.probs, label, task);
  };

  const auto result = nn::forward_sequence(grid, params, head, task);
  const nn::Gradients analytic = nn::backward_bptt(result.cache, label, task, params, head);

  auto param_refs = nn::tensor_refs(params, head);
  auto grad_refs = nn::tensor_refs(const_cast<nn::LstmParams&>(analytic.lstm),
                                   const_cast<nn::HeadParams&>(analytic.head));

  GradCheckResult out;
  for (std::size_t r = 0; r < param_refs.size(); ++r) {
    for (std::size_t k = 0; k < param_refs[r].size; ++k) {
      double& theta = param_refs[r].data[k];
      const double saved = theta;
      theta = saved + epsilon;
      const double up = forward_loss();
      theta = saved - epsilon;
      const double down = forward_loss();
      theta = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic_v = grad_refs[r].data[k];
      const double denom = std::max(std::abs(numeric) + std::abs(analytic_v), 1e-5);
      out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic_v) / denom);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace testsupport
