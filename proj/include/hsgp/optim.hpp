#pragma once

#include <cstddef>

#include "hsgp/types.hpp"

namespace hsgp {

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::size_t step = 0;

  static AdamState fresh(std::size_t parameter_count);
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update in place. The L2 penalty enters as weight_decay * params
/// added to the gradient before the moment updates.
void adam_step(AdamState& state, Vector& params, const Vector& grads, double lr, double weight_decay,
               const AdamHyper& hyper = {});

/// base_lr * (1 - epoch / max_epochs)^0.9
double lr_at_epoch(double base_lr, std::size_t epoch, std::size_t max_epochs);

}  // namespace hsgp
