#include "hsgp/optim.hpp"

#include <cmath>
#include <string>

#include "hsgp/errors.hpp"

namespace hsgp {

AdamState AdamState::fresh(std::size_t parameter_count) {
  const auto n = static_cast<Eigen::Index>(parameter_count);
  return AdamState{Vector::Zero(n), Vector::Zero(n), 0};
}

void adam_step(AdamState& state, Vector& params, const Vector& grads, double lr, double weight_decay,
               const AdamHyper& hyper) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "Adam state, parameters and gradients differ in length");
  }
  ++state.step;
  const Vector g = grads + weight_decay * params;
  state.first_moment = hyper.beta1 * state.first_moment + (1.0 - hyper.beta1) * g;
  state.second_moment = hyper.beta2 * state.second_moment + (1.0 - hyper.beta2) * g.cwiseProduct(g);
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.first_moment[i] / correction1;
    const double v_hat = state.second_moment[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

double lr_at_epoch(double base_lr, std::size_t epoch, std::size_t max_epochs) {
  if (max_epochs == 0 || epoch > max_epochs) {
    throw Error(ErrorCode::EpochOutOfRange,
                "epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(max_epochs) + "]");
  }
  const double remaining = 1.0 - static_cast<double>(epoch) / static_cast<double>(max_epochs);
  return base_lr * std::pow(remaining, 0.9);
}

}  // namespace hsgp
