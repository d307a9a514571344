#pragma once

#include "relgraph/model.hpp"

#include <Eigen/Core>

namespace relgraph {

struct SgdHyperparams {
  double learning_rate = 0.02;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

/// v ← momentum·v + grad + weight_decay·param; param ← param − lr·v.
void sgd_update(Eigen::Ref<Matrix> param, const Matrix& grad, Matrix& velocity,
                const SgdHyperparams& hp);

/// Which tensor groups an optimizer step may touch.
struct TrainableGroups {
  bool encoder = false;
  bool gcn = true;
  bool head = true;

  [[nodiscard]] bool contains(const std::string& tensor_name) const;
};

/// Momentum SGD with weight decay over a Params tree; owns one velocity per tensor.
class SgdMomentum {
 public:
  explicit SgdMomentum(const Params& like) : velocity_(like.zeros_like()) {}

  void step(Params& params, const Params& grads, const SgdHyperparams& hp,
            const TrainableGroups& groups);

  [[nodiscard]] const Params& velocity() const noexcept { return velocity_; }

 private:
  Params velocity_;
};

}  // namespace relgraph
