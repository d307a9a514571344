#include "relgraph/sgd.hpp"

#include "relgraph/error.hpp"

#include <vector>

namespace relgraph {

void sgd_update(Eigen::Ref<Matrix> param, const Matrix& grad, Matrix& velocity,
                const SgdHyperparams& hp) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() ||
      velocity.rows() != grad.rows() || velocity.cols() != grad.cols()) {
    throw DimensionError("sgd: parameter, gradient and velocity shapes differ");
  }
  velocity = hp.momentum * velocity + grad + hp.weight_decay * param;
  param -= hp.learning_rate * velocity;
}

bool TrainableGroups::contains(const std::string& tensor_name) const {
  if (tensor_name.starts_with("encoder.")) return encoder;
  if (tensor_name.starts_with("gcn.")) return gcn;
  if (tensor_name.starts_with("head.")) return head;
  return false;
}

void SgdMomentum::step(Params& params, const Params& grads, const SgdHyperparams& hp,
                       const TrainableGroups& groups) {
  std::vector<Matrix*> p_list;
  std::vector<const Matrix*> g_list;
  std::vector<Matrix*> v_list;
  std::vector<bool> active;
  params.for_each([&](const std::string& name, Matrix& t) {
    p_list.push_back(&t);
    active.push_back(groups.contains(name));
  });
  grads.for_each([&](const std::string&, const Matrix& t) { g_list.push_back(&t); });
  velocity_.for_each([&](const std::string&, Matrix& t) { v_list.push_back(&t); });
  if (p_list.size() != g_list.size() || p_list.size() != v_list.size()) {
    throw DimensionError("sgd: parameter trees differ in structure");
  }
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (active[k]) {
      sgd_update(*p_list[k], *g_list[k], *v_list[k], hp);
    }
  }
}

}  // namespace relgraph
