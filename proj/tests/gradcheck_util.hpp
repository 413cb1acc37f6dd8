#ifndef ACTIONRET_TESTS_GRADCHECK_UTIL_HPP
#define ACTIONRET_TESTS_GRADCHECK_UTIL_HPP

// Central finite-difference gradient checking for the full model chain,
// shared by the unit tests and the acceptance suite. Runs in double
// precision with dropout disabled.

#include <cmath>
#include <string>
#include <vector>

#include "actionret/model.hpp"
#include "actionret/rng.hpp"
#include "actionret/training.hpp"

namespace gradcheck {

struct Result {
  double max_rel_error = 0.0;
  std::string worst_param;
  int checked = 0;
};

inline double rel_error(double analytic, double fd) {
  // Central differences carry ~1e-10 intrinsic noise in double precision;
  // differences below 1e-7 are indistinguishable from zero gradients (e.g.
  // the attention key bias, which softmax cancels exactly).
  if (std::abs(analytic - fd) < 1e-7) return 0.0;
  double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
  return std::abs(analytic - fd) / denom;
}

// Builds a random batch for a model whose backbone consumes images.
inline actionret::ActionModel<double>::BatchInput random_batch(int batch, int input_size,
                                                               actionret::Rng& rng) {
  using namespace actionret;
  typename ActionModel<double>::BatchInput in;
  in.images = Tensor<double>({batch, 3, input_size, input_size});
  for (auto& v : in.images.data) v = rng.uniform(-1.0, 1.0);
  for (int b = 0; b < batch; ++b) {
    double x0 = rng.uniform(1.0, input_size / 2.0);
    double y0 = rng.uniform(1.0, input_size / 2.0);
    BoundingBox person(x0, y0, x0 + rng.uniform(4.0, input_size / 2.0),
                       y0 + rng.uniform(4.0, input_size / 2.0));
    in.person_boxes.push_back(person);
    ProposalSet props;
    props.image_id = "b" + std::to_string(b);
    for (int p = 0; p < 4; ++p) {
      double px = rng.uniform(0.0, input_size - 8.0);
      double py = rng.uniform(0.0, input_size - 8.0);
      props.proposals.push_back(ScoredProposal{
          BoundingBox(px, py, px + rng.uniform(3.0, 8.0), py + rng.uniform(3.0, 8.0)),
          rng.uniform(0.55, 1.0)});
    }
    in.proposals.push_back(props);
    in.image_ids.push_back(props.image_id);
  }
  return in;
}

inline actionret::Tensor<double> one_hot_targets(int batch, int n_classes, actionret::Rng& rng) {
  actionret::Tensor<double> t({batch, n_classes});
  for (int b = 0; b < batch; ++b) t.at2(b, rng.uniform_int(0, n_classes - 1)) = 1.0;
  return t;
}

// Loss of the full chain (train-mode BN, no dropout assumed in the config).
inline double chain_loss(actionret::ActionModel<double>& model,
                         const actionret::ActionModel<double>::BatchInput& in,
                         const actionret::Tensor<double>& targets) {
  actionret::Rng rng(0);
  auto out = model.forward(in, true, rng);
  return actionret::softmax_cross_entropy(out.logits, targets).loss;
}

// Checks every parameter element and `n_pixel_samples` image pixels.
inline Result check_model(actionret::ActionModel<double>& model,
                          actionret::ActionModel<double>::BatchInput in,
                          const actionret::Tensor<double>& targets, int n_pixel_samples,
                          actionret::Rng& sample_rng, double eps = 1e-5) {
  using namespace actionret;
  Result res;
  std::vector<Param<double>*> params = model.params();
  for (Param<double>* p : params) p->zero_grad();
  Rng fwd_rng(0);
  auto out = model.forward(in, true, fwd_rng);
  auto loss = softmax_cross_entropy(out.logits, targets);
  Tensor<double> d_images = model.backward(loss.d_logits);

  for (Param<double>* p : params) {
    if (!p->trainable) continue;
    for (int64_t i = 0; i < p->value.size(); ++i) {
      double orig = p->value[i];
      p->value[i] = orig + eps;
      double lp = chain_loss(model, in, targets);
      p->value[i] = orig - eps;
      double lm = chain_loss(model, in, targets);
      p->value[i] = orig;
      double fd = (lp - lm) / (2.0 * eps);
      double err = rel_error(p->grad[i], fd);
      ++res.checked;
      if (err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_param = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }

  for (int s = 0; s < n_pixel_samples; ++s) {
    int64_t i = static_cast<int64_t>(sample_rng.next_u64() %
                                     static_cast<uint64_t>(in.images.size()));
    double orig = in.images[i];
    in.images[i] = orig + eps;
    double lp = chain_loss(model, in, targets);
    in.images[i] = orig - eps;
    double lm = chain_loss(model, in, targets);
    in.images[i] = orig;
    double fd = (lp - lm) / (2.0 * eps);
    double err = rel_error(d_images[i], fd);
    ++res.checked;
    if (err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_param = "images[" + std::to_string(i) + "]";
    }
  }
  return res;
}

}  // namespace gradcheck

#endif  // ACTIONRET_TESTS_GRADCHECK_UTIL_HPP
