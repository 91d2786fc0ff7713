#include "alforge/metrics/feature_extractor.hpp"

#include <algorithm>

#include "alforge/core/error.hpp"
#include "alforge/nn/image_tensor.hpp"
#include "alforge/nn/optim.hpp"

namespace alforge::metrics {

FeatureExtractor::FeatureExtractor(int features, RngStream& rng) : features_(features) {
  if (features < 1) throw_error(ErrorCategory::Config, "FeatureExtractor: features must be positive");
  convs_.emplace_back(1, features, 3, 1, 1, rng);
  convs_.emplace_back(features, features, 3, 2, 1, rng);
  convs_.emplace_back(features, 2 * features, 3, 1, 1, rng);
  convs_.emplace_back(2 * features, 2 * features, 3, 2, 1, rng);
}

nn::Tensor FeatureExtractor::forward(const nn::Tensor& x) const {
  if (convs_.empty()) throw_error(ErrorCategory::Config, "FeatureExtractor: not initialized");
  nn::Tensor h = x;
  for (const auto& c : convs_) h = nn::relu(c(h));
  return h;
}

nn::Tensor FeatureExtractor::embed(const Image& image) const { return forward(nn::image_batch(image)); }

void FeatureExtractor::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].visit(prefix + "conv" + std::to_string(i), v);
}

FeatureExtractor train_feature_extractor(const std::vector<ImageSample>& samples, int features, int steps,
                                         double learning_rate, RngStream& rng) {
  RngStream init = rng.child("init");
  FeatureExtractor fe(features, init);
  nn::Linear head(fe.map_count(), 1, init);
  if (steps <= 0) return fe;
  if (samples.empty()) throw_error(ErrorCategory::Data, "train_feature_extractor: no samples");

  std::vector<nn::Tensor> params = nn::parameters_of(fe);
  params.push_back(head.weight);
  params.push_back(head.bias);
  nn::Adam opt(params, {learning_rate, 0.9, 0.999, 1e-8, 0.0});
  RngStream batches = rng.child("batches");
  const std::size_t batch = std::min<std::size_t>(samples.size(), 16);
  for (int step = 0; step < steps; ++step) {
    std::vector<const Image*> images;
    std::vector<double> targets;
    for (std::size_t i = 0; i < batch; ++i) {
      const auto& s = samples[batches.uniform_index(samples.size())];
      images.push_back(&s.pixels);
      targets.push_back(s.label == Label::Nodule ? 1.0 : 0.0);
    }
    opt.zero_grad();
    nn::Tensor logit = head(nn::global_avg_pool(fe.forward(nn::image_batch(images))));
    nn::bce_with_logits(logit, targets).backward();
    opt.step();
  }
  nn::round_to_float32(fe);
  return fe;
}

}  // namespace alforge::metrics
