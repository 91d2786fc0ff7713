#pragma once

#include <string>
#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/models/uncertainty.hpp"
#include "alforge/nn/checkpoint.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::models {

/// Frozen convolutional feature body. Features are the global average and
/// global maximum of the last convolution, 4F values per image, shifted and
/// scaled by fixed per-feature statistics. A freshly constructed backbone
/// has random weights and identity statistics; see pretrain_backbone.
class Backbone {
public:
  Backbone() = default;
  Backbone(int features, RngStream& rng);

  int feature_dim() const { return 4 * features_; }
  int features() const { return features_; }
  /// [N, 1, H, W] -> [N, 4F]
  nn::Tensor forward(const nn::Tensor& x) const;
  /// Last convolution's activations, [N, 2F, H/2, W/2].
  nn::Tensor feature_map(const nn::Tensor& x) const;
  std::vector<double> embed(const Image& image) const;
  /// Row-major [N, 4F] embedding of a list of images.
  std::vector<double> embed_all(const std::vector<const Image*>& images) const;

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

  void set_trainable(bool trainable);
  /// Sets the statistics so features have zero mean and unit variance over `images`.
  void standardize_on(const std::vector<const Image*>& images);

private:
  nn::Tensor pooled(const nn::Tensor& x) const;

  int features_ = 0;
  std::vector<nn::Conv2d> convs_;
  std::vector<double> shift_, scale_;
};

/// Trains a backbone on a separately seeded auxiliary toy corpus, in place of
/// externally pretrained weights. The objective is a dense per-location
/// nodule map on the stride-2 grid, weighted toward the rare positive cells.
/// The result is frozen, standardized on the corpus and float32-exact.
/// `loss_trace` receives the minibatch loss of every step.
Backbone pretrain_backbone(const ExperimentConfig& config, RngStream& rng, std::vector<double>* loss_trace = nullptr);

nn::Checkpoint to_checkpoint(Backbone& backbone);
Backbone backbone_from_checkpoint(const nn::Checkpoint& checkpoint);

/// Backbone plus a trainable head: dropout, then a linear layer emitting
/// [logit, log variance] for the nodule class.
class ClassifierModel {
public:
  ClassifierModel() = default;
  ClassifierModel(const ExperimentConfig& config, RngStream& rng, bool with_dropout = true);
  /// Fresh head on a copy of `backbone`.
  ClassifierModel(const Backbone& backbone, const ExperimentConfig& config, RngStream& rng,
                  bool with_dropout = true);

  /// Independent copy; no tensors are shared with `*this`.
  ClassifierModel clone() const;

  Backbone& backbone() { return backbone_; }
  const Backbone& backbone() const { return backbone_; }
  bool has_dropout() const { return has_dropout_; }
  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double rate) { dropout_rate_ = rate; }

  /// Head on precomputed features [N, D] -> [N, 2] (logit, log variance).
  /// Dropout is applied when `rng` is non-null.
  nn::Tensor head(const nn::Tensor& features, RngStream* rng) const;

  /// Parameters of the trainable part only.
  void visit_head(const std::string& prefix, const nn::ParameterVisitor& v);
  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  Backbone backbone_;
  nn::Linear head_;
  bool has_dropout_ = true;
  double dropout_rate_ = 0.5;
};

/// Deterministic prediction without dropout: positive-class probability.
double predict_probability(const ClassifierModel& model, const Image& image);
std::vector<double> predict_probabilities(const ClassifierModel& model, const std::vector<double>& features, int n);

/// Fine-tunes the head on the labeled samples; the backbone is untouched.
/// When `loss_trace` is given it receives the deterministic full-set
/// cross-entropy before each step and after the last one.
ClassifierModel finetune_classifier(const ClassifierModel& model, const std::vector<ImageSample>& labeled,
                                    const ExperimentConfig& config, RngStream& rng,
                                    std::vector<double>* loss_trace = nullptr);
/// Same on precomputed features ([N, D] row-major) and labels.
ClassifierModel finetune_head(const ClassifierModel& model, const std::vector<double>& features,
                              const std::vector<Label>& labels, const ExperimentConfig& config, RngStream& rng,
                              std::vector<double>* loss_trace = nullptr);

/// T dropout passes; y is the nodule probability and the variance is that
/// of the probability under the predicted Gaussian logit noise.
MCSampleSet mc_forward(const ClassifierModel& model, const Image& image, int samples, RngStream& rng);
MCSampleSet mc_forward_features(const ClassifierModel& model, const std::vector<double>& features, int samples,
                                RngStream& rng);
double image_uncertainty(const ClassifierModel& model, const Image& image, const ExperimentConfig& config,
                         RngStream& rng);

nn::Checkpoint to_checkpoint(ClassifierModel& model);
ClassifierModel classifier_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace alforge::models
