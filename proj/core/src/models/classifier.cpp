#include "alforge/models/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "alforge/core/error.hpp"
#include "alforge/core/toy_dataset.hpp"
#include "alforge/nn/image_tensor.hpp"
#include "alforge/nn/optim.hpp"

namespace alforge::models {
namespace {

constexpr double kInitialLogVariance = -4.0;
constexpr std::size_t kEmbedChunk = 64;
constexpr double kLeakySlope = 0.1;
constexpr double kPretrainLearningRate = 3e-3;
constexpr int kPretrainBatch = 32;
constexpr double kPositiveCellWeight = 10.0;

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

nn::Tensor deep_copy(const nn::Tensor& t) {
  return nn::Tensor::from(t.shape(), std::vector<double>(t.data().begin(), t.data().end()), t.requires_grad());
}

nn::Tensor feature_rows(const std::vector<double>& features, const std::vector<std::size_t>& rows, int dim) {
  std::vector<double> v;
  v.reserve(rows.size() * dim);
  for (std::size_t r : rows) v.insert(v.end(), features.begin() + r * dim, features.begin() + (r + 1) * dim);
  return nn::Tensor::from({static_cast<int>(rows.size()), dim}, std::move(v));
}

void require_both_classes(const std::vector<Label>& labels) {
  bool has[2] = {false, false};
  for (Label l : labels) has[class_index(l)] = true;
  if (!has[0] || !has[1])
    throw_error(ErrorCategory::Data, "finetune_classifier: labeled set must contain both classes");
}

}  // namespace

Backbone::Backbone(int features, RngStream& rng)
    : features_(features), shift_(4 * features, 0.0), scale_(4 * features, 1.0) {
  if (features < 1) throw_error(ErrorCategory::Config, "backbone: features must be positive");
  convs_.emplace_back(1, features, 3, 1, 1, rng);
  convs_.emplace_back(features, 2 * features, 3, 2, 1, rng);
  convs_.emplace_back(2 * features, 2 * features, 3, 1, 1, rng);
  set_trainable(false);
}

void Backbone::set_trainable(bool trainable) {
  for (auto& c : convs_) {
    c.weight.set_requires_grad(trainable);
    c.bias.set_requires_grad(trainable);
  }
}

nn::Tensor Backbone::feature_map(const nn::Tensor& x) const {
  nn::Tensor h = nn::add_scalar(x, -0.5);
  for (const auto& c : convs_) h = nn::leaky_relu(c(h), kLeakySlope);
  return h;
}

nn::Tensor Backbone::pooled(const nn::Tensor& x) const {
  const nn::Tensor h = feature_map(x);
  const nn::Tensor avg = nn::global_avg_pool(h), mx = nn::global_max_pool(h);
  const int n = x.dim(0), c = h.dim(1);
  std::vector<double> out(static_cast<std::size_t>(n) * 2 * c);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < c; ++k) {
      out[i * 2 * c + k] = avg.data()[i * c + k];
      out[i * 2 * c + c + k] = mx.data()[i * c + k];
    }
  return nn::Tensor::from({n, 2 * c}, std::move(out));
}

nn::Tensor Backbone::forward(const nn::Tensor& x) const {
  nn::Tensor f = pooled(x);
  const int d = feature_dim();
  for (std::size_t i = 0; i < f.data().size(); ++i) f.data()[i] = (f.data()[i] - shift_[i % d]) / scale_[i % d];
  return f;
}

void Backbone::standardize_on(const std::vector<const Image*>& images) {
  if (images.empty()) throw_error(ErrorCategory::Data, "backbone: no images to standardize on");
  nn::NoGradGuard guard;
  const int d = feature_dim();
  std::vector<double> sum(d, 0.0), sq(d, 0.0);
  for (std::size_t i = 0; i < images.size(); i += kEmbedChunk) {
    const std::vector<const Image*> chunk(images.begin() + i,
                                          images.begin() + std::min(images.size(), i + kEmbedChunk));
    const nn::Tensor f = pooled(nn::image_batch(chunk));
    for (std::size_t j = 0; j < f.data().size(); ++j) sum[j % d] += f.data()[j];
  }
  const double n = static_cast<double>(images.size());
  for (int k = 0; k < d; ++k) shift_[k] = static_cast<float>(sum[k] / n);
  for (std::size_t i = 0; i < images.size(); i += kEmbedChunk) {
    const std::vector<const Image*> chunk(images.begin() + i,
                                          images.begin() + std::min(images.size(), i + kEmbedChunk));
    const nn::Tensor f = pooled(nn::image_batch(chunk));
    for (std::size_t j = 0; j < f.data().size(); ++j) {
      const double e = f.data()[j] - shift_[j % d];
      sq[j % d] += e * e;
    }
  }
  for (int k = 0; k < d; ++k) scale_[k] = static_cast<float>(std::sqrt(sq[k] / n) + 1e-6);
}

std::vector<double> Backbone::embed(const Image& image) const { return embed_all({&image}); }

std::vector<double> Backbone::embed_all(const std::vector<const Image*>& images) const {
  nn::NoGradGuard guard;
  std::vector<double> out;
  out.reserve(images.size() * feature_dim());
  for (std::size_t i = 0; i < images.size(); i += kEmbedChunk) {
    const std::vector<const Image*> chunk(images.begin() + i,
                                          images.begin() + std::min(images.size(), i + kEmbedChunk));
    const nn::Tensor f = forward(nn::image_batch(chunk));
    out.insert(out.end(), f.data().begin(), f.data().end());
  }
  return out;
}

void Backbone::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].visit(prefix + "conv" + std::to_string(i), v);
  v.buffer(prefix + "norm.shift", shift_);
  v.buffer(prefix + "norm.scale", scale_);
}

Backbone pretrain_backbone(const ExperimentConfig& config, RngStream& rng, std::vector<double>* loss_trace) {
  ToyDatasetOptions opts;
  opts.n_per_class = config.backbone_pretrain_images;
  opts.rows = config.image_rows;
  opts.cols = config.image_cols;
  RngStream corpus_rng = rng.child("corpus");
  const ToyDataset corpus = make_toy_dataset(opts, corpus_rng);

  // Target cell (i, j) is centred on pixel (2i, 2j), matching the stride-2 convolution.
  const int gr = config.image_rows / 2, gc = config.image_cols / 2;
  std::vector<std::vector<double>> targets;
  std::vector<const Image*> images;
  for (const auto& s : corpus.samples) {
    images.push_back(&s.sample.pixels);
    std::vector<double> t(static_cast<std::size_t>(gr) * gc, 0.0);
    if (s.nodule) {
      const double reach = s.nodule->radius + 0.5;
      for (int i = 0; i < gr; ++i)
        for (int j = 0; j < gc; ++j)
          if (std::hypot(2.0 * i - s.nodule->row, 2.0 * j - s.nodule->col) <= reach) t[i * gc + j] = 1.0;
    }
    targets.push_back(std::move(t));
  }

  RngStream init_rng = rng.child("init");
  Backbone backbone(config.backbone_features, init_rng);
  RngStream head_rng = rng.child("head");
  nn::Conv2d head(2 * config.backbone_features, 1, 1, 1, 0, head_rng);

  backbone.set_trainable(true);
  std::vector<nn::Tensor> params = nn::parameters_of(backbone);
  params.push_back(head.weight);
  params.push_back(head.bias);
  nn::Adam opt(params, {kPretrainLearningRate, 0.9, 0.999, 1e-8, 0.0});
  RngStream batch_rng = rng.child("batches");
  if (loss_trace) loss_trace->clear();
  for (int step = 0; step < config.backbone_pretrain_steps; ++step) {
    std::vector<const Image*> batch;
    std::vector<double> t, w;
    for (int b = 0; b < kPretrainBatch; ++b) {
      const auto k = static_cast<std::size_t>(batch_rng.uniform_int(0, static_cast<int>(images.size()) - 1));
      batch.push_back(images[k]);
      for (double v : targets[k]) {
        t.push_back(v);
        w.push_back(v > 0.0 ? kPositiveCellWeight : 1.0);
      }
    }
    opt.zero_grad();
    nn::Tensor loss = nn::bce_with_logits(head(backbone.feature_map(nn::image_batch(batch))), t, w);
    if (!std::isfinite(loss.item())) throw_error(ErrorCategory::Diverge, "pretrain_backbone: non-finite loss");
    if (loss_trace) loss_trace->push_back(loss.item());
    loss.backward();
    opt.step();
  }
  backbone.set_trainable(false);
  nn::round_to_float32(backbone);
  backbone.standardize_on(images);
  return backbone;
}

nn::Checkpoint to_checkpoint(Backbone& backbone) {
  nn::Checkpoint cp;
  cp.descriptor = {{"kind", "backbone"}, {"features", std::to_string(backbone.features())}};
  nn::capture(backbone, "", cp);
  return cp;
}

Backbone backbone_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "backbone")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a backbone");
  RngStream scratch(0, "restore");
  Backbone b(std::stoi(cp.get("features")), scratch);
  nn::restore(b, "", cp);
  return b;
}

ClassifierModel::ClassifierModel(const ExperimentConfig& config, RngStream& rng, bool with_dropout)
    : has_dropout_(with_dropout), dropout_rate_(with_dropout ? config.dropout_rate : 0.0) {
  RngStream b = rng.child("backbone");
  backbone_ = Backbone(config.backbone_features, b);
  RngStream h = rng.child("head");
  head_ = nn::Linear(backbone_.feature_dim(), 2, h, 0.1);
  head_.bias.data()[1] = kInitialLogVariance;
}

ClassifierModel::ClassifierModel(const Backbone& backbone, const ExperimentConfig& config, RngStream& rng,
                                 bool with_dropout)
    : backbone_(backbone), has_dropout_(with_dropout), dropout_rate_(with_dropout ? config.dropout_rate : 0.0) {
  RngStream h = rng.child("head");
  head_ = nn::Linear(backbone_.feature_dim(), 2, h, 0.1);
  head_.bias.data()[1] = kInitialLogVariance;
}

ClassifierModel ClassifierModel::clone() const {
  ClassifierModel out = *this;
  ClassifierModel& self = const_cast<ClassifierModel&>(*this);
  std::vector<nn::Tensor> copies;
  nn::ParameterVisitor collect{[&](const std::string&, nn::Tensor& t) { copies.push_back(deep_copy(t)); },
                               [](const std::string&, std::vector<double>&) {}};
  self.visit("", collect);
  std::size_t k = 0;
  nn::ParameterVisitor assign{[&](const std::string&, nn::Tensor& t) { t = copies[k++]; },
                              [](const std::string&, std::vector<double>&) {}};
  out.visit("", assign);
  return out;
}

nn::Tensor ClassifierModel::head(const nn::Tensor& features, RngStream* rng) const {
  nn::Tensor h = features;
  if (rng && has_dropout_) h = nn::dropout(h, dropout_rate_, *rng);
  return head_(h);
}

void ClassifierModel::visit_head(const std::string& prefix, const nn::ParameterVisitor& v) {
  head_.visit(prefix + "head", v);
}

void ClassifierModel::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  backbone_.visit(prefix + "backbone.", v);
  visit_head(prefix, v);
}

std::vector<double> predict_probabilities(const ClassifierModel& model, const std::vector<double>& features, int n) {
  nn::NoGradGuard guard;
  const int dim = model.backbone().feature_dim();
  const nn::Tensor out = model.head(nn::Tensor::from({n, dim}, features), nullptr);
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = sigmoid(out.data()[2 * i]);
  return p;
}

double predict_probability(const ClassifierModel& model, const Image& image) {
  return predict_probabilities(model, model.backbone().embed(image), 1)[0];
}

ClassifierModel finetune_head(const ClassifierModel& model, const std::vector<double>& features,
                              const std::vector<Label>& labels, const ExperimentConfig& config, RngStream& rng,
                              std::vector<double>* loss_trace) {
  const int dim = model.backbone().feature_dim();
  const std::size_t n = labels.size();
  if (n == 0) throw_error(ErrorCategory::Data, "finetune_classifier: empty labeled set");
  if (features.size() != n * dim) throw_error(ErrorCategory::Data, "finetune_classifier: feature size mismatch");
  require_both_classes(labels);

  ClassifierModel out = model.clone();
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = labels[i] == Label::Nodule ? 1.0 : 0.0;

  auto full_loss = [&] {
    nn::NoGradGuard guard;
    const nn::Tensor o = out.head(nn::Tensor::from({static_cast<int>(n), dim}, features), nullptr);
    return nn::bce_with_logits(nn::select_channel(o, 0), targets).item();
  };
  if (config.classifier_steps <= 0) {
    if (loss_trace) loss_trace->assign(1, full_loss());
    return out;
  }

  std::vector<nn::Tensor> params;
  nn::ParameterVisitor collect{[&](const std::string&, nn::Tensor& t) { params.push_back(t); },
                               [](const std::string&, std::vector<double>&) {}};
  out.visit_head("", collect);
  nn::Adam opt(params, {config.classifier_learning_rate, 0.9, 0.999, 1e-8, 0.0});

  RngStream order_rng = rng.child("order");
  RngStream drop_rng = rng.child("dropout");
  RngStream noise_rng = rng.child("noise");
  const std::size_t batch = std::min<std::size_t>(n, static_cast<std::size_t>(config.effective_batch_size()));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;
  const int s = config.aleatoric_samples;

  if (loss_trace) loss_trace->clear();
  for (int step = 0; step < config.classifier_steps; ++step) {
    if (loss_trace) loss_trace->push_back(full_loss());
    std::vector<std::size_t> rows;
    while (rows.size() < batch) {
      if (cursor == n) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      rows.push_back(order[cursor++]);
    }
    std::vector<double> t(rows.size()), noise(rows.size() * s);
    for (std::size_t i = 0; i < rows.size(); ++i) t[i] = targets[rows[i]];
    for (double& e : noise) e = noise_rng.normal();

    opt.zero_grad();
    const nn::Tensor o = out.head(feature_rows(features, rows, dim), &drop_rng);
    nn::Tensor loss = nn::heteroscedastic_bce(nn::select_channel(o, 0), nn::select_channel(o, 1), t, noise, s);
    if (!std::isfinite(loss.item())) throw_error(ErrorCategory::Diverge, "finetune_classifier: non-finite loss");
    loss.backward();
    opt.step();
  }
  nn::ParameterVisitor round{[](const std::string&, nn::Tensor& p) {
                               for (double& x : p.data()) x = static_cast<double>(static_cast<float>(x));
                             },
                             [](const std::string&, std::vector<double>&) {}};
  out.visit_head("", round);
  if (loss_trace) loss_trace->push_back(full_loss());
  return out;
}

ClassifierModel finetune_classifier(const ClassifierModel& model, const std::vector<ImageSample>& labeled,
                                    const ExperimentConfig& config, RngStream& rng, std::vector<double>* loss_trace) {
  if (labeled.empty()) throw_error(ErrorCategory::Data, "finetune_classifier: empty labeled set");
  std::vector<const Image*> images;
  std::vector<Label> labels;
  for (const auto& s : labeled) {
    images.push_back(&s.pixels);
    labels.push_back(s.label);
  }
  require_both_classes(labels);
  return finetune_head(model, model.backbone().embed_all(images), labels, config, rng, loss_trace);
}

MCSampleSet mc_forward_features(const ClassifierModel& model, const std::vector<double>& features, int samples,
                                RngStream& rng) {
  if (!model.has_dropout()) throw_error(ErrorCategory::Config, "MC sampling unavailable: model has no dropout layer");
  if (samples < 1) throw_error(ErrorCategory::Config, "mc_forward: T must be at least 1");
  const int dim = model.backbone().feature_dim();
  if (static_cast<int>(features.size()) != dim) throw_error(ErrorCategory::Data, "mc_forward: feature size mismatch");
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(samples) * dim);
  for (int t = 0; t < samples; ++t) rows.insert(rows.end(), features.begin(), features.end());
  nn::NoGradGuard guard;
  const nn::Tensor o = model.head(nn::Tensor::from({samples, dim}, std::move(rows)), &rng);
  MCSampleSet out;
  for (int t = 0; t < samples; ++t) {
    const double p = sigmoid(o.data()[2 * t]);
    out.y.push_back(p);
    out.variance.push_back(sigmoid_noise_variance(o.data()[2 * t], o.data()[2 * t + 1]));
  }
  return out;
}

MCSampleSet mc_forward(const ClassifierModel& model, const Image& image, int samples, RngStream& rng) {
  return mc_forward_features(model, model.backbone().embed(image), samples, rng);
}

double image_uncertainty(const ClassifierModel& model, const Image& image, const ExperimentConfig& config,
                         RngStream& rng) {
  return predictive_uncertainty(mc_forward(model, image, config.mc_samples, rng)).total;
}

nn::Checkpoint to_checkpoint(ClassifierModel& model) {
  nn::Checkpoint cp;
  char rate[40];
  std::snprintf(rate, sizeof rate, "%.17g", model.dropout_rate());
  cp.descriptor = {{"kind", "classifier"},
                   {"backbone_features", std::to_string(model.backbone().features())},
                   {"has_dropout", model.has_dropout() ? "1" : "0"},
                   {"dropout_rate", rate}};
  nn::capture(model, "", cp);
  return cp;
}

ClassifierModel classifier_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "classifier")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a classifier");
  ExperimentConfig c;
  c.backbone_features = std::stoi(cp.get("backbone_features"));
  c.dropout_rate = std::stod(cp.get("dropout_rate"));
  RngStream scratch(0, "restore");
  ClassifierModel m(c, scratch, cp.get("has_dropout") == "1");
  m.set_dropout_rate(c.dropout_rate);
  nn::restore(m, "", cp);
  return m;
}

}  // namespace alforge::models
