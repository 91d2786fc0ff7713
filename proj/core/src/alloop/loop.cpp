#include "alforge/alloop/loop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "alforge/cgan/synthesize.hpp"
#include "alforge/cgan/trainer.hpp"
#include "alforge/core/error.hpp"
#include "alforge/core/split.hpp"
#include "alforge/maskops/perturb.hpp"
#include "alforge/metrics/classification.hpp"
#include "alforge/metrics/feature_extractor.hpp"
#include "alforge/metrics/savings.hpp"
#include "alforge/metrics/segmentation.hpp"

namespace alforge::alloop {
namespace {

namespace fs = std::filesystem;

Image augmented_copy(const ImageSample& s, const ExperimentConfig& c, RngStream& rng) {
  const int f = rng.uniform_int(0, 2);
  const maskops::Flip flip = f == 0 ? maskops::Flip::None : (f == 1 ? maskops::Flip::Horizontal : maskops::Flip::Vertical);
  const double rot = rng.uniform(-c.max_rotation_deg, c.max_rotation_deg);
  const int dy = rng.uniform_int(-c.max_translation_px, c.max_translation_px);
  const int dx = rng.uniform_int(-c.max_translation_px, c.max_translation_px);
  try {
    return maskops::standard_augment(s.pixels, s.mask, flip, rot, dy, dx).image;
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::Data) throw;
    return s.pixels;
  }
}

std::vector<double> augmented_embedding(const models::Backbone& backbone, const ImageSample& s, int factor,
                                        const ExperimentConfig& c, const RngStream& root) {
  std::vector<Image> copies;
  copies.reserve(static_cast<std::size_t>(factor));
  for (int k = 0; k < factor; ++k) {
    RngStream r = root.child("augment/" + s.id + "/" + std::to_string(k));
    copies.push_back(augmented_copy(s, c, r));
  }
  std::vector<const Image*> images{&s.pixels};
  for (const auto& im : copies) images.push_back(&im);
  return backbone.embed_all(images);
}

void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(ErrorCategory::Data, "cannot write " + tmp.string());
    out << text;
    if (!out) throw_error(ErrorCategory::Data, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

bool should_stop(const std::vector<double>& auc, double tolerance, int patience) {
  const std::size_t n = auc.size();
  if (n < 2 || patience < 1 || n < static_cast<std::size_t>(patience) + 1) return false;
  for (std::size_t i = n - patience; i < n; ++i) {
    const double best = *std::max_element(auc.begin(), auc.begin() + static_cast<std::ptrdiff_t>(i));
    if (!(auc[i] - best < tolerance)) return false;
  }
  return true;
}

bool should_stop(const std::vector<metrics::ReportRow>& history, double tolerance, int patience) {
  std::vector<double> auc;
  for (const auto& r : history) auc.push_back(r.report.auc);
  return should_stop(auc, tolerance, patience);
}

models::Backbone shared_backbone(const ExperimentConfig& config) {
  RngStream rng(0, "backbone-pretrain");
  return models::pretrain_backbone(config, rng);
}

cgan::MaskAutoencoder prepare_autoencoder(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                                          RngStream& rng) {
  std::vector<Mask> masks;
  for (const auto& s : train) masks.push_back(s.mask);
  RngStream ae_rng = rng.child("autoencoder");
  cgan::MaskAutoencoder ae = cgan::train_autoencoder(masks, config, ae_rng);
  nn::round_to_float32(ae);
  return ae;
}

cgan::GanModels prepare_generator(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                                  const std::vector<std::string>& seed_ids, const cgan::MaskAutoencoder& ae,
                                  RngStream& rng) {
  const std::set<std::string> seed(seed_ids.begin(), seed_ids.end());
  std::vector<ImageSample> labeled;
  for (const auto& s : train)
    if (seed.contains(s.id)) labeled.push_back(s);
  RngStream feat_rng = rng.child("features");
  const metrics::FeatureExtractor feat = metrics::train_feature_extractor(
      labeled, config.backbone_features, config.feature_steps, config.classifier_learning_rate, feat_rng);
  RngStream gan_rng = rng.child("cgan");
  cgan::GanModels gan = cgan::train_cgan(labeled, ae, feat, config, gan_rng);
  nn::round_to_float32(gan.generator);
  return gan;
}

PipelineModels prepare_models(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                              const std::vector<std::string>& seed_ids, RngStream& rng,
                              const models::Backbone* backbone) {
  PipelineModels out{backbone ? *backbone : shared_backbone(config), prepare_autoencoder(config, train, rng),
                     std::nullopt};
  if (config.synth_per_image > 0) out.generator = prepare_generator(config, train, seed_ids, out.autoencoder, rng).generator;
  return out;
}

ALRunner::ALRunner(ExperimentConfig config, std::vector<ImageSample> train, std::vector<ImageSample> test,
                   PipelineModels models)
    : config_(std::move(config)), train_(std::move(train)), test_(std::move(test)), models_(std::move(models)) {
  validate(config_);
  for (std::size_t i = 0; i < train_.size(); ++i)
    if (!train_index_.emplace(train_[i].id, i).second)
      throw_error(ErrorCategory::Data, "duplicate training id " + train_[i].id);
  for (const auto& t : test_)
    if (train_index_.contains(t.id)) throw_error(ErrorCategory::Data, "test sample " + t.id + " is also in training");
  if (config_.synth_per_image > 0 && !models_.generator)
    throw_error(ErrorCategory::Config, "synth_per_image > 0 requires a trained generator");
}

const ImageSample& ALRunner::train_sample(const std::string& id) const {
  const auto it = train_index_.find(id);
  if (it == train_index_.end()) throw_error(ErrorCategory::Data, "unknown training id " + id);
  return train_[it->second];
}

ALState ALRunner::initial_state(const std::vector<std::string>& seed_ids, const RngStream& root) const {
  ALState s;
  for (const auto& id : seed_ids) train_sample(id);
  s.labeled_ids = seed_ids;
  s.config = config_;
  s.rng_state = root.save_state();
  RngStream init = root.child("classifier");
  s.classifier = models::ClassifierModel(models_.backbone, config_, init);
  return s;
}

const std::vector<double>& ALRunner::augmented_features(const models::Backbone& backbone, const ImageSample& sample,
                                                        const RngStream& root) {
  auto it = augmented_cache_.find(sample.id);
  if (it == augmented_cache_.end())
    it = augmented_cache_
             .emplace(sample.id, augmented_embedding(backbone, sample, config_.augment_factor, config_, root))
             .first;
  return it->second;
}

const std::vector<double>& ALRunner::raw_features(const models::Backbone& backbone, const ImageSample& sample) {
  auto it = raw_cache_.find(sample.id);
  if (it == raw_cache_.end()) it = raw_cache_.emplace(sample.id, backbone.embed(sample.pixels)).first;
  return it->second;
}

metrics::EvalReport ALRunner::evaluate(const models::ClassifierModel& classifier,
                                       const std::optional<models::SegmentationModel>& segmenter) {
  metrics::EvalReport r;
  if (test_.empty()) throw_error(ErrorCategory::Data, "evaluation needs a non-empty test split");
  if (test_features_.empty()) {
    std::vector<const Image*> images;
    for (const auto& t : test_) images.push_back(&t.pixels);
    test_features_ = classifier.backbone().embed_all(images);
  }
  const auto probs = models::predict_probabilities(classifier, test_features_, static_cast<int>(test_.size()));
  std::vector<Label> labels;
  for (const auto& t : test_) labels.push_back(t.label);
  const auto m = metrics::sens_spec_auc(probs, labels);
  r.sens = m.sensitivity;
  r.spec = m.specificity;
  r.auc = m.auc;

  if (segmenter) {
    double dice = 0.0, hd = 0.0;
    for (const auto& t : test_) {
      const Mask pred = models::predict_mask(*segmenter, t.pixels);
      dice += metrics::dice(pred, t.mask);
      // An empty prediction is charged the image diagonal.
      hd += count_foreground(pred) == 0 || count_foreground(t.mask) == 0
                ? std::hypot(static_cast<double>(t.mask.rows()), static_cast<double>(t.mask.cols()))
                : metrics::hausdorff(pred, t.mask);
    }
    r.dice = dice / static_cast<double>(test_.size());
    r.hd = hd / static_cast<double>(test_.size());
  }
  return r;
}

ALState ALRunner::round(const ALState& state, const RngStream& root) {
  if (state.stopped) throw_error(ErrorCategory::Config, "al_round: state is already stopped");
  const int r = state.round;
  const RngStream rr = root.child("round-" + std::to_string(r));
  ALState next = state;
  const models::Backbone& backbone = state.classifier.backbone();

  // (1)-(2) Augmented training set and fine-tuning.
  std::vector<const ImageSample*> training;
  for (const auto& id : state.labeled_ids) training.push_back(&train_sample(id));
  for (const auto& s : state.synthetic_labeled) training.push_back(&s);
  std::vector<double> features;
  std::vector<Label> labels;
  for (const ImageSample* s : training) {
    const auto& f = augmented_features(backbone, *s, root);
    features.insert(features.end(), f.begin(), f.end());
    labels.insert(labels.end(), f.size() / backbone.feature_dim(), s->label);
  }
  RngStream ft = rr.child("finetune");
  next.classifier = models::finetune_head(state.classifier, features, labels, config_, ft);

  std::optional<models::SegmentationModel> segmenter;
  if (config_.task_segmentation) {
    std::vector<ImageSample> seg_set;
    for (const ImageSample* s : training) seg_set.push_back(*s);
    RngStream sr = rr.child("segmenter");
    segmenter = models::train_segmenter(seg_set, config_, sr);
  }

  // Evaluation of the model trained on the current labeled pool.
  metrics::ReportRow row;
  row.round = r;
  row.labeled_count = state.labeled_ids.size();
  row.report = evaluate(next.classifier, segmenter);
  row.report.labeled_fraction = static_cast<double>(state.labeled_ids.size()) / static_cast<double>(train_.size());
  row.report.pixel_fraction =
      metrics::annotation_savings(state.labeled_ids, metrics::pool_entries(train_)).pixel_fraction;
  next.history.push_back(row);
  next.round = r + 1;
  next.candidate_records.clear();

  if (should_stop(next.history, config_.stop_tolerance, config_.stop_patience)) {
    next.stopped = true;
    next.reason = StopReason::Plateau;
    return next;
  }
  if (next.round >= config_.max_rounds) {
    next.stopped = true;
    next.reason = StopReason::MaxRounds;
    return next;
  }

  const std::set<std::string> labeled(state.labeled_ids.begin(), state.labeled_ids.end());
  std::vector<const ImageSample*> pool;
  std::array<int, kNumClasses> available{0, 0};
  for (const auto& s : train_)
    if (!labeled.contains(s.id)) {
      pool.push_back(&s);
      ++available[class_index(s.label)];
    }
  if (available[0] < config_.top_k_per_class || available[1] < config_.top_k_per_class) {
    next.stopped = true;
    next.reason = StopReason::PoolExhausted;
    return next;
  }

  // (3)-(4) Candidates per pool image: the image itself plus its synthetic
  // children; a parent is represented by its highest-scoring candidate.
  const bool random = config_.acquisition == Acquisition::Random;
  auto score = [&](const std::string& id, const std::vector<double>& f) {
    if (random) return rr.child("random/" + id).uniform();
    RngStream sr = rr.child("score/" + id);
    return models::predictive_uncertainty(
               models::mc_forward_features(next.classifier, f, config_.mc_samples, sr))
        .total;
  };
  std::vector<ScoredCandidate> best;
  std::map<std::string, ImageSample> best_synthetic;
  std::map<std::string, std::string> parent_of;
  for (const ImageSample* p : pool) {
    ScoredCandidate top{p->id, p->label, score(p->id, raw_features(backbone, *p))};
    next.candidate_records.push_back({p->id, p->id, p->label, top.score});
    std::optional<ImageSample> top_child;
    if (config_.synth_per_image > 0) {
      std::vector<maskops::Perturbation> perts;
      try {
        RngStream gr = rr.child("generate/" + p->id);
        perts = maskops::generate_perturbations(*p, config_.synth_per_image, config_, gr);
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::Data) throw;
      }
      auto children = cgan::synthesize_children(*models_.generator, *p, perts, models_.autoencoder,
                                                 "syn-r" + std::to_string(r) + "-" + p->id);
      for (auto& c : children) {
        const double s = score(c.id, backbone.embed(c.pixels));
        next.candidate_records.push_back({c.id, p->id, c.label, s});
        if (s > top.score || (s == top.score && c.id < top.id)) {
          top = {c.id, c.label, s};
          top_child = std::move(c);
        }
      }
    }
    parent_of[top.id] = p->id;
    if (top_child) best_synthetic.emplace(top.id, std::move(*top_child));
    best.push_back(top);
  }

  // (5)-(6) Balanced top-k; each choice annotates its real parent.
  const SelectionResult sel = select_balanced(rank_candidates(best), config_.top_k_per_class);
  for (int c = 0; c < kNumClasses; ++c)
    for (const auto& id : sel.chosen[c]) {
      next.labeled_ids.push_back(parent_of.at(id));
      if (auto it = best_synthetic.find(id); it != best_synthetic.end())
        next.synthetic_labeled.push_back(std::move(it->second));
    }
  return next;
}

metrics::EvalReport ALRunner::full_data_baseline(const RngStream& root) {
  RngStream init = root.child("classifier");
  const models::ClassifierModel fresh(models_.backbone, config_, init);
  std::vector<double> features;
  std::vector<Label> labels;
  for (const auto& s : train_) {
    const auto f = augmented_embedding(fresh.backbone(), s, config_.fsl_augment_factor, config_, root.child("fsl"));
    features.insert(features.end(), f.begin(), f.end());
    labels.insert(labels.end(), f.size() / fresh.backbone().feature_dim(), s.label);
  }
  ExperimentConfig c = config_;
  c.classifier_steps = config_.fsl_classifier_steps;
  RngStream ft = root.child("fsl/finetune");
  const models::ClassifierModel trained = models::finetune_head(fresh, features, labels, c, ft);
  std::optional<models::SegmentationModel> segmenter;
  if (config_.task_segmentation) {
    RngStream sr = root.child("fsl/segmenter");
    segmenter = models::train_segmenter(train_, config_, sr);
  }
  metrics::EvalReport r = evaluate(trained, segmenter);
  r.labeled_fraction = 1.0;
  r.pixel_fraction = 1.0;
  return r;
}

ALState al_round(const ALState& state, ALRunner& runner, const RngStream& root) { return runner.round(state, root); }

RngStream run_stream(const ExperimentConfig& config) { return RngStream(config.seed, "alforge-run"); }

RunResult run_al(const ExperimentConfig& config, const DatasetManifest& manifest, const RunOptions& options) {
  return run_al(config, manifest, load_samples(manifest), options);
}

RunResult run_al(const ExperimentConfig& config, const DatasetManifest& manifest,
                 const std::vector<ImageSample>& samples, const RunOptions& options) {
  validate(config);
  if (samples.size() != manifest.records.size())
    throw_error(ErrorCategory::Data, "run_al: samples do not match the manifest");
  const RngStream root = run_stream(config);
  RngStream split_rng = root.child("split");
  const InitialSplit split = split_initial(manifest, config, split_rng);

  std::vector<ImageSample> train, test;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (manifest.records[i].split == Split::Train ? train : test).push_back(samples[i]);

  std::optional<fs::path> state_path, backbone_path, ae_path, gen_path;
  if (options.checkpoint_dir) {
    fs::create_directories(*options.checkpoint_dir);
    state_path = *options.checkpoint_dir / "state.ckpt";
    backbone_path = *options.checkpoint_dir / "backbone.ckpt";
    ae_path = *options.checkpoint_dir / "autoencoder.ckpt";
    gen_path = *options.checkpoint_dir / "generator.ckpt";
  }
  if (options.resume && !(state_path && fs::exists(*state_path)))
    throw_error(ErrorCategory::Config, "resume requested but no state checkpoint exists");

  PipelineModels models;
  bool trained_here = false;
  if (options.models) {
    models = *options.models;
  } else if (options.resume && fs::exists(*ae_path)) {
    if (!fs::exists(*backbone_path)) throw_error(ErrorCategory::Config, "resume: backbone checkpoint missing");
    models.backbone = models::backbone_from_checkpoint(nn::read_checkpoint(*backbone_path));
    models.autoencoder = cgan::autoencoder_from_checkpoint(nn::read_checkpoint(*ae_path));
    if (config.synth_per_image > 0) {
      if (!fs::exists(*gen_path)) throw_error(ErrorCategory::Config, "resume: generator checkpoint missing");
      models.generator = cgan::generator_from_checkpoint(nn::read_checkpoint(*gen_path));
    }
  } else {
    RngStream mr = root.child("models");
    models = prepare_models(config, train, split.labeled_seed, mr, options.backbone);
    trained_here = true;
  }
  if (options.checkpoint_dir && trained_here) {
    nn::write_checkpoint(*backbone_path, models::to_checkpoint(models.backbone));
    nn::write_checkpoint(*ae_path, cgan::to_checkpoint(models.autoencoder));
    if (models.generator) nn::write_checkpoint(*gen_path, cgan::to_checkpoint(*models.generator));
  }

  ALRunner runner(config, std::move(train), std::move(test), std::move(models));
  RunResult result;
  if (options.resume) {
    result.state = load_state(*state_path);
    if (serialize(result.state.config) != serialize(config))
      throw_error(ErrorCategory::Config, "resume: configuration differs from the checkpointed run");
  } else {
    result.state = runner.initial_state(split.labeled_seed, root);
  }

  auto persist = [&](ALState& s) {
    if (state_path) save_state(*state_path, s);
    if (options.report_path) write_atomic(*options.report_path, metrics::format_report(s.history));
  };
  while (!result.state.stopped) {
    try {
      result.state = runner.round(result.state, root);
    } catch (...) {
      persist(result.state);
      throw;
    }
    persist(result.state);
    if (options.after_round && !options.after_round(result.state)) {
      result.interrupted = true;
      return result;
    }
  }
  return result;
}

}  // namespace alforge::alloop
