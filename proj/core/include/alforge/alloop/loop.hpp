#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alforge/alloop/selection.hpp"
#include "alforge/alloop/state.hpp"
#include "alforge/cgan/autoencoder.hpp"
#include "alforge/cgan/generator.hpp"
#include "alforge/cgan/trainer.hpp"
#include "alforge/core/config.hpp"
#include "alforge/core/manifest.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/models/classifier.hpp"
#include "alforge/models/segmenter.hpp"

namespace alforge::alloop {

/// True iff each of the last `patience` rounds improved AUC over the best
/// earlier round by less than `tolerance`.
bool should_stop(const std::vector<double>& auc_history, double tolerance, int patience);
bool should_stop(const std::vector<metrics::ReportRow>& history, double tolerance, int patience);

/// Frozen models of the pipeline, trained once per seed and shareable
/// between acquisition modes. The backbone does not depend on the seed.
struct PipelineModels {
  models::Backbone backbone;
  cgan::MaskAutoencoder autoencoder;
  std::optional<cgan::Generator> generator;  // absent when synth_per_image == 0
};

/// Backbone pretrained from a fixed stream, so every seed and acquisition
/// mode shares the same weights.
models::Backbone shared_backbone(const ExperimentConfig& config);

/// Autoencoder on every training mask, from `rng/autoencoder`.
cgan::MaskAutoencoder prepare_autoencoder(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                                          RngStream& rng);
/// Feature network and cGAN on the labeled seed set, from `rng/features`
/// and `rng/cgan`.
cgan::GanModels prepare_generator(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                                  const std::vector<std::string>& seed_ids, const cgan::MaskAutoencoder& ae,
                                  RngStream& rng);

/// The two above plus the backbone, which is pretrained unless one is given.
PipelineModels prepare_models(const ExperimentConfig& config, const std::vector<ImageSample>& train,
                              const std::vector<std::string>& seed_ids, RngStream& rng,
                              const models::Backbone* backbone = nullptr);

/// Everything a round needs besides the state: data, frozen generative
/// models and per-image feature caches.
class ALRunner {
public:
  ALRunner(ExperimentConfig config, std::vector<ImageSample> train, std::vector<ImageSample> test,
           PipelineModels models);

  const ExperimentConfig& config() const { return config_; }
  const std::vector<ImageSample>& train() const { return train_; }
  const std::vector<ImageSample>& test() const { return test_; }
  const ImageSample& train_sample(const std::string& id) const;

  /// Round 0 state: the given seed ids labeled and a fresh classifier.
  ALState initial_state(const std::vector<std::string>& seed_ids, const RngStream& root) const;

  /// Train, evaluate, check stopping and, unless stopped, select the next
  /// annotations. Per-round randomness comes from `root/round-<r>`.
  ALState round(const ALState& state, const RngStream& root);

  /// Classifier trained on the whole training split.
  metrics::EvalReport full_data_baseline(const RngStream& root);

private:
  // Caches are keyed by sample id; the backbone is frozen for the whole run.
  const std::vector<double>& augmented_features(const models::Backbone& backbone, const ImageSample& sample,
                                                const RngStream& root);
  const std::vector<double>& raw_features(const models::Backbone& backbone, const ImageSample& sample);
  metrics::EvalReport evaluate(const models::ClassifierModel& classifier,
                               const std::optional<models::SegmentationModel>& segmenter);

  ExperimentConfig config_;
  std::vector<ImageSample> train_;
  std::vector<ImageSample> test_;
  std::map<std::string, std::size_t> train_index_;
  PipelineModels models_;
  std::map<std::string, std::vector<double>> augmented_cache_;
  std::map<std::string, std::vector<double>> raw_cache_;
  std::vector<double> test_features_;
};

ALState al_round(const ALState& state, ALRunner& runner, const RngStream& root);

struct RunOptions {
  /// state.ckpt, backbone.ckpt, autoencoder.ckpt and generator.ckpt live here.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Per-round report, rewritten in full after every round.
  std::optional<std::filesystem::path> report_path;
  bool resume = false;
  /// Called after each round's checkpoint; returning false stops the run
  /// there as if the process had been killed.
  std::function<bool(const ALState&)> after_round;
  /// Pretrained models to use instead of training new ones. Only models
  /// trained by run_al itself are written to the checkpoint directory.
  const PipelineModels* models = nullptr;
  /// Pretrained backbone to use when the other models are trained here.
  const models::Backbone* backbone = nullptr;
};

struct RunResult {
  ALState state;
  bool interrupted = false;
};

/// Root stream of a run.
RngStream run_stream(const ExperimentConfig& config);

RunResult run_al(const ExperimentConfig& config, const DatasetManifest& manifest, const RunOptions& options = {});
/// Same with samples already loaded (train split first, then test).
RunResult run_al(const ExperimentConfig& config, const DatasetManifest& manifest,
                 const std::vector<ImageSample>& samples, const RunOptions& options);

}  // namespace alforge::alloop
