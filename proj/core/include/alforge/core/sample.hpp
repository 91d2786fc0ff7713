#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "alforge/core/grid.hpp"
#include "alforge/maskops/perturbation_spec.hpp"

namespace alforge {

enum class Label { Normal, Nodule };
enum class Provenance { Real, Synthetic };

inline constexpr int kNumClasses = 2;
inline int class_index(Label label) { return label == Label::Nodule ? 1 : 0; }
inline Label label_from_index(int index) { return index == 1 ? Label::Nodule : Label::Normal; }

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);
Label parse_label(std::string_view text);
Provenance parse_provenance(std::string_view text);

struct ImageSample {
  std::string id;
  Image pixels;
  Mask mask;
  Label label = Label::Normal;
  Provenance provenance = Provenance::Real;
  std::optional<std::string> parent_id;
  std::optional<maskops::PerturbationSpec> perturbation;
};

/// Checks shape agreement, intensity range, mask binarity and the
/// synthetic-lineage fields. Throws a data error naming the sample.
void validate(const ImageSample& sample);

/// Writes `<stem>.pgm` (16-bit), `<stem>_mask.pgm` and `<stem>.meta` into
/// `directory`. Pixels should be 16-bit quantized for a lossless round trip.
void save_sample(const std::filesystem::path& directory, const ImageSample& sample);
ImageSample load_sample(const std::filesystem::path& directory, std::string_view id);

}  // namespace alforge
