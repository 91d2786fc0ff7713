#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "alforge/core/sample.hpp"

namespace alforge {

enum class Split { Train, Test };
std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct ManifestRecord {
  std::filesystem::path image_path;  // absolute after loading
  std::filesystem::path mask_path;
  Label label = Label::Normal;
  Split split = Split::Train;

  /// Sample id: the image file stem.
  std::string id() const { return image_path.stem().string(); }
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  /// counts[split][class]
  std::array<std::array<std::size_t, kNumClasses>, 2> class_counts() const;
  std::size_t count(Label label) const;
};

inline constexpr const char* kManifestHeader = "image_path,mask_path,label,split";
inline constexpr const char* kDataDirEnv = "AL_FORGE_DATA_DIR";

/// Parses and validates a manifest. Relative paths resolve against the
/// manifest's directory, or against $AL_FORGE_DATA_DIR when it is set.
DatasetManifest load_manifest(const std::filesystem::path& path);
/// Paths are written relative to the manifest directory when possible.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

ImageSample load_record(const ManifestRecord& record);
std::vector<ImageSample> load_samples(const DatasetManifest& manifest);

}  // namespace alforge
