#include "alforge/core/manifest.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "alforge/core/error.hpp"
#include "alforge/core/keyvalue.hpp"
#include "alforge/core/raster_io.hpp"

namespace alforge {

namespace fs = std::filesystem;

std::string_view to_string(Split split) { return split == Split::Test ? "test" : "train"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw_error(ErrorCategory::Data, "unknown split '" + std::string(text) + "'");
}

std::array<std::array<std::size_t, kNumClasses>, 2> DatasetManifest::class_counts() const {
  std::array<std::array<std::size_t, kNumClasses>, 2> counts{};
  for (const auto& r : records) ++counts[r.split == Split::Test][class_index(r.label)];
  return counts;
}

std::size_t DatasetManifest::count(Label label) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.label == label;
  return n;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCategory::Data, "manifest '" + path.string() + "' not found");

  fs::path root = path.parent_path();
  if (const char* env = std::getenv(kDataDirEnv); env && *env) root = env;

  std::string line;
  if (!std::getline(in, line) || trim(line) != kManifestHeader)
    throw_error(ErrorCategory::Data, "manifest '" + path.string() + "': expected header '" +
                                         std::string(kManifestHeader) + "'");
  DatasetManifest manifest;
  std::set<fs::path> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 4) throw_error(ErrorCategory::Data, where + ": expected 4 columns");

    ManifestRecord record;
    auto resolve = [&](const std::string& p) {
      fs::path q(p);
      return q.is_absolute() ? q : root / q;
    };
    record.image_path = resolve(cells[0]);
    record.mask_path = resolve(cells[1]);
    record.label = parse_label(cells[2]);
    record.split = parse_split(cells[3]);
    if (!fs::exists(record.image_path))
      throw_error(ErrorCategory::Data, where + ": image '" + cells[0] + "' does not exist");
    if (!fs::exists(record.mask_path))
      throw_error(ErrorCategory::Data, where + ": mask '" + cells[1] + "' for record '" + cells[0] + "' does not exist");
    if (!seen.insert(record.image_path).second || !seen.insert(record.mask_path).second)
      throw_error(ErrorCategory::Data, where + ": duplicate path");
    manifest.records.push_back(std::move(record));
  }
  if (manifest.records.empty()) throw_error(ErrorCategory::Data, "manifest '" + path.string() + "': no records");
  std::set<std::string> ids;
  for (const auto& r : manifest.records) {
    if (!ids.insert(r.id()).second) throw_error(ErrorCategory::Data, "duplicate sample id '" + r.id() + "'");
  }
  return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCategory::Data, "cannot write manifest '" + path.string() + "'");
  const fs::path base = path.parent_path().empty() ? fs::current_path() : fs::absolute(path.parent_path());
  auto rel = [&](const fs::path& p) {
    const fs::path r = fs::absolute(p).lexically_relative(base);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    out << rel(r.image_path) << ',' << rel(r.mask_path) << ',' << to_string(r.label) << ','
        << to_string(r.split) << '\n';
  }
}

ImageSample load_record(const ManifestRecord& record) {
  ImageSample s;
  s.id = record.id();
  s.pixels = read_image(record.image_path);
  s.mask = read_mask(record.mask_path);
  s.label = record.label;
  s.provenance = Provenance::Real;
  validate(s);
  return s;
}

std::vector<ImageSample> load_samples(const DatasetManifest& manifest) {
  std::vector<ImageSample> out;
  out.reserve(manifest.records.size());
  for (const auto& r : manifest.records) out.push_back(load_record(r));
  return out;
}

}  // namespace alforge
