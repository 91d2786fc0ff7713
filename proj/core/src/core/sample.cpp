#include "alforge/core/sample.hpp"

#include <fstream>
#include <sstream>

#include "alforge/core/error.hpp"
#include "alforge/core/keyvalue.hpp"
#include "alforge/core/raster_io.hpp"

namespace alforge {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw_error(ErrorCategory::Data, where + ": expected 'key = value'");
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw_error(ErrorCategory::Data, where + ": empty key");
    if (!out.emplace(key, value).second) throw_error(ErrorCategory::Data, where + ": duplicate key '" + key + "'");
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCategory::Data, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str(), path.string());
}

std::string_view to_string(Label label) { return label == Label::Nodule ? "nodule" : "normal"; }

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Synthetic ? "synthetic" : "real";
}

Label parse_label(std::string_view text) {
  if (text == "normal") return Label::Normal;
  if (text == "nodule") return Label::Nodule;
  throw_error(ErrorCategory::Data, "unknown label '" + std::string(text) + "'");
}

Provenance parse_provenance(std::string_view text) {
  if (text == "real") return Provenance::Real;
  if (text == "synthetic") return Provenance::Synthetic;
  throw_error(ErrorCategory::Data, "unknown provenance '" + std::string(text) + "'");
}

void validate(const ImageSample& sample) {
  auto fail = [&](const std::string& what) {
    throw_error(ErrorCategory::Data, "sample '" + sample.id + "': " + what);
  };
  if (sample.id.empty()) fail("empty id");
  if (!sample.pixels.same_shape(sample.mask)) fail("pixels and mask differ in shape");
  for (double v : sample.pixels.values()) {
    if (!(v >= 0.0 && v <= 1.0)) fail("intensity outside [0, 1]");
  }
  for (auto m : sample.mask.values()) {
    if (m > 1) fail("mask is not binary");
  }
  if (sample.provenance == Provenance::Synthetic && (!sample.parent_id || !sample.perturbation))
    fail("synthetic sample lacks parent_id or perturbation");
}

void save_sample(const std::filesystem::path& directory, const ImageSample& sample) {
  validate(sample);
  std::filesystem::create_directories(directory);
  write_image(directory / (sample.id + ".pgm"), sample.pixels, BitDepth::Sixteen);
  write_mask(directory / (sample.id + "_mask.pgm"), sample.mask);
  std::ofstream meta(directory / (sample.id + ".meta"));
  if (!meta) throw_error(ErrorCategory::Data, "cannot write metadata for '" + sample.id + "'");
  meta << "id = " << sample.id << '\n'
       << "label = " << to_string(sample.label) << '\n'
       << "provenance = " << to_string(sample.provenance) << '\n';
  if (sample.parent_id) meta << "parent_id = " << *sample.parent_id << '\n';
  if (sample.perturbation) meta << maskops::serialize(*sample.perturbation);
}

ImageSample load_sample(const std::filesystem::path& directory, std::string_view id) {
  const std::string stem(id);
  const auto meta = read_key_value_file(directory / (stem + ".meta"));
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw_error(ErrorCategory::Data, "metadata for '" + stem + "' lacks '" + key + "'");
    return it->second;
  };
  ImageSample sample;
  sample.id = get("id");
  sample.label = parse_label(get("label"));
  sample.provenance = parse_provenance(get("provenance"));
  if (auto it = meta.find("parent_id"); it != meta.end()) sample.parent_id = it->second;
  if (meta.contains("perturbation.procedures")) sample.perturbation = maskops::deserialize(meta);
  sample.pixels = read_image(directory / (stem + ".pgm"));
  sample.mask = read_mask(directory / (stem + "_mask.pgm"));
  validate(sample);
  return sample;
}

}  // namespace alforge
