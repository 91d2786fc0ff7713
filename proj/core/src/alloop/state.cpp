#include "alforge/alloop/state.hpp"

#include <cstdio>
#include <sstream>

#include "alforge/core/error.hpp"
#include "alforge/core/keyvalue.hpp"
#include "alforge/nn/checkpoint.hpp"

namespace alforge::alloop {
namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_token(const std::string& s) {
  if (s.empty() || s.find_first_of(";|,=\n\r") != std::string::npos)
    throw_error(ErrorCategory::Data, "state: id '" + s + "' contains a reserved character");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::Plateau: return "plateau";
    case StopReason::PoolExhausted: return "pool_exhausted";
    case StopReason::MaxRounds: return "max_rounds";
  }
  return "none";
}

StopReason parse_stop_reason(std::string_view t) {
  if (t == "none") return StopReason::None;
  if (t == "plateau") return StopReason::Plateau;
  if (t == "pool_exhausted") return StopReason::PoolExhausted;
  if (t == "max_rounds") return StopReason::MaxRounds;
  throw_error(ErrorCategory::Data, "state: unknown stop reason '" + std::string(t) + "'");
}

void save_state(const std::filesystem::path& path, ALState& s) {
  nn::Checkpoint cp;
  auto& d = cp.descriptor;
  d["kind"] = "al_state";
  d["format"] = std::to_string(kStateFormat);
  d["round"] = std::to_string(s.round);
  d["stopped"] = s.stopped ? "1" : "0";
  d["reason"] = std::string(to_string(s.reason));
  d["rng_state"] = s.rng_state;
  for (const auto& id : s.labeled_ids) check_token(id);
  d["labeled_ids"] = join(s.labeled_ids, ',');

  std::vector<std::string> records;
  for (const auto& c : s.candidate_records) {
    check_token(c.id);
    check_token(c.source_id);
    records.push_back(c.id + "|" + c.source_id + "|" + std::string(to_string(c.label)) + "|" + real(c.score));
  }
  d["candidates"] = join(records, ';');

  std::vector<std::string> rows;
  for (const auto& r : s.history) rows.push_back(metrics::format_row(r));
  d["history"] = join(rows, ';');

  for (const auto& line : split(serialize(s.config), '\n')) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    d["config." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  d["synthetic_count"] = std::to_string(s.synthetic_labeled.size());
  for (std::size_t i = 0; i < s.synthetic_labeled.size(); ++i) {
    const ImageSample& x = s.synthetic_labeled[i];
    check_token(x.id);
    const std::string key = "synthetic." + std::to_string(i);
    d[key] = x.id + "|" + x.parent_id.value_or("") + "|" + std::string(to_string(x.label));
    cp.arrays.push_back({key + ".pixels", nn::ArrayKind::Extra, {x.pixels.rows(), x.pixels.cols()},
                         std::vector<double>(x.pixels.values().begin(), x.pixels.values().end())});
    std::vector<double> mask(x.mask.values().begin(), x.mask.values().end());
    cp.arrays.push_back({key + ".mask", nn::ArrayKind::Extra, {x.mask.rows(), x.mask.cols()}, std::move(mask)});
  }

  const nn::Checkpoint model = models::to_checkpoint(s.classifier);
  for (const auto& [k, v] : model.descriptor) d["classifier." + k] = v;
  for (auto a : model.arrays) {
    a.name = "classifier." + a.name;
    cp.arrays.push_back(std::move(a));
  }
  nn::write_checkpoint(path, cp, nn::DType::Float64);
}

ALState load_state(const std::filesystem::path& path) {
  const nn::Checkpoint cp = nn::read_checkpoint(path);
  if (cp.get("kind") != "al_state") throw_error(ErrorCategory::Data, path.string() + " is not an AL state archive");
  if (cp.get("format") != std::to_string(kStateFormat))
    throw_error(ErrorCategory::Data, path.string() + ": unsupported state format " + cp.get("format"));
  ALState s;
  s.round = std::stoi(cp.get("round"));
  s.stopped = cp.get("stopped") == "1";
  s.reason = parse_stop_reason(cp.get("reason"));
  s.rng_state = cp.get("rng_state");
  s.labeled_ids = split(cp.get("labeled_ids"), ',');

  for (const auto& rec : split(cp.get("candidates"), ';')) {
    const auto f = split(rec, '|');
    if (f.size() != 4) throw_error(ErrorCategory::Data, "state: malformed candidate record '" + rec + "'");
    s.candidate_records.push_back({f[0], f[1], parse_label(f[2]), std::stod(f[3])});
  }
  for (const auto& row : split(cp.get("history"), ';')) s.history.push_back(metrics::parse_row(row));

  std::map<std::string, std::string> config_values;
  for (const auto& [k, v] : cp.descriptor)
    if (k.rfind("config.", 0) == 0) config_values[k.substr(7)] = v;
  const auto unknown = apply_config_values(s.config, config_values);
  if (!unknown.empty()) throw_error(ErrorCategory::Data, "state: unknown config key '" + unknown.front() + "'");

  const int n_syn = std::stoi(cp.get("synthetic_count"));
  for (int i = 0; i < n_syn; ++i) {
    const std::string key = "synthetic." + std::to_string(i);
    const auto f = split(cp.get(key), '|');
    if (f.size() != 3) throw_error(ErrorCategory::Data, "state: malformed synthetic record " + key);
    ImageSample x;
    x.id = f[0];
    x.parent_id = f[1];
    x.label = parse_label(f[2]);
    x.provenance = Provenance::Synthetic;
    const nn::NamedArray* px = cp.find(key + ".pixels");
    const nn::NamedArray* mk = cp.find(key + ".mask");
    if (!px || !mk || px->shape.size() != 2 || mk->shape != px->shape)
      throw_error(ErrorCategory::Data, "state: missing arrays for " + key);
    x.pixels = Image(px->shape[0], px->shape[1], px->values);
    x.mask = Mask(mk->shape[0], mk->shape[1]);
    for (std::size_t j = 0; j < x.mask.size(); ++j) x.mask.values()[j] = mk->values[j] != 0.0 ? 1 : 0;
    s.synthetic_labeled.push_back(std::move(x));
  }

  nn::Checkpoint model;
  for (const auto& [k, v] : cp.descriptor)
    if (k.rfind("classifier.", 0) == 0) model.descriptor[k.substr(11)] = v;
  for (const auto& a : cp.arrays)
    if (a.name.rfind("classifier.", 0) == 0) {
      nn::NamedArray b = a;
      b.name = a.name.substr(11);
      model.arrays.push_back(std::move(b));
    }
  s.classifier = models::classifier_from_checkpoint(model);
  return s;
}

}  // namespace alforge::alloop
