#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alforge/nn/layers.hpp"

namespace alforge::nn {

// Single-file archive:
//   "ALFGCKPT" | u32 version | u32 n + descriptor text (key = value lines)
//   | u32 count | count x { u32 n + name | u8 kind | u8 dtype | u32 rank
//   | rank x u32 dim | values }
// All integers and floats little-endian. dtype 1 = float32, 2 = float64.

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { Float32 = 1, Float64 = 2 };
enum class ArrayKind : std::uint8_t { Parameter = 0, Buffer = 1, Extra = 2 };

struct NamedArray {
  std::string name;
  ArrayKind kind = ArrayKind::Parameter;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::map<std::string, std::string> descriptor;
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
  const std::string& get(const std::string& key) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint,
                      DType dtype = DType::Float32);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Appends every parameter and buffer of `model` under `prefix`.
template <typename Model>
void capture(Model& model, const std::string& prefix, Checkpoint& out) {
  ParameterVisitor v{[&](const std::string& name, Tensor& t) {
                       out.arrays.push_back({name, ArrayKind::Parameter, t.shape(),
                                             std::vector<double>(t.data().begin(), t.data().end())});
                     },
                     [&](const std::string& name, std::vector<double>& b) {
                       out.arrays.push_back({name, ArrayKind::Buffer, Shape{static_cast<int>(b.size())}, b});
                     }};
  model.visit(prefix, v);
}

void restore_array(const Checkpoint& checkpoint, const std::string& name, const Shape& shape,
                   std::span<double> destination);

/// Overwrites the model's parameters and buffers; shapes must match.
template <typename Model>
void restore(Model& model, const std::string& prefix, const Checkpoint& checkpoint) {
  ParameterVisitor v{[&](const std::string& name, Tensor& t) { restore_array(checkpoint, name, t.shape(), t.data()); },
                     [&](const std::string& name, std::vector<double>& b) {
                       restore_array(checkpoint, name, Shape{static_cast<int>(b.size())}, b);
                     }};
  model.visit(prefix, v);
}

}  // namespace alforge::nn
