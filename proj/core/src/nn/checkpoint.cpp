#include "alforge/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "alforge/core/error.hpp"
#include "alforge/core/keyvalue.hpp"

namespace alforge::nn {
namespace {

constexpr char kMagic[8] = {'A', 'L', 'F', 'G', 'C', 'K', 'P', 'T'};

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

private:
  std::ostream& out_;
};

class Reader {
public:
  Reader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}
  std::uint8_t u8() {
    const int c = in_.get();
    if (c == EOF) fail("unexpected end of file");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::string bytes() {
    const std::uint32_t n = u32();
    if (n > (1u << 28)) fail("implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (static_cast<std::uint32_t>(in_.gcount()) != n) fail("truncated string");
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  [[noreturn]] void fail(const std::string& what) {
    throw_error(ErrorCategory::Data, "checkpoint '" + origin_ + "': " + what);
  }

private:
  std::istream& in_;
  std::string origin_;
};

}  // namespace

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const std::string& Checkpoint::get(const std::string& key) const {
  auto it = descriptor.find(key);
  if (it == descriptor.end()) throw_error(ErrorCategory::Data, "checkpoint descriptor lacks '" + key + "'");
  return it->second;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, DType dtype) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw_error(ErrorCategory::Data, "cannot write checkpoint '" + path.string() + "'");
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    std::ostringstream desc;
    for (const auto& [k, v] : checkpoint.descriptor) desc << k << " = " << v << '\n';
    w.bytes(desc.str());
    w.u32(static_cast<std::uint32_t>(checkpoint.arrays.size()));
    for (const auto& a : checkpoint.arrays) {
      if (a.values.size() != numel(a.shape))
        throw_error(ErrorCategory::Data, "checkpoint array '" + a.name + "' has inconsistent shape");
      w.bytes(a.name);
      w.u8(static_cast<std::uint8_t>(a.kind));
      w.u8(static_cast<std::uint8_t>(dtype));
      w.u32(static_cast<std::uint32_t>(a.shape.size()));
      for (int d : a.shape) w.u32(static_cast<std::uint32_t>(d));
      for (double v : a.values) {
        if (dtype == DType::Float32) {
          w.f32(static_cast<float>(v));
        } else {
          w.f64(v);
        }
      }
    }
    if (!out) throw_error(ErrorCategory::Data, "failed writing checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCategory::Data, "checkpoint '" + path.string() + "' not found");
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0) r.fail("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  Checkpoint cp;
  cp.descriptor = parse_key_values(r.bytes(), path.string());
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.bytes();
    const std::uint8_t kind = r.u8();
    if (kind > 2) r.fail("bad array kind");
    a.kind = static_cast<ArrayKind>(kind);
    const std::uint8_t dtype = r.u8();
    if (dtype != 1 && dtype != 2) r.fail("bad dtype");
    const std::uint32_t rank = r.u32();
    if (rank > 8) r.fail("implausible rank");
    for (std::uint32_t d = 0; d < rank; ++d) a.shape.push_back(static_cast<int>(r.u32()));
    a.values.resize(numel(a.shape));
    for (double& v : a.values) v = dtype == 1 ? static_cast<double>(r.f32()) : r.f64();
    cp.arrays.push_back(std::move(a));
  }
  return cp;
}

void restore_array(const Checkpoint& checkpoint, const std::string& name, const Shape& shape,
                   std::span<double> destination) {
  const NamedArray* a = checkpoint.find(name);
  if (!a) throw_error(ErrorCategory::Data, "checkpoint lacks array '" + name + "'");
  if (a->shape != shape)
    throw_error(ErrorCategory::Data, "checkpoint array '" + name + "' has shape " + to_string(a->shape) +
                                         ", model expects " + to_string(shape));
  std::copy(a->values.begin(), a->values.end(), destination.begin());
}

}  // namespace alforge::nn
