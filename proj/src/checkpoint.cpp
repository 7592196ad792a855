#include "trajcast/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace trajcast {

namespace {

constexpr char kMagic[4] = {'T', 'J', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_i64(std::ostream& os, int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
int64_t read_i64(std::istream& is) {
  int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::string& config_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<uint32_t>(config_json.size()));
  os.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
  write_u32(os, static_cast<uint32_t>(params.all().size()));
  for (const auto& [name, p] : params.all()) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const Tensor& t = p.value();
    write_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) write_i64(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  uint32_t cfg_len = read_u32(is);
  ckpt.config_json.resize(cfg_len);
  is.read(ckpt.config_json.data(), cfg_len);
  uint32_t count = read_u32(is);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t ndim = read_u32(is);
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) d = read_i64(is);
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  return ckpt;
}

void restore_params(ParamStore& params, const Checkpoint& ckpt) {
  for (auto& [name, p] : params.all()) {
    if (ckpt.tensors.find(name) == ckpt.tensors.end())
      throw std::runtime_error("checkpoint missing parameter '" + name + "'");
  }
  for (const auto& [name, t] : ckpt.tensors) {
    auto it = params.all().find(name);
    if (it == params.all().end()) {
      params.all().emplace(name, Var(t, /*requires_grad=*/true));
      continue;
    }
    if (t.shape != it->second.shape())
      throw std::runtime_error("checkpoint shape mismatch for '" + name + "': " +
                               Tensor::shape_str(t.shape) + " vs " +
                               Tensor::shape_str(it->second.shape()));
    it->second.value_mut() = t;
  }
}

}  // namespace trajcast
