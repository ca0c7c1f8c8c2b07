#include "bgm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bgm::nn {

namespace {

constexpr char kMagic[8] = {'B', 'G', 'M', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& params,
                     uint64_t config_fingerprint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<uint64_t>(out, config_fingerprint);
  put<uint32_t>(out, static_cast<uint32_t>(params.count()));
  for (size_t k = 0; k < params.count(); ++k) {
    const auto& name = params.names[k];
    const auto& t = params.tensors[k];
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) put<int32_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);

  Checkpoint ckpt;
  ckpt.config_fingerprint = get<uint64_t>(in);
  const auto count = get<uint32_t>(in);
  for (uint32_t k = 0; k < count; ++k) {
    const auto name_len = get<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = get<uint32_t>(in);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = get<int32_t>(in);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data in " + path);
    ckpt.params.add(std::move(name), std::move(t));
  }
  return ckpt;
}

void check_compatible(const ParamSet& loaded, const ParamSet& expected) {
  if (loaded.count() != expected.count())
    throw std::runtime_error("checkpoint: tensor count mismatch (" +
                             std::to_string(loaded.count()) + " vs " +
                             std::to_string(expected.count()) + ")");
  for (size_t k = 0; k < expected.count(); ++k) {
    if (loaded.names[k] != expected.names[k])
      throw std::runtime_error("checkpoint: tensor name mismatch at slot " + std::to_string(k) +
                               ": " + loaded.names[k] + " vs " + expected.names[k]);
    if (!loaded.tensors[k].same_shape(expected.tensors[k]))
      throw std::runtime_error("checkpoint: shape mismatch for " + expected.names[k] + ": " +
                               loaded.tensors[k].shape_str() + " vs " +
                               expected.tensors[k].shape_str());
  }
}

}  // namespace bgm::nn
