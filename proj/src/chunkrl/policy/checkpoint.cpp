#include "chunkrl/policy/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::policy {

namespace {
constexpr char kMagic[4] = {'C', 'K', 'R', 'L'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    u |= static_cast<std::make_unsigned_t<T>>(bytes[i]) << (8 * i);
  return static_cast<T>(u);
}
} // namespace

void save_checkpoint(const PolicyNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  const PolicyDescriptor& d = net.descriptor();
  for (int field : {d.obs_dim, d.hidden, d.trunk_layers, d.value_hidden, d.vocab, d.C, d.M})
    write_le<std::int32_t>(out, field);
  write_le<std::uint64_t>(out, net.num_params());
  for (double v : net.params())
    write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out)
    throw Error("checkpoint write failed: " + path);
}

PolicyNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("bad checkpoint magic: " + path);
  std::uint32_t version = read_le<std::uint32_t>(in);
  if (version != kVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  PolicyDescriptor d;
  d.obs_dim = read_le<std::int32_t>(in);
  d.hidden = read_le<std::int32_t>(in);
  d.trunk_layers = read_le<std::int32_t>(in);
  d.value_hidden = read_le<std::int32_t>(in);
  d.vocab = read_le<std::int32_t>(in);
  d.C = read_le<std::int32_t>(in);
  d.M = read_le<std::int32_t>(in);
  std::uint64_t count = read_le<std::uint64_t>(in);
  PolicyNet net(d);
  if (count != net.num_params())
    throw Error("checkpoint parameter count mismatch");
  std::vector<double> params(count);
  for (std::uint64_t i = 0; i < count; ++i)
    params[i] = std::bit_cast<double>(read_le<std::uint64_t>(in));
  if (!in)
    throw Error("truncated checkpoint: " + path);
  net.set_params(std::move(params));
  return net;
}

} // namespace chunkrl::policy
