#include <bit>
#include <cstring>
#include <fstream>

#include "fewrays/errors.hpp"
#include "fewrays/field.hpp"

namespace fewrays {
namespace {

constexpr char kMagic[4] = {'F', 'R', 'V', 'G'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <class T>
void put(std::ofstream& out, T value) {
  value = to_little_endian(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError("truncated checkpoint: " + path.string());
  return to_little_endian(value);
}

}  // namespace

void save_checkpoint(const VoxelField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.resolution()));
  for (int a = 0; a < 3; ++a) put<double>(out, field.bounds().lo[a]);
  for (int a = 0; a < 3; ++a) put<double>(out, field.bounds().hi[a]);
  for (double x : field.raw_density()) put<double>(out, x);
  for (double x : field.raw_rgb()) put<double>(out, x);
  if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

VoxelField load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a voxel field checkpoint (bad magic): " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version) + ": " + path.string());
  const auto resolution = get<std::uint32_t>(in, path);
  if (resolution < 2 || resolution > 4096) throw DataError("implausible checkpoint resolution: " + path.string());
  Aabb bounds;
  for (int a = 0; a < 3; ++a) bounds.lo[a] = get<double>(in, path);
  for (int a = 0; a < 3; ++a) bounds.hi[a] = get<double>(in, path);
  VoxelField field;
  try {
    field = VoxelField(static_cast<int>(resolution), bounds);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }
  for (double& x : field.raw_density()) x = get<double>(in, path);
  for (double& x : field.raw_rgb()) x = get<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in checkpoint: " + path.string());
  return field;
}

}  // namespace fewrays
