#include "optomech/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace optomech::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  line += '\n';
  return line;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::system_error(errno, std::generic_category(), "write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

constexpr char kMagic[8] = {'O', 'M', 'T', 'R', 'A', 'C', 'E', '1'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.append(bytes, 8);
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + 8 > bytes.size()) throw std::runtime_error("truncated trace file");
  std::uint64_t bits;
  std::memcpy(&bits, bytes.data() + pos, 8);
  pos += 8;
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

std::string encode_traces(const Traces& t) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.var_count));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.step_count));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.paths.size()));
  put<double>(out, t.sample_interval);
  for (const auto& path : t.paths) {
    for (const Complex& z : path) {
      put<double>(out, z.real());
      put<double>(out, z.imag());
    }
  }
  return out;
}

Traces decode_traces(std::string_view bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("not a trace file");
  }
  std::size_t pos = sizeof kMagic;
  Traces t;
  t.var_count = static_cast<std::int64_t>(get<std::uint64_t>(bytes, pos));
  t.step_count = static_cast<std::int64_t>(get<std::uint64_t>(bytes, pos));
  const auto count = get<std::uint64_t>(bytes, pos);
  t.sample_interval = get<double>(bytes, pos);
  const auto per_path = static_cast<std::size_t>(t.var_count * t.step_count);
  t.paths.resize(count);
  for (auto& path : t.paths) {
    path.resize(per_path);
    for (auto& z : path) {
      const double re = get<double>(bytes, pos);
      const double im = get<double>(bytes, pos);
      z = {re, im};
    }
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes in trace file");
  return t;
}

}  // namespace optomech::io
