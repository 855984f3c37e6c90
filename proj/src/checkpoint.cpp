#include "gdistill/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>
#include <string>

namespace gdistill {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& file) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error(file.string() + ": truncated checkpoint");
  }
  return v;
}

void put_matrix(std::ofstream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix get_matrix(std::ifstream& in, const std::filesystem::path& file, Index rows, Index cols) {
  Matrix m(rows, cols);
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw std::runtime_error(file.string() + ": truncated checkpoint");
  }
  return m;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& file, std::array<char, 4> magic,
                      const CheckpointPayload& payload) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(file.string() + ": cannot write checkpoint");
  out.write(magic.data(), 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(payload.layers.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(payload.extras.size()));
  for (const auto& layer : payload.layers) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(layer.in_dim()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(layer.out_dim()));
  }
  for (const auto& m : payload.extras) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  }
  for (const auto& layer : payload.layers) {
    put_matrix(out, layer.weight);
    put_matrix(out, layer.bias);
  }
  for (const auto& m : payload.extras) put_matrix(out, m);
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

CheckpointPayload read_checkpoint(const std::filesystem::path& file, std::array<char, 4> magic) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error(file.string() + ": cannot open checkpoint");
  std::array<char, 4> got{};
  if (!in.read(got.data(), 4) || got != magic) {
    throw std::runtime_error(file.string() + ": bad magic, expected " +
                             std::string(magic.begin(), magic.end()));
  }
  const auto version = get<std::uint32_t>(in, file);
  if (version != kCheckpointVersion) {
    throw std::runtime_error(file.string() + ": unsupported checkpoint version " +
                             std::to_string(version));
  }
  const auto layer_count = get<std::uint32_t>(in, file);
  const auto extra_count = get<std::uint32_t>(in, file);
  std::vector<std::pair<Index, Index>> layer_dims, extra_dims;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const auto a = static_cast<Index>(get<std::uint64_t>(in, file));
    const auto b = static_cast<Index>(get<std::uint64_t>(in, file));
    layer_dims.emplace_back(a, b);
  }
  for (std::uint32_t i = 0; i < extra_count; ++i) {
    const auto a = static_cast<Index>(get<std::uint64_t>(in, file));
    const auto b = static_cast<Index>(get<std::uint64_t>(in, file));
    extra_dims.emplace_back(a, b);
  }
  CheckpointPayload payload;
  for (const auto& [r, c] : layer_dims) {
    DenseLayer layer;
    layer.weight = get_matrix(in, file, r, c);
    layer.bias = get_matrix(in, file, 1, c);
    payload.layers.push_back(std::move(layer));
  }
  for (const auto& [r, c] : extra_dims) payload.extras.push_back(get_matrix(in, file, r, c));
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error(file.string() + ": trailing bytes after checkpoint payload");
  }
  return payload;
}

}  // namespace gdistill
