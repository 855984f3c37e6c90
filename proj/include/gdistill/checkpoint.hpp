#pragma once

#include "gdistill/nn.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace gdistill {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 4> kTeacherMagic{'G', 'D', 'T', 'M'};
inline constexpr std::array<char, 4> kStudentMagic{'G', 'D', 'S', 'M'};

/// Layers plus free-standing matrices (the student's similarity transform).
struct CheckpointPayload {
  std::vector<DenseLayer> layers;
  std::vector<Matrix> extras;
};

/// Little-endian layout:
///   magic[4] | u32 version | u32 layer_count | u32 extra_count
///   | layer_count x (u64 in, u64 out) | extra_count x (u64 rows, u64 cols)
///   | per layer: weight (in*out f64, row-major), bias (out f64)
///   | per extra: rows*cols f64, row-major
void write_checkpoint(const std::filesystem::path& file, std::array<char, 4> magic,
                      const CheckpointPayload& payload);

/// Throws std::runtime_error on a magic, version or size mismatch.
CheckpointPayload read_checkpoint(const std::filesystem::path& file, std::array<char, 4> magic);

}  // namespace gdistill
