#pragma once

#include <cstdint>
#include <filesystem>

#include "stft/tensor.hpp"

namespace stft {

// Binary tensor file: magic "STFT", u8 dtype code (0 = f32, 1 = f64),
// u8 rank, rank x u32 dims, little-endian payload.
enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
constexpr DType dtype_of() {
    return std::is_same_v<T, float> ? DType::f32 : DType::f64;
}

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t);

// Throws IoError (with the path in the message) on missing file, bad magic,
// dtype mismatch, dim overflow, or truncation.
template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path);

}  // namespace stft
