#pragma once

#include <stdexcept>
#include <string>

namespace stft {

// Dimension / shape contract violations (mismatched operands, bad ranks).
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and serialization failures; message carries the offending path.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric error states (non-finite values where finiteness is required).
struct ValueError : std::runtime_error {
    explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stft
