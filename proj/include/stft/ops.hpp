#pragma once

#include <vector>

#include "stft/tensor.hpp"

namespace stft {

// Element-wise binary ops require identical shapes; no broadcasting.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b);

// affine: s * x + c applied element-wise.
template <typename T> Tensor<T> affine(const Tensor<T>& a, T s, T c);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T> Tensor<T> exp(const Tensor<T>& a);
template <typename T> Tensor<T> log(const Tensor<T>& a);
template <typename T> Tensor<T> abs(const Tensor<T>& a);
// Pass-through gradient inside [lo, hi], zero where clamped.
template <typename T> Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);

// Metadata-only when contiguous (always, here): shares storage with input.
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
// 2-D transpose.
template <typename T> Tensor<T> transpose(const Tensor<T>& a);
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis);
template <typename T> Tensor<T> slice(const Tensor<T>& a, int axis, std::int64_t start, std::int64_t len);

// Full reductions to a rank-0 scalar; accumulate in double to keep the
// finite-difference checks tight in f32.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Softmax over the last axis, max-shifted for stability.
template <typename T> Tensor<T> softmax(const Tensor<T>& a);

// Cross-correlation, kernel k in {1,3}. input [Cin,H,W], weight [Cout,Cin,k,k],
// bias [Cout]; zero padding `pad`, output [Cout,H',W'] by the standard size rule.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int pad);

// Bilinear interpolation of feature [C,H,W] at (y, x); zero padding outside
// (-1,H)x(-1,W). The coords overload takes yx as a 2-element tensor and is
// differentiable w.r.t. the coordinates as well.
template <typename T> Tensor<T> bilinear_sample(const Tensor<T>& feature, T y, T x);
template <typename T> Tensor<T> bilinear_sample(const Tensor<T>& feature, const Tensor<T>& yx);

namespace detail {

// Value of one [H,W] plane at (y, x) with zero padding.
template <typename T>
inline T bilinear_value(const T* plane, std::int64_t h, std::int64_t w, T y, T x) {
    if (y <= T(-1) || y >= T(h) || x <= T(-1) || x >= T(w)) return T(0);
    const std::int64_t y0 = static_cast<std::int64_t>(std::floor(static_cast<double>(y)));
    const std::int64_t x0 = static_cast<std::int64_t>(std::floor(static_cast<double>(x)));
    const T fy = y - T(y0), fx = x - T(x0);
    const T w00 = (T(1) - fy) * (T(1) - fx), w01 = (T(1) - fy) * fx;
    const T w10 = fy * (T(1) - fx), w11 = fy * fx;
    T v = T(0);
    const bool y0in = y0 >= 0 && y0 < h, y1in = y0 + 1 >= 0 && y0 + 1 < h;
    const bool x0in = x0 >= 0 && x0 < w, x1in = x0 + 1 >= 0 && x0 + 1 < w;
    if (y0in && x0in) v += w00 * plane[y0 * w + x0];
    if (y0in && x1in) v += w01 * plane[y0 * w + x0 + 1];
    if (y1in && x0in) v += w10 * plane[(y0 + 1) * w + x0];
    if (y1in && x1in) v += w11 * plane[(y0 + 1) * w + x0 + 1];
    return v;
}

// Scatter g into the plane gradient at the four sampled neighbors.
template <typename T>
inline void bilinear_backward_plane(T* plane_grad, std::int64_t h, std::int64_t w, T y, T x, T g) {
    if (y <= T(-1) || y >= T(h) || x <= T(-1) || x >= T(w)) return;
    const std::int64_t y0 = static_cast<std::int64_t>(std::floor(static_cast<double>(y)));
    const std::int64_t x0 = static_cast<std::int64_t>(std::floor(static_cast<double>(x)));
    const T fy = y - T(y0), fx = x - T(x0);
    const bool y0in = y0 >= 0 && y0 < h, y1in = y0 + 1 >= 0 && y0 + 1 < h;
    const bool x0in = x0 >= 0 && x0 < w, x1in = x0 + 1 >= 0 && x0 + 1 < w;
    if (y0in && x0in) plane_grad[y0 * w + x0] += g * (T(1) - fy) * (T(1) - fx);
    if (y0in && x1in) plane_grad[y0 * w + x0 + 1] += g * (T(1) - fy) * fx;
    if (y1in && x0in) plane_grad[(y0 + 1) * w + x0] += g * fy * (T(1) - fx);
    if (y1in && x1in) plane_grad[(y0 + 1) * w + x0 + 1] += g * fy * fx;
}

// d(value)/dy and d(value)/dx of the interpolation above.
template <typename T>
inline void bilinear_coord_grad(const T* plane, std::int64_t h, std::int64_t w, T y, T x,
                                T& dvdy, T& dvdx) {
    dvdy = T(0);
    dvdx = T(0);
    if (y <= T(-1) || y >= T(h) || x <= T(-1) || x >= T(w)) return;
    const std::int64_t y0 = static_cast<std::int64_t>(std::floor(static_cast<double>(y)));
    const std::int64_t x0 = static_cast<std::int64_t>(std::floor(static_cast<double>(x)));
    const T fy = y - T(y0), fx = x - T(x0);
    const bool y0in = y0 >= 0 && y0 < h, y1in = y0 + 1 >= 0 && y0 + 1 < h;
    const bool x0in = x0 >= 0 && x0 < w, x1in = x0 + 1 >= 0 && x0 + 1 < w;
    const T v00 = (y0in && x0in) ? plane[y0 * w + x0] : T(0);
    const T v01 = (y0in && x1in) ? plane[y0 * w + x0 + 1] : T(0);
    const T v10 = (y1in && x0in) ? plane[(y0 + 1) * w + x0] : T(0);
    const T v11 = (y1in && x1in) ? plane[(y0 + 1) * w + x0 + 1] : T(0);
    dvdy = (T(1) - fx) * (v10 - v00) + fx * (v11 - v01);
    dvdx = (T(1) - fy) * (v01 - v00) + fy * (v11 - v10);
}

// True when an op with these inputs should record a backward rule.
template <typename T>
inline bool recording(std::initializer_list<const Tensor<T>*> inputs) {
    if (!Tape<T>::active()) return false;
    for (const Tensor<T>* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

}  // namespace detail

}  // namespace stft
