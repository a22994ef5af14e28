#include "stft/ops.hpp"

#include <algorithm>
#include <cmath>

namespace stft {

namespace {

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

template <typename T, class FwdFn, class GradFn>
Tensor<T> pointwise_unary(const Tensor<T>& a, FwdFn fwd, GradFn grd) {
    Tensor<T> out(a.shape());
    const T* x = a.data();
    T* y = out.data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) y[i] = fwd(x[i]);
    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res, grd]() mutable {
            const T* g = res.grad();
            const T* x = in.data();
            const T* y = res.data();
            T* ga = in.grad();
            const std::int64_t n = in.numel();
            for (std::int64_t i = 0; i < n; ++i) ga[i] += g[i] * grd(x[i], y[i]);
        });
    }
    return out;
}

// dfa/dfb give the local derivative w.r.t. each operand from (xa, xb, y).
template <typename T, class FwdFn, class GradA, class GradB>
Tensor<T> pointwise_binary(const Tensor<T>& a, const Tensor<T>& b, const char* name, FwdFn fwd,
                           GradA dfa, GradB dfb) {
    check_same_shape(a, b, name);
    Tensor<T> out(a.shape());
    const T* xa = a.data();
    const T* xb = b.data();
    T* y = out.data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) y[i] = fwd(xa[i], xb[i]);
    if (detail::recording<T>({&a, &b})) {
        out.set_requires_grad();
        Tensor<T> ta = a, tb = b, res = out;
        Tape<T>::active()->record([ta, tb, res, dfa, dfb]() mutable {
            const T* g = res.grad();
            const T* xa = ta.data();
            const T* xb = tb.data();
            const T* y = res.data();
            const std::int64_t n = ta.numel();
            if (ta.requires_grad()) {
                T* ga = ta.grad();
                for (std::int64_t i = 0; i < n; ++i) ga[i] += g[i] * dfa(xa[i], xb[i], y[i]);
            }
            if (tb.requires_grad()) {
                T* gb = tb.grad();
                for (std::int64_t i = 0; i < n; ++i) gb[i] += g[i] * dfb(xa[i], xb[i], y[i]);
            }
        });
    }
    return out;
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return pointwise_binary(
        a, b, "add", [](T u, T v) { return u + v; }, [](T, T, T) { return T(1); },
        [](T, T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return pointwise_binary(
        a, b, "sub", [](T u, T v) { return u - v; }, [](T, T, T) { return T(1); },
        [](T, T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return pointwise_binary(
        a, b, "mul", [](T u, T v) { return u * v; }, [](T, T v, T) { return v; },
        [](T u, T, T) { return u; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    return pointwise_binary(
        a, b, "div", [](T u, T v) { return u / v; }, [](T, T v, T) { return T(1) / v; },
        [](T, T v, T y) { return -y / v; });
}

template <typename T>
Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b) {
    return pointwise_binary(
        a, b, "minimum", [](T u, T v) { return u <= v ? u : v; },
        [](T u, T v, T) { return u <= v ? T(1) : T(0); },
        [](T u, T v, T) { return u <= v ? T(0) : T(1); });
}

template <typename T>
Tensor<T> affine(const Tensor<T>& a, T s, T c) {
    return pointwise_unary(
        a, [s, c](T x) { return s * x + c; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
    return affine(a, s, T(0));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    return pointwise_unary(
        a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
    return pointwise_unary(
        a,
        [](T x) {
            return x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                             : std::exp(x) / (T(1) + std::exp(x));
        },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
    return pointwise_unary(
        a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
    return pointwise_unary(
        a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
    return pointwise_unary(
        a, [](T x) { return x < T(0) ? -x : x; }, [](T x, T) { return x < T(0) ? T(-1) : T(1); });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
    return pointwise_unary(
        a, [lo, hi](T x) { return x < lo ? lo : (x > hi ? hi : x); },
        [lo, hi](T x, T) { return (x > lo && x < hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
    return a.view(std::move(shape));
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
    if (a.rank() != 2) throw ShapeError("transpose needs a 2-D tensor, got " + shape_str(a.shape()));
    const std::int64_t m = a.dim(0), n = a.dim(1);
    Tensor<T> out({n, m});
    const T* x = a.data();
    T* y = out.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) y[j * m + i] = x[i * n + j];
    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res, m, n]() mutable {
            const T* g = res.grad();
            T* ga = in.grad();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
        });
    }
    return out;
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis) {
    if (xs.empty()) throw ShapeError("concat of empty list");
    const int rank = xs[0].rank();
    if (axis < 0 || axis >= rank) throw ShapeError("concat axis out of range");
    std::int64_t axis_total = 0;
    for (const auto& x : xs) {
        if (x.rank() != rank) throw ShapeError("concat rank mismatch");
        for (int d = 0; d < rank; ++d)
            if (d != axis && x.dim(d) != xs[0].dim(d))
                throw ShapeError("concat shape mismatch " + shape_str(x.shape()) + " vs " +
                                 shape_str(xs[0].shape()));
        axis_total += x.dim(axis);
    }
    Shape out_shape = xs[0].shape();
    out_shape[static_cast<std::size_t>(axis)] = axis_total;
    Tensor<T> out(out_shape);

    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= xs[0].dim(d);
    for (int d = axis + 1; d < rank; ++d) inner *= xs[0].dim(d);

    T* y = out.data();
    std::int64_t offset = 0;  // in axis units
    for (const auto& x : xs) {
        const std::int64_t block = x.dim(axis) * inner;
        const T* src = x.data();
        for (std::int64_t o = 0; o < outer; ++o)
            std::copy(src + o * block, src + (o + 1) * block, y + o * axis_total * inner + offset * inner);
        offset += x.dim(axis);
    }

    bool rec = false;
    if (Tape<T>::active())
        for (const auto& x : xs) rec |= x.requires_grad();
    if (rec) {
        out.set_requires_grad();
        std::vector<Tensor<T>> ins = xs;
        Tensor<T> res = out;
        Tape<T>::active()->record([ins, res, outer, inner, axis_total, axis]() mutable {
            const T* g = res.grad();
            std::int64_t offset = 0;
            for (auto& x : ins) {
                const std::int64_t adim = x.dim(axis);
                if (x.requires_grad()) {
                    T* gx = x.grad();
                    for (std::int64_t o = 0; o < outer; ++o) {
                        const T* gs = g + o * axis_total * inner + offset * inner;
                        T* gd = gx + o * adim * inner;
                        for (std::int64_t i = 0; i < adim * inner; ++i) gd[i] += gs[i];
                    }
                }
                offset += adim;
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> slice(const Tensor<T>& a, int axis, std::int64_t start, std::int64_t len) {
    const int rank = a.rank();
    if (axis < 0 || axis >= rank) throw ShapeError("slice axis out of range");
    if (start < 0 || len <= 0 || start + len > a.dim(axis))
        throw ShapeError("slice range [" + std::to_string(start) + "," + std::to_string(start + len) +
                         ") out of bounds for axis size " + std::to_string(a.dim(axis)));
    Shape out_shape = a.shape();
    out_shape[static_cast<std::size_t>(axis)] = len;
    Tensor<T> out(out_shape);

    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= a.dim(d);
    for (int d = axis + 1; d < rank; ++d) inner *= a.dim(d);
    const std::int64_t adim = a.dim(axis);

    const T* x = a.data();
    T* y = out.data();
    for (std::int64_t o = 0; o < outer; ++o)
        std::copy(x + (o * adim + start) * inner, x + (o * adim + start + len) * inner,
                  y + o * len * inner);

    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res, outer, inner, adim, start, len]() mutable {
            const T* g = res.grad();
            T* ga = in.grad();
            for (std::int64_t o = 0; o < outer; ++o) {
                T* gd = ga + (o * adim + start) * inner;
                const T* gs = g + o * len * inner;
                for (std::int64_t i = 0; i < len * inner; ++i) gd[i] += gs[i];
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    double acc = 0.0;
    const T* x = a.data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]);
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res]() mutable {
            const T g = res.grad()[0];
            T* ga = in.grad();
            const std::int64_t n = in.numel();
            for (std::int64_t i = 0; i < n; ++i) ga[i] += g;
        });
    }
    return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
    const std::int64_t n = a.numel();
    double acc = 0.0;
    const T* x = a.data();
    for (std::int64_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]);
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(n)));
    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res, n]() mutable {
            const T g = res.grad()[0] / static_cast<T>(n);
            T* ga = in.grad();
            for (std::int64_t i = 0; i < n; ++i) ga[i] += g;
        });
    }
    return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul needs 2-D tensors, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    if (a.dim(1) != b.dim(0))
        throw ShapeError("matmul inner dimensions differ: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor<T> out({m, n});
    const T* pa = a.data();
    const T* pb = b.data();
    T* py = out.data();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const T av = pa[i * k + kk];
            const T* brow = pb + kk * n;
            T* yrow = py + i * n;
            for (std::int64_t j = 0; j < n; ++j) yrow[j] += av * brow[j];
        }
    if (detail::recording<T>({&a, &b})) {
        out.set_requires_grad();
        Tensor<T> ta = a, tb = b, res = out;
        Tape<T>::active()->record([ta, tb, res, m, k, n]() mutable {
            const T* g = res.grad();
            const T* pa = ta.data();
            const T* pb = tb.data();
            if (ta.requires_grad()) {
                T* ga = ta.grad();
                for (std::int64_t i = 0; i < m; ++i)
                    for (std::int64_t kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        const T* grow = g + i * n;
                        const T* brow = pb + kk * n;
                        for (std::int64_t j = 0; j < n; ++j)
                            acc += static_cast<double>(grow[j]) * static_cast<double>(brow[j]);
                        ga[i * k + kk] += static_cast<T>(acc);
                    }
            }
            if (tb.requires_grad()) {
                T* gb = tb.grad();
                for (std::int64_t kk = 0; kk < k; ++kk)
                    for (std::int64_t i = 0; i < m; ++i) {
                        const T av = pa[i * k + kk];
                        const T* grow = g + i * n;
                        T* gbrow = gb + kk * n;
                        for (std::int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                    }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& a) {
    if (a.rank() < 1) throw ShapeError("softmax needs rank >= 1");
    const std::int64_t d = a.dim(a.rank() - 1);
    const std::int64_t rows = a.numel() / d;
    Tensor<T> out(a.shape());
    const T* x = a.data();
    T* y = out.data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const T* xr = x + r * d;
        T* yr = y + r * d;
        T mx = xr[0];
        for (std::int64_t j = 1; j < d; ++j) mx = std::max(mx, xr[j]);
        double denom = 0.0;
        for (std::int64_t j = 0; j < d; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            denom += static_cast<double>(yr[j]);
        }
        const T inv = static_cast<T>(1.0 / denom);
        for (std::int64_t j = 0; j < d; ++j) yr[j] *= inv;
    }
    if (detail::recording<T>({&a})) {
        out.set_requires_grad();
        Tensor<T> in = a, res = out;
        Tape<T>::active()->record([in, res, rows, d]() mutable {
            const T* g = res.grad();
            const T* y = res.data();
            T* ga = in.grad();
            for (std::int64_t r = 0; r < rows; ++r) {
                const T* gr = g + r * d;
                const T* yr = y + r * d;
                T* gar = ga + r * d;
                double dot = 0.0;
                for (std::int64_t j = 0; j < d; ++j)
                    dot += static_cast<double>(gr[j]) * static_cast<double>(yr[j]);
                for (std::int64_t j = 0; j < d; ++j)
                    gar[j] += yr[j] * (gr[j] - static_cast<T>(dot));
            }
        });
    }
    return out;
}

namespace {

struct ConvDims {
    std::int64_t cin, h, w, cout, k, oh, ow;
    int stride, pad;
};

template <typename T>
ConvDims conv_check(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                    int stride, int pad) {
    if (input.rank() != 3) throw ShapeError("conv2d input must be [C,H,W], got " + shape_str(input.shape()));
    if (weight.rank() != 4) throw ShapeError("conv2d weight must be [Co,Ci,k,k], got " + shape_str(weight.shape()));
    if (bias.rank() != 1) throw ShapeError("conv2d bias must be [Co], got " + shape_str(bias.shape()));
    ConvDims dm;
    dm.cin = input.dim(0);
    dm.h = input.dim(1);
    dm.w = input.dim(2);
    dm.cout = weight.dim(0);
    dm.k = weight.dim(2);
    dm.stride = stride;
    dm.pad = pad;
    if (weight.dim(1) != dm.cin)
        throw ShapeError("conv2d channel mismatch: input C=" + std::to_string(dm.cin) + ", weight Ci=" +
                         std::to_string(weight.dim(1)));
    if (weight.dim(3) != dm.k || (dm.k != 1 && dm.k != 3))
        throw ShapeError("conv2d kernel must be square 1x1 or 3x3");
    if (bias.dim(0) != dm.cout) throw ShapeError("conv2d bias size mismatch");
    if (stride < 1 || pad < 0) throw ShapeError("conv2d bad stride/pad");
    if (dm.h + 2 * pad < dm.k || dm.w + 2 * pad < dm.k) throw ShapeError("conv2d input smaller than kernel");
    dm.oh = (dm.h + 2 * pad - dm.k) / stride + 1;
    dm.ow = (dm.w + 2 * pad - dm.k) / stride + 1;
    return dm;
}

// Output index range [lo, hi) with in-bounds source index i = o*stride + koff - pad.
inline void conv_span(std::int64_t extent_in, std::int64_t extent_out, std::int64_t koff, int stride,
                      int pad, std::int64_t& lo, std::int64_t& hi) {
    const std::int64_t shift = pad - koff;
    lo = shift <= 0 ? 0 : (shift + stride - 1) / stride;
    const std::int64_t top = extent_in - 1 - koff + pad;
    hi = top < 0 ? 0 : std::min<std::int64_t>(extent_out, top / stride + 1);
    if (hi < lo) hi = lo;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                 int pad) {
    const ConvDims dm = conv_check(input, weight, bias, stride, pad);
    Tensor<T> out({dm.cout, dm.oh, dm.ow});
    {
        const T* in = input.data();
        const T* wt = weight.data();
        const T* bs = bias.data();
        T* y = out.data();
#pragma omp parallel for schedule(static)
        for (std::int64_t oc = 0; oc < dm.cout; ++oc) {
            T* ybase = y + oc * dm.oh * dm.ow;
            std::fill(ybase, ybase + dm.oh * dm.ow, bs[oc]);
            for (std::int64_t ic = 0; ic < dm.cin; ++ic) {
                const T* ibase = in + ic * dm.h * dm.w;
                for (std::int64_t kh = 0; kh < dm.k; ++kh) {
                    std::int64_t oh_lo, oh_hi;
                    conv_span(dm.h, dm.oh, kh, stride, pad, oh_lo, oh_hi);
                    for (std::int64_t kw = 0; kw < dm.k; ++kw) {
                        const T wv = wt[((oc * dm.cin + ic) * dm.k + kh) * dm.k + kw];
                        std::int64_t ow_lo, ow_hi;
                        conv_span(dm.w, dm.ow, kw, stride, pad, ow_lo, ow_hi);
                        for (std::int64_t oh = oh_lo; oh < oh_hi; ++oh) {
                            const T* irow = ibase + (oh * stride + kh - pad) * dm.w + kw - pad;
                            T* yrow = ybase + oh * dm.ow;
                            for (std::int64_t ow = ow_lo; ow < ow_hi; ++ow)
                                yrow[ow] += wv * irow[ow * stride];
                        }
                    }
                }
            }
        }
    }

    if (detail::recording<T>({&input, &weight, &bias})) {
        out.set_requires_grad();
        Tensor<T> tin = input, twt = weight, tbs = bias, res = out;
        const int s = stride, p = pad;
        Tape<T>::active()->record([tin, twt, tbs, res, dm, s, p]() mutable {
            const T* g = res.grad();
            const T* in = tin.data();
            const T* wt = twt.data();
            if (tbs.requires_grad()) {
                T* gb = tbs.grad();
                for (std::int64_t oc = 0; oc < dm.cout; ++oc) {
                    double acc = 0.0;
                    const T* grow = g + oc * dm.oh * dm.ow;
                    for (std::int64_t i = 0; i < dm.oh * dm.ow; ++i) acc += static_cast<double>(grow[i]);
                    gb[oc] += static_cast<T>(acc);
                }
            }
            if (twt.requires_grad()) {
                T* gw = twt.grad();
#pragma omp parallel for schedule(static)
                for (std::int64_t oc = 0; oc < dm.cout; ++oc) {
                    const T* gbase = g + oc * dm.oh * dm.ow;
                    for (std::int64_t ic = 0; ic < dm.cin; ++ic) {
                        const T* ibase = in + ic * dm.h * dm.w;
                        for (std::int64_t kh = 0; kh < dm.k; ++kh) {
                            std::int64_t oh_lo, oh_hi;
                            conv_span(dm.h, dm.oh, kh, s, p, oh_lo, oh_hi);
                            for (std::int64_t kw = 0; kw < dm.k; ++kw) {
                                std::int64_t ow_lo, ow_hi;
                                conv_span(dm.w, dm.ow, kw, s, p, ow_lo, ow_hi);
                                double acc = 0.0;
                                for (std::int64_t oh = oh_lo; oh < oh_hi; ++oh) {
                                    const T* irow = ibase + (oh * s + kh - p) * dm.w + kw - p;
                                    const T* grow = gbase + oh * dm.ow;
                                    for (std::int64_t ow = ow_lo; ow < ow_hi; ++ow)
                                        acc += static_cast<double>(grow[ow]) *
                                               static_cast<double>(irow[ow * s]);
                                }
                                gw[((oc * dm.cin + ic) * dm.k + kh) * dm.k + kw] += static_cast<T>(acc);
                            }
                        }
                    }
                }
            }
            if (tin.requires_grad()) {
                T* gi = tin.grad();
#pragma omp parallel for schedule(static)
                for (std::int64_t ic = 0; ic < dm.cin; ++ic) {
                    T* gibase = gi + ic * dm.h * dm.w;
                    for (std::int64_t oc = 0; oc < dm.cout; ++oc) {
                        const T* gbase = g + oc * dm.oh * dm.ow;
                        for (std::int64_t kh = 0; kh < dm.k; ++kh) {
                            std::int64_t oh_lo, oh_hi;
                            conv_span(dm.h, dm.oh, kh, s, p, oh_lo, oh_hi);
                            for (std::int64_t kw = 0; kw < dm.k; ++kw) {
                                const T wv = wt[((oc * dm.cin + ic) * dm.k + kh) * dm.k + kw];
                                std::int64_t ow_lo, ow_hi;
                                conv_span(dm.w, dm.ow, kw, s, p, ow_lo, ow_hi);
                                for (std::int64_t oh = oh_lo; oh < oh_hi; ++oh) {
                                    T* girow = gibase + (oh * s + kh - p) * dm.w + kw - p;
                                    const T* grow = gbase + oh * dm.ow;
                                    for (std::int64_t ow = ow_lo; ow < ow_hi; ++ow)
                                        girow[ow * s] += wv * grow[ow];
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& feature, T y, T x) {
    if (feature.rank() != 3) throw ShapeError("bilinear_sample feature must be [C,H,W]");
    const std::int64_t c = feature.dim(0), h = feature.dim(1), w = feature.dim(2);
    Tensor<T> out({c});
    const T* f = feature.data();
    T* o = out.data();
    for (std::int64_t ch = 0; ch < c; ++ch) o[ch] = detail::bilinear_value(f + ch * h * w, h, w, y, x);
    if (detail::recording<T>({&feature})) {
        out.set_requires_grad();
        Tensor<T> in = feature, res = out;
        Tape<T>::active()->record([in, res, c, h, w, y, x]() mutable {
            const T* g = res.grad();
            T* gf = in.grad();
            for (std::int64_t ch = 0; ch < c; ++ch)
                detail::bilinear_backward_plane(gf + ch * h * w, h, w, y, x, g[ch]);
        });
    }
    return out;
}

template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& feature, const Tensor<T>& yx) {
    if (feature.rank() != 3) throw ShapeError("bilinear_sample feature must be [C,H,W]");
    if (yx.numel() != 2) throw ShapeError("bilinear_sample coords must have 2 elements");
    const std::int64_t c = feature.dim(0), h = feature.dim(1), w = feature.dim(2);
    const T y = yx.data()[0], x = yx.data()[1];
    Tensor<T> out({c});
    const T* f = feature.data();
    T* o = out.data();
    for (std::int64_t ch = 0; ch < c; ++ch) o[ch] = detail::bilinear_value(f + ch * h * w, h, w, y, x);
    if (detail::recording<T>({&feature, &yx})) {
        out.set_requires_grad();
        Tensor<T> in = feature, coords = yx, res = out;
        Tape<T>::active()->record([in, coords, res, c, h, w]() mutable {
            const T y = coords.data()[0], x = coords.data()[1];
            const T* g = res.grad();
            const T* f = in.data();
            if (in.requires_grad()) {
                T* gf = in.grad();
                for (std::int64_t ch = 0; ch < c; ++ch)
                    detail::bilinear_backward_plane(gf + ch * h * w, h, w, y, x, g[ch]);
            }
            if (coords.requires_grad()) {
                T* gc = coords.grad();
                double accy = 0.0, accx = 0.0;
                for (std::int64_t ch = 0; ch < c; ++ch) {
                    T dvdy, dvdx;
                    detail::bilinear_coord_grad(f + ch * h * w, h, w, y, x, dvdy, dvdx);
                    accy += static_cast<double>(g[ch]) * static_cast<double>(dvdy);
                    accx += static_cast<double>(g[ch]) * static_cast<double>(dvdx);
                }
                gc[0] += static_cast<T>(accy);
                gc[1] += static_cast<T>(accx);
            }
        });
    }
    return out;
}

#define STFT_INSTANTIATE_OPS(T)                                                              \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                           \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                           \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                           \
    template Tensor<T> div<T>(const Tensor<T>&, const Tensor<T>&);                           \
    template Tensor<T> minimum<T>(const Tensor<T>&, const Tensor<T>&);                       \
    template Tensor<T> affine<T>(const Tensor<T>&, T, T);                                    \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                        \
    template Tensor<T> relu<T>(const Tensor<T>&);                                            \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                                         \
    template Tensor<T> exp<T>(const Tensor<T>&);                                             \
    template Tensor<T> log<T>(const Tensor<T>&);                                             \
    template Tensor<T> abs<T>(const Tensor<T>&);                                             \
    template Tensor<T> clamp<T>(const Tensor<T>&, T, T);                                     \
    template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                  \
    template Tensor<T> transpose<T>(const Tensor<T>&);                                       \
    template Tensor<T> concat<T>(const std::vector<Tensor<T>>&, int);                        \
    template Tensor<T> slice<T>(const Tensor<T>&, int, std::int64_t, std::int64_t);          \
    template Tensor<T> sum<T>(const Tensor<T>&);                                             \
    template Tensor<T> mean<T>(const Tensor<T>&);                                            \
    template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                        \
    template Tensor<T> softmax<T>(const Tensor<T>&);                                         \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
    template Tensor<T> bilinear_sample<T>(const Tensor<T>&, T, T);                           \
    template Tensor<T> bilinear_sample<T>(const Tensor<T>&, const Tensor<T>&);

STFT_INSTANTIATE_OPS(float)
STFT_INSTANTIATE_OPS(double)

#undef STFT_INSTANTIATE_OPS

}  // namespace stft
