#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <vector>

#include "stft/ops.hpp"

namespace stft {

template <typename T>
constexpr T default_fd_eps() {
    return std::is_same_v<T, float> ? T(1e-3) : T(1e-5);
}

// Central finite differences against the tape gradient. `f` must evaluate a
// scalar from the current contents of `inputs` (the handles are shared, so
// perturbing inputs[i] in place re-evaluates through f). Returns the max
// relative error over every coordinate of every input, with denominator
// max(|analytic|, |numeric|, 1e-8).
template <typename T>
double grad_check(const std::function<Tensor<T>()>& f, std::vector<Tensor<T>> inputs,
                  T eps = default_fd_eps<T>()) {
    for (auto& in : inputs) {
        in.set_requires_grad();
        in.zero_grad();
    }
    Tensor<T> out;
    Tape<T> tape;
    {
        TapeScope<T> scope(tape);
        out = f();
    }
    if (out.numel() != 1) throw ShapeError("grad_check: f must return a scalar");
    if (!std::isfinite(static_cast<double>(out.item()))) throw ValueError("grad_check: non-finite f(x)");
    tape.backward(out);

    std::vector<std::vector<T>> analytic;
    analytic.reserve(inputs.size());
    for (auto& in : inputs)
        analytic.emplace_back(in.grad(), in.grad() + in.numel());

    double max_rel = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        T* x = inputs[t].data();
        const std::int64_t n = inputs[t].numel();
        for (std::int64_t i = 0; i < n; ++i) {
            const T orig = x[i];
            x[i] = orig + eps;
            const double f_hi = static_cast<double>(f().item());
            x[i] = orig - eps;
            const double f_lo = static_cast<double>(f().item());
            x[i] = orig;
            if (!std::isfinite(f_hi) || !std::isfinite(f_lo))
                throw ValueError("grad_check: non-finite f during perturbation");
            const double fd = (f_hi - f_lo) / (2.0 * static_cast<double>(eps));
            const double an = static_cast<double>(analytic[t][static_cast<std::size_t>(i)]);
            const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
            max_rel = std::max(max_rel, std::fabs(fd - an) / denom);
        }
    }
    return max_rel;
}

}  // namespace stft
