#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "stft/error.hpp"

namespace stft {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Dense row-major tensor. Handles share storage: copying a Tensor aliases the
// same payload, so a reshaped view sees (and back-propagates through) the same
// buffers. Gradient buffers live next to the values and are allocated when a
// tensor joins the tape.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(Shape shape)
        : p_(std::make_shared<Payload>()), shape_(std::move(shape)) {
        check_dims(shape_);
        p_->value.assign(static_cast<std::size_t>(shape_numel(shape_)), T(0));
    }

    Tensor(Shape shape, std::vector<T> values)
        : p_(std::make_shared<Payload>()), shape_(std::move(shape)) {
        check_dims(shape_);
        if (static_cast<std::int64_t>(values.size()) != shape_numel(shape_))
            throw ShapeError("tensor data size " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape_));
        p_->value = std::move(values);
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T v) {
        Tensor t(std::move(shape));
        std::fill(t.data(), t.data() + t.numel(), v);
        return t;
    }

    static Tensor scalar(T v) { return Tensor({}, {v}); }

    bool defined() const { return static_cast<bool>(p_); }
    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const { return static_cast<std::int64_t>(p_->value.size()); }

    T* data() { return p_->value.data(); }
    const T* data() const { return p_->value.data(); }
    const std::vector<T>& values() const { return p_->value; }

    bool requires_grad() const { return p_ && p_->requires_grad; }

    Tensor& set_requires_grad() {
        p_->requires_grad = true;
        if (p_->grad.size() != p_->value.size()) p_->grad.assign(p_->value.size(), T(0));
        return *this;
    }

    T* grad() { return p_->requires_grad ? p_->grad.data() : nullptr; }
    const T* grad() const { return p_->requires_grad ? p_->grad.data() : nullptr; }

    void zero_grad() {
        if (p_ && p_->requires_grad) std::fill(p_->grad.begin(), p_->grad.end(), T(0));
    }

    T item() const {
        if (numel() != 1) throw ShapeError("item() on tensor with " + std::to_string(numel()) + " elements");
        return p_->value[0];
    }

    // Row-major multi-index access, for tests and small fixtures.
    T at(std::initializer_list<std::int64_t> idx) const {
        return p_->value[static_cast<std::size_t>(flat_index(idx))];
    }
    void set_at(std::initializer_list<std::int64_t> idx, T v) {
        p_->value[static_cast<std::size_t>(flat_index(idx))] = v;
    }

    // Metadata-only reshape; shares value and grad storage.
    Tensor view(Shape new_shape) const {
        if (shape_numel(new_shape) != numel())
            throw ShapeError("view " + shape_str(new_shape) + " incompatible with " + shape_str(shape_));
        Tensor out;
        out.p_ = p_;
        out.shape_ = std::move(new_shape);
        return out;
    }

    Tensor clone() const {
        Tensor out;
        out.p_ = std::make_shared<Payload>();
        out.p_->value = p_->value;
        out.shape_ = shape_;
        return out;
    }

    bool same_storage(const Tensor& o) const { return p_ == o.p_; }

    bool all_finite() const {
        for (T v : p_->value)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

private:
    struct Payload {
        std::vector<T> value;
        std::vector<T> grad;  // allocated iff requires_grad
        bool requires_grad = false;
    };

    static void check_dims(const Shape& s) {
        for (auto d : s)
            if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(s));
    }

    std::int64_t flat_index(std::initializer_list<std::int64_t> idx) const {
        if (static_cast<int>(idx.size()) != rank()) throw ShapeError("index rank mismatch");
        std::int64_t flat = 0;
        int k = 0;
        for (auto i : idx) {
            if (i < 0 || i >= shape_[static_cast<std::size_t>(k)]) throw ShapeError("index out of bounds");
            flat = flat * shape_[static_cast<std::size_t>(k)] + i;
            ++k;
        }
        return flat;
    }

    std::shared_ptr<Payload> p_;
    Shape shape_;
};

// Reverse-mode tape: ordered backward rules recorded during the forward pass.
// One training step owns the tape exclusively; ops consult the active tape
// and record only when an input participates in differentiation.
template <typename T>
class Tape {
public:
    void record(std::function<void()> backward_rule) { nodes_.push_back(std::move(backward_rule)); }

    std::size_t size() const { return nodes_.size(); }

    void clear() { nodes_.clear(); }

    // Seeds d(loss) = 1 and replays all recorded rules in reverse order.
    void backward(Tensor<T>& loss) {
        if (loss.numel() != 1) throw ShapeError("backward() needs a scalar loss");
        if (!loss.requires_grad()) throw ValueError("backward() on a tensor outside the tape");
        loss.grad()[0] += T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

    static Tape*& active() {
        thread_local Tape* current = nullptr;
        return current;
    }

private:
    std::vector<std::function<void()>> nodes_;
};

template <typename T>
class TapeScope {
public:
    explicit TapeScope(Tape<T>& tape) : prev_(Tape<T>::active()) { Tape<T>::active() = &tape; }
    ~TapeScope() { Tape<T>::active() = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape<T>* prev_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace stft
