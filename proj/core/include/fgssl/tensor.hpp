#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fgssl/errors.hpp"

namespace fgssl {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) {
    FGSSL_CHECK(d >= 0, "negative dimension in shape");
    n *= d;
  }
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <class S>
struct TensorImpl {
  Shape shape;
  std::vector<S> value;
  std::vector<S> grad;  // empty until first accumulation
  bool requires_grad = false;
};

// Ensures the gradient buffer exists (zero-filled) and returns it.
template <class S>
inline std::vector<S>& accum_grad(TensorImpl<S>& t) {
  if (t.grad.empty()) t.grad.assign(t.value.size(), S(0));
  return t.grad;
}

// Shared-buffer dense tensor. Copying a Tensor copies the handle, not the
// storage; ops always allocate fresh outputs.
template <class S>
class Tensor {
 public:
  using scalar_type = S;

  Tensor() = default;

  explicit Tensor(Shape shape, bool requires_grad = false)
      : impl_(std::make_shared<TensorImpl<S>>()) {
    impl_->shape = std::move(shape);
    impl_->value.assign(static_cast<size_t>(shape_numel(impl_->shape)), S(0));
    impl_->requires_grad = requires_grad;
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return Tensor(std::move(shape), requires_grad);
  }

  static Tensor full(Shape shape, S v, bool requires_grad = false) {
    Tensor t(std::move(shape), requires_grad);
    for (auto& x : t.impl_->value) x = v;
    return t;
  }

  static Tensor scalar(S v, bool requires_grad = false) {
    Tensor t(Shape{}, requires_grad);
    t.impl_->value[0] = v;
    return t;
  }

  static Tensor from_data(Shape shape, std::vector<S> data, bool requires_grad = false) {
    FGSSL_CHECK(shape_numel(shape) == static_cast<int64_t>(data.size()),
                "from_data: element count does not match shape " + shape_str(shape));
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl<S>>();
    t.impl_->shape = std::move(shape);
    t.impl_->value = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
  }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t rank() const { return static_cast<int64_t>(impl_->shape.size()); }
  int64_t dim(int64_t i) const { return impl_->shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(impl_->value.size()); }

  S* data() { return impl_->value.data(); }
  const S* data() const { return impl_->value.data(); }
  std::vector<S>& vec() { return impl_->value; }
  const std::vector<S>& vec() const { return impl_->value; }

  S item() const {
    FGSSL_CHECK(numel() == 1, "item: tensor has " + std::to_string(numel()) + " elements");
    return impl_->value[0];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool rg) { impl_->requires_grad = rg; }

  bool has_grad() const { return impl_ && !impl_->grad.empty(); }
  std::vector<S>& grad() { return accum_grad(*impl_); }
  const std::vector<S>& grad_vec() const { return impl_->grad; }
  void zero_grad() {
    if (impl_ && !impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), S(0));
  }

  std::shared_ptr<TensorImpl<S>> impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl<S>> impl_;
};

// Append-order tape of backward closures. Ops record one node per forward
// call while a graph is active; backward replays them in exact reverse
// append order. Gradients of tensors *produced* by the tape are reset at the
// start of every backward call, while leaf gradients only accumulate, so a
// second backward over a fresh graph adds onto existing leaf gradients.
template <class S>
class GradGraph {
 public:
  GradGraph() = default;
  GradGraph(const GradGraph&) = delete;
  GradGraph& operator=(const GradGraph&) = delete;

  void record(std::shared_ptr<TensorImpl<S>> produced, std::function<void()> backward) {
    nodes_.push_back(Node{std::move(produced), std::move(backward)});
  }

  size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }

  void backward(const Tensor<S>& loss) {
    FGSSL_CHECK(loss.defined(), "backward: undefined loss tensor");
    FGSSL_CHECK(loss.numel() == 1, "backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    FGSSL_CHECK(!nodes_.empty(), "backward: empty graph");
    for (auto& n : nodes_) {
      auto& g = accum_grad(*n.produced);
      std::fill(g.begin(), g.end(), S(0));
    }
    accum_grad(*loss.impl())[0] = S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
  }

  // The graph ops record onto, if any. Installed via TapeScope.
  static GradGraph*& active_slot() {
    thread_local GradGraph* g = nullptr;
    return g;
  }
  static GradGraph* active() { return active_slot(); }

 private:
  struct Node {
    std::shared_ptr<TensorImpl<S>> produced;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
};

// RAII installer for the active graph.
template <class S>
class TapeScope {
 public:
  explicit TapeScope(GradGraph<S>& g) : prev_(GradGraph<S>::active_slot()) {
    GradGraph<S>::active_slot() = &g;
  }
  ~TapeScope() { GradGraph<S>::active_slot() = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradGraph<S>* prev_;
};

// Suspends recording within a scope; used for value-only diagnostics while a
// training tape is active.
template <class S>
class NoTapeScope {
 public:
  NoTapeScope() : prev_(GradGraph<S>::active_slot()) { GradGraph<S>::active_slot() = nullptr; }
  ~NoTapeScope() { GradGraph<S>::active_slot() = prev_; }
  NoTapeScope(const NoTapeScope&) = delete;
  NoTapeScope& operator=(const NoTapeScope&) = delete;

 private:
  GradGraph<S>* prev_;
};

}  // namespace fgssl
