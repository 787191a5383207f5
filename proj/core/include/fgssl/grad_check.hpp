#pragma once

// Central finite-difference gradient checker. Double precision only: float
// has too little headroom between truncation and rounding error for the
// relative tolerances used here.

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <vector>

#include "fgssl/ops.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {

// Largest relative error between the tape gradient of f at x and a central
// finite difference, maximized over the coordinates of x. f must map a
// tensor to a scalar tensor, building its value out of tape ops.
template <class S>
double grad_check(const std::function<Tensor<S>(const Tensor<S>&)>& f, const Tensor<S>& x,
                  double eps = 1e-5) {
  static_assert(std::is_same_v<S, double>, "grad_check requires double precision");

  Tensor<S> leaf = Tensor<S>::from_data(x.shape(), x.vec(), /*requires_grad=*/true);
  GradGraph<S> graph;
  std::vector<S> analytic;
  {
    TapeScope<S> scope(graph);
    Tensor<S> y = f(leaf);
    FGSSL_CHECK(y.numel() == 1, "grad_check: f must return a scalar");
    graph.backward(y);
    analytic = leaf.has_grad() ? leaf.grad_vec() : std::vector<S>(leaf.vec().size(), S(0));
  }

  Tensor<S> probe = Tensor<S>::from_data(x.shape(), x.vec());
  double worst = 0.0;
  for (size_t i = 0; i < probe.vec().size(); ++i) {
    const S saved = probe.vec()[i];
    probe.vec()[i] = saved + static_cast<S>(eps);
    const double up = f(probe).item();
    probe.vec()[i] = saved - static_cast<S>(eps);
    const double down = f(probe).item();
    probe.vec()[i] = saved;
    FGSSL_CHECK(std::isfinite(up) && std::isfinite(down), "grad_check: non-finite probe value");
    const double numeric = (up - down) / (2.0 * eps);
    const double a = static_cast<double>(analytic[i]);
    const double denom = std::max(1e-12, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace fgssl
