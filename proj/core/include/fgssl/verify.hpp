#pragma once

// Oracle and property suites behind `verify` and the acceptance checks:
// finite-difference gradients for every op and loss, permutation constraint
// and roundtrip properties, and loss-identity oracles.

#include <iosfwd>
#include <string>
#include <vector>

namespace fgssl {

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;   // worst measured value
  double tolerance = 0.0;  // bound it was held against
  std::string note;
};

// Every differentiable op plus every loss vs central finite differences:
// double precision, eps 1e-5, max relative error under 1e-4.
std::vector<CheckResult> verify_grad_suite();

// 10,000 constrained-permutation draws (movement bound and bijectivity) and
// 100 shuffle/unshuffle bitwise roundtrips.
std::vector<CheckResult> verify_perm_suite();

// Loss identities: GCE equals CE at k = N-1, memory-bank EMA closed form,
// product-form classification oracle, contrastive-term brute force, and the
// boundary cases that must be exact.
std::vector<CheckResult> verify_loss_suite();

bool all_pass(const std::vector<CheckResult>& results);
void print_results(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace fgssl
