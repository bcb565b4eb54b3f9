#pragma once

#include <functional>
#include <vector>

#include "tensor.hpp"

namespace abslab {

// Scalar-valued function rebuilt on the given tape from the current parameter
// values. Must be deterministic across calls.
using ScalarFn = std::function<Tensor(Tape&)>;

// Compares reverse-mode gradients against central finite differences over
// every coordinate of every parameter. Returns the max of
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const ScalarFn& f, std::vector<Tensor> params, double epsilon);

}  // namespace abslab
