#include "grad_check.hpp"

#include <cmath>

#include "error.hpp"

namespace abslab {

namespace {

double eval_value(const ScalarFn& f) {
  Tape tape;
  tape.set_recording(false);
  const double v = f(tape).scalar_value();
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

}  // namespace

double grad_check(const ScalarFn& f, std::vector<Tensor> params, double epsilon) {
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw ConfigError("grad_check: epsilon must lie in [1e-7, 1e-3]");

  for (Tensor& p : params) p.zero_grad();
  Tape tape;
  Tensor loss = f(tape);
  if (!std::isfinite(loss.scalar_value()))
    throw NumericError("grad_check: function value is not finite");
  tape.backward(loss);

  double max_rel = 0.0;
  for (Tensor& p : params) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.value()[i];
      p.value()[i] = saved + epsilon;
      const double up = eval_value(f);
      p.value()[i] = saved - epsilon;
      const double down = eval_value(f);
      p.value()[i] = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = p.has_grad() ? p.grad()[i] : 0.0;
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace abslab
