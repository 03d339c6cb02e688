#include "adrec/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace adrec::num {

namespace {
double eval_loss(const LossBuilder& build, ParamStore& params) {
  Tape tape;
  auto loss = build(tape, params);
  return tape.value(loss)(0, 0);
}
}  // namespace

double grad_check(const LossBuilder& build, ParamStore& params, double h) {
  GradMap analytic;
  {
    Tape tape;
    auto loss = build(tape, params);
    analytic = tape.backward(loss);
  }
  double max_rel = 0.0;
  for (auto& [name, entry] : params.entries()) {
    const Matrix* ga = nullptr;
    auto it = analytic.find(name);
    if (it != analytic.end()) ga = &it->second;
    Matrix& value = entry.value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value.values()[i];
      value.values()[i] = saved + h;
      const double up = eval_loss(build, params);
      value.values()[i] = saved - h;
      const double down = eval_loss(build, params);
      value.values()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = ga ? ga->values()[i] : 0.0;
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace adrec::num
