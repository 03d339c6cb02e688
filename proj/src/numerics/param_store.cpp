#include "adrec/numerics/param_store.hpp"

#include <cmath>
#include <utility>

#include "adrec/error.hpp"

namespace adrec::num {

Matrix& ParamStore::create(const std::string& name, Matrix init) {
  if (has(name)) throw input_error("parameter already exists: " + name);
  Entry e;
  e.m = Matrix::zeros(init.rows(), init.cols());
  e.v = Matrix::zeros(init.rows(), init.cols());
  e.value = std::move(init);
  auto [it, ok] = entries_.emplace(name, std::move(e));
  (void)ok;
  return it->second.value;
}

Matrix& ParamStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw input_error("unknown parameter: " + name);
  return it->second.value;
}

const Matrix& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw input_error("unknown parameter: " + name);
  return it->second.value;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw input_error("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::coordinate_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

void adam_step(ParamStore& params, const GradMap& grads, double lr, double beta1, double beta2,
               double eps) {
  for (const auto& [name, g] : grads) {
    const Matrix& value = params.value(name);
    if (!value.same_shape(g))
      throw shape_error("adam_step: gradient shape mismatch for " + name);
  }
  const std::int64_t t = params.step() + 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (const auto& [name, g] : grads) {
    auto& e = params.entries().at(name);
    double* p = e.value.data();
    double* m = e.m.data();
    double* v = e.v.data();
    const double* gd = g.data();
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * gd[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * gd[i] * gd[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
  params.set_step(t);
}

}  // namespace adrec::num
