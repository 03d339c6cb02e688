#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "adrec/numerics/matrix.hpp"

namespace adrec::num {

/// Parameter name -> gradient. std::map keeps iteration order deterministic.
using GradMap = std::map<std::string, Matrix>;

/// Named trainable parameters with per-parameter Adam moment buffers and a
/// global step counter. One training run owns one store; it is never shared
/// across concurrent writers.
class ParamStore {
 public:
  struct Entry {
    Matrix value;
    Matrix m;  // first moment
    Matrix v;  // second moment
  };

  Matrix& create(const std::string& name, Matrix init);
  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  const Entry& entry(const std::string& name) const;

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }

  std::size_t coordinate_count() const;

 private:
  std::map<std::string, Entry> entries_;
  std::int64_t step_ = 0;
};

/// Standard Adam with bias correction. Parameters without a gradient entry
/// are left untouched; the step counter advances by one per call.
void adam_step(ParamStore& params, const GradMap& grads, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

}  // namespace adrec::num
