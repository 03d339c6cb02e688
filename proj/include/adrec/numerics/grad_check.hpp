#pragma once

#include <functional>

#include "adrec/numerics/param_store.hpp"
#include "adrec/numerics/tape.hpp"

namespace adrec::num {

/// Builds a scalar loss on the given tape from the current parameters.
/// Must be deterministic: grad_check evaluates it repeatedly.
using LossBuilder = std::function<Tape::NodeId(Tape&, ParamStore&)>;

/// Central finite differences per coordinate against the recorded analytic
/// gradient. Returns max over all coordinates of
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Coordinates of parameters the recording never reached are checked
/// against an analytic gradient of zero.
double grad_check(const LossBuilder& build, ParamStore& params, double h = 1e-5);

}  // namespace adrec::num
