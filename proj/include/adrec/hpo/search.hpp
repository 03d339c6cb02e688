#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>

#include "adrec/hpo/space.hpp"

namespace adrec::hpo {

/// Exhaustive evaluation in lexicographic axis order, up to `budget`
/// points. Objective failures are recorded as failed trials and the search
/// continues.
std::vector<Trial> grid_search(const SearchSpace& space, const Objective& objective,
                               std::size_t budget = std::numeric_limits<std::size_t>::max());

/// Seeded random distinct initial points, then expected-improvement
/// acquisition over the unevaluated grid (argmax; ties resolve to the
/// lexicographically smallest point). Stops early when the grid is
/// exhausted. `warm_start` trials count as already evaluated and seed the
/// surrogate; n_init may be 0 when warm_start supplies >= 2 done trials.
std::vector<Trial> bayes_opt(const SearchSpace& space, const Objective& objective, int n_init,
                             int n_iter, std::uint64_t seed, std::vector<Trial> warm_start = {});

/// Coarse lr x embed-dim grid at the first batch/head values, then
/// Bayesian refinement over the full grid with the remaining budget.
std::vector<Trial> combined_search(const SearchSpace& space, const Objective& objective,
                                   std::size_t budget, std::uint64_t seed);

/// Configuration of the minimum-objective done trial; ties go to the
/// earliest. Throws input_error when no trial is done.
const Trial& select_best(const std::vector<Trial>& trials);

void write_ledger_header(std::ostream& out);
void append_ledger_row(std::ostream& out, std::size_t index, const Trial& trial);

}  // namespace adrec::hpo
