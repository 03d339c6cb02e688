#include "adrec/hpo/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "adrec/error.hpp"
#include "adrec/hpo/gp.hpp"

namespace adrec::hpo {

namespace {

Trial run_trial(const Objective& objective, const ConfigPoint& point) {
  Trial t;
  t.config = point;
  const auto start = std::chrono::steady_clock::now();
  try {
    t.objective = objective(point);
    t.status = std::isfinite(t.objective) ? TrialStatus::Done : TrialStatus::Failed;
  } catch (const std::exception&) {
    t.status = TrialStatus::Failed;
    t.objective = std::numeric_limits<double>::quiet_NaN();
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

}  // namespace

std::vector<Trial> grid_search(const SearchSpace& space, const Objective& objective,
                               std::size_t budget) {
  std::vector<Trial> trials;
  for (const auto& point : space.grid()) {
    if (trials.size() >= budget) break;
    trials.push_back(run_trial(objective, point));
  }
  return trials;
}

std::vector<Trial> bayes_opt(const SearchSpace& space, const Objective& objective, int n_init,
                             int n_iter, std::uint64_t seed, std::vector<Trial> warm_start) {
  std::size_t warm_done = 0;
  for (const auto& t : warm_start)
    if (t.status == TrialStatus::Done) ++warm_done;
  if (n_init < 0 || n_iter < 0) throw input_error("bayes_opt: negative budget");
  if (n_init + warm_done < 2)
    throw input_error("bayes_opt: needs n_init >= 2 (or warm-start trials) to fit the surrogate");

  const auto grid = space.grid();
  if (static_cast<std::size_t>(n_init) + static_cast<std::size_t>(n_iter) > grid.size())
    throw input_error("bayes_opt: n_init + n_iter exceeds the grid size");

  std::vector<Trial> trials = std::move(warm_start);
  std::vector<char> evaluated(grid.size(), 0);
  auto mark = [&](const ConfigPoint& p) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] == p) {
        evaluated[i] = 1;
        return;
      }
  };
  for (const auto& t : trials) mark(t.config);

  // Seeded distinct random initial points.
  std::mt19937_64 rng(seed);
  int placed = 0;
  while (placed < n_init) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (!evaluated[i]) open.push_back(i);
    if (open.empty()) return trials;
    const std::size_t pick = open[rng() % open.size()];
    evaluated[pick] = 1;
    trials.push_back(run_trial(objective, grid[pick]));
    ++placed;
  }

  for (int round = 0; round < n_iter; ++round) {
    std::vector<std::array<double, 4>> xs;
    std::vector<double> ys;
    double incumbent = std::numeric_limits<double>::infinity();
    for (const auto& t : trials) {
      if (t.status != TrialStatus::Done) continue;
      xs.push_back(space.normalize(t.config));
      ys.push_back(t.objective);
      incumbent = std::min(incumbent, t.objective);
    }
    if (xs.size() < 2) {
      // Not enough successful trials to fit; fall back to the first open
      // grid point so the budget is still honored.
      std::size_t next = grid.size();
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (!evaluated[i]) {
          next = i;
          break;
        }
      if (next == grid.size()) return trials;
      evaluated[next] = 1;
      trials.push_back(run_trial(objective, grid[next]));
      continue;
    }

    GpSurrogate surrogate;
    surrogate.fit(xs, ys);

    double best_ei = -1.0;
    std::size_t best_index = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (evaluated[i]) continue;
      const double ei = surrogate.expected_improvement(space.normalize(grid[i]), incumbent);
      if (ei > best_ei) {  // strict: ties keep the lexicographically smallest
        best_ei = ei;
        best_index = i;
      }
    }
    if (best_index == grid.size()) return trials;  // grid exhausted
    evaluated[best_index] = 1;
    trials.push_back(run_trial(objective, grid[best_index]));
  }
  return trials;
}

std::vector<Trial> combined_search(const SearchSpace& space, const Objective& objective,
                                   std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw input_error("combined_search: budget must be >= 1");

  // Coarse pass: lr x embed-dim at the first batch and head values.
  SearchSpace coarse = space;
  coarse.batches = {space.batches.front()};
  coarse.heads = {space.heads.front()};
  std::vector<Trial> trials = grid_search(coarse, objective, budget);
  if (trials.size() >= budget) return trials;

  const std::size_t remaining = budget - trials.size();
  std::size_t done = 0;
  for (const auto& t : trials)
    if (t.status == TrialStatus::Done) ++done;
  const int n_init = done >= 2 ? 0 : 2;
  const int n_iter = static_cast<int>(remaining) - n_init;
  if (n_iter < 0) return trials;
  return bayes_opt(space, objective, n_init, n_iter, seed, std::move(trials));
}

const Trial& select_best(const std::vector<Trial>& trials) {
  const Trial* best = nullptr;
  for (const auto& t : trials) {
    if (t.status != TrialStatus::Done) continue;
    if (!best || t.objective < best->objective) best = &t;
  }
  if (!best) throw input_error("select_best: no successful trials");
  return *best;
}

void write_ledger_header(std::ostream& out) {
  out << "trial,lr,batch,dim,heads,val_loss,status,seconds\n";
}

void append_ledger_row(std::ostream& out, std::size_t index, const Trial& t) {
  out << index << ',' << t.config.lr << ',' << t.config.batch << ',' << t.config.embed_dim << ','
      << t.config.heads << ',';
  if (t.status == TrialStatus::Done) out << t.objective;
  out << ',' << (t.status == TrialStatus::Done ? "done" : "failed") << ',' << t.seconds << '\n';
  out.flush();
}

}  // namespace adrec::hpo
