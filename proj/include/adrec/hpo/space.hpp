#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace adrec::hpo {

struct ConfigPoint {
  double lr = 0.001;
  int batch = 128;
  int embed_dim = 64;
  int heads = 4;

  friend bool operator==(const ConfigPoint&, const ConfigPoint&) = default;
};

/// Discrete 4-axis search grid; the defaults are the paper-table values.
struct SearchSpace {
  std::vector<double> lrs = {0.0005, 0.001, 0.005};
  std::vector<int> batches = {128, 256, 384, 512};
  std::vector<int> embed_dims = {64, 128, 256};
  std::vector<int> heads = {4, 8, 12};

  static SearchSpace table1() { return SearchSpace{}; }

  std::size_t size() const {
    return lrs.size() * batches.size() * embed_dims.size() * heads.size();
  }

  /// Lexicographic in axis order (lr, batch, dim, heads).
  std::vector<ConfigPoint> grid() const;

  /// Per-axis [0, 1] coordinates; lr on a log scale. Degenerate axes map
  /// to 0.5.
  std::array<double, 4> normalize(const ConfigPoint& p) const;
};

enum class TrialStatus { Done, Failed };

struct Trial {
  ConfigPoint config;
  double objective = 0.0;  // validation loss; finite for done trials
  TrialStatus status = TrialStatus::Done;
  double seconds = 0.0;
};

/// Throws to signal a failed trial.
using Objective = std::function<double(const ConfigPoint&)>;

}  // namespace adrec::hpo
