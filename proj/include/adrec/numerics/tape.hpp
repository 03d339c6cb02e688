#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adrec/numerics/matrix.hpp"
#include "adrec/numerics/param_store.hpp"

namespace adrec::num {

/// One constant sparse-coefficient entry: out[dst] += coeff * in[src].
struct SparseEntry {
  int dst;
  int src;
  double coeff;
};

/// Reverse-mode recording at whole-matrix granularity. Every primitive
/// appends a node holding its value and a backprop closure; backward()
/// walks the nodes in reverse and collects gradients of named parameters.
///
/// A tape is single-threaded and single-use: record, call backward once,
/// discard. Parameters registered twice under the same name share a node,
/// so reuse in a recording accumulates gradients correctly.
class Tape {
 public:
  using NodeId = int;

  NodeId constant(Matrix value);
  NodeId param(const ParamStore& store, const std::string& name);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId add_row(NodeId x, NodeId bias_row);  // bias_row is 1 x c, broadcast over rows
  NodeId mul_elem(NodeId a, NodeId b);
  NodeId mul_scalar(NodeId a, double c);
  NodeId activate(NodeId a, Activation kind);  // Sigmoid, Relu, LeakyRelu
  NodeId softmax_rows(NodeId a);
  /// Softmax within groups of rows sharing a segment id. `segments[i]` is the
  /// group of row i; logits must be n x 1.
  NodeId segment_softmax(NodeId logits, std::vector<int> segments);
  NodeId gather_rows(NodeId a, std::vector<int> indices);
  NodeId scatter_add_rows(NodeId a, std::vector<int> indices, std::size_t out_rows);
  /// Fixed-coefficient sparse aggregation (degree normalization, edge weights).
  NodeId spmm(std::vector<SparseEntry> entries, NodeId x, std::size_t out_rows);
  NodeId scale_rows(NodeId x, NodeId s);  // s is n x 1; row i scaled by s[i]
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId slice_rows(NodeId a, std::size_t start, std::size_t len);
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId sum_all(NodeId a);  // 1 x 1
  /// -sum_i w_i * (y_i ln p_i + (1-y_i) ln(1-p_i)); p must be pre-clipped
  /// away from {0, 1}. y and w are constants.
  NodeId weighted_bce(NodeId p, Matrix y, Matrix w);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Reverse accumulation from a scalar loss node. Throws numeric_error if
  /// any produced gradient is not finite.
  GradMap backward(NodeId loss);

 private:
  struct Node {
    Matrix value;
    std::string param_name;  // nonempty only for parameter leaves
    std::function<void(Tape&, NodeId)> backprop;
  };

  NodeId push(Matrix value, std::function<void(Tape&, NodeId)> backprop,
              std::string param_name = {});
  Matrix& grad_buf(NodeId id);
  bool has_grad(NodeId id) const { return !grads_[id].empty(); }

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  std::unordered_map<std::string, NodeId> param_ids_;
};

}  // namespace adrec::num
