#include "adrec/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "adrec/error.hpp"

namespace adrec::num {

Tape::NodeId Tape::push(Matrix value, std::function<void(Tape&, NodeId)> backprop,
                        std::string param_name) {
  nodes_.push_back(Node{std::move(value), std::move(param_name), std::move(backprop)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Matrix& Tape::grad_buf(NodeId id) {
  if (grads_[id].empty()) {
    grads_[id] = Matrix::zeros(nodes_[id].value.rows(), nodes_[id].value.cols());
  }
  return grads_[id];
}

Tape::NodeId Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Tape::NodeId Tape::param(const ParamStore& store, const std::string& name) {
  auto it = param_ids_.find(name);
  if (it != param_ids_.end()) return it->second;
  NodeId id = push(store.value(name), nullptr, name);
  param_ids_.emplace(name, id);
  return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  Matrix out = num::matmul(nodes_[a].value, nodes_[b].value);
  return push(std::move(out), [a, b](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& av = t.nodes_[a].value;
    const Matrix& bv = t.nodes_[b].value;
    // dA = g * B^T
    {
      Matrix& ga = t.grad_buf(a);
      for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < bv.cols(); ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          const double* brow_t = bv.data() + j;  // column j of B
          double* garow = ga.row(i);
          for (std::size_t k = 0; k < av.cols(); ++k) garow[k] += gij * brow_t[k * bv.cols()];
        }
    }
    // dB = A^T * g
    {
      Matrix& gb = t.grad_buf(b);
      for (std::size_t i = 0; i < av.rows(); ++i) {
        const double* arow = av.row(i);
        const double* grow = g.row(i);
        for (std::size_t k = 0; k < av.cols(); ++k) {
          const double aik = arow[k];
          if (aik == 0.0) continue;
          double* gbrow = gb.row(k);
          for (std::size_t j = 0; j < bv.cols(); ++j) gbrow[j] += aik * grow[j];
        }
      }
    }
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Matrix& av = nodes_[a].value;
  const Matrix& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw shape_error("tape add: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += bv.values()[i];
  return push(std::move(out), [a, b](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& ga = t.grad_buf(a);
    Matrix& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.values()[i] += g.values()[i];
      gb.values()[i] += g.values()[i];
    }
  });
}

Tape::NodeId Tape::add_row(NodeId x, NodeId bias_row) {
  const Matrix& xv = nodes_[x].value;
  const Matrix& bv = nodes_[bias_row].value;
  if (bv.rows() != 1 || bv.cols() != xv.cols()) throw shape_error("tape add_row: bias must be 1 x cols");
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] += bv(0, j);
  }
  return push(std::move(out), [x, bias_row](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& gx = t.grad_buf(x);
    Matrix& gb = t.grad_buf(bias_row);
    for (std::size_t i = 0; i < g.size(); ++i) gx.values()[i] += g.values()[i];
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const double* r = g.row(i);
      for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += r[j];
    }
  });
}

Tape::NodeId Tape::mul_elem(NodeId a, NodeId b) {
  const Matrix& av = nodes_[a].value;
  const Matrix& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw shape_error("tape mul_elem: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= bv.values()[i];
  return push(std::move(out), [a, b](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& av = t.nodes_[a].value;
    const Matrix& bv = t.nodes_[b].value;
    Matrix& ga = t.grad_buf(a);
    Matrix& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.values()[i] += g.values()[i] * bv.values()[i];
      gb.values()[i] += g.values()[i] * av.values()[i];
    }
  });
}

Tape::NodeId Tape::mul_scalar(NodeId a, double c) {
  Matrix out = nodes_[a].value;
  for (auto& v : out.values()) v *= c;
  return push(std::move(out), [a, c](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.values()[i] += c * g.values()[i];
  });
}

Tape::NodeId Tape::activate(NodeId a, Activation kind) {
  if (kind == Activation::SoftmaxRows) return softmax_rows(a);
  Matrix out = num::activate(nodes_[a].value, kind);
  return push(std::move(out), [a, kind](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& y = t.nodes_[self].value;
    const Matrix& x = t.nodes_[a].value;
    Matrix& ga = t.grad_buf(a);
    switch (kind) {
      case Activation::Sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double yi = y.values()[i];
          ga.values()[i] += g.values()[i] * yi * (1.0 - yi);
        }
        break;
      case Activation::Relu:
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.values()[i] += x.values()[i] > 0.0 ? g.values()[i] : 0.0;
        break;
      case Activation::LeakyRelu:
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.values()[i] += x.values()[i] > 0.0 ? g.values()[i] : kLeakySlope * g.values()[i];
        break;
      default:
        break;
    }
  });
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
  Matrix out = num::activate(nodes_[a].value, Activation::SoftmaxRows);
  return push(std::move(out), [a](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& y = t.nodes_[self].value;
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Tape::NodeId Tape::segment_softmax(NodeId logits, std::vector<int> segments) {
  const Matrix& lv = nodes_[logits].value;
  if (lv.cols() != 1) throw shape_error("segment_softmax: logits must be n x 1");
  if (segments.size() != lv.rows()) throw shape_error("segment_softmax: segment count mismatch");
  int nseg = 0;
  for (int s : segments) nseg = std::max(nseg, s + 1);
  std::vector<double> seg_max(nseg, -1e300), seg_sum(nseg, 0.0);
  for (std::size_t i = 0; i < segments.size(); ++i)
    seg_max[segments[i]] = std::max(seg_max[segments[i]], lv(i, 0));
  Matrix out(lv.rows(), 1);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out(i, 0) = std::exp(lv(i, 0) - seg_max[segments[i]]);
    seg_sum[segments[i]] += out(i, 0);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) out(i, 0) /= seg_sum[segments[i]];
  auto segs = std::make_shared<std::vector<int>>(std::move(segments));
  return push(std::move(out), [logits, segs, nseg](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& alpha = t.nodes_[self].value;
    Matrix& gl = t.grad_buf(logits);
    std::vector<double> seg_dot(nseg, 0.0);
    for (std::size_t i = 0; i < segs->size(); ++i) seg_dot[(*segs)[i]] += g(i, 0) * alpha(i, 0);
    for (std::size_t i = 0; i < segs->size(); ++i)
      gl(i, 0) += alpha(i, 0) * (g(i, 0) - seg_dot[(*segs)[i]]);
  });
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<int> indices) {
  const Matrix& av = nodes_[a].value;
  Matrix out(indices.size(), av.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double* src = av.row(indices[i]);
    std::copy(src, src + av.cols(), out.row(i));
  }
  auto idx = std::make_shared<std::vector<int>>(std::move(indices));
  return push(std::move(out), [a, idx](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      double* dst = ga.row((*idx)[i]);
      const double* src = g.row(i);
      for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += src[j];
    }
  });
}

Tape::NodeId Tape::scatter_add_rows(NodeId a, std::vector<int> indices, std::size_t out_rows) {
  const Matrix& av = nodes_[a].value;
  if (indices.size() != av.rows()) throw shape_error("scatter_add_rows: index count mismatch");
  Matrix out(out_rows, av.cols(), 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    double* dst = out.row(indices[i]);
    const double* src = av.row(i);
    for (std::size_t j = 0; j < av.cols(); ++j) dst[j] += src[j];
  }
  auto idx = std::make_shared<std::vector<int>>(std::move(indices));
  return push(std::move(out), [a, idx](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      double* dst = ga.row(i);
      const double* src = g.row((*idx)[i]);
      for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += src[j];
    }
  });
}

Tape::NodeId Tape::spmm(std::vector<SparseEntry> entries, NodeId x, std::size_t out_rows) {
  const Matrix& xv = nodes_[x].value;
  Matrix out(out_rows, xv.cols(), 0.0);
  for (const auto& e : entries) {
    double* dst = out.row(e.dst);
    const double* src = xv.row(e.src);
    for (std::size_t j = 0; j < xv.cols(); ++j) dst[j] += e.coeff * src[j];
  }
  auto ent = std::make_shared<std::vector<SparseEntry>>(std::move(entries));
  return push(std::move(out), [x, ent](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& gx = t.grad_buf(x);
    for (const auto& e : *ent) {
      double* dst = gx.row(e.src);
      const double* src = g.row(e.dst);
      for (std::size_t j = 0; j < g.cols(); ++j) dst[j] += e.coeff * src[j];
    }
  });
}

Tape::NodeId Tape::scale_rows(NodeId x, NodeId s) {
  const Matrix& xv = nodes_[x].value;
  const Matrix& sv = nodes_[s].value;
  if (sv.cols() != 1 || sv.rows() != xv.rows()) throw shape_error("scale_rows: scale must be n x 1");
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] *= sv(i, 0);
  }
  return push(std::move(out), [x, s](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& xv = t.nodes_[x].value;
    const Matrix& sv = t.nodes_[s].value;
    Matrix& gx = t.grad_buf(x);
    Matrix& gs = t.grad_buf(s);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const double si = sv(i, 0);
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) {
        gx(i, j) += g(i, j) * si;
        dot += g(i, j) * xv(i, j);
      }
      gs(i, 0) += dot;
    }
  });
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw shape_error("concat_cols: empty part list");
  const std::size_t rows = nodes_[parts[0]].value.rows();
  std::size_t cols = 0;
  for (NodeId p : parts) {
    if (nodes_[p].value.rows() != rows) throw shape_error("concat_cols: row count mismatch");
    cols += nodes_[p].value.cols();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Matrix& pv = nodes_[p].value;
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(pv.row(i), pv.row(i) + pv.cols(), out.row(i) + off);
    off += pv.cols();
  }
  auto parts_copy = std::make_shared<std::vector<NodeId>>(parts);
  return push(std::move(out), [parts_copy](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    std::size_t off = 0;
    for (NodeId p : *parts_copy) {
      Matrix& gp = t.grad_buf(p);
      for (std::size_t i = 0; i < gp.rows(); ++i)
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(i, off + j);
      off += gp.cols();
    }
  });
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw shape_error("concat_rows: empty part list");
  const std::size_t cols = nodes_[parts[0]].value.cols();
  std::size_t rows = 0;
  for (NodeId p : parts) {
    if (nodes_[p].value.cols() != cols) throw shape_error("concat_rows: column count mismatch");
    rows += nodes_[p].value.rows();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Matrix& pv = nodes_[p].value;
    std::copy(pv.data(), pv.data() + pv.size(), out.data() + off * cols);
    off += pv.rows();
  }
  auto parts_copy = std::make_shared<std::vector<NodeId>>(parts);
  return push(std::move(out), [parts_copy](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    std::size_t off = 0;
    for (NodeId p : *parts_copy) {
      Matrix& gp = t.grad_buf(p);
      for (std::size_t i = 0; i < gp.rows(); ++i)
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(off + i, j);
      off += gp.rows();
    }
  });
}

Tape::NodeId Tape::slice_rows(NodeId a, std::size_t start, std::size_t len) {
  const Matrix& av = nodes_[a].value;
  if (start + len > av.rows()) throw shape_error("slice_rows: out of range");
  Matrix out(len, av.cols());
  std::copy(av.row(start), av.row(start) + len * av.cols(), out.data());
  return push(std::move(out), [a, start](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(start + i, j) += g(i, j);
  });
}

Tape::NodeId Tape::clamp(NodeId a, double lo, double hi) {
  Matrix out = nodes_[a].value;
  for (auto& v : out.values()) v = std::min(hi, std::max(lo, v));
  return push(std::move(out), [a, lo, hi](Tape& t, NodeId self) {
    const Matrix& g = t.grads_[self];
    const Matrix& x = t.nodes_[a].value;
    Matrix& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double xi = x.values()[i];
      if (xi > lo && xi < hi) ga.values()[i] += g.values()[i];
    }
  });
}

Tape::NodeId Tape::sum_all(NodeId a) {
  double s = 0.0;
  for (double v : nodes_[a].value.values()) s += v;
  Matrix out(1, 1, s);
  return push(std::move(out), [a](Tape& t, NodeId self) {
    const double g = t.grads_[self](0, 0);
    Matrix& ga = t.grad_buf(a);
    for (auto& v : ga.values()) v += g;
  });
}

Tape::NodeId Tape::weighted_bce(NodeId p, Matrix y, Matrix w) {
  const Matrix& pv = nodes_[p].value;
  if (!pv.same_shape(y) || !pv.same_shape(w)) throw shape_error("weighted_bce: shape mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double pi = pv.values()[i];
    const double yi = y.values()[i];
    loss -= w.values()[i] * (yi * std::log(pi) + (1.0 - yi) * std::log(1.0 - pi));
  }
  auto yc = std::make_shared<Matrix>(std::move(y));
  auto wc = std::make_shared<Matrix>(std::move(w));
  return push(Matrix(1, 1, loss), [p, yc, wc](Tape& t, NodeId self) {
    const double g = t.grads_[self](0, 0);
    const Matrix& pv = t.nodes_[p].value;
    Matrix& gp = t.grad_buf(p);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double pi = pv.values()[i];
      const double yi = yc->values()[i];
      gp.values()[i] += g * wc->values()[i] * (-yi / pi + (1.0 - yi) / (1.0 - pi));
    }
  });
}

GradMap Tape::backward(NodeId loss) {
  const Matrix& lv = nodes_[loss].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw shape_error("backward: loss must be scalar");
  grads_.assign(nodes_.size(), Matrix());
  grad_buf(loss)(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    if (!has_grad(id) || !nodes_[id].backprop) continue;
    nodes_[id].backprop(*this, id);
  }
  GradMap out;
  for (const auto& [name, id] : param_ids_) {
    if (!has_grad(id)) continue;
    if (!grads_[id].all_finite()) throw numeric_error("non-finite gradient for parameter " + name);
    out.emplace(name, std::move(grads_[id]));
  }
  grads_.clear();
  return out;
}

}  // namespace adrec::num
