// Copyright 2026 The Biogen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biogen/numerics/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "biogen/numerics/kernels.hpp"

namespace biogen::numerics {
namespace {

using NodePtr = std::shared_ptr<Node>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

Shape merged_shape(const Tensor& a) { return a.shape(); }

template <typename Expr>
void accumulate(const NodePtr& n, const Expr& delta) {
  if (n->requires_grad) n->accumulate_expr(delta);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  NodePtr na = a.node(), nb = b.node();
  return make_result(a.value() + b.value(), merged_shape(a), {a, b}, [na, nb](const Matrix& g) {
    accumulate(na, g);
    accumulate(nb, g);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  NodePtr na = a.node(), nb = b.node();
  return make_result(a.value() - b.value(), merged_shape(a), {a, b}, [na, nb](const Matrix& g) {
    accumulate(na, g);
    accumulate(nb, -g);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  NodePtr na = a.node(), nb = b.node();
  return make_result(a.value().cwiseProduct(b.value()), merged_shape(a), {a, b},
                     [na, nb](const Matrix& g) {
                       accumulate(na, g.cwiseProduct(nb->value));
                       accumulate(nb, g.cwiseProduct(na->value));
                     });
}

Tensor scale(const Tensor& a, double s) {
  NodePtr na = a.node();
  return make_result(a.value() * s, merged_shape(a), {a},
                     [na, s](const Matrix& g) { accumulate(na, g * s); });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: row must be [1," + std::to_string(a.cols()) + "]");
  }
  NodePtr na = a.node(), nr = row.node();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return make_result(std::move(out), merged_shape(a), {a, row}, [na, nr](const Matrix& g) {
    accumulate(na, g);
    accumulate(nr, g.colwise().sum());
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& w) {
  if (w.numel() != a.rows()) throw ShapeError("scale_rows: weight count must equal row count");
  NodePtr na = a.node(), nw = w.node();
  const Eigen::Map<const Eigen::VectorXd> wv(w.value().data(), w.numel());
  Matrix out = wv.asDiagonal() * a.value();
  return make_result(std::move(out), merged_shape(a), {a, w}, [na, nw](const Matrix& g) {
    const Eigen::Map<const Eigen::VectorXd> wv(nw->value.data(), nw->value.size());
    accumulate(na, wv.asDiagonal() * g);
    if (nw->requires_grad) {
      Eigen::VectorXd dw = g.cwiseProduct(na->value).rowwise().sum();
      nw->accumulate(Eigen::Map<const Matrix>(dw.data(), nw->value.rows(), nw->value.cols()));
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  NodePtr na = a.node(), nb = b.node();
  Matrix out = a.value() * b.value();
  const Index r = out.rows(), c = out.cols();
  return make_result(std::move(out), matrix_shape(r, c), {a, b}, [na, nb](const Matrix& g) {
    if (na->requires_grad) na->accumulate_expr(g * nb->value.transpose());
    if (nb->requires_grad) nb->accumulate_expr(na->value.transpose() * g);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: dimension mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  NodePtr na = a.node(), nb = b.node();
  Matrix out = a.value() * b.value().transpose();
  const Index r = out.rows(), c = out.cols();
  return make_result(std::move(out), matrix_shape(r, c), {a, b}, [na, nb](const Matrix& g) {
    if (na->requires_grad) na->accumulate_expr(g * nb->value);
    if (nb->requires_grad) nb->accumulate_expr(g.transpose() * na->value);
  });
}

Tensor gelu(const Tensor& a) {
  NodePtr na = a.node();
  Matrix out = a.value().unaryExpr([](double x) { return numerics::gelu(x); });
  return make_result(std::move(out), merged_shape(a), {a}, [na](const Matrix& g) {
    accumulate(na, g.cwiseProduct(na->value.unaryExpr([](double x) { return gelu_derivative(x); })));
  });
}

Tensor tanh(const Tensor& a) {
  NodePtr na = a.node();
  Matrix out = a.value().array().tanh().matrix();
  Matrix saved = out;
  return make_result(std::move(out), merged_shape(a), {a}, [na, saved](const Matrix& g) {
    accumulate(na, g.cwiseProduct((1.0 - saved.array().square()).matrix()));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const Index n = x.rows(), d = x.cols();
  if (gain.numel() != d || bias.numel() != d) throw ShapeError("layer_norm: parameter width mismatch");
  Matrix xhat(n, d);
  Eigen::VectorXd inv_std(n);
  for (Index r = 0; r < n; ++r) {
    const double mu = x.value().row(r).mean();
    const double var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = ((x.value().row(r).array() - mu) * inv_std(r)).matrix();
  }
  const Eigen::Map<const Eigen::RowVectorXd> gv(gain.value().data(), d);
  const Eigen::Map<const Eigen::RowVectorXd> bv(bias.value().data(), d);
  Matrix out = (xhat.array().rowwise() * gv.array()).matrix();
  out.rowwise() += bv;
  NodePtr nx = x.node(), ng = gain.node(), nb = bias.node();
  return make_result(std::move(out), merged_shape(x), {x, gain, bias},
                     [nx, ng, nb, xhat, inv_std, d](const Matrix& g) {
                       const Eigen::Map<const Eigen::RowVectorXd> gv(ng->value.data(), d);
                       if (ng->requires_grad) {
                         Eigen::RowVectorXd dg = g.cwiseProduct(xhat).colwise().sum();
                         ng->accumulate(Eigen::Map<const Matrix>(dg.data(), ng->value.rows(), ng->value.cols()));
                       }
                       if (nb->requires_grad) {
                         Eigen::RowVectorXd db = g.colwise().sum();
                         nb->accumulate(Eigen::Map<const Matrix>(db.data(), nb->value.rows(), nb->value.cols()));
                       }
                       if (nx->requires_grad) {
                         Matrix dxhat = (g.array().rowwise() * gv.array()).matrix();
                         Matrix dx(dxhat.rows(), d);
                         for (Index r = 0; r < dxhat.rows(); ++r) {
                           const double m1 = dxhat.row(r).mean();
                           const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
                           dx.row(r) = inv_std(r) *
                                       (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2).matrix();
                         }
                         nx->accumulate(dx);
                       }
                     });
}

Tensor softmax(const Tensor& x, double temperature) {
  Matrix p = softmax_rows(x.value(), temperature);
  Matrix saved = p;
  NodePtr nx = x.node();
  return make_result(std::move(p), merged_shape(x), {x}, [nx, saved, temperature](const Matrix& g) {
    Matrix gp = g.cwiseProduct(saved);
    Eigen::VectorXd dots = gp.rowwise().sum();
    Matrix dx = gp - (saved.array().colwise() * dots.array()).matrix();
    accumulate(nx, dx / temperature);
  });
}

Tensor log_softmax(const Tensor& x) {
  Matrix lp = log_softmax_rows(x.value());
  Matrix p = lp.array().exp().matrix();
  NodePtr nx = x.node();
  return make_result(std::move(lp), merged_shape(x), {x}, [nx, p](const Matrix& g) {
    Eigen::VectorXd sums = g.rowwise().sum();
    accumulate(nx, g - (p.array().colwise() * sums.array()).matrix());
  });
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  NodePtr na = a.node();
  return make_result(std::move(out), Shape{}, {a}, [na](const Matrix& g) {
    accumulate(na, Matrix::Constant(na->value.rows(), na->value.cols(), g(0, 0)));
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids) {
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  const Index d = table.cols();
  Matrix out(static_cast<Index>(ids.size()), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw std::out_of_range("embedding: id " + std::to_string(ids[i]) + " out of range");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  NodePtr nt = table.node();
  std::vector<std::int32_t> saved(ids.begin(), ids.end());
  return make_result(std::move(out), matrix_shape(static_cast<Index>(ids.size()), d), {table},
                     [nt, saved](const Matrix& g) {
                       if (!nt->requires_grad) return;
                       if (nt->grad.size() == 0) nt->grad = Matrix::Zero(nt->value.rows(), nt->value.cols());
                       for (std::size_t i = 0; i < saved.size(); ++i) {
                         nt->grad.row(saved[i]) += g.row(static_cast<Index>(i));
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index d = parts.front().cols();
  Index total = 0;
  for (const auto& p : parts) {
    if (p.cols() != d) throw ShapeError("concat_rows: column mismatch");
    total += p.rows();
  }
  Matrix out(total, d);
  std::vector<NodePtr> nodes;
  std::vector<Index> offsets;
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    nodes.push_back(p.node());
    offsets.push_back(at);
    at += p.rows();
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result(std::move(out), matrix_shape(total, d), std::move(inputs),
                     [nodes, offsets](const Matrix& g) {
                       for (std::size_t i = 0; i < nodes.size(); ++i) {
                         accumulate(nodes[i], g.middleRows(offsets[i], nodes[i]->value.rows()));
                       }
                     });
}

Tensor slice_rows(const Tensor& a, Index begin, Index count) {
  if (begin < 0 || count <= 0 || begin + count > a.rows()) throw ShapeError("slice_rows: range out of bounds");
  NodePtr na = a.node();
  Matrix out = a.value().middleRows(begin, count);
  return make_result(std::move(out), matrix_shape(count, a.cols()), {a}, [na, begin, count](const Matrix& g) {
    if (!na->requires_grad) return;
    if (na->grad.size() == 0) na->grad = Matrix::Zero(na->value.rows(), na->value.cols());
    na->grad.middleRows(begin, count) += g;
  });
}

Tensor gather_cols(const Tensor& a, std::span<const Index> cols) {
  if (cols.empty()) throw ShapeError("gather_cols: empty index list");
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= a.cols()) throw std::out_of_range("gather_cols: column out of range");
    out.col(static_cast<Index>(j)) = a.value().col(cols[j]);
  }
  NodePtr na = a.node();
  std::vector<Index> saved(cols.begin(), cols.end());
  return make_result(std::move(out), matrix_shape(a.rows(), static_cast<Index>(cols.size())), {a},
                     [na, saved](const Matrix& g) {
                       if (!na->requires_grad) return;
                       if (na->grad.size() == 0) na->grad = Matrix::Zero(na->value.rows(), na->value.cols());
                       for (std::size_t j = 0; j < saved.size(); ++j) {
                         na->grad.col(saved[j]) += g.col(static_cast<Index>(j));
                       }
                     });
}

Tensor expand_to_rows(const Tensor& w, std::span<const Index> source, double fill) {
  if (source.empty()) throw ShapeError("expand_to_rows: empty source");
  const Index n = static_cast<Index>(source.size());
  Matrix out(n, 1);
  const double* wd = w.value().data();
  for (Index i = 0; i < n; ++i) {
    const Index s = source[static_cast<std::size_t>(i)];
    if (s >= w.numel()) throw std::out_of_range("expand_to_rows: source index out of range");
    out(i, 0) = s < 0 ? fill : wd[s];
  }
  NodePtr nw = w.node();
  std::vector<Index> saved(source.begin(), source.end());
  return make_result(std::move(out), matrix_shape(n, 1), {w}, [nw, saved](const Matrix& g) {
    if (!nw->requires_grad) return;
    if (nw->grad.size() == 0) nw->grad = Matrix::Zero(nw->value.rows(), nw->value.cols());
    double* gd = nw->grad.data();
    for (std::size_t i = 0; i < saved.size(); ++i) {
      if (saved[i] >= 0) gd[saved[i]] += g(static_cast<Index>(i), 0);
    }
  });
}

Tensor segment_mean(const Tensor& x, std::span<const Segment> segments) {
  if (segments.empty()) throw ShapeError("segment_mean: no segments");
  const Index d = x.cols();
  Matrix out(static_cast<Index>(segments.size()), d);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.count <= 0 || seg.begin < 0 || seg.begin + seg.count > x.rows()) {
      throw ShapeError("segment_mean: invalid segment");
    }
    out.row(static_cast<Index>(s)) = x.value().middleRows(seg.begin, seg.count).colwise().mean();
  }
  NodePtr nx = x.node();
  std::vector<Segment> saved(segments.begin(), segments.end());
  return make_result(std::move(out), matrix_shape(static_cast<Index>(segments.size()), d), {x},
                     [nx, saved](const Matrix& g) {
                       if (!nx->requires_grad) return;
                       if (nx->grad.size() == 0) nx->grad = Matrix::Zero(nx->value.rows(), nx->value.cols());
                       for (std::size_t s = 0; s < saved.size(); ++s) {
                         const auto& seg = saved[s];
                         const Eigen::RowVectorXd share = g.row(static_cast<Index>(s)) / static_cast<double>(seg.count);
                         nx->grad.middleRows(seg.begin, seg.count).rowwise() += share;
                       }
                     });
}

AttentionLayout AttentionLayout::full(Index q_rows, Index k_rows) {
  return AttentionLayout{{AttentionBlock{0, q_rows, 0, k_rows, -1}}};
}

AttentionLayout AttentionLayout::causal_with_memory(Index q_rows, Index memory_rows) {
  return AttentionLayout{{AttentionBlock{0, q_rows, 0, memory_rows + q_rows, memory_rows}}};
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, Index heads,
                 const AttentionLayout& layout, double dropout, Rng* rng) {
  const Index d = q.cols();
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) throw ShapeError("attention: q/k/v width mismatch");
  if (heads <= 0 || d % heads != 0) throw ShapeError("attention: width not divisible by heads");
  if (dropout > 0.0 && rng == nullptr) throw std::invalid_argument("attention: dropout needs an rng");
  const Index dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  struct Saved {
    Matrix probs;
    Matrix keep;  // dropout multiplier, empty when unused
  };
  auto saved = std::make_shared<std::vector<Saved>>();
  saved->reserve(layout.blocks.size() * static_cast<std::size_t>(heads));

  Matrix out = Matrix::Zero(q.rows(), d);
  for (const auto& b : layout.blocks) {
    if (b.q_begin < 0 || b.k_begin < 0 || b.q_begin + b.q_count > q.rows() ||
        b.k_begin + b.k_count > k.rows()) {
      throw ShapeError("attention: block out of bounds");
    }
    for (Index h = 0; h < heads; ++h) {
      Saved s;
      if (b.q_count == 0 || b.k_count == 0) {
        saved->push_back(std::move(s));
        continue;
      }
      Matrix scores = q.value().block(b.q_begin, h * dh, b.q_count, dh) *
                      k.value().block(b.k_begin, h * dh, b.k_count, dh).transpose() * inv_sqrt;
      if (b.causal_offset >= 0) {
        for (Index i = 0; i < b.q_count; ++i) {
          for (Index j = i + b.causal_offset + 1; j < b.k_count; ++j) scores(i, j) = kNegInf;
        }
      }
      s.probs = softmax_rows(scores);
      Matrix used = s.probs;
      if (dropout > 0.0) {
        s.keep.resize(b.q_count, b.k_count);
        const double kept = 1.0 / (1.0 - dropout);
        for (Index i = 0; i < s.keep.size(); ++i) s.keep.data()[i] = rng->bernoulli(dropout) ? 0.0 : kept;
        used = used.cwiseProduct(s.keep);
      }
      out.block(b.q_begin, h * dh, b.q_count, dh) = used * v.value().block(b.k_begin, h * dh, b.k_count, dh);
      saved->push_back(std::move(s));
    }
  }

  NodePtr nq = q.node(), nk = k.node(), nv = v.node();
  AttentionLayout lay = layout;
  return make_result(std::move(out), matrix_shape(q.rows(), d), {q, k, v},
                     [nq, nk, nv, lay, saved, heads, dh, inv_sqrt](const Matrix& g) {
                       Matrix dq = Matrix::Zero(nq->value.rows(), nq->value.cols());
                       Matrix dk = Matrix::Zero(nk->value.rows(), nk->value.cols());
                       Matrix dv = Matrix::Zero(nv->value.rows(), nv->value.cols());
                       std::size_t idx = 0;
                       for (const auto& b : lay.blocks) {
                         for (Index h = 0; h < heads; ++h, ++idx) {
                           const Saved& s = (*saved)[idx];
                           if (s.probs.size() == 0) continue;
                           const auto go = g.block(b.q_begin, h * dh, b.q_count, dh);
                           const auto vh = nv->value.block(b.k_begin, h * dh, b.k_count, dh);
                           const auto qh = nq->value.block(b.q_begin, h * dh, b.q_count, dh);
                           const auto kh = nk->value.block(b.k_begin, h * dh, b.k_count, dh);
                           Matrix used = s.keep.size() ? Matrix(s.probs.cwiseProduct(s.keep)) : s.probs;
                           dv.block(b.k_begin, h * dh, b.k_count, dh) += used.transpose() * go;
                           Matrix dp = go * vh.transpose();
                           if (s.keep.size()) dp = dp.cwiseProduct(s.keep);
                           Eigen::VectorXd dots = dp.cwiseProduct(s.probs).rowwise().sum();
                           Matrix ds = s.probs.cwiseProduct((dp.colwise() - dots)) * inv_sqrt;
                           dq.block(b.q_begin, h * dh, b.q_count, dh) += ds * kh;
                           dk.block(b.k_begin, h * dh, b.k_count, dh) += ds.transpose() * qh;
                         }
                       }
                       accumulate(nq, dq);
                       accumulate(nk, dk);
                       accumulate(nv, dv);
                     });
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
  Matrix keep(a.rows(), a.cols());
  const double kept = 1.0 / (1.0 - p);
  for (Index i = 0; i < keep.size(); ++i) keep.data()[i] = rng.bernoulli(p) ? 0.0 : kept;
  NodePtr na = a.node();
  Matrix out = a.value().cwiseProduct(keep);
  return make_result(std::move(out), merged_shape(a), {a},
                     [na, keep](const Matrix& g) { accumulate(na, g.cwiseProduct(keep)); });
}

Tensor label_smoothed_nll(const Tensor& logits, std::span<const std::int32_t> targets, double eps) {
  const Index rows = logits.rows(), vocab = logits.cols();
  if (static_cast<Index>(targets.size()) != rows) throw ShapeError("label_smoothed_nll: target count mismatch");
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("label smoothing must be in [0, 1)");
  for (auto t : targets) {
    if (t < 0 || t >= vocab) throw std::out_of_range("label_smoothed_nll: target id " + std::to_string(t) + " >= vocab");
  }
  const Matrix lp = log_softmax_rows(logits.value());
  double total = 0.0;
  for (Index r = 0; r < rows; ++r) total += smoothed_nll_row(lp.row(r), targets[static_cast<std::size_t>(r)], eps);
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(rows);

  NodePtr nl = logits.node();
  std::vector<std::int32_t> saved(targets.begin(), targets.end());
  return make_result(std::move(out), Shape{}, {logits}, [nl, lp, saved, eps, rows, vocab](const Matrix& g) {
    if (!nl->requires_grad) return;
    const double e = vocab > 1 ? eps : 0.0;
    const double other = vocab > 1 ? e / static_cast<double>(vocab - 1) : 0.0;
    Matrix d = lp.array().exp().matrix();
    d.array() -= other;
    for (Index r = 0; r < rows; ++r) d(r, saved[static_cast<std::size_t>(r)]) -= (1.0 - e) - other;
    nl->accumulate_expr(d * (g(0, 0) / static_cast<double>(rows)));
  });
}

}  // namespace biogen::numerics
