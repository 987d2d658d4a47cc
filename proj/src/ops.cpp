#include "latticeformer/ops.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace latticeformer {

namespace {

std::atomic<bool> g_dropout_enabled{true};

void require(bool condition, const char* op, const std::string& detail) {
  if (!condition) throw std::invalid_argument(std::string(op) + ": " + detail);
}

template <typename T>
std::string shapes(const Tensor<T>& a, const Tensor<T>& b) {
  return shape_string(a.shape()) + " vs " + shape_string(b.shape());
}

// c[m x n] += a[m x k] * b[k x n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = a[i * k + p];
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m x n] += a[m x k] * b[n x k]^T
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] += acc;
    }
  }
}

// c[k x n] += a[m x k]^T * b[m x n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = a[i * k + p];
      T* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
}

}  // namespace

void set_dropout_enabled(bool enabled) noexcept { g_dropout_enabled.store(enabled); }
bool dropout_enabled() noexcept { return g_dropout_enabled.load(); }

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Graph<T>& g = *a.graph;
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.cols() == bv.rows(), "matmul", shapes(av, bv));
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor<T> out(m, n);
  gemm_nn(m, n, k, av.data(), bv.data(), out.data());
  return g.record(std::move(out), {a, b}, [a, b, m, n, k](Graph<T>& g, std::size_t self) {
    const Tensor<T>& dc = g.upstream(self);
    if (Tensor<T>* da = g.grad_of(a)) gemm_nt(m, k, n, dc.data(), g.value(b).data(), da->data());
    if (Tensor<T>* db = g.grad_of(b)) gemm_tn(m, n, k, g.value(a).data(), dc.data(), db->data());
  });
}

template <typename T>
Var<T> matmul_transposed(Var<T> a, Var<T> b) {
  Graph<T>& g = *a.graph;
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.cols() == bv.cols(), "matmul_transposed", shapes(av, bv));
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor<T> out(m, n);
  gemm_nt(m, n, k, av.data(), bv.data(), out.data());
  return g.record(std::move(out), {a, b}, [a, b, m, n, k](Graph<T>& g, std::size_t self) {
    const Tensor<T>& dc = g.upstream(self);
    if (Tensor<T>* da = g.grad_of(a)) gemm_nn(m, k, n, dc.data(), g.value(b).data(), da->data());
    if (Tensor<T>* db = g.grad_of(b)) gemm_tn(m, k, n, dc.data(), g.value(a).data(), db->data());
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "add", shapes(av, bv));
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    for (Var<T> in : {a, b}) {
      if (Tensor<T>* din = g.grad_of(in)) {
        for (std::size_t i = 0; i < d.size(); ++i) (*din)[i] += d[i];
      }
    }
  });
}

template <typename T>
Var<T> add_row(Var<T> a, Var<T> row) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& rv = row.value();
  require(rv.size() == av.cols(), "add_row", shapes(av, rv));
  Tensor<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
  }
  return a.graph->record(std::move(out), {a, row}, [a, row](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    if (Tensor<T>* da = g.grad_of(a)) {
      for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += d[i];
    }
    if (Tensor<T>* dr = g.grad_of(row)) {
      for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) (*dr)[c] += d(r, c);
      }
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.values()) v *= factor;
  return a.graph->record(std::move(out), {a}, [a, factor](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    Tensor<T>* da = g.grad_of(a);
    for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += factor * d[i];
  });
}

template <typename T>
Var<T> relu(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.values()) v = v > T(0) ? v : T(0);
  return a.graph->record(std::move(out), {a}, [a](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    const Tensor<T>& x = g.value(a);
    Tensor<T>* da = g.grad_of(a);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (x[i] > T(0)) (*da)[i] += d[i];
    }
  });
}

template <typename T>
Var<T> hadamard(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.size() == bv.size(), "hadamard", shapes(av, bv));
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    if (Tensor<T>* da = g.grad_of(a)) {
      const Tensor<T>& bv = g.value(b);
      for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += d[i] * bv[i];
    }
    if (Tensor<T>* db = g.grad_of(b)) {
      const Tensor<T>& av = g.value(a);
      for (std::size_t i = 0; i < d.size(); ++i) (*db)[i] += d[i] * av[i];
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  T total = 0;
  for (T v : a.value().values()) total += v;
  return a.graph->record(Tensor<T>::scalar(total), {a}, [a](Graph<T>& g, std::size_t self) {
    const T d = g.upstream(self)[0];
    Tensor<T>* da = g.grad_of(a);
    for (auto& v : da->values()) v += d;
  });
}

template <typename T>
Var<T> softmax_rows(Var<T> logits, const Mask* mask) {
  Tensor<T> out = softmax_rows(logits.value(), mask);
  return logits.graph->record(std::move(out), {logits}, [logits](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    const Tensor<T>& y = g.value(self);
    Tensor<T>* dx = g.grad_of(logits);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      T dot = 0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += d(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) (*dx)(r, c) += y(r, c) * (d(r, c) - dot);
    }
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  const Tensor<T>& xv = x.value();
  const Tensor<T>& gv = gain.value();
  const Tensor<T>& bv = bias.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  require(gv.size() == cols && bv.size() == cols, "layer_norm", shapes(xv, gv));

  Tensor<T> out(xv.shape());
  // Normalized rows and inverse deviations are kept for the backward pass.
  Tensor<T> normalized(xv.shape());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T mean = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += xv(r, c);
    mean /= static_cast<T>(cols);
    T var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (xv(r, c) - mean) * (xv(r, c) - mean);
    var /= static_cast<T>(cols);
    inv_std[r] = var + eps > T(0) ? T(1) / std::sqrt(var + eps) : T(0);
    for (std::size_t c = 0; c < cols; ++c) {
      normalized(r, c) = (xv(r, c) - mean) * inv_std[r];
      out(r, c) = gv[c] * normalized(r, c) + bv[c];
    }
  }
  return x.graph->record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, normalized = std::move(normalized), inv_std = std::move(inv_std)](
          Graph<T>& g, std::size_t self) {
        const Tensor<T>& d = g.upstream(self);
        const Tensor<T>& gv = g.value(gain);
        const std::size_t rows = d.rows(), cols = d.cols();
        if (Tensor<T>* dg = g.grad_of(gain)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) (*dg)[c] += d(r, c) * normalized(r, c);
          }
        }
        if (Tensor<T>* db = g.grad_of(bias)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) (*db)[c] += d(r, c);
          }
        }
        if (Tensor<T>* dx = g.grad_of(x)) {
          const T n = static_cast<T>(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            T mean_dn = 0, mean_dn_n = 0;
            for (std::size_t c = 0; c < cols; ++c) {
              const T dn = d(r, c) * gv[c];
              mean_dn += dn;
              mean_dn_n += dn * normalized(r, c);
            }
            mean_dn /= n;
            mean_dn_n /= n;
            for (std::size_t c = 0; c < cols; ++c) {
              const T dn = d(r, c) * gv[c];
              (*dx)(r, c) += inv_std[r] * (dn - mean_dn - normalized(r, c) * mean_dn_n);
            }
          }
        }
      });
}

template <typename T>
Var<T> embedding(Var<T> table, std::span<const std::size_t> ids) {
  const Tensor<T>& tv = table.value();
  const std::size_t width = tv.cols();
  Tensor<T> out(ids.size(), width);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    require(ids[r] < tv.rows(), "embedding", "id " + std::to_string(ids[r]) + " out of range");
    std::copy_n(tv.row(ids[r]).begin(), width, out.row(r).begin());
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  return table.graph->record(std::move(out), {table},
                             [table, rows = std::move(rows)](Graph<T>& g, std::size_t self) {
                               const Tensor<T>& d = g.upstream(self);
                               Tensor<T>* dt = g.grad_of(table);
                               for (std::size_t r = 0; r < rows.size(); ++r) {
                                 auto src = d.row(r);
                                 auto dst = dt->row(rows[r]);
                                 for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                               }
                             });
}

template <typename T>
Var<T> slice_cols(Var<T> a, std::size_t start, std::size_t width) {
  const Tensor<T>& av = a.value();
  require(start + width <= av.cols(), "slice_cols", "slice past the last column");
  Tensor<T> out(av.rows(), width);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out(r, c) = av(r, start + c);
  }
  return a.graph->record(std::move(out), {a}, [a, start](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    Tensor<T>* da = g.grad_of(a);
    for (std::size_t r = 0; r < d.rows(); ++r) {
      for (std::size_t c = 0; c < d.cols(); ++c) (*da)(r, start + c) += d(r, c);
    }
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::size_t cols = 0;
  for (const Var<T>& p : parts) {
    require(p.value().rows() == rows, "concat_cols", "row count mismatch");
    cols += p.value().cols();
  }
  Tensor<T> out(rows, cols);
  std::size_t offset = 0;
  for (const Var<T>& p : parts) {
    const Tensor<T>& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
    }
    offset += pv.cols();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return parts[0].graph->record(
      std::move(out), std::span<const Var<T>>(inputs),
      [inputs](Graph<T>& g, std::size_t self) {
        const Tensor<T>& d = g.upstream(self);
        std::size_t offset = 0;
        for (const Var<T>& p : inputs) {
          const std::size_t width = g.value(p).cols();
          if (Tensor<T>* dp = g.grad_of(p)) {
            for (std::size_t r = 0; r < d.rows(); ++r) {
              for (std::size_t c = 0; c < width; ++c) (*dp)(r, c) += d(r, offset + c);
            }
          }
          offset += width;
        }
      });
}

template <typename T>
Var<T> relation_gather(Var<T> table, const RelationMatrix& relations) {
  const Tensor<T>& tv = table.value();
  require(tv.rows() == kRelationCount, "relation_gather", "table needs one row per relation");
  const std::size_t m = relations.size();
  const std::size_t width = tv.cols();
  Tensor<T> out(m * m, width);
  std::vector<std::size_t> index(m * m);
  for (std::size_t p = 0; p < m * m; ++p) {
    index[p] = static_cast<std::size_t>(relations.codes()[p]);
    std::copy_n(tv.row(index[p]).begin(), width, out.row(p).begin());
  }
  return table.graph->record(std::move(out), {table},
                             [table, index = std::move(index)](Graph<T>& g, std::size_t self) {
                               const Tensor<T>& d = g.upstream(self);
                               Tensor<T>* dt = g.grad_of(table);
                               for (std::size_t p = 0; p < index.size(); ++p) {
                                 auto src = d.row(p);
                                 auto dst = dt->row(index[p]);
                                 for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                               }
                             });
}

template <typename T>
Var<T> pair_scores(Var<T> q, Var<T> pairs) {
  const Tensor<T>& qv = q.value();
  const Tensor<T>& pv = pairs.value();
  const std::size_t m = qv.rows(), w = qv.cols();
  require(pv.rows() == m * m && pv.cols() == w, "pair_scores", shapes(qv, pv));
  Tensor<T> out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* qi = qv.data() + i * w;
    for (std::size_t j = 0; j < m; ++j) {
      const T* pij = pv.data() + (i * m + j) * w;
      T acc = 0;
      for (std::size_t c = 0; c < w; ++c) acc += qi[c] * pij[c];
      out(i, j) = acc;
    }
  }
  return q.graph->record(std::move(out), {q, pairs}, [q, pairs, m, w](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    if (Tensor<T>* dq = g.grad_of(q)) {
      const Tensor<T>& pv = g.value(pairs);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const T dij = d(i, j);
          const T* pij = pv.data() + (i * m + j) * w;
          for (std::size_t c = 0; c < w; ++c) (*dq)(i, c) += dij * pij[c];
        }
      }
    }
    if (Tensor<T>* dp = g.grad_of(pairs)) {
      const Tensor<T>& qv = g.value(q);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const T dij = d(i, j);
          T* dpij = dp->data() + (i * m + j) * w;
          for (std::size_t c = 0; c < w; ++c) dpij[c] += dij * qv(i, c);
        }
      }
    }
  });
}

template <typename T>
Var<T> pair_mix(Var<T> weights, Var<T> pairs) {
  const Tensor<T>& av = weights.value();
  const Tensor<T>& pv = pairs.value();
  const std::size_t m = av.rows();
  require(av.cols() == m && pv.rows() == m * m, "pair_mix", shapes(av, pv));
  const std::size_t w = pv.cols();
  Tensor<T> out(m, w);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const T aij = av(i, j);
      const T* pij = pv.data() + (i * m + j) * w;
      for (std::size_t c = 0; c < w; ++c) out(i, c) += aij * pij[c];
    }
  }
  return weights.graph->record(
      std::move(out), {weights, pairs}, [weights, pairs, m, w](Graph<T>& g, std::size_t self) {
        const Tensor<T>& d = g.upstream(self);
        if (Tensor<T>* da = g.grad_of(weights)) {
          const Tensor<T>& pv = g.value(pairs);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
              const T* pij = pv.data() + (i * m + j) * w;
              T acc = 0;
              for (std::size_t c = 0; c < w; ++c) acc += d(i, c) * pij[c];
              (*da)(i, j) += acc;
            }
          }
        }
        if (Tensor<T>* dp = g.grad_of(pairs)) {
          const Tensor<T>& av = g.value(weights);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
              const T aij = av(i, j);
              T* dpij = dp->data() + (i * m + j) * w;
              for (std::size_t c = 0; c < w; ++c) dpij[c] += aij * d(i, c);
            }
          }
        }
      });
}

template <typename T>
Var<T> dropout(Var<T> a, double rate) {
  Graph<T>& g = *a.graph;
  if (rate <= 0.0 || !g.training() || !dropout_enabled()) return a;
  require(rate < 1.0, "dropout", "rate must be below 1");
  const T keep_scale = T(1) / static_cast<T>(1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor<T> mask(a.value().shape());
  for (auto& v : mask.values()) v = keep(g.rng()) ? keep_scale : T(0);
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.record(std::move(out), {a}, [a, mask = std::move(mask)](Graph<T>& g, std::size_t self) {
    const Tensor<T>& d = g.upstream(self);
    Tensor<T>* da = g.grad_of(a);
    for (std::size_t i = 0; i < d.size(); ++i) (*da)[i] += d[i] * mask[i];
  });
}

template <typename T>
Var<T> cross_entropy_loss(Var<T> logits, std::span<const std::size_t> targets) {
  const Tensor<T>& lv = logits.value();
  require(lv.rows() == targets.size(), "cross_entropy_loss", "one target per row is required");
  Tensor<T> grad(lv.shape());
  T total = 0;
  for (std::size_t r = 0; r < lv.rows(); ++r) {
    auto ce = cross_entropy<T>(lv.row(r), targets[r]);
    total += ce.loss;
    std::copy(ce.grad.begin(), ce.grad.end(), grad.row(r).begin());
  }
  return logits.graph->record(Tensor<T>::scalar(total), {logits},
                              [logits, grad = std::move(grad)](Graph<T>& g, std::size_t self) {
                                const T d = g.upstream(self)[0];
                                Tensor<T>* dl = g.grad_of(logits);
                                for (std::size_t i = 0; i < grad.size(); ++i) (*dl)[i] += d * grad[i];
                              });
}

#define LATTICEFORMER_INSTANTIATE(T)                                                   \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                           \
  template Var<T> matmul_transposed<T>(Var<T>, Var<T>);                                \
  template Var<T> add<T>(Var<T>, Var<T>);                                              \
  template Var<T> add_row<T>(Var<T>, Var<T>);                                          \
  template Var<T> scale<T>(Var<T>, T);                                                 \
  template Var<T> relu<T>(Var<T>);                                                     \
  template Var<T> hadamard<T>(Var<T>, Var<T>);                                         \
  template Var<T> sum<T>(Var<T>);                                                      \
  template Var<T> softmax_rows<T>(Var<T>, const Mask*);                                \
  template Var<T> layer_norm<T>(Var<T>, Var<T>, Var<T>, T);                            \
  template Var<T> embedding<T>(Var<T>, std::span<const std::size_t>);                  \
  template Var<T> slice_cols<T>(Var<T>, std::size_t, std::size_t);                     \
  template Var<T> concat_cols<T>(std::span<const Var<T>>);                             \
  template Var<T> relation_gather<T>(Var<T>, const RelationMatrix&);                   \
  template Var<T> pair_scores<T>(Var<T>, Var<T>);                                      \
  template Var<T> pair_mix<T>(Var<T>, Var<T>);                                         \
  template Var<T> dropout<T>(Var<T>, double);                                          \
  template Var<T> cross_entropy_loss<T>(Var<T>, std::span<const std::size_t>);

LATTICEFORMER_INSTANTIATE(float)
LATTICEFORMER_INSTANTIATE(double)

}  // namespace latticeformer
