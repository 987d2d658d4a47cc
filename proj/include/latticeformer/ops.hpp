#pragma once

#include <cstddef>
#include <span>

#include "latticeformer/functional.hpp"
#include "latticeformer/graph.hpp"
#include "latticeformer/lattice.hpp"

// Differentiable ops over Graph nodes. All operands are matrices; each op
// records its backward pass on the graph. Instantiated for float and double.
namespace latticeformer {

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
// a * b^T
template <typename T> Var<T> matmul_transposed(Var<T> a, Var<T> b);
template <typename T> Var<T> add(Var<T> a, Var<T> b);
// Adds the 1 x n `row` to every row of `a`.
template <typename T> Var<T> add_row(Var<T> a, Var<T> row);
template <typename T> Var<T> scale(Var<T> a, T factor);
template <typename T> Var<T> relu(Var<T> a);
template <typename T> Var<T> hadamard(Var<T> a, Var<T> b);
// 1 x 1 sum of all entries.
template <typename T> Var<T> sum(Var<T> a);
template <typename T> Var<T> softmax_rows(Var<T> logits, const Mask* mask = nullptr);
template <typename T> Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps);
// Rows of `table` selected by `ids`.
template <typename T> Var<T> embedding(Var<T> table, std::span<const std::size_t> ids);
template <typename T> Var<T> slice_cols(Var<T> a, std::size_t start, std::size_t width);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);

// Gathers table rows by relation code into an (M*M) x w arrangement: row
// i*M + j holds table[relations(i, j)].
template <typename T> Var<T> relation_gather(Var<T> table, const RelationMatrix& relations);
// out(i, j) = q_i . pairs_{i*M+j}   for q: M x w, pairs: (M*M) x w.
template <typename T> Var<T> pair_scores(Var<T> q, Var<T> pairs);
// out_i = sum_j weights(i, j) * pairs_{i*M+j}   for weights: M x M.
template <typename T> Var<T> pair_mix(Var<T> weights, Var<T> pairs);

// Inverted dropout; identity unless the graph is in training mode and
// dropout is globally enabled.
template <typename T> Var<T> dropout(Var<T> a, double rate);

// Summed -log softmax(logits_r)[targets[r]] over rows, as a 1 x 1 node.
template <typename T> Var<T> cross_entropy_loss(Var<T> logits, std::span<const std::size_t> targets);

// Process-wide switch for deterministic evaluation.
void set_dropout_enabled(bool enabled) noexcept;
bool dropout_enabled() noexcept;

}  // namespace latticeformer
