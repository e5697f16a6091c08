#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "common/geometry.hpp"
#include "tensor/autodiff.hpp"

// Differentiable ops on 2-D (rows x cols) tensors. Rank-1 inputs are treated
// as a single row. Every op records its own closed-form backward on the tape.
namespace sw {

Var matmul(Var a, Var b);
// y = xW + b; x [n x d_in], W [d_in x d_out], b [d_out].
Var linear(Var x, Var w, std::optional<Var> b = std::nullopt);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// Adds a [d] (or [1 x d]) row to every row of x.
Var add_row(Var x, Var row);
Var scale(Var x, double s);

Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t begin, std::size_t count);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
// out[i] = x[index[i]]; backward scatter-adds.
Var gather_rows(Var x, std::vector<std::size_t> index);
Var repeat_row(Var row, std::size_t n);
Var mean_rows(Var x);
Var reshape(Var x, Shape shape);
Var cumsum_rows(Var x);

Var gelu(Var x);
Var sigmoid(Var x);
Var softmax(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

Var sum(Var x);
// Scalar sum_i w_i x_i with constant weights.
Var weighted_sum(Var x, const Tensor& weights);

// 2-D rotary embedding. The first d/4 rotation pairs turn by pos.x * f_p and
// the remaining d/4 by pos.y * f_p, with f_p = 10000^(-p / (d/4)).
Var rope2d(Var x, std::span<const Vec2> positions);
Tensor rope2d(const Tensor& x, std::span<const Vec2> positions);

// Row grouping for fused attention: rows [g*q_group, (g+1)*q_group) of the
// queries attend only to rows [g*k_group, (g+1)*k_group) of the keys.
// A group size of 0 means "all rows in one group".
struct AttentionLayout {
  std::size_t heads = 1;
  std::size_t q_group = 0;
  std::size_t k_group = 0;
  // Optional additive logit bias, one entry per key row.
  std::vector<double> key_bias;
};

// Scaled dot-product attention over already-projected q, k, v, split into
// `heads` column blocks with 1/sqrt(d/heads) scaling. No projections.
Var attention(Var q, Var k, Var v, const AttentionLayout& layout);

// Row-stochastic attention weights, [heads * n_q x k_group]; head-major.
Tensor attention_probabilities(const Tensor& q, const Tensor& k, const AttentionLayout& layout);

}  // namespace sw
