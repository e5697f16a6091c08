#pragma once

#include <string>

#include "tensor/ops.hpp"
#include "tensor/params.hpp"

namespace sw {

struct LinearLayer {
  std::size_t weight = 0;
  std::size_t bias = 0;
};

enum class Init { kUniform, kZero };

// Weight uniform in +-sqrt(1/d_in) (or zero), bias zero.
LinearLayer make_linear(ParamStore& store, const std::string& name, std::size_t d_in, std::size_t d_out,
                        SplitMix& rng, Init init = Init::kUniform);
Var apply(Params p, const LinearLayer& layer, Var x);

struct LayerNormParams {
  std::size_t gamma = 0;
  std::size_t beta = 0;
};

LayerNormParams make_layer_norm(ParamStore& store, const std::string& name, std::size_t d);
Var apply(Params p, const LayerNormParams& ln, Var x);

// Multi-head attention with input projections W_Q, W_K, W_V and output W_O.
struct AttentionParams {
  LinearLayer q, k, v, o;
  std::size_t heads = 1;
};

AttentionParams make_attention(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                               SplitMix& rng, Init output_init = Init::kUniform);

// `layout.heads` is overridden by `attn.heads`.
Var multi_head_attention(Params p, const AttentionParams& attn, Var queries, Var keys, Var values,
                         AttentionLayout layout = {});

struct MlpParams {
  LinearLayer fc1, fc2;
};

MlpParams make_mlp(ParamStore& store, const std::string& name, std::size_t d_in, std::size_t hidden,
                   std::size_t d_out, SplitMix& rng);
Var apply(Params p, const MlpParams& mlp, Var x);

// Pre-norm block: x + MHA(LN(x)), then x + MLP(LN(x)).
struct TransformerBlock {
  LayerNormParams ln1;
  AttentionParams attn;
  LayerNormParams ln2;
  MlpParams mlp;
};

TransformerBlock make_block(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                            std::size_t hidden, SplitMix& rng);
Var apply(Params p, const TransformerBlock& block, Var x, AttentionLayout layout = {});
// Same block, but only the last row is used as a query and returned ([1 x d]).
Var apply_last_row(Params p, const TransformerBlock& block, Var x);

}  // namespace sw
