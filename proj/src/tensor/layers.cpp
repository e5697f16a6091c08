#include "tensor/layers.hpp"

#include <cmath>

namespace sw {

LinearLayer make_linear(ParamStore& store, const std::string& name, std::size_t d_in, std::size_t d_out,
                        SplitMix& rng, Init init) {
  LinearLayer l;
  const double bound = std::sqrt(1.0 / static_cast<double>(d_in));
  l.weight = store.add(name + ".weight", init == Init::kZero ? Tensor(Shape{d_in, d_out})
                                                             : uniform_tensor(Shape{d_in, d_out}, bound, rng));
  l.bias = store.add(name + ".bias", Tensor(Shape{d_out}));
  return l;
}

Var apply(Params p, const LinearLayer& layer, Var x) { return linear(x, p[layer.weight], p[layer.bias]); }

LayerNormParams make_layer_norm(ParamStore& store, const std::string& name, std::size_t d) {
  return {store.add(name + ".gamma", Tensor(Shape{d}, 1.0)), store.add(name + ".beta", Tensor(Shape{d}))};
}

Var apply(Params p, const LayerNormParams& ln, Var x) { return layer_norm(x, p[ln.gamma], p[ln.beta]); }

AttentionParams make_attention(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                               SplitMix& rng, Init output_init) {
  AttentionParams a;
  a.q = make_linear(store, name + ".q", d, d, rng);
  a.k = make_linear(store, name + ".k", d, d, rng);
  a.v = make_linear(store, name + ".v", d, d, rng);
  a.o = make_linear(store, name + ".o", d, d, rng, output_init);
  a.heads = heads;
  return a;
}

Var multi_head_attention(Params p, const AttentionParams& attn, Var queries, Var keys, Var values,
                         AttentionLayout layout) {
  layout.heads = attn.heads;
  const Var q = apply(p, attn.q, queries);
  const Var k = apply(p, attn.k, keys);
  const Var v = apply(p, attn.v, values);
  return apply(p, attn.o, attention(q, k, v, layout));
}

MlpParams make_mlp(ParamStore& store, const std::string& name, std::size_t d_in, std::size_t hidden,
                   std::size_t d_out, SplitMix& rng) {
  return {make_linear(store, name + ".fc1", d_in, hidden, rng), make_linear(store, name + ".fc2", hidden, d_out, rng)};
}

Var apply(Params p, const MlpParams& mlp, Var x) { return apply(p, mlp.fc2, gelu(apply(p, mlp.fc1, x))); }

TransformerBlock make_block(ParamStore& store, const std::string& name, std::size_t d, std::size_t heads,
                            std::size_t hidden, SplitMix& rng) {
  TransformerBlock b;
  b.ln1 = make_layer_norm(store, name + ".ln1", d);
  b.attn = make_attention(store, name + ".attn", d, heads, rng);
  b.ln2 = make_layer_norm(store, name + ".ln2", d);
  b.mlp = make_mlp(store, name + ".mlp", d, hidden, d, rng);
  return b;
}

Var apply(Params p, const TransformerBlock& block, Var x, AttentionLayout layout) {
  const Var h = apply(p, block.ln1, x);
  x = add(x, multi_head_attention(p, block.attn, h, h, h, std::move(layout)));
  return add(x, apply(p, block.mlp, apply(p, block.ln2, x)));
}

Var apply_last_row(Params p, const TransformerBlock& block, Var x) {
  const std::size_t n = x.value().rows();
  const Var h = apply(p, block.ln1, x);
  const Var last = slice_rows(x, n - 1, 1);
  const Var y = add(last, multi_head_attention(p, block.attn, slice_rows(h, n - 1, 1), h, h));
  return add(y, apply(p, block.mlp, apply(p, block.ln2, y)));
}

}  // namespace sw
