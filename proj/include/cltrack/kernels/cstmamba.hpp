#pragma once

#include <cstdint>
#include <vector>

#include "cltrack/kernels/layers.hpp"
#include "cltrack/kernels/scan.hpp"
#include "cltrack/kernels/sensory.hpp"

namespace cltrack::kernels {

struct TextTokens {
    Matrix tokens;  // n_tokens x channels
    int cls_index = 0;
};

/// Parameters of the cross-modal spatial-temporal block.
///
/// Data flow (pre-norm residual sublayers):
///   V  = [f_{t-2}; f_{t-1}; f_t] tokens, frame-major then row-major
///   V += T2V(LN_t2v(V), text)
///   U  = LN_mix(V);  V += DWConv7x7(U per frame) + Scan(U)
///   V += MLP(LN_mlp(V))
///   T  = text + V2T(LN_v2t(text), V)
///   fused_grid = V[current frame] * out_vision + b,  fused_cls = T[cls] * out_text + b
struct CSTMambaParams {
    int channels = 0;
    int state_dim = 0;
    int heads = 1;

    LayerNormParams ln_t2v;
    AttentionParams t2v;
    LayerNormParams ln_mix;
    DwConvParams dwconv;
    ScanParams scan;
    LayerNormParams ln_mlp;
    MlpParams mlp;
    LayerNormParams ln_v2t;
    AttentionParams v2t;
    Matrix out_vision;  // C x C
    Vector out_vision_bias;
    Matrix out_text;  // C x C
    Vector out_text_bias;

    bool initialized() const { return channels > 0; }

    /// Every tensor zero (layer-norm gains included).
    static CSTMambaParams zeros(int channels, int state_dim, int heads = 1);

    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; layer-norm gains 1, biases 0.
    static CSTMambaParams random(std::uint64_t seed, int channels, int state_dim,
                                 int heads = 1);

    /// Throws PreconditionError when shapes disagree, NumericError on non-finite values.
    void validate() const;

    /// Fixed order used by the binary parameter format.
    std::vector<TensorView> tensors();
};

struct CSTMambaOutput {
    FeatureGrid fused_grid;
    Vector fused_cls;
};

/// Stacks [sensory..., current] (missing sensory slots duplicate `current`), runs the block
/// and returns the current frame's fused features plus the fused CLS token.
CSTMambaOutput cstmamba_forward(const FeatureGrid& current, const SensoryMemory& sensory,
                                const TextTokens& text, const CSTMambaParams& params);

}  // namespace cltrack::kernels
