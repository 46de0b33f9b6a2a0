#pragma once

#include <vector>

#include "cltrack/kernels/tensor.hpp"

namespace cltrack::kernels {

// ---------------------------------------------------------------------------
// 7x7 depth-wise convolution

inline constexpr int kDwKernel = 7;
inline constexpr int kDwTaps = kDwKernel * kDwKernel;

/// Per-channel 7x7 cross-correlation, zero padding 3, stride 1.
/// kernel(tap, c) with tap = (dy + 3) * 7 + (dx + 3).
struct DwConvParams {
    Matrix kernel;  // 49 x C
    Vector bias;    // C

    static DwConvParams zeros(int channels);
    static DwConvParams identity(int channels);
    void validate() const;
    std::vector<TensorView> tensors();
};

struct DwConvGrads {
    DwConvParams params;
    Matrix dx;
};

Matrix dwconv7x7(const Matrix& grid, int height, int width, const DwConvParams& params);
DwConvGrads dwconv7x7_backward(const Matrix& grid, int height, int width,
                               const DwConvParams& params, const Matrix& dy);

// ---------------------------------------------------------------------------
// Inverted-bottleneck MLP: gelu(x W1 + b1) W2 + b2, hidden width 4x the input.

inline constexpr int kMlpExpansion = 4;

struct MlpParams {
    Matrix w1;  // C x 4C
    Vector b1;  // 4C
    Matrix w2;  // 4C x C
    Vector b2;  // C

    int channels() const { return static_cast<int>(w1.rows()); }
    static MlpParams zeros(int channels);
    void validate() const;
    std::vector<TensorView> tensors();
};

struct MlpGrads {
    MlpParams params;
    Matrix dx;
};

/// Exact GELU, x * Phi(x).
double gelu(double x);
double gelu_grad(double x);

Matrix inverted_mlp(const Matrix& x, const MlpParams& params);
MlpGrads inverted_mlp_backward(const Matrix& x, const MlpParams& params, const Matrix& dy);

// ---------------------------------------------------------------------------
// Layer normalization over channels.

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormParams {
    Vector gain;
    Vector bias;

    static LayerNormParams identity(int channels);
    void validate() const;
    std::vector<TensorView> tensors();
};

struct LayerNormGrads {
    LayerNormParams params;
    Matrix dx;
};

Matrix layer_norm(const Matrix& x, const LayerNormParams& params);
LayerNormGrads layer_norm_backward(const Matrix& x, const LayerNormParams& params,
                                   const Matrix& dy);

// ---------------------------------------------------------------------------
// Multi-head cross-attention: queries attend over a key/value set.

struct AttentionParams {
    int heads = 1;
    Matrix wq, wk, wv, wo;  // d x d
    Vector bq, bk, bv, bo;  // d

    int dim() const { return static_cast<int>(wq.rows()); }
    static AttentionParams zeros(int dim, int heads);
    static AttentionParams identity(int dim, int heads);
    void validate() const;
    std::vector<TensorView> tensors();
};

struct AttentionResult {
    Matrix output;                 // m x d
    std::vector<Matrix> weights;   // one m x n softmax matrix per head
};

struct AttentionGrads {
    AttentionParams params;
    Matrix dqueries;
    Matrix dcontext;
};

/// softmax(Q K^T / sqrt(d_head)) V per head, concatenated, then the output projection.
/// Throws PreconditionError on a width mismatch or an empty key set.
AttentionResult cross_attention(const Matrix& queries, const Matrix& context,
                                const AttentionParams& params);
AttentionGrads cross_attention_backward(const Matrix& queries, const Matrix& context,
                                        const AttentionParams& params, const Matrix& dy);

}  // namespace cltrack::kernels
