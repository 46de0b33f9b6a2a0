#include "cltrack/kernels/layers.hpp"

#include <cmath>
#include <numbers>

namespace cltrack::kernels {

// ---------------------------------------------------------------------------
// dwconv

DwConvParams DwConvParams::zeros(int channels) {
    return {Matrix::Zero(kDwTaps, channels), Vector::Zero(channels)};
}

DwConvParams DwConvParams::identity(int channels) {
    auto p = zeros(channels);
    p.kernel.row(kDwTaps / 2).setOnes();
    return p;
}

void DwConvParams::validate() const {
    require(kernel.rows() == kDwTaps, "dwconv: kernel must have 49 taps per channel");
    require(bias.size() == kernel.cols(), "dwconv: bias must have one entry per channel");
    require_finite(kernel, "dwconv: non-finite kernel");
    require_finite(bias, "dwconv: non-finite bias");
}

std::vector<TensorView> DwConvParams::tensors() {
    return {view("dwconv.kernel", kernel), view("dwconv.bias", bias)};
}

namespace {

constexpr int kHalf = kDwKernel / 2;

void check_grid(const Matrix& grid, int height, int width, const DwConvParams& params) {
    require(height >= 1 && width >= 1, "dwconv: grid must be at least 1x1");
    require(grid.rows() == static_cast<Eigen::Index>(height) * width,
            "dwconv: token count does not match height * width");
    params.validate();
    require(grid.cols() == params.kernel.cols(), "dwconv: channel mismatch");
}

}  // namespace

Matrix dwconv7x7(const Matrix& grid, int height, int width, const DwConvParams& params) {
    check_grid(grid, height, width, params);
    const Eigen::Index channels = grid.cols();
    Matrix out(grid.rows(), channels);
    for (Eigen::Index c = 0; c < channels; ++c) {
        for (int i = 0; i < height; ++i) {
            for (int j = 0; j < width; ++j) {
                double acc = params.bias(c);
                for (int u = -kHalf; u <= kHalf; ++u) {
                    const int r = i + u;
                    if (r < 0 || r >= height) {
                        continue;
                    }
                    for (int v = -kHalf; v <= kHalf; ++v) {
                        const int s = j + v;
                        if (s < 0 || s >= width) {
                            continue;
                        }
                        acc += params.kernel((u + kHalf) * kDwKernel + (v + kHalf), c) *
                               grid(r * width + s, c);
                    }
                }
                out(i * width + j, c) = acc;
            }
        }
    }
    return out;
}

DwConvGrads dwconv7x7_backward(const Matrix& grid, int height, int width,
                               const DwConvParams& params, const Matrix& dy) {
    check_grid(grid, height, width, params);
    require(dy.rows() == grid.rows() && dy.cols() == grid.cols(),
            "dwconv: upstream gradient shape mismatch");
    DwConvGrads g{DwConvParams::zeros(static_cast<int>(grid.cols())),
                  Matrix::Zero(grid.rows(), grid.cols())};
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
        for (int i = 0; i < height; ++i) {
            for (int j = 0; j < width; ++j) {
                const double go = dy(i * width + j, c);
                g.params.bias(c) += go;
                for (int u = -kHalf; u <= kHalf; ++u) {
                    const int r = i + u;
                    if (r < 0 || r >= height) {
                        continue;
                    }
                    for (int v = -kHalf; v <= kHalf; ++v) {
                        const int s = j + v;
                        if (s < 0 || s >= width) {
                            continue;
                        }
                        const int tap = (u + kHalf) * kDwKernel + (v + kHalf);
                        g.params.kernel(tap, c) += go * grid(r * width + s, c);
                        g.dx(r * width + s, c) += go * params.kernel(tap, c);
                    }
                }
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// inverted MLP

MlpParams MlpParams::zeros(int channels) {
    const int hidden = kMlpExpansion * channels;
    return {Matrix::Zero(channels, hidden), Vector::Zero(hidden), Matrix::Zero(hidden, channels),
            Vector::Zero(channels)};
}

void MlpParams::validate() const {
    const auto c = w1.rows();
    require(c >= 1, "mlp: empty weights");
    require(w1.cols() == kMlpExpansion * c, "mlp: hidden width must be 4x the input width");
    require(b1.size() == w1.cols(), "mlp: b1 width mismatch");
    require(w2.rows() == w1.cols() && w2.cols() == c, "mlp: w2 must be 4C x C");
    require(b2.size() == c, "mlp: b2 width mismatch");
    require_finite(w1, "mlp: non-finite w1");
    require_finite(b1, "mlp: non-finite b1");
    require_finite(w2, "mlp: non-finite w2");
    require_finite(b2, "mlp: non-finite b2");
}

std::vector<TensorView> MlpParams::tensors() {
    return {view("mlp.w1", w1), view("mlp.b1", b1), view("mlp.w2", w2), view("mlp.b2", b2)};
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

Matrix inverted_mlp(const Matrix& x, const MlpParams& params) {
    params.validate();
    require(x.cols() == params.channels(), "mlp: input width mismatch");
    const Matrix pre = (x * params.w1).rowwise() + params.b1.transpose();
    const Matrix act = pre.unaryExpr([](double v) { return gelu(v); });
    return (act * params.w2).rowwise() + params.b2.transpose();
}

MlpGrads inverted_mlp_backward(const Matrix& x, const MlpParams& params, const Matrix& dy) {
    params.validate();
    require(x.cols() == params.channels(), "mlp: input width mismatch");
    require(dy.rows() == x.rows() && dy.cols() == x.cols(), "mlp: upstream gradient mismatch");
    const Matrix pre = (x * params.w1).rowwise() + params.b1.transpose();
    const Matrix act = pre.unaryExpr([](double v) { return gelu(v); });
    const Matrix dact = dy * params.w2.transpose();
    const Matrix dpre =
        dact.cwiseProduct(pre.unaryExpr([](double v) { return gelu_grad(v); }));
    MlpGrads g;
    g.params.w2 = act.transpose() * dy;
    g.params.b2 = dy.colwise().sum().transpose();
    g.params.w1 = x.transpose() * dpre;
    g.params.b1 = dpre.colwise().sum().transpose();
    g.dx = dpre * params.w1.transpose();
    return g;
}

// ---------------------------------------------------------------------------
// layer norm

LayerNormParams LayerNormParams::identity(int channels) {
    return {Vector::Ones(channels), Vector::Zero(channels)};
}

void LayerNormParams::validate() const {
    require(gain.size() >= 1 && gain.size() == bias.size(), "layer_norm: gain/bias mismatch");
    require_finite(gain, "layer_norm: non-finite gain");
    require_finite(bias, "layer_norm: non-finite bias");
}

std::vector<TensorView> LayerNormParams::tensors() {
    return {view("gain", gain), view("bias", bias)};
}

namespace {

struct Normalized {
    Matrix xhat;
    Vector inv_std;
};

Normalized normalize_rows(const Matrix& x) {
    Normalized n{Matrix(x.rows(), x.cols()), Vector(x.rows())};
    const double width = static_cast<double>(x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).sum() / width;
        const double var = (x.row(r).array() - mean).square().sum() / width;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        n.inv_std(r) = inv;
        n.xhat.row(r) = (x.row(r).array() - mean) * inv;
    }
    return n;
}

}  // namespace

Matrix layer_norm(const Matrix& x, const LayerNormParams& params) {
    params.validate();
    require(x.cols() == params.gain.size(), "layer_norm: width mismatch");
    const auto n = normalize_rows(x);
    return (n.xhat.array().rowwise() * params.gain.transpose().array()).matrix().rowwise() +
           params.bias.transpose();
}

LayerNormGrads layer_norm_backward(const Matrix& x, const LayerNormParams& params,
                                   const Matrix& dy) {
    params.validate();
    require(x.cols() == params.gain.size(), "layer_norm: width mismatch");
    require(dy.rows() == x.rows() && dy.cols() == x.cols(),
            "layer_norm: upstream gradient mismatch");
    const auto n = normalize_rows(x);
    LayerNormGrads g;
    g.params.gain = dy.cwiseProduct(n.xhat).colwise().sum().transpose();
    g.params.bias = dy.colwise().sum().transpose();
    const Matrix dxhat = dy.array().rowwise() * params.gain.transpose().array();
    g.dx.resize(x.rows(), x.cols());
    const double width = static_cast<double>(x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean_d = dxhat.row(r).sum() / width;
        const double mean_dx = dxhat.row(r).dot(n.xhat.row(r)) / width;
        g.dx.row(r) =
            (dxhat.row(r).array() - mean_d - n.xhat.row(r).array() * mean_dx) * n.inv_std(r);
    }
    return g;
}

// ---------------------------------------------------------------------------
// cross-attention

AttentionParams AttentionParams::zeros(int dim, int heads) {
    AttentionParams p;
    p.heads = heads;
    p.wq = p.wk = p.wv = p.wo = Matrix::Zero(dim, dim);
    p.bq = p.bk = p.bv = p.bo = Vector::Zero(dim);
    return p;
}

AttentionParams AttentionParams::identity(int dim, int heads) {
    auto p = zeros(dim, heads);
    p.wq = p.wk = p.wv = p.wo = Matrix::Identity(dim, dim);
    return p;
}

void AttentionParams::validate() const {
    const auto d = wq.rows();
    require(d >= 1, "attention: empty projections");
    require(heads >= 1 && d % heads == 0, "attention: width must be divisible by head count");
    for (const Matrix* m : {&wq, &wk, &wv, &wo}) {
        require(m->rows() == d && m->cols() == d, "attention: projections must be d x d");
        require_finite(*m, "attention: non-finite projection");
    }
    for (const Vector* v : {&bq, &bk, &bv, &bo}) {
        require(v->size() == d, "attention: bias width mismatch");
        require_finite(*v, "attention: non-finite bias");
    }
}

std::vector<TensorView> AttentionParams::tensors() {
    return {view("wq", wq), view("bq", bq), view("wk", wk), view("bk", bk),
            view("wv", wv), view("bv", bv), view("wo", wo), view("bo", bo)};
}

namespace {

void check_attention(const Matrix& queries, const Matrix& context,
                     const AttentionParams& params) {
    params.validate();
    require(context.rows() >= 1, "attention: empty key set");
    require(queries.cols() == params.dim() && context.cols() == params.dim(),
            "attention: model width mismatch");
}

Matrix softmax_rows(const Matrix& s) {
    Matrix p(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double mx = s.row(r).maxCoeff();
        p.row(r) = (s.row(r).array() - mx).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

struct AttentionCache {
    Matrix q, k, v, concat;
    std::vector<Matrix> weights;
};

AttentionCache attention_forward(const Matrix& queries, const Matrix& context,
                                 const AttentionParams& p) {
    AttentionCache c;
    c.q = (queries * p.wq).rowwise() + p.bq.transpose();
    c.k = (context * p.wk).rowwise() + p.bk.transpose();
    c.v = (context * p.wv).rowwise() + p.bv.transpose();
    const int dh = p.dim() / p.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    c.concat.resize(queries.rows(), p.dim());
    for (int h = 0; h < p.heads; ++h) {
        const auto qh = c.q.middleCols(h * dh, dh);
        const auto kh = c.k.middleCols(h * dh, dh);
        const auto vh = c.v.middleCols(h * dh, dh);
        Matrix w = softmax_rows((qh * kh.transpose()) * scale);
        c.concat.middleCols(h * dh, dh) = w * vh;
        c.weights.push_back(std::move(w));
    }
    return c;
}

}  // namespace

AttentionResult cross_attention(const Matrix& queries, const Matrix& context,
                                const AttentionParams& params) {
    check_attention(queries, context, params);
    auto c = attention_forward(queries, context, params);
    Matrix out = (c.concat * params.wo).rowwise() + params.bo.transpose();
    return {std::move(out), std::move(c.weights)};
}

AttentionGrads cross_attention_backward(const Matrix& queries, const Matrix& context,
                                        const AttentionParams& p, const Matrix& dy) {
    check_attention(queries, context, p);
    require(dy.rows() == queries.rows() && dy.cols() == p.dim(),
            "attention: upstream gradient mismatch");
    const auto c = attention_forward(queries, context, p);
    const int dh = p.dim() / p.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    AttentionGrads g;
    g.params.heads = p.heads;
    g.params.wo = c.concat.transpose() * dy;
    g.params.bo = dy.colwise().sum().transpose();
    const Matrix dconcat = dy * p.wo.transpose();

    Matrix dq = Matrix::Zero(c.q.rows(), c.q.cols());
    Matrix dk = Matrix::Zero(c.k.rows(), c.k.cols());
    Matrix dv = Matrix::Zero(c.v.rows(), c.v.cols());
    for (int h = 0; h < p.heads; ++h) {
        const Matrix& w = c.weights[static_cast<std::size_t>(h)];
        const auto dout = dconcat.middleCols(h * dh, dh);
        const Matrix dw = dout * c.v.middleCols(h * dh, dh).transpose();
        dv.middleCols(h * dh, dh) = w.transpose() * dout;
        const Eigen::VectorXd row_dot = dw.cwiseProduct(w).rowwise().sum();
        const Matrix ds = w.cwiseProduct(dw.colwise() - row_dot) * scale;
        dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
        dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
    }

    g.params.wq = queries.transpose() * dq;
    g.params.bq = dq.colwise().sum().transpose();
    g.params.wk = context.transpose() * dk;
    g.params.bk = dk.colwise().sum().transpose();
    g.params.wv = context.transpose() * dv;
    g.params.bv = dv.colwise().sum().transpose();
    g.dqueries = dq * p.wq.transpose();
    g.dcontext = dk * p.wk.transpose() + dv * p.wv.transpose();
    return g;
}

}  // namespace cltrack::kernels
