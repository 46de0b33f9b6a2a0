#include "cltrack/kernels/cstmamba.hpp"

#include <cmath>
#include <random>

namespace cltrack::kernels {

CSTMambaParams CSTMambaParams::zeros(int channels, int state_dim, int heads) {
    CSTMambaParams p;
    p.channels = channels;
    p.state_dim = state_dim;
    p.heads = heads;
    const LayerNormParams ln{Vector::Zero(channels), Vector::Zero(channels)};
    p.ln_t2v = p.ln_mix = p.ln_mlp = p.ln_v2t = ln;
    p.t2v = p.v2t = AttentionParams::zeros(channels, heads);
    p.dwconv = DwConvParams::zeros(channels);
    p.scan = ScanParams::zeros(channels, state_dim);
    p.mlp = MlpParams::zeros(channels);
    p.out_vision = p.out_text = Matrix::Zero(channels, channels);
    p.out_vision_bias = p.out_text_bias = Vector::Zero(channels);
    return p;
}

CSTMambaParams CSTMambaParams::random(std::uint64_t seed, int channels, int state_dim,
                                      int heads) {
    auto p = zeros(channels, state_dim, heads);
    std::mt19937_64 rng(seed);
    auto fill = [&](auto& m, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = dist(rng);
        }
    };
    p.ln_t2v = p.ln_mix = p.ln_mlp = p.ln_v2t = LayerNormParams::identity(channels);
    for (auto* att : {&p.t2v, &p.v2t}) {
        for (auto* m : {&att->wq, &att->wk, &att->wv, &att->wo}) {
            fill(*m, channels);
        }
        for (auto* v : {&att->bq, &att->bk, &att->bv, &att->bo}) {
            fill(*v, channels);
        }
    }
    fill(p.dwconv.kernel, kDwTaps);
    fill(p.dwconv.bias, kDwTaps);
    fill(p.scan.a_log, state_dim);
    fill(p.scan.w_delta, channels);
    fill(p.scan.b_delta, channels);
    fill(p.scan.w_b, channels);
    fill(p.scan.b_b, channels);
    fill(p.scan.w_c, channels);
    fill(p.scan.b_c, channels);
    fill(p.mlp.w1, channels);
    fill(p.mlp.b1, channels);
    fill(p.mlp.w2, kMlpExpansion * channels);
    fill(p.mlp.b2, kMlpExpansion * channels);
    fill(p.out_vision, channels);
    fill(p.out_vision_bias, channels);
    fill(p.out_text, channels);
    fill(p.out_text_bias, channels);
    return p;
}

void CSTMambaParams::validate() const {
    require(initialized(), "cstmamba: parameters are not initialized");
    require(state_dim >= 1, "cstmamba: state dimension must be >= 1");
    for (const auto* ln : {&ln_t2v, &ln_mix, &ln_mlp, &ln_v2t}) {
        ln->validate();
        require(ln->gain.size() == channels, "cstmamba: layer-norm width mismatch");
    }
    for (const auto* att : {&t2v, &v2t}) {
        att->validate();
        require(att->dim() == channels, "cstmamba: attention width mismatch");
    }
    dwconv.validate();
    require(dwconv.kernel.cols() == channels, "cstmamba: dwconv width mismatch");
    scan.validate();
    require(scan.channels() == channels && scan.state_dim() == state_dim,
            "cstmamba: scan shape mismatch");
    mlp.validate();
    require(mlp.channels() == channels, "cstmamba: mlp width mismatch");
    require(out_vision.rows() == channels && out_vision.cols() == channels &&
                out_text.rows() == channels && out_text.cols() == channels,
            "cstmamba: output projections must be C x C");
    require(out_vision_bias.size() == channels && out_text_bias.size() == channels,
            "cstmamba: output bias width mismatch");
    require_finite(out_vision, "cstmamba: non-finite output projection");
    require_finite(out_text, "cstmamba: non-finite output projection");
    require_finite(out_vision_bias, "cstmamba: non-finite output bias");
    require_finite(out_text_bias, "cstmamba: non-finite output bias");
}

std::vector<TensorView> CSTMambaParams::tensors() {
    std::vector<TensorView> out;
    auto append = [&out](const std::string& prefix, std::vector<TensorView> views) {
        for (auto& v : views) {
            v.name = prefix + v.name;
            out.push_back(std::move(v));
        }
    };
    append("ln_t2v.", ln_t2v.tensors());
    append("t2v.", t2v.tensors());
    append("ln_mix.", ln_mix.tensors());
    append("", dwconv.tensors());
    append("", scan.tensors());
    append("ln_mlp.", ln_mlp.tensors());
    append("", mlp.tensors());
    append("ln_v2t.", ln_v2t.tensors());
    append("v2t.", v2t.tensors());
    out.push_back(view("out_vision", out_vision));
    out.push_back(view("out_vision_bias", out_vision_bias));
    out.push_back(view("out_text", out_text));
    out.push_back(view("out_text_bias", out_text_bias));
    return out;
}

CSTMambaOutput cstmamba_forward(const FeatureGrid& current, const SensoryMemory& sensory,
                                const TextTokens& text, const CSTMambaParams& params) {
    params.validate();
    const int c = params.channels;
    require(current.height >= 1 && current.width >= 1, "cstmamba: empty feature grid");
    require(current.tokens.rows() == static_cast<Eigen::Index>(current.height) * current.width,
            "cstmamba: token count does not match grid size");
    require(current.channels() == c, "cstmamba: feature width mismatch");
    require(text.tokens.rows() >= 1 && text.tokens.cols() == c, "cstmamba: text shape mismatch");
    require(text.cls_index >= 0 && text.cls_index < text.tokens.rows(),
            "cstmamba: cls index out of range");
    require(sensory.size() <= SensoryMemory::kSlots, "cstmamba: too many sensory slots");

    // [t-2, t-1, t]; absent history duplicates the current frame.
    const Eigen::Index per_frame = current.tokens.rows();
    constexpr int kFrames = 3;
    std::vector<const Matrix*> frames(kFrames, &current.tokens);
    const auto& slots = sensory.slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& g = slots[i].grid;
        require(g.height == current.height && g.width == current.width && g.channels() == c,
                "cstmamba: sensory grid shape mismatch");
        frames[kFrames - 1 - slots.size() + i] = &g.tokens;
    }
    Matrix vis(kFrames * per_frame, c);
    for (int f = 0; f < kFrames; ++f) {
        vis.middleRows(f * per_frame, per_frame) = *frames[static_cast<std::size_t>(f)];
    }

    vis += cross_attention(layer_norm(vis, params.ln_t2v), text.tokens, params.t2v).output;

    const Matrix mixed_in = layer_norm(vis, params.ln_mix);
    Matrix mix = selective_scan(mixed_in, params.scan);
    for (int f = 0; f < kFrames; ++f) {
        mix.middleRows(f * per_frame, per_frame) +=
            dwconv7x7(mixed_in.middleRows(f * per_frame, per_frame), current.height,
                      current.width, params.dwconv);
    }
    vis += mix;
    vis += inverted_mlp(layer_norm(vis, params.ln_mlp), params.mlp);

    Matrix txt = text.tokens;
    txt += cross_attention(layer_norm(txt, params.ln_v2t), vis, params.v2t).output;

    CSTMambaOutput out;
    out.fused_grid.height = current.height;
    out.fused_grid.width = current.width;
    out.fused_grid.tokens =
        (vis.bottomRows(per_frame) * params.out_vision).rowwise() + params.out_vision_bias.transpose();
    out.fused_cls = params.out_text.transpose() * txt.row(text.cls_index).transpose() +
                    params.out_text_bias;
    return out;
}

}  // namespace cltrack::kernels
