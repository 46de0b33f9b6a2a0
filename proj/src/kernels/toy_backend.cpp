#include "cltrack/kernels/toy_backend.hpp"

#include <cmath>

#include "cltrack/core/error.hpp"

namespace cltrack::kernels {

ToyNeuralBackend::ToyNeuralBackend(CSTMambaParams params, int mask_height, int mask_width)
    : params_(std::move(params)), mask_height_(mask_height), mask_width_(mask_width) {
    params_.validate();
    require(mask_height >= 1 && mask_width >= 1, "toy backend: mask size must be positive");
}

tracker::BackendCapabilities ToyNeuralBackend::capabilities() const {
    return {static_cast<std::size_t>(params_.channels) + 1, mask_height_, mask_width_};
}

ScoreReport ToyNeuralBackend::segment(const tracker::BackendRequest& request) const {
    const auto& grid = request.payload.features;
    const int c = params_.channels;
    require(!grid.empty(), "toy backend: frame payload carries no features");
    require(request.text.dim() == static_cast<std::size_t>(c),
            "toy backend: text embedding width mismatch");

    TextTokens text{Matrix(1, c), 0};
    for (int i = 0; i < c; ++i) {
        text.tokens(0, i) = request.text[static_cast<std::size_t>(i)];
    }
    const auto fused = cstmamba_forward(grid, request.sensory, text, params_);

    Vector cls = fused.fused_cls;
    if (request.mode == tracker::BackendMode::Track && !request.context.empty()) {
        Vector mem = Vector::Zero(c);
        for (const auto& e : request.context) {
            require(e.embedding.dim() >= static_cast<std::size_t>(c),
                    "toy backend: memory embedding too short");
            for (int i = 0; i < c; ++i) {
                mem(i) += e.embedding[static_cast<std::size_t>(i)];
            }
        }
        cls += mem / static_cast<double>(request.context.size());
    }

    const Vector logits = fused.fused_grid.tokens * cls / std::sqrt(static_cast<double>(c));

    ScoreReport r;
    r.frame = request.payload.frame;
    r.mask = MaskGrid(mask_height_, mask_width_);
    for (int y = 0; y < mask_height_; ++y) {
        const int sy = y * grid.height / mask_height_;
        for (int x = 0; x < mask_width_; ++x) {
            const int sx = x * grid.width / mask_width_;
            r.mask.set(y, x, logits(sy * grid.width + sx) > 0.0);
        }
    }
    r.iou_score = logits.array().tanh().abs().mean();
    r.occlusion_logit = logits.maxCoeff();

    std::vector<double> emb(static_cast<std::size_t>(c) + 1, 1.0);
    const Vector pooled = fused.fused_grid.tokens.colwise().mean().transpose();
    for (int i = 0; i < c; ++i) {
        emb[static_cast<std::size_t>(i)] = pooled(i);
    }
    r.embedding = Embedding(std::move(emb));
    if (!std::isfinite(r.iou_score) || !std::isfinite(r.occlusion_logit)) {
        throw NumericError("toy backend: non-finite scores");
    }
    return r;
}

}  // namespace cltrack::kernels
