#pragma once

#include "cltrack/kernels/cstmamba.hpp"
#include "cltrack/tracker/backend.hpp"

namespace cltrack::kernels {

/// Untrained segmentation backend built on cstmamba_forward.
///
/// Mask logits are the scaled dot product of each fused token with the fused CLS token
/// (in tracking mode the CLS token is shifted by the mean of the memory embeddings);
/// masks are upsampled to the output size by nearest neighbour. Embeddings are the
/// mean fused token with a constant 1 appended, so their norm is always positive.
class ToyNeuralBackend final : public tracker::SegmentationBackend {
public:
    ToyNeuralBackend(CSTMambaParams params, int mask_height, int mask_width);

    tracker::BackendCapabilities capabilities() const override;
    std::string name() const override { return "toy-cstmamba"; }
    ScoreReport segment(const tracker::BackendRequest& request) const override;

    const CSTMambaParams& params() const { return params_; }

private:
    CSTMambaParams params_;
    int mask_height_;
    int mask_width_;
};

}  // namespace cltrack::kernels
