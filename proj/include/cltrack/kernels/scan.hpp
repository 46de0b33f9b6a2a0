#pragma once

#include <cmath>
#include <vector>

#include "cltrack/core/fault.hpp"
#include "cltrack/kernels/tensor.hpp"

namespace cltrack::kernels {

/// Selective state-space scan with input-dependent step size and projections.
///
/// For token t (row of x, D channels) and state size N:
///   delta_t = softplus(x_t * w_delta + b_delta)            (D)
///   B_t     = x_t * w_b + b_b,  C_t = x_t * w_c + b_c      (N)
///   A       = -exp(a_log)                                  (D x N)
///   h_t[d,n] = exp(delta_t[d] * A[d,n]) * h_{t-1}[d,n] + delta_t[d] * B_t[n] * x_t[d]
///   y_t[d]   = sum_n C_t[n] * h_t[d,n],   h_0 = 0
/// Zero-order hold on A, Euler on B.
struct ScanParams {
    Matrix a_log;    // D x N
    Matrix w_delta;  // D x D
    Vector b_delta;  // D
    Matrix w_b;      // D x N
    Vector b_b;      // N
    Matrix w_c;      // D x N
    Vector b_c;      // N

    int channels() const { return static_cast<int>(a_log.rows()); }
    int state_dim() const { return static_cast<int>(a_log.cols()); }

    static ScanParams zeros(int channels, int state_dim);
    void validate() const;
    std::vector<TensorView> tensors();
};

struct ScanGrads {
    ScanParams params;
    Matrix dx;
};

inline double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

/// Streaming forward pass; Scalar = float gives the 32-bit benchmark path.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> selective_scan_t(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x, const ScanParams& p) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    require(x.rows() >= 1, "selective_scan: sequence must be non-empty");
    require(x.cols() == p.channels(), "selective_scan: channel mismatch");

    const Eigen::Index len = x.rows();
    const Eigen::Index dim = p.channels();
    const Eigen::Index state = p.state_dim();
    const Mat a = (-p.a_log.array().exp()).matrix().template cast<Scalar>();
    const Mat w_delta = p.w_delta.template cast<Scalar>();
    const RowVec b_delta = p.b_delta.transpose().template cast<Scalar>();
    const Mat w_b = p.w_b.template cast<Scalar>();
    const RowVec b_b = p.b_b.transpose().template cast<Scalar>();
    const Mat w_c = p.w_c.template cast<Scalar>();
    const RowVec b_c = p.b_c.transpose().template cast<Scalar>();
    const bool skip_decay = fault::active(fault::Fault::ScanSkipsDecay);

    const Mat z = (x * w_delta).rowwise() + b_delta;
    const Mat bt = (x * w_b).rowwise() + b_b;
    const Mat ct = (x * w_c).rowwise() + b_c;

    Mat h = Mat::Zero(dim, state);
    Mat y(len, dim);
    for (Eigen::Index t = 0; t < len; ++t) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            const Scalar delta = static_cast<Scalar>(softplus(static_cast<double>(z(t, d))));
            const Scalar drive = delta * x(t, d);
            Scalar acc = 0;
            for (Eigen::Index n = 0; n < state; ++n) {
                const Scalar decay = skip_decay ? Scalar(1) : std::exp(delta * a(d, n));
                h(d, n) = decay * h(d, n) + drive * bt(t, n);
                acc += ct(t, n) * h(d, n);
            }
            y(t, d) = acc;
        }
    }
    return y;
}

/// Double-precision forward. Throws PreconditionError on shape mismatch and
/// NumericError on non-finite parameters.
Matrix selective_scan(const Matrix& x, const ScanParams& params);

/// Gradients of sum(dy .* y) with respect to every parameter and x.
ScanGrads selective_scan_backward(const Matrix& x, const ScanParams& params, const Matrix& dy);

}  // namespace cltrack::kernels
