#include "cltrack/kernels/scan.hpp"

namespace cltrack::kernels {

ScanParams ScanParams::zeros(int channels, int state_dim) {
    ScanParams p;
    p.a_log = Matrix::Zero(channels, state_dim);
    p.w_delta = Matrix::Zero(channels, channels);
    p.b_delta = Vector::Zero(channels);
    p.w_b = Matrix::Zero(channels, state_dim);
    p.b_b = Vector::Zero(state_dim);
    p.w_c = Matrix::Zero(channels, state_dim);
    p.b_c = Vector::Zero(state_dim);
    return p;
}

void ScanParams::validate() const {
    const auto d = a_log.rows();
    const auto n = a_log.cols();
    require(d >= 1 && n >= 1, "scan: empty parameter set");
    require(w_delta.rows() == d && w_delta.cols() == d, "scan: w_delta must be D x D");
    require(b_delta.size() == d, "scan: b_delta must have D entries");
    require(w_b.rows() == d && w_b.cols() == n, "scan: w_b must be D x N");
    require(w_c.rows() == d && w_c.cols() == n, "scan: w_c must be D x N");
    require(b_b.size() == n && b_c.size() == n, "scan: b_b/b_c must have N entries");
    require_finite(a_log, "scan: non-finite a_log");
    require_finite(w_delta, "scan: non-finite w_delta");
    require_finite(b_delta, "scan: non-finite b_delta");
    require_finite(w_b, "scan: non-finite w_b");
    require_finite(b_b, "scan: non-finite b_b");
    require_finite(w_c, "scan: non-finite w_c");
    require_finite(b_c, "scan: non-finite b_c");
}

std::vector<TensorView> ScanParams::tensors() {
    return {view("scan.a_log", a_log), view("scan.w_delta", w_delta),
            view("scan.b_delta", b_delta), view("scan.w_b", w_b),
            view("scan.b_b", b_b),         view("scan.w_c", w_c),
            view("scan.b_c", b_c)};
}

Matrix selective_scan(const Matrix& x, const ScanParams& params) {
    params.validate();
    require_finite(x, "selective_scan: non-finite input");
    return selective_scan_t<double>(x, params);
}

ScanGrads selective_scan_backward(const Matrix& x, const ScanParams& p, const Matrix& dy) {
    p.validate();
    require(x.rows() >= 1 && x.cols() == p.channels(), "selective_scan: input shape mismatch");
    require(dy.rows() == x.rows() && dy.cols() == x.cols(),
            "selective_scan: upstream gradient shape mismatch");

    const Eigen::Index len = x.rows();
    const Eigen::Index dim = p.channels();
    const Eigen::Index state = p.state_dim();
    const Matrix a = -p.a_log.array().exp().matrix();
    const Matrix z = (x * p.w_delta).rowwise() + p.b_delta.transpose();
    const Matrix bt = (x * p.w_b).rowwise() + p.b_b.transpose();
    const Matrix ct = (x * p.w_c).rowwise() + p.b_c.transpose();
    Matrix delta(len, dim);
    for (Eigen::Index t = 0; t < len; ++t) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            delta(t, d) = softplus(z(t, d));
        }
    }

    // Forward again, keeping every state.
    std::vector<Matrix> hist(static_cast<std::size_t>(len), Matrix(dim, state));
    Matrix h = Matrix::Zero(dim, state);
    for (Eigen::Index t = 0; t < len; ++t) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            for (Eigen::Index n = 0; n < state; ++n) {
                h(d, n) = std::exp(delta(t, d) * a(d, n)) * h(d, n) +
                          delta(t, d) * bt(t, n) * x(t, d);
            }
        }
        hist[static_cast<std::size_t>(t)] = h;
    }

    Matrix dA = Matrix::Zero(dim, state);
    Matrix dB = Matrix::Zero(len, state);
    Matrix dC = Matrix::Zero(len, state);
    Matrix dz = Matrix::Zero(len, dim);
    Matrix dx = Matrix::Zero(len, dim);
    Matrix carry = Matrix::Zero(dim, state);

    for (Eigen::Index t = len - 1; t >= 0; --t) {
        const Matrix& ht = hist[static_cast<std::size_t>(t)];
        for (Eigen::Index d = 0; d < dim; ++d) {
            const double dl = delta(t, d);
            const double xv = x(t, d);
            double ddelta = 0.0;
            for (Eigen::Index n = 0; n < state; ++n) {
                const double h_prev = t > 0 ? hist[static_cast<std::size_t>(t - 1)](d, n) : 0.0;
                const double decay = std::exp(dl * a(d, n));
                const double gh = dy(t, d) * ct(t, n) + carry(d, n);
                dC(t, n) += dy(t, d) * ht(d, n);
                const double ddecay = gh * h_prev;
                dA(d, n) += ddecay * decay * dl;
                ddelta += ddecay * decay * a(d, n) + gh * bt(t, n) * xv;
                dB(t, n) += gh * dl * xv;
                dx(t, d) += gh * dl * bt(t, n);
                carry(d, n) = gh * decay;
            }
            // d softplus(z) / dz = sigmoid(z)
            dz(t, d) = ddelta / (1.0 + std::exp(-z(t, d)));
        }
    }

    ScanGrads g;
    g.params.a_log = dA.cwiseProduct(a);
    g.params.w_delta = x.transpose() * dz;
    g.params.b_delta = dz.colwise().sum().transpose();
    g.params.w_b = x.transpose() * dB;
    g.params.b_b = dB.colwise().sum().transpose();
    g.params.w_c = x.transpose() * dC;
    g.params.b_c = dC.colwise().sum().transpose();
    dx += dz * p.w_delta.transpose();
    dx += dB * p.w_b.transpose();
    dx += dC * p.w_c.transpose();
    g.dx = std::move(dx);
    return g;
}

}  // namespace cltrack::kernels
