#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cltrack/core/error.hpp"
#include "cltrack/core/fault.hpp"
#include "cltrack/core/random.hpp"
#include "cltrack/kernels/cstmamba.hpp"
#include "cltrack/kernels/grad_check.hpp"
#include "cltrack/kernels/param_io.hpp"
#include "cltrack/kernels/toy_backend.hpp"
#include "support/oracles.hpp"

using namespace cltrack;
using namespace cltrack::kernels;

namespace {

void fill(std::vector<TensorView> views, Rng& rng, double scale) {
    for (auto& v : views)
        for (auto& x : v.data) x = rng.normal() * scale;
}

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

double scan_error(std::uint64_t seed) {
    Rng rng(seed);
    const int dim = static_cast<int>(rng.uniform_int(1, 4));
    const int state = static_cast<int>(rng.uniform_int(1, 4));
    const auto len = rng.uniform_int(1, 12);
    auto p = ScanParams::zeros(dim, state);
    fill(p.tensors(), rng, 0.8);
    const Matrix x = random_matrix(rng, len, dim);
    const Matrix y = selective_scan(x, p);
    const Matrix ref = oracle::unrolled_scan(x, p.a_log, p.w_delta, p.b_delta, p.w_b, p.b_b,
                                             p.w_c, p.b_c);
    return (y - ref).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("scan equals the unrolled recurrence") {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 300; ++s) worst = std::max(worst, scan_error(s));
    CHECK(worst <= 1e-10);
}

TEST_CASE("scan mutation that drops the decay is caught") {
    fault::ScopedFault f(fault::Fault::ScanSkipsDecay);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) worst = std::max(worst, scan_error(s));
    CHECK(worst > 1e-6);
}

TEST_CASE("scan is causal") {
    Rng rng(5);
    auto p = ScanParams::zeros(3, 2);
    fill(p.tensors(), rng, 0.8);
    Matrix x = random_matrix(rng, 10, 3);
    const Matrix y = selective_scan(x, p);
    x.row(6) = random_matrix(rng, 1, 3);
    x.row(9) *= -3.0;
    const Matrix y2 = selective_scan(x, p);
    CHECK(y.topRows(6) == y2.topRows(6));
    CHECK((y.row(6) - y2.row(6)).norm() > 0.0);
}

TEST_CASE("scan with zero parameters is zero") {
    Rng rng(1);
    const Matrix x = random_matrix(rng, 5, 2);
    CHECK(selective_scan(x, ScanParams::zeros(2, 3)).isZero(0.0));
}

TEST_CASE("scan errors") {
    auto p = ScanParams::zeros(2, 2);
    CHECK_THROWS_AS(selective_scan(Matrix(0, 2), p), PreconditionError);
    CHECK_THROWS_AS(selective_scan(Matrix::Zero(3, 3), p), PreconditionError);
    p.a_log(0, 0) = std::nan("");
    CHECK_THROWS_AS(selective_scan(Matrix::Zero(3, 2), p), NumericError);
}

TEST_CASE("float scan tracks the double scan") {
    Rng rng(3);
    auto p = ScanParams::zeros(4, 3);
    fill(p.tensors(), rng, 0.5);
    const Matrix x = random_matrix(rng, 64, 4);
    const Matrix y = selective_scan(x, p);
    const Eigen::MatrixXf yf = selective_scan_t<float>(x.cast<float>(), p);
    CHECK((y - yf.cast<double>()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("analytic gradients agree with finite differences") {
    for (const auto& op : grad_check_ops()) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto r = grad_check(op, seed, 1e-5);
            CHECK(r.eps_in_validated_range);
            CHECK(r.checked > 0);
            worst = std::max(worst, r.max_rel_error);
        }
        INFO(op);
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("grad check flags steps outside the validated range") {
    const auto r = grad_check("layer_norm", 0, 1e-2);
    CHECK_FALSE(r.eps_in_validated_range);
    CHECK_THROWS_AS(make_grad_problem("conv3x3", 0), PreconditionError);
}

TEST_CASE("attention weights are row-stochastic") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const int heads = static_cast<int>(rng.uniform_int(1, 3));
        const int dim = heads * static_cast<int>(rng.uniform_int(1, 3));
        auto p = AttentionParams::zeros(dim, heads);
        fill(p.tensors(), rng, 1.5);
        const Matrix q = random_matrix(rng, rng.uniform_int(1, 5), dim);
        const Matrix k = random_matrix(rng, rng.uniform_int(1, 6), dim);
        const auto res = cross_attention(q, k, p);
        REQUIRE(res.weights.size() == static_cast<std::size_t>(heads));
        for (const auto& w : res.weights) {
            CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
            CHECK(w.minCoeff() >= 0.0);
        }
    }
    auto p = AttentionParams::zeros(2, 1);
    CHECK_THROWS_AS(cross_attention(Matrix::Zero(1, 2), Matrix(0, 2), p), PreconditionError);
    CHECK_THROWS_AS(cross_attention(Matrix::Zero(1, 3), Matrix::Zero(1, 2), p), PreconditionError);
}

TEST_CASE("identity depthwise conv and layer norm") {
    Rng rng(2);
    const Matrix grid = random_matrix(rng, 20, 3);
    CHECK((dwconv7x7(grid, 4, 5, DwConvParams::identity(3)) - grid).cwiseAbs().maxCoeff() < 1e-15);

    const Matrix y = layer_norm(grid, LayerNormParams::identity(3));
    CHECK(y.rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(10.0) == doctest::Approx(10.0));
}

TEST_CASE("sensory memory keeps the two newest grids") {
    SensoryMemory m;
    FeatureGrid g{1, 1, Matrix::Zero(1, 1)};
    for (int f = 0; f < 4; ++f) m.update(g, FrameIndex{f});
    CHECK(m.size() == 2);
    CHECK(m.slots().front().frame == FrameIndex{2});
    CHECK(m.slots().back().frame == FrameIndex{3});
    CHECK_THROWS_AS(m.update(g, FrameIndex{3}), PreconditionError);
}

TEST_CASE("cstmamba with zero parameters outputs zeros") {
    const auto p = CSTMambaParams::zeros(4, 2);
    Rng rng(4);
    FeatureGrid cur{3, 3, random_matrix(rng, 9, 4)};
    SensoryMemory sens;
    TextTokens text{random_matrix(rng, 3, 4), 0};
    const auto out = cstmamba_forward(cur, sens, text, p);
    CHECK(out.fused_grid.tokens.isZero(0.0));
    CHECK(out.fused_cls.isZero(0.0));
}

TEST_CASE("cstmamba forward is deterministic and uses the sensory frames") {
    const auto p = CSTMambaParams::random(9, 4, 2);
    Rng rng(6);
    FeatureGrid cur{3, 3, random_matrix(rng, 9, 4)};
    TextTokens text{random_matrix(rng, 3, 4), 1};
    SensoryMemory sens;
    const auto a = cstmamba_forward(cur, sens, text, p);
    CHECK(a.fused_grid.tokens == cstmamba_forward(cur, sens, text, p).fused_grid.tokens);
    sens.update(FeatureGrid{3, 3, random_matrix(rng, 9, 4)}, FrameIndex{0});
    const auto b = cstmamba_forward(cur, sens, text, p);
    CHECK((a.fused_grid.tokens - b.fused_grid.tokens).norm() > 0.0);
    CHECK(b.fused_grid.height == 3);
    CHECK(b.fused_cls.size() == 4);
}

TEST_CASE("parameter files round trip") {
    const auto p = CSTMambaParams::random(12, 4, 3, 2);
    std::stringstream buf;
    save_params(buf, p);
    auto q = load_params(buf);
    auto pt = const_cast<CSTMambaParams&>(p).tensors();
    auto qt = q.tensors();
    REQUIRE(pt.size() == qt.size());
    for (std::size_t i = 0; i < pt.size(); ++i) {
        CHECK(pt[i].name == qt[i].name);
        CHECK(pt[i].shape == qt[i].shape);
        CHECK(std::equal(pt[i].data.begin(), pt[i].data.end(), qt[i].data.begin()));
    }

    std::stringstream bad("XXXX");
    CHECK_THROWS_AS(load_params(bad), ConfigError);
    std::string truncated;
    {
        std::stringstream b2;
        save_params(b2, p);
        truncated = b2.str().substr(0, 40);
    }
    std::stringstream t(truncated);
    CHECK_THROWS_AS(load_params(t), ConfigError);
}

TEST_CASE("toy backend produces well-formed reports") {
    auto backend = ToyNeuralBackend(CSTMambaParams::random(1, 4, 2), 8, 8);
    Rng rng(7);
    tracker::FramePayload payload{FrameIndex{0}, FeatureGrid{4, 4, random_matrix(rng, 16, 4)}};
    SensoryMemory sens;
    const Embedding text{1.0, 0.0, 0.0, 0.0};
    const auto r = backend.segment({tracker::BackendMode::Detect, payload, text, {}, sens});
    CHECK(r.frame == FrameIndex{0});
    CHECK(r.mask.height() == 8);
    CHECK(r.mask.width() == 8);
    REQUIRE(r.embedding.has_value());
    CHECK(r.embedding->dim() == backend.capabilities().embedding_dim);
    CHECK(r.iou_score >= 0.0);
    CHECK(r.iou_score <= 1.0);
}
