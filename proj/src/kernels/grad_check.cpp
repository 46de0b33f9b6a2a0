#include "cltrack/kernels/grad_check.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"
#include "cltrack/kernels/layers.hpp"
#include "cltrack/kernels/scan.hpp"

namespace cltrack::kernels {

namespace {

std::vector<double> flat(const Matrix& m) { return {m.data(), m.data() + m.size()}; }
std::vector<double> flat(const Vector& v) { return {v.data(), v.data() + v.size()}; }

class Filler {
public:
    explicit Filler(std::uint64_t seed) : rng_(seed) {}

    template <typename M>
    void uniform(M& m, double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = dist(rng_);
        }
    }

    template <typename M>
    void normal(M& m, double stddev) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = dist(rng_);
        }
    }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
};

GradProblem scan_problem(std::uint64_t seed) {
    struct State {
        ScanParams p;
        Matrix x;
    };
    Filler fill(seed);
    const int len = fill.pick(1, 8);
    const int state = fill.pick(1, 4);
    const int dim = fill.pick(1, 4);
    auto s = std::make_shared<State>();
    s->p = ScanParams::zeros(dim, state);
    fill.uniform(s->p.a_log, -1.0, 1.0);
    fill.normal(s->p.w_delta, 0.5);
    fill.normal(s->p.b_delta, 0.5);
    fill.normal(s->p.w_b, 0.5);
    fill.normal(s->p.b_b, 0.5);
    fill.normal(s->p.w_c, 0.5);
    fill.normal(s->p.b_c, 0.5);
    s->x.resize(len, dim);
    fill.normal(s->x, 1.0);

    GradProblem g;
    g.op = "selective_scan";
    g.variables = s->p.tensors();
    g.variables.push_back(view("x", s->x));
    auto* st = s.get();
    g.loss = [st] { return selective_scan(st->x, st->p).sum(); };
    g.analytic = [st] {
        auto gr = selective_scan_backward(st->x, st->p, Matrix::Ones(st->x.rows(), st->x.cols()));
        auto out = std::vector<std::vector<double>>{};
        out.push_back(flat(gr.params.a_log));
        out.push_back(flat(gr.params.w_delta));
        out.push_back(flat(gr.params.b_delta));
        out.push_back(flat(gr.params.w_b));
        out.push_back(flat(gr.params.b_b));
        out.push_back(flat(gr.params.w_c));
        out.push_back(flat(gr.params.b_c));
        out.push_back(flat(gr.dx));
        return out;
    };
    g.storage = s;
    return g;
}

GradProblem dwconv_problem(std::uint64_t seed, bool inputs_only) {
    struct State {
        DwConvParams p;
        Matrix x;
        int h = 0;
        int w = 0;
    };
    Filler fill(seed);
    auto s = std::make_shared<State>();
    s->h = fill.pick(1, 9);
    s->w = fill.pick(1, 9);
    const int channels = fill.pick(1, 3);
    s->p = DwConvParams::zeros(channels);
    fill.normal(s->p.kernel, 0.3);
    fill.normal(s->p.bias, 0.3);
    s->x.resize(s->h * s->w, channels);
    fill.normal(s->x, 1.0);

    GradProblem g;
    g.op = inputs_only ? "dwconv7x7_input" : "dwconv7x7";
    if (!inputs_only) {
        g.variables = s->p.tensors();
    }
    g.variables.push_back(view("x", s->x));
    auto* st = s.get();
    g.loss = [st] { return dwconv7x7(st->x, st->h, st->w, st->p).sum(); };
    g.analytic = [st, inputs_only] {
        auto gr = dwconv7x7_backward(st->x, st->h, st->w, st->p,
                                     Matrix::Ones(st->x.rows(), st->x.cols()));
        std::vector<std::vector<double>> out;
        if (!inputs_only) {
            out.push_back(flat(gr.params.kernel));
            out.push_back(flat(gr.params.bias));
        }
        out.push_back(flat(gr.dx));
        return out;
    };
    g.storage = s;
    return g;
}

GradProblem mlp_problem(std::uint64_t seed) {
    struct State {
        MlpParams p;
        Matrix x;
    };
    Filler fill(seed);
    auto s = std::make_shared<State>();
    const int channels = fill.pick(1, 4);
    const int tokens = fill.pick(1, 6);
    s->p = MlpParams::zeros(channels);
    fill.normal(s->p.w1, 0.5);
    fill.normal(s->p.b1, 0.5);
    fill.normal(s->p.w2, 0.5);
    fill.normal(s->p.b2, 0.5);
    s->x.resize(tokens, channels);
    fill.normal(s->x, 1.0);

    GradProblem g;
    g.op = "inverted_mlp";
    g.variables = s->p.tensors();
    g.variables.push_back(view("x", s->x));
    auto* st = s.get();
    g.loss = [st] { return inverted_mlp(st->x, st->p).sum(); };
    g.analytic = [st] {
        auto gr = inverted_mlp_backward(st->x, st->p, Matrix::Ones(st->x.rows(), st->x.cols()));
        return std::vector<std::vector<double>>{flat(gr.params.w1), flat(gr.params.b1),
                                                flat(gr.params.w2), flat(gr.params.b2),
                                                flat(gr.dx)};
    };
    g.storage = s;
    return g;
}

GradProblem layer_norm_problem(std::uint64_t seed) {
    struct State {
        LayerNormParams p;
        Matrix x;
    };
    Filler fill(seed);
    auto s = std::make_shared<State>();
    const int channels = fill.pick(2, 6);
    const int tokens = fill.pick(1, 6);
    s->p = LayerNormParams::identity(channels);
    fill.uniform(s->p.gain, 0.5, 1.5);
    fill.normal(s->p.bias, 0.5);
    s->x.resize(tokens, channels);
    fill.normal(s->x, 1.0);

    GradProblem g;
    g.op = "layer_norm";
    g.variables = s->p.tensors();
    g.variables.push_back(view("x", s->x));
    auto* st = s.get();
    g.loss = [st] { return layer_norm(st->x, st->p).sum(); };
    g.analytic = [st] {
        auto gr = layer_norm_backward(st->x, st->p, Matrix::Ones(st->x.rows(), st->x.cols()));
        return std::vector<std::vector<double>>{flat(gr.params.gain), flat(gr.params.bias),
                                                flat(gr.dx)};
    };
    g.storage = s;
    return g;
}

GradProblem attention_problem(std::uint64_t seed) {
    struct State {
        AttentionParams p;
        Matrix q;
        Matrix kv;
    };
    Filler fill(seed);
    auto s = std::make_shared<State>();
    const int heads = fill.pick(1, 2);
    const int dim = heads * fill.pick(1, 3);
    const int m = fill.pick(1, 5);
    const int n = fill.pick(1, 5);
    s->p = AttentionParams::zeros(dim, heads);
    for (auto* w : {&s->p.wq, &s->p.wk, &s->p.wv, &s->p.wo}) {
        fill.normal(*w, 0.7);
    }
    for (auto* b : {&s->p.bq, &s->p.bk, &s->p.bv, &s->p.bo}) {
        fill.normal(*b, 0.3);
    }
    s->q.resize(m, dim);
    s->kv.resize(n, dim);
    fill.normal(s->q, 1.0);
    fill.normal(s->kv, 1.0);

    GradProblem g;
    g.op = "cross_attention";
    g.variables = s->p.tensors();
    g.variables.push_back(view("queries", s->q));
    g.variables.push_back(view("context", s->kv));
    auto* st = s.get();
    g.loss = [st] { return cross_attention(st->q, st->kv, st->p).output.sum(); };
    g.analytic = [st] {
        auto gr = cross_attention_backward(st->q, st->kv, st->p,
                                           Matrix::Ones(st->q.rows(), st->p.dim()));
        return std::vector<std::vector<double>>{
            flat(gr.params.wq), flat(gr.params.bq), flat(gr.params.wk), flat(gr.params.bk),
            flat(gr.params.wv), flat(gr.params.bv), flat(gr.params.wo), flat(gr.params.bo),
            flat(gr.dqueries),  flat(gr.dcontext)};
    };
    g.storage = s;
    return g;
}

}  // namespace

const std::vector<std::string>& grad_check_ops() {
    static const std::vector<std::string> ops{"selective_scan", "dwconv7x7",    "dwconv7x7_input",
                                              "inverted_mlp",   "cross_attention", "layer_norm"};
    return ops;
}

GradProblem make_grad_problem(std::string_view op, std::uint64_t seed) {
    if (op == "selective_scan") {
        return scan_problem(seed);
    }
    if (op == "dwconv7x7") {
        return dwconv_problem(seed, false);
    }
    if (op == "dwconv7x7_input") {
        return dwconv_problem(seed, true);
    }
    if (op == "inverted_mlp") {
        return mlp_problem(seed);
    }
    if (op == "cross_attention") {
        return attention_problem(seed);
    }
    if (op == "layer_norm") {
        return layer_norm_problem(seed);
    }
    throw PreconditionError(fmt::format("grad_check: unknown op '{}'", op));
}

GradCheckResult grad_check(GradProblem& problem, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw PreconditionError("grad_check: eps must be a positive finite number");
    }
    GradCheckResult r;
    r.op = problem.op;
    r.eps = eps;
    r.eps_in_validated_range = eps >= kGradCheckMinEps && eps <= kGradCheckMaxEps;

    const auto analytic = problem.analytic();
    if (analytic.size() != problem.variables.size()) {
        throw PreconditionError("grad_check: analytic gradient count mismatch");
    }
    for (std::size_t v = 0; v < problem.variables.size(); ++v) {
        auto& var = problem.variables[v];
        const auto& grad = analytic[v];
        if (grad.size() != var.data.size()) {
            throw PreconditionError(
                fmt::format("grad_check: gradient of {} has the wrong size", var.name));
        }
        for (std::size_t i = 0; i < var.data.size(); ++i) {
            if (!std::isfinite(grad[i])) {
                throw NumericError(
                    fmt::format("grad_check: non-finite analytic gradient in {}", var.name));
            }
            const double saved = var.data[i];
            var.data[i] = saved + eps;
            const double up = problem.loss();
            var.data[i] = saved - eps;
            const double down = problem.loss();
            var.data[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double err = std::abs(grad[i] - numeric) / std::max(1.0, std::abs(numeric));
            if (err > r.max_rel_error || r.checked == 0) {
                r.max_rel_error = std::max(r.max_rel_error, err);
                r.worst_variable = var.name;
            }
            ++r.checked;
        }
    }
    return r;
}

GradCheckResult grad_check(std::string_view op, std::uint64_t seed, double eps) {
    auto problem = make_grad_problem(op, seed);
    auto r = grad_check(problem, eps);
    r.seed = seed;
    return r;
}

}  // namespace cltrack::kernels
