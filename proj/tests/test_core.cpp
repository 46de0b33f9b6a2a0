#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "cltrack/core/config.hpp"
#include "cltrack/core/error.hpp"
#include "cltrack/core/math.hpp"
#include "cltrack/core/random.hpp"
#include "cltrack/core/rle.hpp"
#include "cltrack/core/stream_io.hpp"

using namespace cltrack;

TEST_CASE("sigmoid values and symmetry") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(2.1972246) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(sigmoid(std::log(9.0)) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(sigmoid(-50.0) < 1e-20);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);

    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-40.0, 40.0);
        CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-12);
        CHECK(sigmoid(x) <= sigmoid(x + 1e-3));
    }
}

TEST_CASE("sigmoid rejects non-finite input") {
    CHECK_THROWS_AS(sigmoid(std::numeric_limits<double>::quiet_NaN()), NumericError);
    CHECK_THROWS_AS(sigmoid(std::numeric_limits<double>::infinity()), NumericError);
}

TEST_CASE("cosine similarity") {
    CHECK(cosine_similarity(Embedding{1, 0}, Embedding{1, 0}) == 1.0);
    CHECK(cosine_similarity(Embedding{1, 0}, Embedding{0, 1}) == 0.0);
    CHECK(cosine_similarity(Embedding{1, 2, 2}, Embedding{2, 1, 2}) ==
          doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_similarity(Embedding{1, 0}, Embedding{1, 0, 0}), PreconditionError);
    CHECK_THROWS_AS(cosine_similarity(Embedding{0, 0}, Embedding{1, 0}), PreconditionError);

    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> a(5), b(5);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        const double lambda = rng.uniform(0.01, 100.0);
        std::vector<double> la(a);
        for (auto& x : la) x *= lambda;
        const Embedding ea(a), eb(b), ela(la);
        const double c = cosine_similarity(ea, eb);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(std::abs(c - cosine_similarity(eb, ea)) <= 1e-12);
        CHECK(std::abs(c - cosine_similarity(ela, eb)) <= 1e-12);
    }
    // Rounding can push |dot| slightly past the norm product; the result stays clamped.
    const Embedding v{0.1, 0.2, 0.3};
    CHECK(cosine_similarity(v, v) <= 1.0);
}

TEST_CASE("tracker config defaults and validation") {
    const TrackerConfig c;
    CHECK(c.delta_o == 0.9);
    CHECK(c.delta_iou == 0.7);
    CHECK(c.gamma_iou == 0.95);
    CHECK(c.n_w == 5);
    CHECK(c.n_p == 5);
    CHECK(c.n_l == 4);
    CHECK(c.short_term_capacity == 6);
    CHECK(c.policy == MemoryPolicy::DLM);
    CHECK_NOTHROW(c.validate());

    auto bad = [](auto mutate) {
        TrackerConfig t;
        mutate(t);
        CHECK_THROWS_AS(t.validate(), ConfigError);
    };
    bad([](TrackerConfig& t) { t.delta_iou = 1.01; });
    bad([](TrackerConfig& t) { t.delta_iou = -0.1; });
    bad([](TrackerConfig& t) { t.delta_o = 1.5; });
    bad([](TrackerConfig& t) { t.gamma_iou = -0.01; });
    bad([](TrackerConfig& t) { t.n_w = 0; });
    bad([](TrackerConfig& t) { t.n_p = 0; });
    bad([](TrackerConfig& t) { t.n_l = 0; });
    bad([](TrackerConfig& t) { t.short_term_capacity = 0; });
    bad([](TrackerConfig& t) { t.interval_every = 0; });
    bad([](TrackerConfig& t) { t.interval_keep = 0; });

    TrackerConfig e;
    e.policy = MemoryPolicy::Extended;
    CHECK(e.effective_short_term_capacity() == 10);
}

TEST_CASE("policy names round trip") {
    for (auto p : {MemoryPolicy::Vanilla, MemoryPolicy::Extended, MemoryPolicy::Interval,
                   MemoryPolicy::DLM}) {
        CHECK(parse_policy(to_string(p)) == p);
    }
    CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
}

TEST_CASE("mask grid and region iou") {
    CHECK_THROWS_AS(MaskGrid(0, 3), PreconditionError);
    CHECK_THROWS_AS(MaskGrid(2, 2, {1, 0, 1}), PreconditionError);
    MaskGrid a(2, 3), b(2, 3);
    a.set(0, 0, true);
    a.set(0, 1, true);
    b.set(0, 1, true);
    b.set(1, 2, true);
    CHECK(a.count() == 2);
    CHECK(region_iou(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(region_iou(MaskGrid(2, 3), MaskGrid(2, 3)) == 0.0);
    CHECK_THROWS_AS(region_iou(a, MaskGrid(3, 2)), PreconditionError);
}

TEST_CASE("embedding accessors") {
    const Embedding e{3.0, 4.0};
    CHECK(e.dim() == 2);
    CHECK(e.norm() == 5.0);
    CHECK(e.dot(Embedding{1.0, 1.0}) == 7.0);
    CHECK_THROWS_AS(e.dot(Embedding{1.0}), PreconditionError);
    CHECK(e.hash() == Embedding{3.0, 4.0}.hash());
    CHECK(e.hash() != Embedding{4.0, 3.0}.hash());
}

TEST_CASE("run-length encoding") {
    MaskGrid m(2, 4);
    CHECK(rle::encode(m) == std::vector<std::uint32_t>{8});
    m.set(0, 0, true);
    m.set(0, 1, true);
    m.set(1, 3, true);
    CHECK(rle::encode(m) == std::vector<std::uint32_t>{0, 2, 5, 1});
    CHECK(rle::decode({0, 2, 5, 1}, 2, 4) == m);
    CHECK_THROWS_AS(rle::decode({0, 2, 5}, 2, 4), ConfigError);
    CHECK_THROWS_AS(rle::decode({0, 2, 5, 2}, 2, 4), ConfigError);

    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const int h = static_cast<int>(rng.uniform_int(1, 12));
        const int w = static_cast<int>(rng.uniform_int(1, 12));
        const double p = rng.uniform();
        MaskGrid g(h, w);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) g.set(r, c, rng.uniform() < p);
        const auto runs = rle::encode(g);
        std::uint64_t sum = 0;
        for (const auto x : runs) sum += x;
        CHECK(sum == static_cast<std::uint64_t>(h * w));
        CHECK(rle::decode(runs, h, w) == g);
    }
}

TEST_CASE("stream interchange round trip") {
    StreamRecord r;
    r.report.frame = FrameIndex{4};
    r.report.iou_score = 0.8125;
    r.report.occlusion_logit = -2.5;
    r.report.embedding = Embedding{0.1, -0.2, 0.3};
    r.report.mask = MaskGrid(3, 3);
    r.report.mask.set(1, 1, true);
    r.ground_truth = MaskGrid(3, 3);
    const auto line = to_json_line(r);
    const auto back = parse_json_line(line);
    CHECK(back.report.frame == r.report.frame);
    CHECK(back.report.iou_score == r.report.iou_score);
    CHECK(back.report.occlusion_logit == r.report.occlusion_logit);
    CHECK(*back.report.embedding == *r.report.embedding);
    CHECK(back.report.mask == r.report.mask);
    REQUIRE(back.ground_truth.has_value());
    CHECK(*back.ground_truth == *r.ground_truth);

    std::stringstream ss;
    write_stream(ss, {r});
    CHECK(read_stream(ss).size() == 1);
}

TEST_CASE("stream reader rejects malformed input") {
    CHECK_THROWS_AS(parse_json_line("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_json_line(R"({"frame":0,"iou":0.5,"occ_logit":1,"mask_rle":[4]})"),
                    ConfigError);
    CHECK_NOTHROW(parse_json_line(R"({"frame":0,"iou":0.5,"occ_logit":1,"mask_rle":[4]})", 2, 2));
    CHECK_THROWS_AS(
        parse_json_line(R"({"frame":0,"iou":1.5,"occ_logit":1,"mask_rle":[4],"height":2,"width":2})"),
        ConfigError);
    std::stringstream ss;
    ss << R"({"frame":3,"iou":0.5,"occ_logit":1,"mask_rle":[4],"height":2,"width":2})" << "\n"
       << R"({"frame":3,"iou":0.5,"occ_logit":1,"mask_rle":[4],"height":2,"width":2})" << "\n";
    CHECK_THROWS_AS(read_stream(ss), ConfigError);
}

TEST_CASE("rng is reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
    Rng c(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = c.truncated_normal(2.0, 1.5);
        CHECK(std::abs(x) <= 3.0);
        const auto k = c.uniform_int(-2, 2);
        CHECK(k >= -2);
        CHECK(k <= 2);
    }
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}
