#include "pantilt/fusion.hpp"
#include "pantilt/fusion_reference.hpp"
#include "pantilt/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pantilt;

namespace {

Tensor rand_tokens(Rng& rng, std::size_t t, std::size_t d) {
    Tensor x = Tensor::tokens(t, d);
    for (double& v : x.data)
        v = rng.normal();
    return x;
}

Tensor rand_chw(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
    Tensor x = Tensor::chw(c, h, w);
    for (double& v : x.data)
        v = rng.normal();
    return x;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.shape == b.shape);
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

MhsaConfig rand_mhsa(Rng& rng, std::size_t heads, std::size_t model_dim) {
    MhsaConfig cfg;
    cfg.heads = heads;
    cfg.model_dim = model_dim;
    cfg.key_dim = model_dim / heads;
    cfg.wq = rand_tokens(rng, model_dim, model_dim);
    cfg.wk = rand_tokens(rng, model_dim, model_dim);
    cfg.wv = rand_tokens(rng, model_dim, model_dim);
    cfg.wo = rand_tokens(rng, model_dim, model_dim);
    return cfg;
}

} // namespace

TEST_CASE("tensor layout and validation") {
    Tensor x = Tensor::chw(2, 3, 4);
    CHECK(x.numel() == 24);
    x.at(1, 2, 3) = 7.5;
    CHECK(x.data[1 * 12 + 2 * 4 + 3] == 7.5); // row-major (c, y, x)

    Tensor t = Tensor::tokens(3, 2);
    t.at(2, 1) = -1.0;
    CHECK(t.data[5] == -1.0);

    Tensor broken = x;
    broken.data.pop_back();
    CHECK_THROWS_AS(validate(broken), ShapeError);
    Tensor inf = t;
    inf.data[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(inf), DomainError);
}

TEST_CASE("channel-mixing conv hand cases") {
    Rng rng(101);
    const Tensor x = rand_chw(rng, 3, 4, 5);
    CHECK(adjust_conv(x, Conv1x1::identity(3)).data == x.data);

    Tensor tiny = Tensor::chw(1, 1, 1);
    tiny.data[0] = 2.0;
    const Conv1x1 affine{1, 1, {3.0}, {1.0}};
    CHECK(adjust_conv(tiny, affine).data[0] == doctest::Approx(7.0).epsilon(1e-12));

    Conv1x1 mismatch = Conv1x1::identity(4);
    CHECK_THROWS_AS(adjust_conv(x, mismatch), ShapeError);
}

TEST_CASE("channel-mixing conv matches the scalar-loop reference") {
    Rng rng(102);
    for (int i = 0; i < 50; ++i) {
        const std::size_t ci = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        const std::size_t co = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        const Tensor x = rand_chw(rng, ci, 2, 2);
        Conv1x1 k{co, ci, std::vector<double>(co * ci), std::vector<double>(co)};
        for (double& v : k.weights)
            v = rng.normal();
        for (double& v : k.bias)
            v = rng.normal();
        const Tensor got = adjust_conv(x, k);
        CHECK(got.shape[0] == co);
        CHECK(max_abs_diff(got, reference::conv1x1(x, k)) <= 1e-12);
    }
}

TEST_CASE("attention identities") {
    Rng rng(103);

    // one token: the output is that V row, exactly
    const Tensor q1 = rand_tokens(rng, 1, 3);
    const Tensor k1 = rand_tokens(rng, 1, 3);
    const Tensor v1 = rand_tokens(rng, 1, 5);
    CHECK(attention(q1, k1, v1, 3).data == v1.data);

    // identical keys: uniform weights, so every row is the V column mean
    const std::size_t t = 4;
    Tensor k_same = Tensor::tokens(t, 3);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            k_same.at(i, c) = k1.at(0, c);
    const Tensor q = rand_tokens(rng, t, 3);
    const Tensor v = rand_tokens(rng, t, 2);
    const Tensor mixed = attention(q, k_same, v, 3);
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < t; ++i)
            mean += v.at(i, c);
        mean /= t;
        for (std::size_t i = 0; i < t; ++i)
            CHECK(mixed.at(i, c) == doctest::Approx(mean).epsilon(1e-12));
    }

    Tensor wrong = rand_tokens(rng, 3, 2); // token count disagrees with K
    CHECK_THROWS_AS(attention(q, k_same, wrong, 3), ShapeError);
}

TEST_CASE("two-token attention against the hand computation") {
    Tensor q = Tensor::tokens(2, 2);
    q.at(0, 0) = 1.0;
    q.at(1, 1) = 1.0;
    const Tensor k = q; // identity
    Tensor v = Tensor::tokens(2, 2);
    v.at(0, 0) = 1.0;
    v.at(0, 1) = 2.0;
    v.at(1, 0) = 3.0;
    v.at(1, 1) = 4.0;

    // scores/sqrt(2) puts 1/sqrt(2) on the diagonal, 0 off it
    const double p = std::exp(1.0 / std::sqrt(2.0)) / (std::exp(1.0 / std::sqrt(2.0)) + 1.0);
    const Tensor out = attention(q, k, v, 2);
    CHECK(out.at(0, 0) == doctest::Approx(p * 1.0 + (1.0 - p) * 3.0).epsilon(1e-12));
    CHECK(out.at(0, 1) == doctest::Approx(p * 2.0 + (1.0 - p) * 4.0).epsilon(1e-12));
    CHECK(out.at(1, 0) == doctest::Approx((1.0 - p) * 1.0 + p * 3.0).epsilon(1e-12));
    CHECK(out.at(1, 1) == doctest::Approx((1.0 - p) * 2.0 + p * 4.0).epsilon(1e-12));
    // the same numbers, pinned
    CHECK(out.at(0, 0) == doctest::Approx(1.6604769013466862).epsilon(1e-12));
    CHECK(out.at(1, 1) == doctest::Approx(3.3395230986533138).epsilon(1e-12));
}

TEST_CASE("attention rows stay in the convex hull of V") {
    Rng rng(104);
    for (int i = 0; i < 30; ++i) {
        const std::size_t t = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        const Tensor q = rand_tokens(rng, t, d);
        const Tensor k = rand_tokens(rng, t, d);
        const Tensor v = rand_tokens(rng, t, 3);
        const Tensor out = attention(q, k, v, d);
        for (std::size_t c = 0; c < 3; ++c) {
            double lo = v.at(0, c), hi = v.at(0, c);
            for (std::size_t j = 1; j < t; ++j) {
                lo = std::min(lo, v.at(j, c));
                hi = std::max(hi, v.at(j, c));
            }
            for (std::size_t r = 0; r < t; ++r) {
                CHECK(out.at(r, c) >= lo - 1e-12);
                CHECK(out.at(r, c) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("multi-head attention with one identity head collapses to plain attention") {
    Rng rng(105);
    const Tensor x = rand_tokens(rng, 5, 4);
    const MhsaConfig id = MhsaConfig::identity(1, 4);
    CHECK(max_abs_diff(mhsa(x, id), attention(x, x, x, 4)) <= 1e-12);
}

TEST_CASE("multi-head attention matches the flat-loop reference") {
    Rng rng(106);
    for (const std::size_t heads : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
        const std::size_t model_dim = heads * 2;
        const Tensor x = rand_tokens(rng, 6, model_dim);
        const MhsaConfig cfg = rand_mhsa(rng, heads, model_dim);
        const Tensor y = mhsa(x, cfg);
        CHECK(y.shape == x.shape);
        CHECK(max_abs_diff(y, reference::mhsa(x, cfg)) <= 1e-12);
    }
}

TEST_CASE("head count must divide the model width") {
    Rng rng(107);
    MhsaConfig bad = rand_mhsa(rng, 2, 4);
    bad.heads = 3;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("speed modulation ramp and clamp") {
    CHECK(speed_modulation(0.0, 800.0).w0_scale == 1.0);
    CHECK(speed_modulation(0.0, 800.0).w1_scale == 0.0);
    CHECK(speed_modulation(800.0, 800.0).w1_scale == 1.0);
    CHECK(speed_modulation(200.0, 800.0).w0_scale == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(speed_modulation(200.0, 800.0).w1_scale == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(speed_modulation(5000.0, 800.0).w1_scale == 1.0); // clamped
    CHECK_THROWS_AS(speed_modulation(10.0, 0.0), DomainError);
    CHECK_THROWS_AS(speed_modulation(-1.0, 800.0), DomainError);

    Rng rng(108);
    for (int i = 0; i < 10'000; ++i) {
        const SpeedModulation m = speed_modulation(rng.uniform() * 2000.0, 800.0);
        REQUIRE(m.w0_scale + m.w1_scale == 1.0); // exact, not approximate
        REQUIRE(m.w0_scale >= 0.0);
        REQUIRE(m.w1_scale <= 1.0);
    }
}

TEST_CASE("fusing with zero attention output reduces to the residual sums") {
    Rng rng(109);
    const std::size_t c = 3, h = 2, w = 2;
    const Tensor x0 = rand_chw(rng, c, h, w);
    const Tensor x1 = rand_chw(rng, c, h, w);
    MhsaConfig cfg = rand_mhsa(rng, 2, 2 * c);
    cfg.wo = Tensor::tokens(2 * c, 2 * c); // all-zero output projection
    const Tensor out =
        cfam_fuse(x0, x1, Conv1x1::identity(c), cfg, speed_modulation(100.0, 800.0));
    REQUIRE(out.shape[0] == 2 * c);
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const double want = x0.at(ci, y, x) + x1.at(ci, y, x);
                CHECK(out.at(ci, y, x) == want);
                CHECK(out.at(c + ci, y, x) == want);
            }
}

TEST_CASE("fused block matches the scalar-loop reference") {
    Rng rng(110);
    for (int i = 0; i < 20; ++i) {
        const std::size_t c = 2, h = 2, w = 2;
        const Tensor x0 = rand_chw(rng, c, h, w);
        const Tensor x1 = rand_chw(rng, c, h, w);
        Conv1x1 conv{c, c, std::vector<double>(c * c), std::vector<double>(c)};
        for (double& v : conv.weights)
            v = rng.normal();
        for (double& v : conv.bias)
            v = rng.normal();
        const MhsaConfig cfg = rand_mhsa(rng, 2, 2 * c);
        const SpeedModulation mod = speed_modulation(rng.uniform() * 900.0, 800.0);
        const Tensor got = cfam_fuse(x0, x1, conv, cfg, mod);
        CHECK(got.shape[1] == h);
        CHECK(got.shape[2] == w);
        CHECK(max_abs_diff(got, reference::cfam_fuse(x0, x1, conv, cfg, mod)) <= 1e-12);
    }
}

TEST_CASE("fusion shape preconditions") {
    Rng rng(111);
    const Tensor x0 = rand_chw(rng, 2, 2, 2);
    const Tensor wrong_spatial = rand_chw(rng, 2, 3, 2);
    const MhsaConfig cfg = rand_mhsa(rng, 2, 4);
    const SpeedModulation mod = speed_modulation(0.0, 800.0);

    CHECK_THROWS_AS(cfam_fuse(x0, wrong_spatial, Conv1x1::identity(2), cfg, mod), ShapeError);
    // the channel-mixing conv must preserve the channel count inside the block
    CHECK_THROWS_AS(cfam_fuse(x0, x0, Conv1x1::identity(3), cfg, mod), ShapeError);
    // attention width must equal the concatenated channel count
    const MhsaConfig narrow = rand_mhsa(rng, 1, 2);
    CHECK_THROWS_AS(cfam_fuse(x0, x0, Conv1x1::identity(2), narrow, mod), ShapeError);
}
