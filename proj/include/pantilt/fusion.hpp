#pragma once

#include "pantilt/errors.hpp"

#include <cstddef>
#include <vector>

namespace pantilt {

// Dense row-major tensor. Feature maps use rank 3 (channels, height, width);
// token matrices use rank 2 (tokens, dim). Weight matrices reuse the rank-2
// form as (rows, cols).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    static Tensor chw(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0);
    static Tensor tokens(std::size_t t, std::size_t d, double fill = 0.0);

    std::size_t rank() const { return shape.size(); }
    std::size_t numel() const;

    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t c, std::size_t y, std::size_t x);
    double at(std::size_t c, std::size_t y, std::size_t x) const;
};

// Throws ShapeError if data length and shape disagree, DomainError on
// non-finite entries.
void validate(const Tensor& t);

// Per-pixel affine map across channels (a 1x1 convolution): no spatial
// coupling, no activation.
struct Conv1x1 {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::vector<double> weights; // row-major (out_channels x in_channels)
    std::vector<double> bias;    // out_channels

    static Conv1x1 identity(std::size_t channels);
};

void validate(const Conv1x1& k);

// Multi-head self-attention configuration; all four projection matrices are
// (model_dim x model_dim), with key_dim = model_dim / heads columns per head.
struct MhsaConfig {
    std::size_t heads = 1;
    std::size_t model_dim = 0;
    std::size_t key_dim = 0;
    Tensor wq, wk, wv, wo;

    static MhsaConfig identity(std::size_t heads, std::size_t model_dim);
};

void validate(const MhsaConfig& cfg);

// Pair of fusion weights derived from how fast the target moves across the
// image: fast motion favors the attention-processed branch of the second map
// (w1), slow motion the first (w0). The two always sum to exactly 1.
struct SpeedModulation {
    double displacement_px = 0.0;
    double image_diag_px = 1.0;
    double w0_scale = 1.0;
    double w1_scale = 0.0;
};

void validate(const SpeedModulation& mod);

Tensor adjust_conv(const Tensor& x, const Conv1x1& k);

// Scaled dot-product attention: softmax(Q K^T / sqrt(d_k)) V.
// q is (Tq, D), k is (Tk, D), v is (Tk, Dv); the result is (Tq, Dv) and every
// output row is a convex combination of the rows of v.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t d_k);

// Project to Q/K/V, attend per head on column slices, concatenate the head
// outputs and apply the output projection. Shape-preserving.
Tensor mhsa(const Tensor& x, const MhsaConfig& cfg);

// Linear ramp on normalized displacement, clamped to [0, 1]:
// w1 = clamp(displacement / diag, 0, 1), w0 = 1 - w1.
SpeedModulation speed_modulation(double displacement_px, double image_diag_px);

// Cross-residual fusion of two equally shaped feature maps:
//   x0' = adjust_conv(x0); tokens = channel-concat(x0', x1) per pixel;
//   processed = mhsa(tokens); split back into halves scaled by (w0, w1);
//   x0'_sum = x0 + w0_half, x1_sum = x1 + w1_half;
//   output = channel-concat(x1_sum + x0, x0'_sum + x1).
// The result has twice the input channel count and the same spatial size.
Tensor cfam_fuse(const Tensor& x0, const Tensor& x1, const Conv1x1& conv,
                 const MhsaConfig& cfg, const SpeedModulation& mod);

} // namespace pantilt
