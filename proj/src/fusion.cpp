#include "pantilt/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace pantilt {

Tensor Tensor::chw(std::size_t c, std::size_t h, std::size_t w, double fill) {
    return {{c, h, w}, std::vector<double>(c * h * w, fill)};
}

Tensor Tensor::tokens(std::size_t t, std::size_t d, double fill) {
    return {{t, d}, std::vector<double>(t * d, fill)};
}

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (std::size_t s : shape)
        n *= s;
    return shape.empty() ? 0 : n;
}

double& Tensor::at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
double& Tensor::at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * shape[1] + y) * shape[2] + x];
}
double Tensor::at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * shape[1] + y) * shape[2] + x];
}

void validate(const Tensor& t) {
    if (t.shape.empty() || t.numel() != t.data.size())
        throw ShapeError("tensor data length does not match its shape");
    for (double v : t.data)
        if (!std::isfinite(v))
            throw DomainError("tensor entries must be finite");
}

Conv1x1 Conv1x1::identity(std::size_t channels) {
    Conv1x1 k{channels, channels, std::vector<double>(channels * channels, 0.0),
              std::vector<double>(channels, 0.0)};
    for (std::size_t c = 0; c < channels; ++c)
        k.weights[c * channels + c] = 1.0;
    return k;
}

void validate(const Conv1x1& k) {
    if (k.out_channels == 0 || k.in_channels == 0)
        throw ConfigError("conv channel counts must be positive");
    if (k.weights.size() != k.out_channels * k.in_channels || k.bias.size() != k.out_channels)
        throw ShapeError("conv weight/bias sizes do not match the channel counts");
    for (double v : k.weights)
        if (!std::isfinite(v))
            throw DomainError("conv weights must be finite");
    for (double v : k.bias)
        if (!std::isfinite(v))
            throw DomainError("conv bias must be finite");
}

MhsaConfig MhsaConfig::identity(std::size_t heads, std::size_t model_dim) {
    MhsaConfig cfg;
    cfg.heads = heads;
    cfg.model_dim = model_dim;
    cfg.key_dim = heads ? model_dim / heads : 0;
    cfg.wq = Tensor::tokens(model_dim, model_dim);
    for (std::size_t i = 0; i < model_dim; ++i)
        cfg.wq.at(i, i) = 1.0;
    cfg.wk = cfg.wq;
    cfg.wv = cfg.wq;
    cfg.wo = cfg.wq;
    return cfg;
}

void validate(const MhsaConfig& cfg) {
    if (cfg.heads == 0 || cfg.model_dim == 0)
        throw ConfigError("mhsa heads and model_dim must be positive");
    if (cfg.model_dim % cfg.heads != 0)
        throw ConfigError("mhsa model_dim must be divisible by heads");
    if (cfg.key_dim != cfg.model_dim / cfg.heads)
        throw ConfigError("mhsa key_dim must equal model_dim / heads");
    for (const Tensor* w : {&cfg.wq, &cfg.wk, &cfg.wv, &cfg.wo}) {
        validate(*w);
        if (w->rank() != 2 || w->shape[0] != cfg.model_dim || w->shape[1] != cfg.model_dim)
            throw ConfigError("mhsa weight matrices must be model_dim x model_dim");
    }
}

void validate(const SpeedModulation& mod) {
    if (!(mod.image_diag_px > 0.0))
        throw DomainError("image diagonal must be positive");
    if (mod.w0_scale < 0.0 || mod.w0_scale > 1.0 || mod.w1_scale < 0.0 || mod.w1_scale > 1.0)
        throw DomainError("fusion weights must lie in [0, 1]");
    if (std::abs(mod.w0_scale + mod.w1_scale - 1.0) > 1e-12)
        throw DomainError("fusion weights must sum to 1");
}

namespace {

// C = A * B for rank-2 tensors (m,k) x (k,n).
Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.shape[0], kk = a.shape[1], n = b.shape[1];
    Tensor c = Tensor::tokens(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < kk; ++t)
                acc += a.at(i, t) * b.at(t, j);
            c.at(i, j) = acc;
        }
    return c;
}

} // namespace

Tensor adjust_conv(const Tensor& x, const Conv1x1& k) {
    validate(x);
    validate(k);
    if (x.rank() != 3)
        throw ShapeError("adjust_conv expects a (channels, height, width) tensor");
    if (x.shape[0] != k.in_channels)
        throw ShapeError("adjust_conv channel mismatch between input and kernel");
    const std::size_t h = x.shape[1], w = x.shape[2];
    Tensor y = Tensor::chw(k.out_channels, h, w);
    for (std::size_t co = 0; co < k.out_channels; ++co)
        for (std::size_t yy = 0; yy < h; ++yy)
            for (std::size_t xx = 0; xx < w; ++xx) {
                double acc = k.bias[co];
                for (std::size_t ci = 0; ci < k.in_channels; ++ci)
                    acc += k.weights[co * k.in_channels + ci] * x.at(ci, yy, xx);
                y.at(co, yy, xx) = acc;
            }
    return y;
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t d_k) {
    validate(q);
    validate(k);
    validate(v);
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2)
        throw ShapeError("attention expects (tokens, dim) tensors");
    if (q.shape[1] != k.shape[1])
        throw ShapeError("attention query/key dims differ");
    if (k.shape[0] != v.shape[0])
        throw ShapeError("attention key/value token counts differ");
    if (d_k == 0)
        throw DomainError("attention d_k must be positive");

    const std::size_t tq = q.shape[0], tk = k.shape[0], dv = v.shape[1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
    Tensor out = Tensor::tokens(tq, dv);
    std::vector<double> row(tk);
    for (std::size_t i = 0; i < tq; ++i) {
        double mx = -INFINITY;
        for (std::size_t j = 0; j < tk; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < q.shape[1]; ++d)
                s += q.at(i, d) * k.at(j, d);
            row[j] = s * scale;
            mx = std::max(mx, row[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < tk; ++j) {
            row[j] = std::exp(row[j] - mx); // shift for numerical stability
            denom += row[j];
        }
        for (std::size_t j = 0; j < tk; ++j)
            row[j] /= denom;
        for (std::size_t c = 0; c < dv; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < tk; ++j)
                acc += row[j] * v.at(j, c);
            out.at(i, c) = acc;
        }
    }
    return out;
}

Tensor mhsa(const Tensor& x, const MhsaConfig& cfg) {
    validate(x);
    validate(cfg);
    if (x.rank() != 2)
        throw ShapeError("mhsa expects a (tokens, dim) tensor");
    if (x.shape[1] != cfg.model_dim)
        throw ShapeError("mhsa input token dim must equal model_dim");

    const std::size_t t = x.shape[0], dk = cfg.key_dim;
    const Tensor q = matmul(x, cfg.wq);
    const Tensor k = matmul(x, cfg.wk);
    const Tensor v = matmul(x, cfg.wv);

    Tensor concat = Tensor::tokens(t, cfg.model_dim);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::size_t off = h * dk;
        Tensor qh = Tensor::tokens(t, dk), kh = Tensor::tokens(t, dk), vh = Tensor::tokens(t, dk);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t d = 0; d < dk; ++d) {
                qh.at(i, d) = q.at(i, off + d);
                kh.at(i, d) = k.at(i, off + d);
                vh.at(i, d) = v.at(i, off + d);
            }
        const Tensor head = attention(qh, kh, vh, dk);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t d = 0; d < dk; ++d)
                concat.at(i, off + d) = head.at(i, d);
    }
    return matmul(concat, cfg.wo);
}

SpeedModulation speed_modulation(double displacement_px, double image_diag_px) {
    if (!(image_diag_px > 0.0))
        throw DomainError("image diagonal must be positive");
    if (!(displacement_px >= 0.0))
        throw DomainError("displacement must be non-negative");
    const double s = std::clamp(displacement_px / image_diag_px, 0.0, 1.0);
    return {displacement_px, image_diag_px, 1.0 - s, s};
}

Tensor cfam_fuse(const Tensor& x0, const Tensor& x1, const Conv1x1& conv,
                 const MhsaConfig& cfg, const SpeedModulation& mod) {
    validate(x0);
    validate(x1);
    validate(mod);
    if (x0.rank() != 3 || x1.rank() != 3 || x0.shape != x1.shape)
        throw ShapeError("cfam_fuse inputs must be equally shaped (c, h, w) tensors");
    const std::size_t c = x0.shape[0], h = x0.shape[1], w = x0.shape[2];
    if (conv.out_channels != c)
        throw ShapeError("cfam_fuse conv must preserve the channel count");
    if (cfg.model_dim != 2 * c)
        throw ShapeError("cfam_fuse mhsa model_dim must equal twice the channel count");

    const Tensor x0p = adjust_conv(x0, conv);

    // One token per pixel; dims are the concatenated channels of (x0', x1).
    Tensor tok = Tensor::tokens(h * w, 2 * c);
    for (std::size_t yy = 0; yy < h; ++yy)
        for (std::size_t xx = 0; xx < w; ++xx) {
            const std::size_t t = yy * w + xx;
            for (std::size_t ci = 0; ci < c; ++ci) {
                tok.at(t, ci) = x0p.at(ci, yy, xx);
                tok.at(t, c + ci) = x1.at(ci, yy, xx);
            }
        }
    const Tensor processed = mhsa(tok, cfg);

    Tensor out = Tensor::chw(2 * c, h, w);
    for (std::size_t yy = 0; yy < h; ++yy)
        for (std::size_t xx = 0; xx < w; ++xx) {
            const std::size_t t = yy * w + xx;
            for (std::size_t ci = 0; ci < c; ++ci) {
                const double w0_half = mod.w0_scale * processed.at(t, ci);
                const double w1_half = mod.w1_scale * processed.at(t, c + ci);
                const double x0_sum = x0.at(ci, yy, xx) + w0_half;
                const double x1_sum = x1.at(ci, yy, xx) + w1_half;
                out.at(ci, yy, xx) = x1_sum + x0.at(ci, yy, xx);
                out.at(c + ci, yy, xx) = x0_sum + x1.at(ci, yy, xx);
            }
        }
    return out;
}

} // namespace pantilt
