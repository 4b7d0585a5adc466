#include "pantilt/fusion_reference.hpp"

#include <cmath>
#include <vector>

namespace pantilt::reference {

Tensor conv1x1(const Tensor& x, const Conv1x1& k) {
    const std::size_t ci = x.shape[0], h = x.shape[1], w = x.shape[2];
    Tensor y{{k.out_channels, h, w}, std::vector<double>(k.out_channels * h * w, 0.0)};
    for (std::size_t o = 0; o < k.out_channels; ++o)
        for (std::size_t yy = 0; yy < h; ++yy)
            for (std::size_t xx = 0; xx < w; ++xx) {
                double s = k.bias[o];
                for (std::size_t i = 0; i < ci; ++i)
                    s += k.weights[o * ci + i] * x.data[(i * h + yy) * w + xx];
                y.data[(o * h + yy) * w + xx] = s;
            }
    return y;
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t d_k) {
    const std::size_t tq = q.shape[0], tk = k.shape[0], d = q.shape[1], dv = v.shape[1];
    Tensor out{{tq, dv}, std::vector<double>(tq * dv, 0.0)};
    for (std::size_t i = 0; i < tq; ++i) {
        // plain softmax, no max shift
        std::vector<double> e(tk);
        double denom = 0.0;
        for (std::size_t j = 0; j < tk; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                s += q.data[i * d + c] * k.data[j * d + c];
            e[j] = std::exp(s / std::sqrt(static_cast<double>(d_k)));
            denom += e[j];
        }
        for (std::size_t c = 0; c < dv; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < tk; ++j)
                s += e[j] / denom * v.data[j * dv + c];
            out.data[i * dv + c] = s;
        }
    }
    return out;
}

Tensor mhsa(const Tensor& x, const MhsaConfig& cfg) {
    const std::size_t t = x.shape[0], m = cfg.model_dim, dk = cfg.key_dim;

    // project everything up front with bare loops
    std::vector<double> q(t * m, 0.0), k(t * m, 0.0), v(t * m, 0.0);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t c = 0; c < m; ++c) {
                q[i * m + j] += x.data[i * m + c] * cfg.wq.data[c * m + j];
                k[i * m + j] += x.data[i * m + c] * cfg.wk.data[c * m + j];
                v[i * m + j] += x.data[i * m + c] * cfg.wv.data[c * m + j];
            }

    std::vector<double> concat(t * m, 0.0);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::size_t off = h * dk;
        for (std::size_t i = 0; i < t; ++i) {
            std::vector<double> e(t);
            double denom = 0.0;
            for (std::size_t j = 0; j < t; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < dk; ++c)
                    s += q[i * m + off + c] * k[j * m + off + c];
                e[j] = std::exp(s / std::sqrt(static_cast<double>(dk)));
                denom += e[j];
            }
            for (std::size_t c = 0; c < dk; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j < t; ++j)
                    s += e[j] / denom * v[j * m + off + c];
                concat[i * m + off + c] = s;
            }
        }
    }

    Tensor out{{t, m}, std::vector<double>(t * m, 0.0)};
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                s += concat[i * m + c] * cfg.wo.data[c * m + j];
            out.data[i * m + j] = s;
        }
    return out;
}

Tensor cfam_fuse(const Tensor& x0, const Tensor& x1, const Conv1x1& conv,
                 const MhsaConfig& cfg, const SpeedModulation& mod) {
    const std::size_t c = x0.shape[0], h = x0.shape[1], w = x0.shape[2];
    const Tensor x0p = conv1x1(x0, conv);

    Tensor tok{{h * w, 2 * c}, std::vector<double>(h * w * 2 * c, 0.0)};
    for (std::size_t yy = 0; yy < h; ++yy)
        for (std::size_t xx = 0; xx < w; ++xx)
            for (std::size_t ci = 0; ci < c; ++ci) {
                tok.data[(yy * w + xx) * 2 * c + ci] = x0p.data[(ci * h + yy) * w + xx];
                tok.data[(yy * w + xx) * 2 * c + c + ci] = x1.data[(ci * h + yy) * w + xx];
            }
    const Tensor processed = reference::mhsa(tok, cfg);

    Tensor out{{2 * c, h, w}, std::vector<double>(2 * c * h * w, 0.0)};
    for (std::size_t yy = 0; yy < h; ++yy)
        for (std::size_t xx = 0; xx < w; ++xx)
            for (std::size_t ci = 0; ci < c; ++ci) {
                const double a0 = x0.data[(ci * h + yy) * w + xx];
                const double a1 = x1.data[(ci * h + yy) * w + xx];
                const double w0 = mod.w0_scale * processed.data[(yy * w + xx) * 2 * c + ci];
                const double w1 = mod.w1_scale * processed.data[(yy * w + xx) * 2 * c + c + ci];
                out.data[(ci * h + yy) * w + xx] = (a1 + w1) + a0;
                out.data[((c + ci) * h + yy) * w + xx] = (a0 + w0) + a1;
            }
    return out;
}

} // namespace pantilt::reference
