#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "scin/layers.hpp"
#include "scin/rng.hpp"
#include "scin/tensor.hpp"

namespace scin::testing {

// Literal true convolution S(i,j) = sum_m sum_n I(i-m, j-n) K(m,n), summed over
// input channels. The library correlates, so the oracle receives the flipped
// kernel and anchors each window at its bottom-right corner.
inline TensorD naive_conv(const TensorD& input, const TensorD& kernels, const TensorD& bias,
                              std::size_t stride, Padding padding) {
    const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
    const std::size_t F = kernels.dim(0), k = kernels.dim(2);
    std::size_t out_h, out_w;
    long pad_top = 0, pad_left = 0;
    if (padding == Padding::same) {
        out_h = (H + stride - 1) / stride;
        out_w = (W + stride - 1) / stride;
        const long total_h = std::max<long>(0, long((out_h - 1) * stride + k) - long(H));
        const long total_w = std::max<long>(0, long((out_w - 1) * stride + k) - long(W));
        pad_top = total_h / 2;
        pad_left = total_w / 2;
    } else {
        out_h = (H - k) / stride + 1;
        out_w = (W - k) / stride + 1;
    }
    TensorD out({F, out_h, out_w});
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t i = 0; i < out_h; ++i) {
            for (std::size_t j = 0; j < out_w; ++j) {
                double s = bias[f];
                const long ai = long(i * stride) - pad_top + long(k) - 1;
                const long aj = long(j * stride) - pad_left + long(k) - 1;
                for (std::size_t c = 0; c < C; ++c) {
                    for (std::size_t m = 0; m < k; ++m) {
                        for (std::size_t n = 0; n < k; ++n) {
                            const long y = ai - long(m), x = aj - long(n);
                            if (y < 0 || x < 0 || y >= long(H) || x >= long(W)) continue;
                            const double flipped = kernels.at({f, c, k - 1 - m, k - 1 - n});
                            s += input.at({c, std::size_t(y), std::size_t(x)}) * flipped;
                        }
                    }
                }
                out.at({f, i, j}) = s;
            }
        }
    }
    return out;
}

// Window scan over the pool geometry; first maximum in row-major order wins.
inline TensorD naive_maxpool(const TensorD& input, const WindowGeometry& g) {
    const std::size_t C = input.dim(0);
    TensorD out({C, g.out_h, g.out_w});
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < g.out_h; ++i) {
            for (std::size_t j = 0; j < g.out_w; ++j) {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < g.window; ++m) {
                    for (std::size_t n = 0; n < g.window; ++n) {
                        const long y = long(i * g.stride + m) - long(g.pad_top);
                        const long x = long(j * g.stride + n) - long(g.pad_left);
                        if (y < 0 || x < 0 || y >= long(g.in_h) || x >= long(g.in_w)) continue;
                        best = std::max(best, input.at({c, std::size_t(y), std::size_t(x)}));
                    }
                }
                out.at({c, i, j}) = best;
            }
        }
    }
    return out;
}

inline double dot(const TensorD& a, const TensorD& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct GradCheck {
    std::size_t checked = 0;
    double max_rel_error = 0.0;
};

inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

// Central differences of the scalar `loss` with respect to `coords` random
// entries of `param` (all entries when it is smaller).
inline GradCheck check_gradient(TensorD& param, const TensorD& analytic, const std::function<double()>& loss,
                                std::size_t coords, Rng& rng, double eps = 1e-5) {
    std::vector<std::size_t> idx(param.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(std::min(coords, idx.size()));
    GradCheck r;
    for (std::size_t k : idx) {
        const double saved = param[k];
        param[k] = saved + eps;
        const double up = loss();
        param[k] = saved - eps;
        const double down = loss();
        param[k] = saved;
        r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[k], (up - down) / (2 * eps)));
        ++r.checked;
    }
    return r;
}

inline GradCheck merge(GradCheck a, const GradCheck& b) {
    a.checked += b.checked;
    a.max_rel_error = std::max(a.max_rel_error, b.max_rel_error);
    return a;
}

// Values bounded away from the activation kink so +-eps never crosses it.
inline TensorD away_from_zero(Rng& rng, const Shape& shape, double margin = 0.05) {
    TensorD t = rng_uniform<double>(rng, shape, -1.0, 1.0);
    for (auto& v : t.data()) v = v < 0 ? v - margin : v + margin;
    return t;
}

}  // namespace scin::testing

namespace scin::testing {

// Pixel minus its clamped 3x3 neighbourhood mean, per channel.
inline std::vector<double> high_pass(const Tensor& patch) {
    const std::size_t C = patch.dim(0), H = patch.dim(1), W = patch.dim(2);
    std::vector<double> out(patch.size());
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < H; ++i) {
            for (std::size_t j = 0; j < W; ++j) {
                double s = 0.0;
                int n = 0;
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const long y = long(i) + di, x = long(j) + dj;
                        if (y < 0 || x < 0 || y >= long(H) || x >= long(W)) continue;
                        s += patch[(c * H + y) * W + x];
                        ++n;
                    }
                }
                out[(c * H + i) * W + j] = patch[(c * H + i) * W + j] - s / n;
            }
        }
    }
    return out;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Predicts the class whose high-passed fingerprint best correlates with the
// high-passed patch.
inline std::size_t nearest_fingerprint(const Tensor& patch, const std::vector<std::vector<double>>& prints) {
    const auto r = high_pass(patch);
    std::size_t best = 0;
    double best_r = -2.0;
    for (std::size_t c = 0; c < prints.size(); ++c) {
        const double v = pearson(r, prints[c]);
        if (v > best_r) {
            best_r = v;
            best = c;
        }
    }
    return best;
}

}  // namespace scin::testing
