#include "gpr/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace gpr::nn {

namespace {

void check_image(const Tensor& t, const char* who) {
    if (t.shape.size() != 3)
        throw std::invalid_argument(std::string(who) + ": expected [C,H,W] tensor");
}

void check_matrix(const Tensor& t, const char* who) {
    if (t.shape.size() != 2)
        throw std::invalid_argument(std::string(who) + ": expected [R,F] tensor");
}

}  // namespace

Tape::Id Tape::push(Tensor value, std::function<void()> back, Tensor* sink) {
    Node node;
    node.grad = Tensor::zeros(value.shape);
    node.value = std::move(value);
    node.back = std::move(back);
    node.sink = sink;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

void Tape::capture_routing(RoutingTrace* trace) {
    capture_ = trace;
    replay_ = nullptr;
}

void Tape::replay_routing(const RoutingTrace* trace) {
    replay_ = trace;
    capture_ = nullptr;
    replay_pool_cursor_ = 0;
    replay_mask_cursor_ = 0;
}

std::vector<std::size_t> Tape::routed_pool(const Tensor& x,
                                           std::vector<std::size_t> fresh) {
    if (replay_) {
        if (replay_pool_cursor_ >= replay_->pools.size())
            throw std::runtime_error("routing replay: pool trace exhausted");
        const auto& recorded = replay_->pools[replay_pool_cursor_++];
        if (recorded.size() != fresh.size())
            throw std::runtime_error("routing replay: pool shape mismatch");
        (void)x;
        return recorded;
    }
    if (capture_) capture_->pools.push_back(fresh);
    return fresh;
}

std::vector<char> Tape::routed_mask(const Tensor& x, std::vector<char> fresh) {
    if (replay_) {
        if (replay_mask_cursor_ >= replay_->relu_masks.size())
            throw std::runtime_error("routing replay: mask trace exhausted");
        const auto& recorded = replay_->relu_masks[replay_mask_cursor_++];
        if (recorded.size() != fresh.size())
            throw std::runtime_error("routing replay: mask shape mismatch");
        (void)x;
        return recorded;
    }
    if (capture_) capture_->relu_masks.push_back(fresh);
    return fresh;
}

Tape::Id Tape::leaf(const Tensor& value, Tensor* grad_sink) {
    return push(value, {}, grad_sink);
}

Tape::Id Tape::conv2d(Id x, Id w, Id b) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    check_image(xv, "conv2d");
    if (wv.shape.size() != 4 || wv.dim(1) != xv.dim(0))
        throw std::invalid_argument("conv2d: weight shape mismatch");
    const std::size_t k = wv.dim(2);
    if (k != wv.dim(3) || (k != 1 && k != 3))
        throw std::invalid_argument("conv2d: kernel must be 1x1 or 3x3");
    if (bv.numel() != wv.dim(0))
        throw std::invalid_argument("conv2d: bias shape mismatch");

    const std::size_t co = wv.dim(0), ci = wv.dim(1);
    const std::size_t h = xv.dim(1), wd = xv.dim(2);
    const long pad = static_cast<long>(k / 2);

    Tensor out = Tensor::zeros({co, h, wd});
    for (std::size_t oc = 0; oc < co; ++oc) {
        double* yplane = &out.data[oc * h * wd];
        const double bias = bv.data[oc];
        for (std::size_t i = 0; i < h * wd; ++i) yplane[i] = bias;
        for (std::size_t ic = 0; ic < ci; ++ic) {
            const double* xplane = &xv.data[ic * h * wd];
            for (std::size_t dy = 0; dy < k; ++dy) {
                for (std::size_t dxk = 0; dxk < k; ++dxk) {
                    const double wgt =
                        wv.data[((oc * ci + ic) * k + dy) * k + dxk];
                    if (wgt == 0.0) continue;
                    const long oy = static_cast<long>(dy) - pad;
                    const long ox = static_cast<long>(dxk) - pad;
                    const long r0 = std::max<long>(0, -oy);
                    const long r1 = std::min<long>(h - 1, static_cast<long>(h) - 1 - oy);
                    const long c0 = std::max<long>(0, -ox);
                    const long c1 = std::min<long>(wd - 1, static_cast<long>(wd) - 1 - ox);
                    for (long r = r0; r <= r1; ++r) {
                        const double* xrow = xplane + (r + oy) * static_cast<long>(wd) + (c0 + ox);
                        double* yrow = yplane + r * static_cast<long>(wd) + c0;
                        const long count = c1 - c0 + 1;
                        for (long c = 0; c < count; ++c) yrow[c] += wgt * xrow[c];
                    }
                }
            }
        }
    }

    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, w, b, co, ci, h, wd, k, pad]() {
        const Tensor& g = nodes_[self].grad;
        const Tensor& xv2 = nodes_[x].value;
        const Tensor& wv2 = nodes_[w].value;
        Tensor& gx = nodes_[x].grad;
        Tensor& gw = nodes_[w].grad;
        Tensor& gb = nodes_[b].grad;
        for (std::size_t oc = 0; oc < co; ++oc) {
            const double* gplane = &g.data[oc * h * wd];
            double acc = 0.0;
            for (std::size_t i = 0; i < h * wd; ++i) acc += gplane[i];
            gb.data[oc] += acc;
            for (std::size_t ic = 0; ic < ci; ++ic) {
                const double* xplane = &xv2.data[ic * h * wd];
                double* gxplane = &gx.data[ic * h * wd];
                for (std::size_t dy = 0; dy < k; ++dy) {
                    for (std::size_t dxk = 0; dxk < k; ++dxk) {
                        const long oy = static_cast<long>(dy) - pad;
                        const long ox = static_cast<long>(dxk) - pad;
                        const long r0 = std::max<long>(0, -oy);
                        const long r1 = std::min<long>(h - 1, static_cast<long>(h) - 1 - oy);
                        const long c0 = std::max<long>(0, -ox);
                        const long c1 = std::min<long>(wd - 1, static_cast<long>(wd) - 1 - ox);
                        const double wgt = wv2.data[((oc * ci + ic) * k + dy) * k + dxk];
                        double wacc = 0.0;
                        for (long r = r0; r <= r1; ++r) {
                            const double* xrow = xplane + (r + oy) * static_cast<long>(wd) + (c0 + ox);
                            double* gxrow = gxplane + (r + oy) * static_cast<long>(wd) + (c0 + ox);
                            const double* grow = gplane + r * static_cast<long>(wd) + c0;
                            const long count = c1 - c0 + 1;
                            for (long c = 0; c < count; ++c) {
                                wacc += grow[c] * xrow[c];
                                gxrow[c] += grow[c] * wgt;
                            }
                        }
                        gw.data[((oc * ci + ic) * k + dy) * k + dxk] += wacc;
                    }
                }
            }
        }
    };
    return self;
}

Tape::Id Tape::conv2d_transpose(Id x, Id w, Id b) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    check_image(xv, "conv2d_transpose");
    if (wv.shape.size() != 4 || wv.dim(0) != xv.dim(0) || wv.dim(2) != 3 ||
        wv.dim(3) != 3)
        throw std::invalid_argument("conv2d_transpose: weight must be [Cin,Cout,3,3]");
    if (bv.numel() != wv.dim(1))
        throw std::invalid_argument("conv2d_transpose: bias shape mismatch");

    const std::size_t ci = wv.dim(0), co = wv.dim(1);
    const std::size_t h = xv.dim(1), wd = xv.dim(2);
    constexpr long pad = 1;
    constexpr std::size_t k = 3;

    // Scatter form: y[oc][r+dy-1][c+dx-1] += x[ic][r][c] * w[ic][oc][dy][dx]
    Tensor out = Tensor::zeros({co, h, wd});
    for (std::size_t oc = 0; oc < co; ++oc) {
        double* yplane = &out.data[oc * h * wd];
        const double bias = bv.data[oc];
        for (std::size_t i = 0; i < h * wd; ++i) yplane[i] = bias;
        for (std::size_t ic = 0; ic < ci; ++ic) {
            const double* xplane = &xv.data[ic * h * wd];
            for (std::size_t dy = 0; dy < k; ++dy) {
                for (std::size_t dxk = 0; dxk < k; ++dxk) {
                    const double wgt = wv.data[((ic * co + oc) * k + dy) * k + dxk];
                    if (wgt == 0.0) continue;
                    const long oy = static_cast<long>(dy) - pad;
                    const long ox = static_cast<long>(dxk) - pad;
                    const long r0 = std::max<long>(0, -oy);
                    const long r1 = std::min<long>(h - 1, static_cast<long>(h) - 1 - oy);
                    const long c0 = std::max<long>(0, -ox);
                    const long c1 = std::min<long>(wd - 1, static_cast<long>(wd) - 1 - ox);
                    for (long r = r0; r <= r1; ++r) {
                        const double* xrow = xplane + r * static_cast<long>(wd) + c0;
                        double* yrow = yplane + (r + oy) * static_cast<long>(wd) + (c0 + ox);
                        const long count = c1 - c0 + 1;
                        for (long c = 0; c < count; ++c) yrow[c] += wgt * xrow[c];
                    }
                }
            }
        }
    }

    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, w, b, co, ci, h, wd]() {
        const Tensor& g = nodes_[self].grad;
        const Tensor& xv2 = nodes_[x].value;
        const Tensor& wv2 = nodes_[w].value;
        Tensor& gx = nodes_[x].grad;
        Tensor& gw = nodes_[w].grad;
        Tensor& gb = nodes_[b].grad;
        constexpr long pad2 = 1;
        constexpr std::size_t kk = 3;
        for (std::size_t oc = 0; oc < co; ++oc) {
            const double* gplane = &g.data[oc * h * wd];
            double acc = 0.0;
            for (std::size_t i = 0; i < h * wd; ++i) acc += gplane[i];
            gb.data[oc] += acc;
            for (std::size_t ic = 0; ic < ci; ++ic) {
                const double* xplane = &xv2.data[ic * h * wd];
                double* gxplane = &gx.data[ic * h * wd];
                for (std::size_t dy = 0; dy < kk; ++dy) {
                    for (std::size_t dxk = 0; dxk < kk; ++dxk) {
                        const long oy = static_cast<long>(dy) - pad2;
                        const long ox = static_cast<long>(dxk) - pad2;
                        const long r0 = std::max<long>(0, -oy);
                        const long r1 = std::min<long>(h - 1, static_cast<long>(h) - 1 - oy);
                        const long c0 = std::max<long>(0, -ox);
                        const long c1 = std::min<long>(wd - 1, static_cast<long>(wd) - 1 - ox);
                        const double wgt = wv2.data[((ic * co + oc) * kk + dy) * kk + dxk];
                        double wacc = 0.0;
                        for (long r = r0; r <= r1; ++r) {
                            const double* xrow = xplane + r * static_cast<long>(wd) + c0;
                            double* gxrow = gxplane + r * static_cast<long>(wd) + c0;
                            const double* grow = gplane + (r + oy) * static_cast<long>(wd) + (c0 + ox);
                            const long count = c1 - c0 + 1;
                            for (long c = 0; c < count; ++c) {
                                wacc += grow[c] * xrow[c];
                                gxrow[c] += grow[c] * wgt;
                            }
                        }
                        gw.data[((ic * co + oc) * kk + dy) * kk + dxk] += wacc;
                    }
                }
            }
        }
    };
    return self;
}

Tape::Id Tape::maxpool2d(Id x, std::size_t k) {
    const Tensor& xv = nodes_[x].value;
    check_image(xv, "maxpool2d");
    const std::size_t ch = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
    if (k == 0 || h % k != 0 || wd % k != 0)
        throw std::invalid_argument("maxpool2d: spatial dims must be divisible by the kernel");
    const std::size_t oh = h / k, ow = wd / k;

    std::vector<std::size_t> fresh(ch * oh * ow);
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t q = 0; q < ow; ++q) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                for (std::size_t dy = 0; dy < k; ++dy) {
                    for (std::size_t dxk = 0; dxk < k; ++dxk) {
                        const std::size_t idx = (c * h + r * k + dy) * wd + q * k + dxk;
                        if (xv.data[idx] > best) {
                            best = xv.data[idx];
                            best_idx = idx;
                        }
                    }
                }
                fresh[(c * oh + r) * ow + q] = best_idx;
            }
        }
    }
    auto argmax = std::make_shared<std::vector<std::size_t>>(
        routed_pool(xv, std::move(fresh)));
    Tensor out = Tensor::zeros({ch, oh, ow});
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = xv.data[(*argmax)[i]];
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, argmax]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gx.data[(*argmax)[i]] += g.data[i];
    };
    return self;
}

Tape::Id Tape::upsample_nearest2d(Id x, std::size_t k) {
    const Tensor& xv = nodes_[x].value;
    check_image(xv, "upsample_nearest2d");
    if (k == 0) throw std::invalid_argument("upsample_nearest2d: zero factor");
    const std::size_t ch = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
    const std::size_t oh = h * k, ow = wd * k;
    Tensor out = Tensor::zeros({ch, oh, ow});
    for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t q = 0; q < ow; ++q)
                out.data[(c * oh + r) * ow + q] = xv.data[(c * h + r / k) * wd + q / k];
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, ch, h, wd, k, oh, ow]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t r = 0; r < oh; ++r)
                for (std::size_t q = 0; q < ow; ++q)
                    gx.data[(c * h + r / k) * wd + q / k] += g.data[(c * oh + r) * ow + q];
    };
    return self;
}

Tape::Id Tape::concat_channels(const std::vector<Id>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_channels: no inputs");
    const std::size_t h = nodes_[xs[0]].value.dim(1);
    const std::size_t wd = nodes_[xs[0]].value.dim(2);
    std::size_t total = 0;
    for (Id id : xs) {
        check_image(nodes_[id].value, "concat_channels");
        if (nodes_[id].value.dim(1) != h || nodes_[id].value.dim(2) != wd)
            throw std::invalid_argument("concat_channels: spatial dims mismatch");
        total += nodes_[id].value.dim(0);
    }
    Tensor out = Tensor::zeros({total, h, wd});
    std::size_t offset = 0;
    for (Id id : xs) {
        const Tensor& v = nodes_[id].value;
        std::copy(v.data.begin(), v.data.end(), out.data.begin() + offset);
        offset += v.numel();
    }
    const Id self = push(std::move(out), {});
    auto inputs = std::make_shared<std::vector<Id>>(xs);
    nodes_[self].back = [this, self, inputs]() {
        const Tensor& g = nodes_[self].grad;
        std::size_t offset2 = 0;
        for (Id id : *inputs) {
            Tensor& gx = nodes_[id].grad;
            for (std::size_t i = 0; i < gx.data.size(); ++i)
                gx.data[i] += g.data[offset2 + i];
            offset2 += gx.data.size();
        }
    };
    return self;
}

Tape::Id Tape::relu(Id x) {
    const Tensor& xv = nodes_[x].value;
    std::vector<char> fresh(xv.numel());
    for (std::size_t i = 0; i < xv.numel(); ++i) fresh[i] = xv.data[i] > 0.0;
    auto mask = std::make_shared<std::vector<char>>(routed_mask(xv, std::move(fresh)));
    Tensor out = xv;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (!(*mask)[i]) out.data[i] = 0.0;
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, mask]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t i = 0; i < g.data.size(); ++i)
            if ((*mask)[i]) gx.data[i] += g.data[i];
    };
    return self;
}

Tape::Id Tape::sigmoid(Id x) {
    const Tensor& xv = nodes_[x].value;
    Tensor out = xv;
    for (double& v : out.data) {
        const double s = 1.0 / (1.0 + std::exp(-v));
        v = std::clamp(s, 1e-12, 1.0 - 1e-12);
    }
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x]() {
        const Tensor& g = nodes_[self].grad;
        const Tensor& sv = nodes_[self].value;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gx.data[i] += g.data[i] * sv.data[i] * (1.0 - sv.data[i]);
    };
    return self;
}

Tape::Id Tape::dense_rows(Id x, Id w, Id b) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    check_matrix(xv, "dense_rows");
    if (wv.shape.size() != 2 || wv.dim(0) != xv.dim(1))
        throw std::invalid_argument("dense_rows: weight shape mismatch");
    if (bv.numel() != wv.dim(1))
        throw std::invalid_argument("dense_rows: bias shape mismatch");
    const std::size_t rows = xv.dim(0), fin = xv.dim(1), fout = wv.dim(1);
    Tensor out = Tensor::zeros({rows, fout});
    for (std::size_t r = 0; r < rows; ++r) {
        double* yrow = &out.data[r * fout];
        for (std::size_t o = 0; o < fout; ++o) yrow[o] = bv.data[o];
        const double* xrow = &xv.data[r * fin];
        for (std::size_t i = 0; i < fin; ++i) {
            const double xi = xrow[i];
            if (xi == 0.0) continue;
            const double* wrow = &wv.data[i * fout];
            for (std::size_t o = 0; o < fout; ++o) yrow[o] += xi * wrow[o];
        }
    }
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, w, b, rows, fin, fout]() {
        const Tensor& g = nodes_[self].grad;
        const Tensor& xv2 = nodes_[x].value;
        const Tensor& wv2 = nodes_[w].value;
        Tensor& gx = nodes_[x].grad;
        Tensor& gw = nodes_[w].grad;
        Tensor& gb = nodes_[b].grad;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* grow = &g.data[r * fout];
            const double* xrow = &xv2.data[r * fin];
            double* gxrow = &gx.data[r * fin];
            for (std::size_t o = 0; o < fout; ++o) gb.data[o] += grow[o];
            for (std::size_t i = 0; i < fin; ++i) {
                const double* wrow = &wv2.data[i * fout];
                double* gwrow = &gw.data[i * fout];
                double acc = 0.0;
                const double xi = xrow[i];
                for (std::size_t o = 0; o < fout; ++o) {
                    acc += grow[o] * wrow[o];
                    gwrow[o] += grow[o] * xi;
                }
                gxrow[i] += acc;
            }
        }
    };
    return self;
}

Tape::Id Tape::maxpool_rows(Id x) {
    const Tensor& xv = nodes_[x].value;
    check_matrix(xv, "maxpool_rows");
    const std::size_t rows = xv.dim(0), f = xv.dim(1);
    std::vector<std::size_t> fresh(f, 0);
    for (std::size_t o = 0; o < f; ++o) {
        double best = xv.data[o];
        for (std::size_t r = 1; r < rows; ++r) {
            const double v = xv.data[r * f + o];
            if (v > best) {
                best = v;
                fresh[o] = r;
            }
        }
    }
    auto argmax = std::make_shared<std::vector<std::size_t>>(
        routed_pool(xv, std::move(fresh)));
    Tensor out = Tensor::zeros({1, f});
    for (std::size_t o = 0; o < f; ++o) out.data[o] = xv.data[(*argmax)[o] * f + o];
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x, argmax, f]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t o = 0; o < f; ++o)
            gx.data[(*argmax)[o] * f + o] += g.data[o];
    };
    return self;
}

Tape::Id Tape::broadcast_rows(Id gsrc, std::size_t rows) {
    const Tensor& xv = nodes_[gsrc].value;
    check_matrix(xv, "broadcast_rows");
    if (xv.dim(0) != 1)
        throw std::invalid_argument("broadcast_rows: source must be [1,F]");
    const std::size_t f = xv.dim(1);
    Tensor out = Tensor::zeros({rows, f});
    for (std::size_t r = 0; r < rows; ++r)
        std::copy(xv.data.begin(), xv.data.end(), out.data.begin() + r * f);
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, gsrc, rows, f]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[gsrc].grad;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t o = 0; o < f; ++o) gx.data[o] += g.data[r * f + o];
    };
    return self;
}

Tape::Id Tape::concat_cols(const std::vector<Id>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const std::size_t rows = nodes_[xs[0]].value.dim(0);
    std::size_t total = 0;
    for (Id id : xs) {
        check_matrix(nodes_[id].value, "concat_cols");
        if (nodes_[id].value.dim(0) != rows)
            throw std::invalid_argument("concat_cols: row count mismatch");
        total += nodes_[id].value.dim(1);
    }
    Tensor out = Tensor::zeros({rows, total});
    std::size_t offset = 0;
    for (Id id : xs) {
        const Tensor& v = nodes_[id].value;
        const std::size_t f = v.dim(1);
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(&v.data[r * f], &v.data[r * f] + f,
                      &out.data[r * total + offset]);
        offset += f;
    }
    const Id self = push(std::move(out), {});
    auto inputs = std::make_shared<std::vector<Id>>(xs);
    nodes_[self].back = [this, self, inputs, rows, total]() {
        const Tensor& g = nodes_[self].grad;
        std::size_t offset2 = 0;
        for (Id id : *inputs) {
            Tensor& gx = nodes_[id].grad;
            const std::size_t f = gx.shape[1];
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t o = 0; o < f; ++o)
                    gx.data[r * f + o] += g.data[r * total + offset2 + o];
            offset2 += f;
        }
    };
    return self;
}

Tape::Id Tape::concat_rows(const std::vector<Id>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_rows: no inputs");
    const std::size_t cols = nodes_[xs[0]].value.dim(1);
    std::size_t total = 0;
    for (Id id : xs) {
        check_matrix(nodes_[id].value, "concat_rows");
        if (nodes_[id].value.dim(1) != cols)
            throw std::invalid_argument("concat_rows: column count mismatch");
        total += nodes_[id].value.dim(0);
    }
    Tensor out = Tensor::zeros({total, cols});
    std::size_t offset = 0;
    for (Id id : xs) {
        const Tensor& v = nodes_[id].value;
        std::copy(v.data.begin(), v.data.end(), out.data.begin() + offset);
        offset += v.numel();
    }
    const Id self = push(std::move(out), {});
    auto inputs = std::make_shared<std::vector<Id>>(xs);
    nodes_[self].back = [this, self, inputs]() {
        const Tensor& g = nodes_[self].grad;
        std::size_t offset2 = 0;
        for (Id id : *inputs) {
            Tensor& gx = nodes_[id].grad;
            for (std::size_t i = 0; i < gx.data.size(); ++i)
                gx.data[i] += g.data[offset2 + i];
            offset2 += gx.data.size();
        }
    };
    return self;
}

Tape::Id Tape::reshape(Id x, std::vector<std::size_t> shape) {
    const Tensor& xv = nodes_[x].value;
    if (Tensor::numel_of(shape) != xv.numel())
        throw std::invalid_argument("reshape: element count mismatch");
    Tensor out;
    out.shape = std::move(shape);
    out.data = xv.data;
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, x]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[x].grad;
        for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
    };
    return self;
}

Tape::Id Tape::fold_grid(Id seeds, double step) {
    const Tensor& sv = nodes_[seeds].value;
    check_matrix(sv, "fold_grid");
    if (sv.dim(1) != 3)
        throw std::invalid_argument("fold_grid: seeds must be [S,3]");
    const std::size_t s = sv.dim(0);
    Tensor out = Tensor::zeros({s * 9, 3});
    for (std::size_t i = 0; i < s; ++i) {
        for (int gy = -1; gy <= 1; ++gy) {
            for (int gx = -1; gx <= 1; ++gx) {
                const std::size_t o = i * 9 + static_cast<std::size_t>((gy + 1) * 3 + (gx + 1));
                out.data[o * 3 + 0] = sv.data[i * 3 + 0] + step * gx;
                out.data[o * 3 + 1] = sv.data[i * 3 + 1] + step * gy;
                out.data[o * 3 + 2] = sv.data[i * 3 + 2];
            }
        }
    }
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, seeds, s]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& gx = nodes_[seeds].grad;
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t patch = 0; patch < 9; ++patch)
                for (std::size_t d = 0; d < 3; ++d)
                    gx.data[i * 3 + d] += g.data[(i * 9 + patch) * 3 + d];
    };
    return self;
}

Tape::Id Tape::structure_loss(Id pred, const Tensor& truth, double c) {
    const Tensor& pv = nodes_[pred].value;
    if (pv.numel() != truth.numel())
        throw std::invalid_argument("structure_loss: dimension mismatch");
    if (c <= 0.0) throw std::invalid_argument("structure_loss: C must be positive");
    const double n = static_cast<double>(pv.numel());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < pv.numel(); ++i) {
        mx += pv.data[i];
        my += truth.data[i];
    }
    mx /= n;
    my /= n;
    double vxx = 0.0, vyy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < pv.numel(); ++i) {
        const double ax = pv.data[i] - mx;
        const double ay = truth.data[i] - my;
        vxx += ax * ax;
        vyy += ay * ay;
        cov += ax * ay;
    }
    vxx /= (n - 1.0);
    vyy /= (n - 1.0);
    cov /= (n - 1.0);
    const double sx = std::sqrt(vxx);
    const double sy = std::sqrt(vyy);
    const double denom = sx * sy + c;
    const double loss = 1.0 - (cov + c) / denom;

    const Id self = push(Tensor::from({1}, {loss}), {});
    auto truth_copy = std::make_shared<Tensor>(truth);
    nodes_[self].back = [this, self, pred, truth_copy, c, n, mx, my, sx, sy, cov]() {
        const double gout = nodes_[self].grad.data[0];
        const Tensor& pv2 = nodes_[pred].value;
        const Tensor& tv = *truth_copy;
        Tensor& gx = nodes_[pred].grad;
        const double denom2 = sx * sy + c;
        // d/dx_q [ -(cov + C)/(sx*sy + C) ]
        for (std::size_t q = 0; q < pv2.numel(); ++q) {
            const double dcov = (tv.data[q] - my) / (n - 1.0);
            const double dsx = sx > 1e-15 ? (pv2.data[q] - mx) / ((n - 1.0) * sx) : 0.0;
            const double d = -(dcov * denom2 - (cov + c) * sy * dsx) / (denom2 * denom2);
            gx.data[q] += gout * d;
        }
    };
    return self;
}

Tape::Id Tape::cross_entropy_loss(Id pred, const Tensor& truth, double w0,
                                  double w1) {
    const Tensor& pv = nodes_[pred].value;
    if (pv.numel() != truth.numel())
        throw std::invalid_argument("cross_entropy_loss: dimension mismatch");
    const double n = static_cast<double>(pv.numel());
    double acc = 0.0;
    for (std::size_t i = 0; i < pv.numel(); ++i) {
        const double p = pv.data[i];
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("cross_entropy_loss: predictions must lie in (0,1)");
        const double y = truth.data[i];
        acc += w1 * y * std::log(p) + w0 * (1.0 - y) * std::log(1.0 - p);
    }
    const double loss = -acc / n;
    const Id self = push(Tensor::from({1}, {loss}), {});
    auto truth_copy = std::make_shared<Tensor>(truth);
    nodes_[self].back = [this, self, pred, truth_copy, w0, w1, n]() {
        const double gout = nodes_[self].grad.data[0];
        const Tensor& pv2 = nodes_[pred].value;
        Tensor& gx = nodes_[pred].grad;
        for (std::size_t i = 0; i < pv2.numel(); ++i) {
            const double p = pv2.data[i];
            const double y = truth_copy->data[i];
            gx.data[i] += gout * (-(w1 * y / p - w0 * (1.0 - y) / (1.0 - p)) / n);
        }
    };
    return self;
}

Tape::Id Tape::chamfer_loss(Id pred, const Tensor& truth) {
    const Tensor& pv = nodes_[pred].value;
    if (pv.shape.size() != 2 || pv.dim(1) != 3 || truth.shape.size() != 2 ||
        truth.dim(1) != 3)
        throw std::invalid_argument("chamfer_loss: clouds must be [*,3]");
    if (pv.dim(0) == 0 || truth.dim(0) == 0)
        throw std::invalid_argument("chamfer_loss: empty cloud");
    const std::size_t np = pv.dim(0), nt = truth.dim(0);

    auto nearest_pt = std::make_shared<std::vector<std::size_t>>(np);  // pred -> truth
    auto nearest_tp = std::make_shared<std::vector<std::size_t>>(nt);  // truth -> pred
    double sum_p = 0.0, sum_t = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bj = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                const double diff = pv.data[i * 3 + d] - truth.data[j * 3 + d];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                bj = j;
            }
        }
        (*nearest_pt)[i] = bj;
        sum_p += std::sqrt(best);
    }
    for (std::size_t j = 0; j < nt; ++j) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        for (std::size_t i = 0; i < np; ++i) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                const double diff = pv.data[i * 3 + d] - truth.data[j * 3 + d];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                bi = i;
            }
        }
        (*nearest_tp)[j] = bi;
        sum_t += std::sqrt(best);
    }
    const double loss = sum_p / static_cast<double>(np) + sum_t / static_cast<double>(nt);

    const Id self = push(Tensor::from({1}, {loss}), {});
    auto truth_copy = std::make_shared<Tensor>(truth);
    nodes_[self].back = [this, self, pred, truth_copy, nearest_pt, nearest_tp, np, nt]() {
        const double gout = nodes_[self].grad.data[0];
        const Tensor& pv2 = nodes_[pred].value;
        const Tensor& tv = *truth_copy;
        Tensor& gx = nodes_[pred].grad;
        for (std::size_t i = 0; i < np; ++i) {
            const std::size_t j = (*nearest_pt)[i];
            double diff[3];
            double dist = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                diff[d] = pv2.data[i * 3 + d] - tv.data[j * 3 + d];
                dist += diff[d] * diff[d];
            }
            dist = std::sqrt(dist);
            if (dist <= 1e-15) continue;
            for (std::size_t d = 0; d < 3; ++d)
                gx.data[i * 3 + d] += gout * diff[d] / (dist * static_cast<double>(np));
        }
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t i = (*nearest_tp)[j];
            double diff[3];
            double dist = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                diff[d] = pv2.data[i * 3 + d] - tv.data[j * 3 + d];
                dist += diff[d] * diff[d];
            }
            dist = std::sqrt(dist);
            if (dist <= 1e-15) continue;
            for (std::size_t d = 0; d < 3; ++d)
                gx.data[i * 3 + d] += gout * diff[d] / (dist * static_cast<double>(nt));
        }
    };
    return self;
}

Tape::Id Tape::add_scaled(Id a, Id b, double ca, double cb) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (!av.same_shape(bv))
        throw std::invalid_argument("add_scaled: shape mismatch");
    Tensor out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = ca * av.data[i] + cb * bv.data[i];
    const Id self = push(std::move(out), {});
    nodes_[self].back = [this, self, a, b, ca, cb]() {
        const Tensor& g = nodes_[self].grad;
        Tensor& ga = nodes_[a].grad;
        Tensor& gb = nodes_[b].grad;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += ca * g.data[i];
            gb.data[i] += cb * g.data[i];
        }
    };
    return self;
}

void Tape::backward(Id root) {
    if (nodes_[root].value.numel() != 1)
        throw std::invalid_argument("backward: root must be scalar");
    for (Node& n : nodes_)
        std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    nodes_[root].grad.data[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back();
    }
    for (Node& n : nodes_) {
        if (!n.sink) continue;
        for (std::size_t i = 0; i < n.grad.data.size(); ++i)
            n.sink->data[i] += n.grad.data[i];
    }
}

}  // namespace gpr::nn
