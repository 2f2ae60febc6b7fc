#include "scae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace scae {

struct Tensor::Impl {
    std::vector<int> shape;
    std::vector<float> data;
    std::vector<float> grad;  // empty until first touched
    bool requires_grad = false;
};

namespace {

int64_t shape_numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw ShapeError("tensor extents must be positive");
        n *= e;
    }
    return n;
}

std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    impl->data.assign(size_t(shape_numel(shape)), 0.0f);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int> shape, float value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
    return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<float> data, bool requires_grad) {
    if (shape_numel(shape) != int64_t(data.size()))
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return impl_->shape; }

int64_t Tensor::numel() const { return int64_t(impl_->data.size()); }

bool Tensor::requires_grad() const { return impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }

std::span<float> Tensor::data() { return impl_->data; }

std::span<const float> Tensor::data() const { return impl_->data; }

float Tensor::item() const {
    if (numel() != 1) throw ContractError("item() on tensor with " + std::to_string(numel()) + " elements");
    return impl_->data[0];
}

std::span<float> Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0f);
    return impl_->grad;
}

std::span<const float> Tensor::grad() const {
    const_cast<Tensor*>(this)->grad();
    return impl_->grad;
}

bool Tensor::has_grad() const { return !impl_->grad.empty(); }

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0f);
}

Tensor Tensor::clone() const {
    return from_data(impl_->shape, impl_->data, false);
}

void Tensor::copy_(const Tensor& src) {
    if (!same_shape(src)) throw ShapeError("copy_: shape mismatch");
    impl_->data = std::vector<float>(src.impl_->data);
}

bool Tensor::same_shape(const Tensor& other) const { return impl_->shape == other.impl_->shape; }

void Tensor::check_finite(const char* who) const {
    for (float v : impl_->data)
        if (!std::isfinite(v)) throw NumericError(std::string(who) + " produced a non-finite value");
}

const void* Tensor::id() const { return impl_.get(); }

// ---- graph ------------------------------------------------------------

void Graph::record(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
}

void Graph::backward(const Tensor& loss) {
    if (consumed_) throw ContractError("backward called twice without clear()");
    if (loss.numel() != 1) throw ContractError("backward requires a scalar loss");
    consumed_ = true;
    const_cast<Tensor&>(loss).grad()[0] = 1.0f;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void Graph::clear() {
    nodes_.clear();
    consumed_ = false;
}

// ---- op helpers ---------------------------------------------------------

namespace {

bool track(const Graph& g, std::initializer_list<const Tensor*> inputs) {
    if (!g.recording()) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

// Flush f64 accumulation buffers into f32 grads.
void add_into_grad(Tensor& t, const std::vector<double>& acc) {
    auto g = t.grad();
    for (size_t i = 0; i < acc.size(); ++i) g[i] += float(acc[i]);
}

struct ConvDims {
    int n, cin, h, w;
    int cout, kh, kw;
    int hout, wout;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
                   int pad, bool transposed, int out_pad) {
    if (input.rank() != 4) throw ShapeError("conv input must be rank-4 NCHW");
    if (weight.rank() != 4) throw ShapeError("conv weight must be rank-4");
    if (bias.rank() != 1) throw ShapeError("conv bias must be rank-1");
    if (stride < 1) throw ShapeError("conv stride must be >= 1");
    if (pad < 0) throw ShapeError("conv pad must be >= 0");
    ConvDims d;
    d.n = input.dim(0);
    d.cin = input.dim(1);
    d.h = input.dim(2);
    d.w = input.dim(3);
    if (!transposed) {
        d.cout = weight.dim(0);
        if (weight.dim(1) != d.cin)
            throw ShapeError("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                             " input channels, input has " + std::to_string(d.cin));
        d.kh = weight.dim(2);
        d.kw = weight.dim(3);
        d.hout = (d.h + 2 * pad - d.kh) / stride + 1;
        d.wout = (d.w + 2 * pad - d.kw) / stride + 1;
        if (d.h + 2 * pad < d.kh || d.w + 2 * pad < d.kw)
            throw ShapeError("conv2d: kernel larger than padded input");
    } else {
        if (weight.dim(0) != d.cin)
            throw ShapeError("conv_transpose2d: weight expects " + std::to_string(weight.dim(0)) +
                             " input channels, input has " + std::to_string(d.cin));
        d.cout = weight.dim(1);
        d.kh = weight.dim(2);
        d.kw = weight.dim(3);
        if (out_pad < 0 || out_pad >= stride)
            throw ShapeError("conv_transpose2d: out_pad must be in [0, stride)");
        d.hout = (d.h - 1) * stride - 2 * pad + d.kh + out_pad;
        d.wout = (d.w - 1) * stride - 2 * pad + d.kw + out_pad;
        if (d.hout <= 0 || d.wout <= 0) throw ShapeError("conv_transpose2d: empty output");
    }
    if (bias.dim(0) != d.cout) throw ShapeError("conv bias length must equal Cout");
    return d;
}

}  // namespace

// ---- conv2d -------------------------------------------------------------

Tensor conv2d(Graph& g, const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int pad) {
    const ConvDims d = conv_dims(input, weight, bias, stride, pad, false, 0);
    Tensor out = Tensor::zeros({d.n, d.cout, d.hout, d.wout});

    const float* x = input.data().data();
    const float* w = weight.data().data();
    const float* b = bias.data().data();
    float* y = out.data().data();

    const int64_t x_cs = int64_t(d.h) * d.w;       // input channel stride
    const int64_t w_cs = int64_t(d.kh) * d.kw;     // weight per-channel block
    const int64_t w_os = w_cs * d.cin;             // weight per-filter block
    for (int n = 0; n < d.n; ++n) {
        const float* xn = x + int64_t(n) * d.cin * x_cs;
        for (int co = 0; co < d.cout; ++co) {
            const float* wf = w + int64_t(co) * w_os;
            for (int oh = 0; oh < d.hout; ++oh) {
                for (int ow = 0; ow < d.wout; ++ow) {
                    double acc = b[co];
                    for (int ci = 0; ci < d.cin; ++ci) {
                        const float* xc = xn + ci * x_cs;
                        const float* wc = wf + ci * w_cs;
                        for (int kh = 0; kh < d.kh; ++kh) {
                            const int ih = oh * stride - pad + kh;
                            if (ih < 0 || ih >= d.h) continue;
                            const float* xr = xc + int64_t(ih) * d.w;
                            const float* wr = wc + int64_t(kh) * d.kw;
                            for (int kw = 0; kw < d.kw; ++kw) {
                                const int iw = ow * stride - pad + kw;
                                if (iw < 0 || iw >= d.w) continue;
                                acc += double(xr[iw]) * double(wr[kw]);
                            }
                        }
                    }
                    *y++ = float(acc);
                }
            }
        }
    }
    out.check_finite("conv2d");

    if (track(g, {&input, &weight, &bias})) {
        out.set_requires_grad(true);
        Tensor in_c = input, w_c = weight, b_c = bias, out_c = out;
        const int s = stride, p = pad;
        g.record([in_c, w_c, b_c, out_c, d, s, p]() mutable {
            auto go = out_c.grad();
            std::vector<double> gx(size_t(in_c.numel()), 0.0);
            std::vector<double> gw(size_t(w_c.numel()), 0.0);
            std::vector<double> gb(size_t(b_c.numel()), 0.0);
            const float* x = in_c.data().data();
            const float* w = w_c.data().data();
            const int64_t x_cs = int64_t(d.h) * d.w;
            const int64_t w_cs = int64_t(d.kh) * d.kw;
            const int64_t w_os = w_cs * d.cin;
            int64_t oi = 0;
            for (int n = 0; n < d.n; ++n) {
                for (int co = 0; co < d.cout; ++co) {
                    for (int oh = 0; oh < d.hout; ++oh) {
                        for (int ow = 0; ow < d.wout; ++ow, ++oi) {
                            const double gy = go[size_t(oi)];
                            if (gy == 0.0) continue;
                            gb[size_t(co)] += gy;
                            for (int ci = 0; ci < d.cin; ++ci) {
                                for (int kh = 0; kh < d.kh; ++kh) {
                                    const int ih = oh * s - p + kh;
                                    if (ih < 0 || ih >= d.h) continue;
                                    for (int kw = 0; kw < d.kw; ++kw) {
                                        const int iw = ow * s - p + kw;
                                        if (iw < 0 || iw >= d.w) continue;
                                        const int64_t xi =
                                            (int64_t(n) * d.cin + ci) * x_cs + int64_t(ih) * d.w + iw;
                                        const int64_t wi =
                                            int64_t(co) * w_os + ci * w_cs + int64_t(kh) * d.kw + kw;
                                        gx[size_t(xi)] += double(w[wi]) * gy;
                                        gw[size_t(wi)] += double(x[xi]) * gy;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if (in_c.requires_grad()) add_into_grad(in_c, gx);
            if (w_c.requires_grad()) add_into_grad(w_c, gw);
            if (b_c.requires_grad()) add_into_grad(b_c, gb);
        });
    }
    return out;
}

// ---- conv_transpose2d -----------------------------------------------------

Tensor conv_transpose2d(Graph& g, const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int pad, int out_pad) {
    const ConvDims d = conv_dims(input, weight, bias, stride, pad, true, out_pad);
    Tensor out = Tensor::zeros({d.n, d.cout, d.hout, d.wout});

    const float* x = input.data().data();
    const float* w = weight.data().data();
    const float* b = bias.data().data();

    const int64_t y_cs = int64_t(d.hout) * d.wout;
    const int64_t x_cs = int64_t(d.h) * d.w;
    const int64_t w_cs = int64_t(d.kh) * d.kw;      // per (ci,co) block
    const int64_t w_is = w_cs * d.cout;             // per input-channel block
    std::vector<double> acc(size_t(out.numel()), 0.0);
    for (int n = 0; n < d.n; ++n) {
        double* yn = acc.data() + int64_t(n) * d.cout * y_cs;
        for (int co = 0; co < d.cout; ++co) {
            double* yc = yn + co * y_cs;
            for (int64_t i = 0; i < y_cs; ++i) yc[i] = b[co];
        }
        for (int ci = 0; ci < d.cin; ++ci) {
            const float* xc = x + (int64_t(n) * d.cin + ci) * x_cs;
            for (int co = 0; co < d.cout; ++co) {
                const float* wc = w + int64_t(ci) * w_is + int64_t(co) * w_cs;
                double* yc = yn + co * y_cs;
                for (int h = 0; h < d.h; ++h) {
                    for (int wx = 0; wx < d.w; ++wx) {
                        const double xv = xc[int64_t(h) * d.w + wx];
                        if (xv == 0.0) continue;
                        for (int kh = 0; kh < d.kh; ++kh) {
                            const int oh = h * stride - pad + kh;
                            if (oh < 0 || oh >= d.hout) continue;
                            double* yr = yc + int64_t(oh) * d.wout;
                            const float* wr = wc + int64_t(kh) * d.kw;
                            for (int kw = 0; kw < d.kw; ++kw) {
                                const int ow = wx * stride - pad + kw;
                                if (ow < 0 || ow >= d.wout) continue;
                                yr[ow] += xv * double(wr[kw]);
                            }
                        }
                    }
                }
            }
        }
    }
    {
        auto y = out.data();
        for (size_t i = 0; i < acc.size(); ++i) y[i] = float(acc[i]);
    }
    out.check_finite("conv_transpose2d");

    if (track(g, {&input, &weight, &bias})) {
        out.set_requires_grad(true);
        Tensor in_c = input, w_c = weight, b_c = bias, out_c = out;
        const int s = stride, p = pad;
        g.record([in_c, w_c, b_c, out_c, d, s, p]() mutable {
            auto go = out_c.grad();
            std::vector<double> gx(size_t(in_c.numel()), 0.0);
            std::vector<double> gw(size_t(w_c.numel()), 0.0);
            std::vector<double> gb(size_t(b_c.numel()), 0.0);
            const float* x = in_c.data().data();
            const float* w = w_c.data().data();
            const int64_t y_cs = int64_t(d.hout) * d.wout;
            const int64_t x_cs = int64_t(d.h) * d.w;
            const int64_t w_cs = int64_t(d.kh) * d.kw;
            const int64_t w_is = w_cs * d.cout;
            for (int n = 0; n < d.n; ++n) {
                for (int co = 0; co < d.cout; ++co) {
                    const float* gyc = go.data() + (int64_t(n) * d.cout + co) * y_cs;
                    for (int64_t i = 0; i < y_cs; ++i) gb[size_t(co)] += double(gyc[i]);
                }
                for (int ci = 0; ci < d.cin; ++ci) {
                    const int64_t xoff = (int64_t(n) * d.cin + ci) * x_cs;
                    for (int co = 0; co < d.cout; ++co) {
                        const float* gyc = go.data() + (int64_t(n) * d.cout + co) * y_cs;
                        const int64_t woff = int64_t(ci) * w_is + int64_t(co) * w_cs;
                        for (int h = 0; h < d.h; ++h) {
                            for (int wx = 0; wx < d.w; ++wx) {
                                const double xv = x[xoff + int64_t(h) * d.w + wx];
                                double gxa = 0.0;
                                for (int kh = 0; kh < d.kh; ++kh) {
                                    const int oh = h * s - p + kh;
                                    if (oh < 0 || oh >= d.hout) continue;
                                    for (int kw = 0; kw < d.kw; ++kw) {
                                        const int ow = wx * s - p + kw;
                                        if (ow < 0 || ow >= d.wout) continue;
                                        const double gy = gyc[int64_t(oh) * d.wout + ow];
                                        const int64_t wi = woff + int64_t(kh) * d.kw + kw;
                                        gxa += double(w[wi]) * gy;
                                        gw[size_t(wi)] += xv * gy;
                                    }
                                }
                                gx[size_t(xoff + int64_t(h) * d.w + wx)] += gxa;
                            }
                        }
                    }
                }
            }
            if (in_c.requires_grad()) add_into_grad(in_c, gx);
            if (w_c.requires_grad()) add_into_grad(w_c, gw);
            if (b_c.requires_grad()) add_into_grad(b_c, gb);
        });
    }
    return out;
}

// ---- elementwise ----------------------------------------------------------

Tensor leaky_relu(Graph& g, const Tensor& x, float slope) {
    if (slope < 0.0f || slope >= 1.0f) throw ContractError("leaky_relu slope must be in [0,1)");
    Tensor out = Tensor::zeros(x.shape());
    auto xi = x.data();
    auto yo = out.data();
    for (size_t i = 0; i < xi.size(); ++i) yo[i] = xi[i] >= 0.0f ? xi[i] : slope * xi[i];
    out.check_finite("leaky_relu");
    if (track(g, {&x})) {
        out.set_requires_grad(true);
        Tensor x_c = x, out_c = out;
        g.record([x_c, out_c, slope]() mutable {
            auto go = out_c.grad();
            auto gx = x_c.grad();
            auto xv = x_c.data();
            for (size_t i = 0; i < gx.size(); ++i) gx[i] += xv[i] >= 0.0f ? go[i] : slope * go[i];
        });
    }
    return out;
}

Tensor sigmoid(Graph& g, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    auto xi = x.data();
    auto yo = out.data();
    for (size_t i = 0; i < xi.size(); ++i) yo[i] = float(1.0 / (1.0 + std::exp(-double(xi[i]))));
    out.check_finite("sigmoid");
    if (track(g, {&x})) {
        out.set_requires_grad(true);
        Tensor x_c = x, out_c = out;
        g.record([x_c, out_c]() mutable {
            auto go = out_c.grad();
            auto gx = x_c.grad();
            auto y = out_c.data();
            for (size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * y[i] * (1.0f - y[i]);
        });
    }
    return out;
}

Tensor add(Graph& g, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
    Tensor out = Tensor::zeros(a.shape());
    auto av = a.data(), bv = b.data();
    auto yo = out.data();
    for (size_t i = 0; i < av.size(); ++i) yo[i] = av[i] + bv[i];
    out.check_finite("add");
    if (track(g, {&a, &b})) {
        out.set_requires_grad(true);
        Tensor a_c = a, b_c = b, out_c = out;
        g.record([a_c, b_c, out_c]() mutable {
            auto go = out_c.grad();
            if (a_c.requires_grad()) {
                auto ga = a_c.grad();
                for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (b_c.requires_grad()) {
                auto gb = b_c.grad();
                for (size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
            }
        });
    }
    return out;
}

Tensor mul(Graph& g, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("mul: shape mismatch");
    Tensor out = Tensor::zeros(a.shape());
    auto av = a.data(), bv = b.data();
    auto yo = out.data();
    for (size_t i = 0; i < av.size(); ++i) yo[i] = av[i] * bv[i];
    out.check_finite("mul");
    if (track(g, {&a, &b})) {
        out.set_requires_grad(true);
        Tensor a_c = a, b_c = b, out_c = out;
        g.record([a_c, b_c, out_c]() mutable {
            auto go = out_c.grad();
            if (a_c.requires_grad()) {
                auto ga = a_c.grad();
                auto bv2 = b_c.data();
                for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv2[i];
            }
            if (b_c.requires_grad()) {
                auto gb = b_c.grad();
                auto av2 = a_c.data();
                for (size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av2[i];
            }
        });
    }
    return out;
}

Tensor mul_scalar(Graph& g, const Tensor& a, float s) {
    Tensor out = Tensor::zeros(a.shape());
    auto av = a.data();
    auto yo = out.data();
    for (size_t i = 0; i < av.size(); ++i) yo[i] = av[i] * s;
    out.check_finite("mul_scalar");
    if (track(g, {&a})) {
        out.set_requires_grad(true);
        Tensor a_c = a, out_c = out;
        g.record([a_c, out_c, s]() mutable {
            auto go = out_c.grad();
            auto ga = a_c.grad();
            for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * s;
        });
    }
    return out;
}

Tensor sum(Graph& g, const Tensor& x) {
    double acc = 0.0;
    for (float v : x.data()) acc += v;
    Tensor out = Tensor::scalar(float(acc));
    out.check_finite("sum");
    if (track(g, {&x})) {
        out.set_requires_grad(true);
        Tensor x_c = x, out_c = out;
        g.record([x_c, out_c]() mutable {
            const float go = out_c.grad()[0];
            auto gx = x_c.grad();
            for (size_t i = 0; i < gx.size(); ++i) gx[i] += go;
        });
    }
    return out;
}

Tensor huber_loss(Graph& g, const Tensor& pred, const Tensor& target, float beta) {
    if (!pred.same_shape(target)) throw ShapeError("huber_loss: shape mismatch");
    if (!(beta > 0.0f)) throw ContractError("huber_loss beta must be positive");
    auto p = pred.data();
    auto t = target.data();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = double(p[i]) - double(t[i]);
        const double a = std::abs(d);
        acc += a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
    }
    Tensor out = Tensor::scalar(float(acc / double(p.size())));
    out.check_finite("huber_loss");
    if (track(g, {&pred, &target})) {
        out.set_requires_grad(true);
        Tensor p_c = pred, t_c = target, out_c = out;
        g.record([p_c, t_c, out_c, beta]() mutable {
            const float go = out_c.grad()[0];
            auto pv = p_c.data();
            auto tv = t_c.data();
            const float inv_n = 1.0f / float(pv.size());
            auto push = [&](Tensor& dst, float sgn) {
                auto gd = dst.grad();
                for (size_t i = 0; i < pv.size(); ++i) {
                    const float d = pv[i] - tv[i];
                    const float gi = std::abs(d) < beta ? d / beta : (d > 0 ? 1.0f : -1.0f);
                    gd[i] += sgn * go * gi * inv_n;
                }
            };
            if (p_c.requires_grad()) push(p_c, 1.0f);
            if (t_c.requires_grad()) push(t_c, -1.0f);
        });
    }
    return out;
}

// ---- quantizer -------------------------------------------------------------

namespace {

// Bin index in [0, levels) for z clamped to [0,1]; boundaries round up.
inline int bin_index(float z, int levels) {
    float c = std::min(std::max(z, 0.0f), 1.0f);
    int k = int(std::floor(double(c) * levels));
    return std::min(k, levels - 1);
}

inline float bin_center(int k, int levels) { return (float(k) + 0.5f) / float(levels); }

}  // namespace

Tensor quantize_ste(Graph& g, const Tensor& z, int levels) {
    if (levels < 2) throw ContractError("quantize_ste requires levels >= 2");
    Tensor out = Tensor::zeros(z.shape());
    auto zi = z.data();
    auto yo = out.data();
    for (size_t i = 0; i < zi.size(); ++i) yo[i] = bin_center(bin_index(zi[i], levels), levels);
    if (track(g, {&z})) {
        out.set_requires_grad(true);
        Tensor z_c = z, out_c = out;
        g.record([z_c, out_c]() mutable {
            auto go = out_c.grad();
            auto gz = z_c.grad();
            auto zv = z_c.data();
            for (size_t i = 0; i < gz.size(); ++i)
                if (zv[i] >= 0.0f && zv[i] <= 1.0f) gz[i] += go[i];
        });
    }
    return out;
}

std::vector<int32_t> quantize_symbols(const Tensor& z, int levels) {
    if (levels < 2) throw ContractError("quantize_symbols requires levels >= 2");
    std::vector<int32_t> sym(size_t(z.numel()));
    auto zi = z.data();
    for (size_t i = 0; i < sym.size(); ++i) sym[i] = bin_index(zi[i], levels);
    return sym;
}

Tensor dequantize_symbols(const std::vector<int32_t>& symbols, const std::vector<int>& shape,
                          int levels) {
    Tensor out = Tensor::zeros(shape);
    if (out.numel() != int64_t(symbols.size()))
        throw ShapeError("dequantize_symbols: symbol count does not match shape");
    auto yo = out.data();
    for (size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i] < 0 || symbols[i] >= levels)
            throw ContractError("symbol " + std::to_string(symbols[i]) + " out of range [0," +
                                std::to_string(levels) + ")");
        yo[i] = bin_center(symbols[i], levels);
    }
    return out;
}

// ---- entropy surrogate ------------------------------------------------------

// Soft counts: n_ck = sum_i max(0, 1 - |z_i - center_k| / delta), delta = 1/levels;
// H_c = -sum_k p_ck log2 p_ck, result = sum_c (count_c / total) * H_c.
// dH/dn_k = -(log2 p_k + H) / N; kernel derivative is +-1/delta inside its support.
Tensor soft_entropy(Graph& g, const Tensor& z, int levels) {
    if (z.rank() != 4) throw ShapeError("soft_entropy expects a rank-4 NCHW latent");
    if (levels < 2) throw ContractError("soft_entropy requires levels >= 2");
    const int N = z.dim(0), C = z.dim(1);
    const int64_t hw = int64_t(z.dim(2)) * z.dim(3);
    const double delta = 1.0 / double(levels);
    const double inv_delta = double(levels);

    auto zv = z.data();
    auto at = [&](int n, int c, int64_t i) -> float {
        return zv[size_t((int64_t(n) * C + c) * hw + i)];
    };

    // counts[c][k]
    std::vector<std::vector<double>> counts(size_t(C), std::vector<double>(size_t(levels), 0.0));
    for (int c = 0; c < C; ++c) {
        auto& cc = counts[size_t(c)];
        for (int n = 0; n < N; ++n)
            for (int64_t i = 0; i < hw; ++i) {
                const double x = at(n, c, i);
                // triangular kernel touches at most the two bins around x
                const int k0 = std::max(0, std::min(levels - 1, int(std::floor(x * inv_delta - 0.5))));
                for (int k = k0; k <= std::min(levels - 1, k0 + 1); ++k) {
                    const double dist = std::abs(x - (double(k) + 0.5) * delta);
                    if (dist < delta) cc[size_t(k)] += 1.0 - dist * inv_delta;
                }
            }
    }

    // All channels carry per_chan samples each, so the count-weighted average
    // of per-channel entropies is the plain mean.
    double total_entropy = 0.0;
    std::vector<double> chan_N(size_t(C), 0.0), chan_H(size_t(C), 0.0);
    for (int c = 0; c < C; ++c) {
        double Nc = 0.0;
        for (double v : counts[size_t(c)]) Nc += v;
        chan_N[size_t(c)] = Nc;
        double H = 0.0;
        if (Nc > 0.0)
            for (double v : counts[size_t(c)])
                if (v > 0.0) {
                    const double p = v / Nc;
                    H -= p * std::log2(p);
                }
        chan_H[size_t(c)] = H;
        total_entropy += H;
    }
    total_entropy /= double(C);

    Tensor out = Tensor::scalar(float(total_entropy));
    out.check_finite("soft_entropy");

    if (track(g, {&z})) {
        out.set_requires_grad(true);
        Tensor z_c = z, out_c = out;
        g.record([z_c, out_c, counts, chan_N, chan_H, levels, delta, inv_delta, N, C, hw]() mutable {
            const double go = out_c.grad()[0];
            auto gz = z_c.grad();
            auto zvv = z_c.data();
            const double chan_weight = 1.0 / double(C);  // equal per-channel count
            for (int c = 0; c < C; ++c) {
                const auto& cc = counts[size_t(c)];
                const double Nc = chan_N[size_t(c)];
                if (Nc <= 0.0) continue;
                const double Hc = chan_H[size_t(c)];
                for (int n = 0; n < N; ++n)
                    for (int64_t i = 0; i < hw; ++i) {
                        const size_t zi = size_t((int64_t(n) * C + c) * hw + i);
                        const double x = zvv[zi];
                        const int k0 =
                            std::max(0, std::min(levels - 1, int(std::floor(x * inv_delta - 0.5))));
                        double gacc = 0.0;
                        for (int k = k0; k <= std::min(levels - 1, k0 + 1); ++k) {
                            const double ctr = (double(k) + 0.5) * delta;
                            const double dist = std::abs(x - ctr);
                            if (dist >= delta || cc[size_t(k)] <= 0.0) continue;
                            const double p = cc[size_t(k)] / Nc;
                            const double dH_dn = -(std::log2(p) + Hc) / Nc;
                            const double dn_dx = (x > ctr ? -1.0 : (x < ctr ? 1.0 : 0.0)) * inv_delta;
                            gacc += dH_dn * dn_dx;
                        }
                        gz[zi] += float(go * chan_weight * gacc);
                    }
            }
        });
    }
    return out;
}

}  // namespace scae
