#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scae/error.hpp"

namespace scae {

// Dense n-dimensional f32 array, row-major. A Tensor is a cheap handle to a
// shared buffer: copies alias, which is what parameter updates and the
// autodiff tape rely on. Values are treated as immutable once an op has
// produced them; only grad buffers mutate during backward.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, float value, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<float> data,
                            bool requires_grad = false);
    static Tensor scalar(float value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<int>& shape() const;
    int dim(int i) const { return shape()[size_t(i)]; }
    int rank() const { return int(shape().size()); }
    int64_t numel() const;
    bool requires_grad() const;
    void set_requires_grad(bool value);

    std::span<float> data();
    std::span<const float> data() const;
    float item() const;  // value of a one-element tensor

    // Lazily allocated, zero-initialized gradient buffer.
    std::span<float> grad();
    std::span<const float> grad() const;
    bool has_grad() const;
    void zero_grad();

    // Deep copy of values (no grad, no graph history).
    Tensor clone() const;
    // Overwrite values from another tensor of identical shape.
    void copy_(const Tensor& src);

    bool same_shape(const Tensor& other) const;
    // Throws NumericError naming `who` if any value is NaN/Inf.
    void check_finite(const char* who) const;

    // Identity of the underlying buffer, for keying optimizer state.
    const void* id() const;

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    friend class Graph;
};

// Reverse-mode tape. Ops executed under a recording graph append one node
// each; backward() replays the nodes in exact reverse order. The tape is
// confined to a single thread.
class Graph {
  public:
    explicit Graph(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }
    size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss)=1 and accumulates gradients into every
    // requires_grad tensor reachable from the tape. loss must be scalar.
    void backward(const Tensor& loss);

    // Drops all recorded nodes; required between backward calls.
    void clear();

    // Internal: ops append their backward closure here.
    void record(std::function<void()> backward_fn);

  private:
    std::vector<std::function<void()>> nodes_;
    bool recording_ = true;
    bool consumed_ = false;
};

// ---- ops -------------------------------------------------------------
//
// Every op validates shapes, checks its output for NaN/Inf, and (when the
// graph records and an input requires grad) registers the matching
// backward closure. Convolution reductions accumulate in f64.

// input NCHW, weight [Cout,Cin,Kh,Kw], bias [Cout].
Tensor conv2d(Graph& g, const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int pad);

// input NCHW, weight [Cin,Cout,Kh,Kw], bias [Cout]. Forward is the adjoint of
// conv2d's forward; out extent = (H-1)*stride - 2*pad + Kh + out_pad.
Tensor conv_transpose2d(Graph& g, const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int pad, int out_pad = 0);

Tensor leaky_relu(Graph& g, const Tensor& x, float slope);
Tensor sigmoid(Graph& g, const Tensor& x);
Tensor add(Graph& g, const Tensor& a, const Tensor& b);
Tensor mul(Graph& g, const Tensor& a, const Tensor& b);
Tensor mul_scalar(Graph& g, const Tensor& a, float s);
Tensor sum(Graph& g, const Tensor& x);

// Mean over elements of: 0.5*d^2/beta if |d|<beta else |d|-0.5*beta.
Tensor huber_loss(Graph& g, const Tensor& pred, const Tensor& target, float beta);

// Clamp to [0,1], snap to the nearest of `levels` uniform bin centers
// (ties round up). Backward is straight-through inside [0,1], zero outside.
Tensor quantize_ste(Graph& g, const Tensor& z, int levels);

// Hard symbol index for each element of z (same mapping as quantize_ste).
std::vector<int32_t> quantize_symbols(const Tensor& z, int levels);
// Bin center for each symbol.
Tensor dequantize_symbols(const std::vector<int32_t>& symbols, const std::vector<int>& shape,
                          int levels);

// Differentiable entropy surrogate in bits/symbol for a rank-4 NCHW latent:
// per-channel soft histograms (triangular kernel, width one bin) against the
// quantizer's bin centers, per-channel entropies averaged weighted by count.
Tensor soft_entropy(Graph& g, const Tensor& z, int levels);

}  // namespace scae
