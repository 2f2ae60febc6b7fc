#pragma once

#include <string>
#include <vector>

#include "scae/checkpoint.hpp"
#include "scae/metrics.hpp"
#include "scae/tensor.hpp"

namespace scae {

struct ConvSpec {
    int out_channels;
    int kernel;  // odd
    int stride;
};

enum class Scope { Encoder, Decoder, All };

struct CaeConfig {
    int patch_size = 32;
    // Final entry's out_channels is the latent channel count.
    std::vector<ConvSpec> encoder = {{32, 5, 2}, {64, 3, 2}, {32, 3, 2}};
    int latent_channels = 32;
    int quant_bits = 4;
    double lambda_entropy = 3e-5;
    double huber_beta = 1.0;

    int levels() const { return 1 << quant_bits; }
    int stride_product() const;
    int latent_extent() const { return patch_size / stride_product(); }

    // Enforces: positive extents, odd kernels, stride product divides
    // patch_size, latent_channels matches the last encoder layer,
    // quant_bits >= 1.
    void validate() const;
};

struct LatentCode {
    std::vector<int32_t> symbols;
    std::vector<int> shape;  // (N, latent_channels, h, w)
    int quant_bits = 0;
};

// Convolutional autoencoder: encoder conv stack with leaky-relu(0.01)
// between layers and a sigmoid on the latent, mirrored transposed-conv
// decoder with a sigmoid output. Weight init is a pure function of
// (config, seed).
class CaeModel {
  public:
    CaeModel(CaeConfig config, uint64_t seed);

    const CaeConfig& config() const { return config_; }

    // All trainable tensors, in layer order: "<layer>.weight", "<layer>.bias".
    std::vector<NamedTensor>& parameters() { return params_; }
    const std::vector<NamedTensor>& parameters() const { return params_; }

    // Conv weight tensors (biases excluded) for the given scope.
    std::vector<NamedTensor> scoped_weights(Scope scope) const;

    struct ForwardParts {
        Tensor z;     // post-sigmoid latent, pre-quantization
        Tensor zq;    // straight-through quantized latent
        Tensor xhat;  // reconstruction
    };
    ForwardParts forward(Graph& g, const Tensor& x) const;

    // lambda * soft_entropy(z) + huber(xhat, x); lambda < 0 uses the config value.
    Tensor total_loss(Graph& g, const Tensor& x, double lambda = -1.0,
                      ForwardParts* parts = nullptr) const;

    // Inference paths (no autodiff).
    LatentCode encode(const Tensor& x) const;
    Tensor decode(const LatentCode& code) const;

    std::vector<NamedTensor> state() const { return params_; }
    void load_state(const std::vector<NamedTensor>& state);

    // Deep copy of all parameter values.
    std::vector<NamedTensor> snapshot() const;
    void restore(const std::vector<NamedTensor>& snap);

    // Geometry of every layer at the configured patch size, encoder first.
    std::vector<LayerGeom> layer_geometry(Scope scope = Scope::All) const;
    // Live input channel count feeding the first layer of the scope.
    int scope_live_inputs(Scope scope) const;

  private:
    struct Layer {
        std::string name;
        bool transposed;
        int in_ch, out_ch, kernel, stride, pad, out_pad;
        Tensor weight, bias;
    };
    Tensor run_encoder(Graph& g, const Tensor& x) const;
    Tensor run_decoder(Graph& g, const Tensor& zq) const;

    CaeConfig config_;
    std::vector<Layer> encoder_;
    std::vector<Layer> decoder_;
    std::vector<NamedTensor> params_;
};

// Empirical entropy of a latent code in bits/symbol: per-channel histograms,
// per-channel entropies averaged weighted by symbol count.
double entropy_estimate(const LatentCode& code);

}  // namespace scae
