#include "scae/cae.hpp"

#include <algorithm>
#include <cmath>

#include "scae/prng.hpp"

namespace scae {

int CaeConfig::stride_product() const {
    int p = 1;
    for (const auto& l : encoder) p *= l.stride;
    return p;
}

void CaeConfig::validate() const {
    if (patch_size < 1) throw ConfigError("patch_size must be positive");
    if (encoder.empty()) throw ConfigError("encoder spec is empty");
    for (const auto& l : encoder) {
        if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1)
            throw ConfigError("encoder layer extents must be positive");
        if (l.kernel % 2 == 0) throw ConfigError("encoder kernels must be odd");
    }
    if (patch_size % stride_product() != 0)
        throw ConfigError("product of encoder strides must divide patch_size");
    if (latent_channels != encoder.back().out_channels)
        throw ConfigError("latent_channels must equal the last encoder layer's out_channels");
    if (quant_bits < 1 || quant_bits > 16) throw ConfigError("quant_bits must be in [1,16]");
    if (lambda_entropy < 0.0) throw ConfigError("lambda must be >= 0");
    if (huber_beta <= 0.0) throw ConfigError("huber_beta must be positive");
}

CaeModel::CaeModel(CaeConfig config, uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    SplitMix64 rng(mix_seed(seed, 0x5cae));

    auto make_layer = [&](const std::string& name, bool transposed, int in_ch, int out_ch,
                          int kernel, int stride, bool hidden) {
        Layer l;
        l.name = name;
        l.transposed = transposed;
        l.in_ch = in_ch;
        l.out_ch = out_ch;
        l.kernel = kernel;
        l.stride = stride;
        l.pad = kernel / 2;
        l.out_pad = transposed ? stride - 1 : 0;
        const std::vector<int> wshape = transposed ? std::vector<int>{in_ch, out_ch, kernel, kernel}
                                                   : std::vector<int>{out_ch, in_ch, kernel, kernel};
        // He-uniform on the leaky-relu layers, the conservative 1/sqrt(fan)
        // on the sigmoid-facing ones
        const double fan_in = double(in_ch) * kernel * kernel;
        const double bound = hidden ? std::sqrt(6.0 / fan_in) : 1.0 / std::sqrt(fan_in);
        std::vector<float> wdata(size_t(in_ch) * out_ch * kernel * kernel);
        for (auto& v : wdata) v = float(rng.uniform(-bound, bound));
        l.weight = Tensor::from_data(wshape, std::move(wdata), /*requires_grad=*/true);
        l.bias = Tensor::zeros({out_ch}, /*requires_grad=*/true);
        return l;
    };

    int in_ch = 3;
    for (size_t i = 0; i < config_.encoder.size(); ++i) {
        const auto& spec = config_.encoder[i];
        encoder_.push_back(make_layer("enc" + std::to_string(i + 1), false, in_ch,
                                      spec.out_channels, spec.kernel, spec.stride,
                                      i + 1 < config_.encoder.size()));
        in_ch = spec.out_channels;
    }
    for (size_t i = 0; i < config_.encoder.size(); ++i) {
        const size_t src = config_.encoder.size() - 1 - i;
        const auto& spec = config_.encoder[src];
        const int out_ch = src == 0 ? 3 : config_.encoder[src - 1].out_channels;
        decoder_.push_back(make_layer("dec" + std::to_string(i + 1), true, spec.out_channels,
                                      out_ch, spec.kernel, spec.stride,
                                      i + 1 < config_.encoder.size()));
    }
    for (auto* stack : {&encoder_, &decoder_})
        for (auto& l : *stack) {
            params_.emplace_back(l.name + ".weight", l.weight);
            params_.emplace_back(l.name + ".bias", l.bias);
        }
}

std::vector<NamedTensor> CaeModel::scoped_weights(Scope scope) const {
    std::vector<NamedTensor> out;
    if (scope == Scope::Encoder || scope == Scope::All)
        for (const auto& l : encoder_) out.emplace_back(l.name + ".weight", l.weight);
    if (scope == Scope::Decoder || scope == Scope::All)
        for (const auto& l : decoder_) out.emplace_back(l.name + ".weight", l.weight);
    return out;
}

Tensor CaeModel::run_encoder(Graph& g, const Tensor& x) const {
    Tensor h = x;
    for (size_t i = 0; i < encoder_.size(); ++i) {
        const auto& l = encoder_[i];
        h = conv2d(g, h, l.weight, l.bias, l.stride, l.pad);
        if (i + 1 < encoder_.size()) h = leaky_relu(g, h, 0.01f);
    }
    return sigmoid(g, h);
}

Tensor CaeModel::run_decoder(Graph& g, const Tensor& zq) const {
    Tensor h = zq;
    for (size_t i = 0; i < decoder_.size(); ++i) {
        const auto& l = decoder_[i];
        h = conv_transpose2d(g, h, l.weight, l.bias, l.stride, l.pad, l.out_pad);
        if (i + 1 < decoder_.size()) h = leaky_relu(g, h, 0.01f);
    }
    return sigmoid(g, h);
}

CaeModel::ForwardParts CaeModel::forward(Graph& g, const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != config_.patch_size ||
        x.dim(3) != config_.patch_size)
        throw ShapeError("forward expects (N,3," + std::to_string(config_.patch_size) + "," +
                         std::to_string(config_.patch_size) + ")");
    ForwardParts parts;
    parts.z = run_encoder(g, x);
    parts.zq = quantize_ste(g, parts.z, config_.levels());
    parts.xhat = run_decoder(g, parts.zq);
    return parts;
}

Tensor CaeModel::total_loss(Graph& g, const Tensor& x, double lambda, ForwardParts* out) const {
    if (lambda < 0.0) lambda = config_.lambda_entropy;
    ForwardParts parts = forward(g, x);
    Tensor distortion = huber_loss(g, parts.xhat, x, float(config_.huber_beta));
    Tensor loss = lambda == 0.0
                      ? distortion
                      : add(g, mul_scalar(g, soft_entropy(g, parts.z, config_.levels()),
                                          float(lambda)),
                            distortion);
    if (out) *out = std::move(parts);
    return loss;
}

LatentCode CaeModel::encode(const Tensor& x) const {
    for (float v : x.data())
        if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("encode: input values outside [0,1]");
    Graph g(false);
    if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != config_.patch_size ||
        x.dim(3) != config_.patch_size)
        throw ShapeError("encode expects (N,3," + std::to_string(config_.patch_size) + "," +
                         std::to_string(config_.patch_size) + ")");
    Tensor z = run_encoder(g, x);
    LatentCode code;
    code.symbols = quantize_symbols(z, config_.levels());
    code.shape = z.shape();
    code.quant_bits = config_.quant_bits;
    return code;
}

Tensor CaeModel::decode(const LatentCode& code) const {
    if (code.quant_bits != config_.quant_bits)
        throw ContractError("decode: code quant_bits does not match the model");
    Graph g(false);
    Tensor zq = dequantize_symbols(code.symbols, code.shape, config_.levels());
    Tensor xhat = run_decoder(g, zq);
    auto v = xhat.data();
    for (auto& x : v) x = std::clamp(x, 0.0f, 1.0f);
    return xhat;
}

void CaeModel::load_state(const std::vector<NamedTensor>& state) {
    for (auto& [name, tensor] : params_) {
        const Tensor& src = checkpoint_get(state, name);
        if (!tensor.same_shape(src))
            throw ShapeError("checkpoint tensor '" + name + "' has mismatched shape");
        tensor.copy_(src);
    }
}

std::vector<NamedTensor> CaeModel::snapshot() const {
    std::vector<NamedTensor> snap;
    for (const auto& [name, tensor] : params_) snap.emplace_back(name, tensor.clone());
    return snap;
}

void CaeModel::restore(const std::vector<NamedTensor>& snap) { load_state(snap); }

std::vector<LayerGeom> CaeModel::layer_geometry(Scope scope) const {
    std::vector<LayerGeom> geoms;
    int extent = config_.patch_size;
    std::vector<LayerGeom> enc, dec;
    for (const auto& l : encoder_) {
        LayerGeom g;
        g.name = l.name;
        g.transposed = false;
        g.cin = l.in_ch;
        g.cout = l.out_ch;
        g.kh = g.kw = l.kernel;
        g.h_in = g.w_in = extent;
        extent /= l.stride;
        g.h_out = g.w_out = extent;
        enc.push_back(g);
    }
    for (const auto& l : decoder_) {
        LayerGeom g;
        g.name = l.name;
        g.transposed = true;
        g.cin = l.in_ch;
        g.cout = l.out_ch;
        g.kh = g.kw = l.kernel;
        g.h_in = g.w_in = extent;
        extent *= l.stride;
        g.h_out = g.w_out = extent;
        dec.push_back(g);
    }
    if (scope == Scope::Encoder || scope == Scope::All)
        geoms.insert(geoms.end(), enc.begin(), enc.end());
    if (scope == Scope::Decoder || scope == Scope::All)
        geoms.insert(geoms.end(), dec.begin(), dec.end());
    return geoms;
}

int CaeModel::scope_live_inputs(Scope scope) const {
    return scope == Scope::Decoder ? config_.latent_channels : 3;
}

double entropy_estimate(const LatentCode& code) {
    if (code.symbols.empty()) throw ContractError("entropy_estimate: empty code");
    const int C = code.shape.at(1);
    const int64_t per_chan_spatial = int64_t(code.shape.at(2)) * code.shape.at(3);
    const int64_t n = int64_t(code.shape.at(0));
    const int levels = 1 << code.quant_bits;
    double total = 0.0;
    for (int c = 0; c < C; ++c) {
        std::vector<int64_t> counts(size_t(levels), 0);
        int64_t chan_count = 0;
        for (int64_t b = 0; b < n; ++b)
            for (int64_t i = 0; i < per_chan_spatial; ++i) {
                const int32_t s = code.symbols[size_t((b * C + c) * per_chan_spatial + i)];
                ++counts[size_t(s)];
                ++chan_count;
            }
        double h = 0.0;
        for (int64_t cnt : counts)
            if (cnt > 0) {
                const double p = double(cnt) / double(chan_count);
                h -= p * std::log2(p);
            }
        total += h;  // equal counts per channel: weighted mean == plain mean
    }
    return total / double(C);
}

}  // namespace scae
