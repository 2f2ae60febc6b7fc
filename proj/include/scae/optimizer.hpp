#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scae/checkpoint.hpp"
#include "scae/tensor.hpp"

namespace scae {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by parameter buffer
// identity; the step counter is shared across parameters.
class Adam {
  public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    // One update over all parameters using their current grad buffers.
    // Throws NumericError naming the tensor on a non-finite gradient.
    void step(std::vector<NamedTensor>& params);

    void reset();
    int64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    struct Moments {
        std::vector<float> m, v;
    };
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::unordered_map<const void*, Moments> state_;
};

// Binary mask, 1 exactly where the weight is nonzero.
Tensor mask_from_weights(const Tensor& w);

// grad <- grad (*) mask, in place on the weight's grad buffer.
void masked_grad(Tensor& w, const Tensor& mask);

// w <- w (*) mask; masked positions become literal 0.0f.
void apply_mask(Tensor& w, const Tensor& mask);

}  // namespace scae
