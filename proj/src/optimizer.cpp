#include "scae/optimizer.hpp"

#include <cmath>

namespace scae {

void Adam::step(std::vector<NamedTensor>& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (auto& [name, p] : params) {
        auto g = p.grad();
        for (float gv : g)
            if (!std::isfinite(gv)) throw NumericError("non-finite gradient for tensor '" + name + "'");
        auto& mom = state_[p.id()];
        if (mom.m.empty()) {
            mom.m.assign(g.size(), 0.0f);
            mom.v.assign(g.size(), 0.0f);
        } else if (mom.m.size() != g.size()) {
            throw ShapeError("adam state shape mismatch for tensor '" + name + "'");
        }
        auto w = p.data();
        for (size_t i = 0; i < g.size(); ++i) {
            const double gi = g[i];
            const double m = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * gi;
            const double v = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * gi * gi;
            mom.m[i] = float(m);
            mom.v[i] = float(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            w[i] = float(double(w[i]) - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

void Adam::reset() {
    t_ = 0;
    state_.clear();
}

Tensor mask_from_weights(const Tensor& w) {
    Tensor mask = Tensor::zeros(w.shape());
    auto wv = w.data();
    auto mv = mask.data();
    for (size_t i = 0; i < wv.size(); ++i) mv[i] = wv[i] != 0.0f ? 1.0f : 0.0f;
    return mask;
}

void masked_grad(Tensor& w, const Tensor& mask) {
    if (!w.same_shape(mask)) throw ShapeError("masked_grad: mask shape mismatch");
    auto g = w.grad();
    auto mv = mask.data();
    for (size_t i = 0; i < g.size(); ++i)
        if (mv[i] == 0.0f) g[i] = 0.0f;
}

void apply_mask(Tensor& w, const Tensor& mask) {
    if (!w.same_shape(mask)) throw ShapeError("apply_mask: mask shape mismatch");
    auto wv = w.data();
    auto mv = mask.data();
    for (size_t i = 0; i < wv.size(); ++i)
        if (mv[i] == 0.0f) wv[i] = 0.0f;
}

}  // namespace scae
