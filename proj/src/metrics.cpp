#include "scae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scae {

double mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("mse: shape mismatch");
    auto av = a.data(), bv = b.data();
    double acc = 0.0;
    for (size_t i = 0; i < av.size(); ++i) {
        const double d = double(av[i]) - double(bv[i]);
        acc += d * d;
    }
    return acc / double(av.size());
}

double psnr(const Tensor& a, const Tensor& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

namespace {

// 11x11 Gaussian, sigma 1.5, normalized to sum 1.
constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_window() {
    static const std::vector<double> w = [] {
        std::vector<double> g(kWin * kWin);
        double sum = 0.0;
        for (int y = 0; y < kWin; ++y)
            for (int x = 0; x < kWin; ++x) {
                const double dy = y - (kWin - 1) / 2.0;
                const double dx = x - (kWin - 1) / 2.0;
                g[size_t(y * kWin + x)] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
                sum += g[size_t(y * kWin + x)];
            }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

}  // namespace

double mssim(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("mssim: shape mismatch");
    if (a.rank() != 3) throw ShapeError("mssim expects (C,H,W)");
    const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
    if (H < kWin || W < kWin) throw ShapeError("mssim: image smaller than the 11x11 window");
    const auto& win = gaussian_window();
    auto av = a.data(), bv = b.data();
    const size_t plane = size_t(H) * W;

    double total = 0.0;
    for (int c = 0; c < C; ++c) {
        const float* pa = av.data() + size_t(c) * plane;
        const float* pb = bv.data() + size_t(c) * plane;
        double chan = 0.0;
        int64_t windows = 0;
        for (int y0 = 0; y0 + kWin <= H; ++y0)
            for (int x0 = 0; x0 + kWin <= W; ++x0) {
                double ma = 0.0, mb = 0.0, va = 0.0, vb = 0.0, cov = 0.0;
                for (int y = 0; y < kWin; ++y)
                    for (int x = 0; x < kWin; ++x) {
                        const double w = win[size_t(y * kWin + x)];
                        const double xa = pa[size_t(y0 + y) * W + (x0 + x)];
                        const double xb = pb[size_t(y0 + y) * W + (x0 + x)];
                        ma += w * xa;
                        mb += w * xb;
                        va += w * xa * xa;
                        vb += w * xb * xb;
                        cov += w * xa * xb;
                    }
                va -= ma * ma;
                vb -= mb * mb;
                cov -= ma * mb;
                const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
                const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
                chan += num / den;
                ++windows;
            }
        total += chan / double(windows);
    }
    return total / double(C);
}

double relative_loss(double mse_ref, double mse_l) {
    if (!(mse_ref > 0.0) || !(mse_l > 0.0))
        throw ContractError("relative_loss requires positive MSE values");
    return 10.0 * (std::log10(mse_ref) - std::log10(mse_l));
}

int64_t maccs_dense(const LayerGeom& g) {
    const int64_t spatial = g.transposed ? int64_t(g.h_in) * g.w_in : int64_t(g.h_out) * g.w_out;
    return spatial * g.kh * g.kw * g.cin * g.cout;
}

double CostReport::maccs_reduction_pct() const {
    if (total_dense_maccs == 0) return 0.0;
    return 100.0 * (1.0 - double(total_eff_maccs) / double(total_dense_maccs));
}

double CostReport::memory_reduction_pct() const {
    if (total_mem_dense == 0) return 0.0;
    return 100.0 * (1.0 - double(total_mem_sparse) / double(total_mem_dense));
}

double CostReport::memory_reduction_csr_pct() const {
    if (total_mem_dense == 0) return 0.0;
    return 100.0 * (1.0 - double(total_mem_sparse_csr) / double(total_mem_dense));
}

double CostReport::sparsity() const {
    if (total_dense_params == 0) return 0.0;
    return 1.0 - double(total_nnz) / double(total_dense_params);
}

std::string CostReport::to_csv() const {
    std::string out = "layer,dense_maccs,eff_maccs,dense_params,nnz,mem_dense,mem_sparse,rm_pct\n";
    char line[256];
    for (const auto& l : layers) {
        const double rm =
            l.dense_maccs ? 100.0 * (1.0 - double(l.eff_maccs) / double(l.dense_maccs)) : 0.0;
        std::snprintf(line, sizeof line, "%s,%lld,%lld,%lld,%lld,%lld,%lld,%.4f\n", l.name.c_str(),
                      (long long)l.dense_maccs, (long long)l.eff_maccs, (long long)l.dense_params,
                      (long long)l.nnz, (long long)l.mem_dense, (long long)l.mem_sparse, rm);
        out += line;
    }
    std::snprintf(line, sizeof line, "TOTAL,%lld,%lld,%lld,%lld,%lld,%lld,%.4f\n",
                  (long long)total_dense_maccs, (long long)total_eff_maccs,
                  (long long)total_dense_params, (long long)total_nnz, (long long)total_mem_dense,
                  (long long)total_mem_sparse, maccs_reduction_pct());
    out += line;
    return out;
}

namespace {

// Channel liveness of one weight tensor. For a conv [Cout,Cin,Kh,Kw] a
// "filter" is an output-channel slice; for a transposed conv [Cin,Cout,Kh,Kw]
// it is still the output-channel slice, just indexed on dim 1.
struct Liveness {
    std::vector<bool> out_live;  // filter has >= 1 nonzero weight
    std::vector<bool> in_used;   // input channel nonzero in >= 1 surviving filter
};

Liveness analyze(const Tensor& w, const LayerGeom& g) {
    Liveness lv;
    lv.out_live.assign(size_t(g.cout), false);
    lv.in_used.assign(size_t(g.cin), false);
    auto v = w.data();
    const int64_t k2 = int64_t(g.kh) * g.kw;
    auto tap = [&](int ci, int co, int64_t i) -> float {
        return g.transposed ? v[size_t((int64_t(ci) * g.cout + co) * k2 + i)]
                            : v[size_t((int64_t(co) * g.cin + ci) * k2 + i)];
    };
    for (int co = 0; co < g.cout; ++co)
        for (int ci = 0; ci < g.cin && !lv.out_live[size_t(co)]; ++ci)
            for (int64_t i = 0; i < k2; ++i)
                if (tap(ci, co, i) != 0.0f) {
                    lv.out_live[size_t(co)] = true;
                    break;
                }
    for (int ci = 0; ci < g.cin; ++ci)
        for (int co = 0; co < g.cout && !lv.in_used[size_t(ci)]; ++co) {
            if (!lv.out_live[size_t(co)]) continue;
            for (int64_t i = 0; i < k2; ++i)
                if (tap(ci, co, i) != 0.0f) {
                    lv.in_used[size_t(ci)] = true;
                    break;
                }
        }
    return lv;
}

}  // namespace

CostReport cost_report(const std::vector<Tensor>& weights, const std::vector<LayerGeom>& geoms,
                       int live_inputs) {
    if (weights.size() != geoms.size())
        throw ShapeError("cost_report: weights/geometry length mismatch");
    CostReport report;
    std::vector<bool> prev_live(size_t(live_inputs), true);
    for (size_t li = 0; li < weights.size(); ++li) {
        const Tensor& w = weights[li];
        const LayerGeom& g = geoms[li];
        if (int(prev_live.size()) != g.cin)
            throw ShapeError("cost_report: layer " + g.name + " expects " + std::to_string(g.cin) +
                             " input channels, previous layer produced " +
                             std::to_string(prev_live.size()));
        const Liveness lv = analyze(w, g);

        int cout_eff = 0;
        for (bool b : lv.out_live) cout_eff += b ? 1 : 0;
        int cin_eff = 0;
        for (int ci = 0; ci < g.cin; ++ci)
            if (lv.in_used[size_t(ci)] && prev_live[size_t(ci)]) ++cin_eff;

        int64_t nnz = 0;
        for (float x : w.data()) nnz += x != 0.0f ? 1 : 0;

        LayerCost cost;
        cost.name = g.name;
        cost.dense_maccs = maccs_dense(g);
        const int64_t spatial =
            g.transposed ? int64_t(g.h_in) * g.w_in : int64_t(g.h_out) * g.w_out;
        cost.eff_maccs = spatial * g.kh * g.kw * cin_eff * cout_eff;
        cost.dense_params = w.numel();
        cost.nnz = nnz;
        cost.mem_dense = 4 * cost.dense_params;
        cost.mem_sparse = 4 * nnz;
        // CSR over the flattened Cout x (Cin*Kh*Kw) matrix (rows = filters for
        // conv; for transposed conv rows = input channels, same byte count)
        const int64_t rows = g.transposed ? g.cin : g.cout;
        cost.mem_sparse_csr = 4 * nnz + 4 * nnz + 4 * (rows + 1);
        report.layers.push_back(cost);

        report.total_dense_maccs += cost.dense_maccs;
        report.total_eff_maccs += cost.eff_maccs;
        report.total_dense_params += cost.dense_params;
        report.total_nnz += nnz;
        report.total_mem_dense += cost.mem_dense;
        report.total_mem_sparse += cost.mem_sparse;
        report.total_mem_sparse_csr += cost.mem_sparse_csr;

        prev_live = lv.out_live;
    }
    return report;
}

}  // namespace scae
