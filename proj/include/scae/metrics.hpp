#pragma once

#include <string>
#include <vector>

#include "scae/tensor.hpp"

namespace scae {

// 10*log10(1/MSE) on [0,1]-range images; identical images give +inf.
double psnr(const Tensor& a, const Tensor& b);
double mse(const Tensor& a, const Tensor& b);

// Mean SSIM: 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2,
// valid-window aggregation, per-channel then channel-averaged. Images are
// (C,H,W) in [0,1] with H,W >= 11.
double mssim(const Tensor& a, const Tensor& b);

// 10*(log10(mse_ref) - log10(mse_l)) in dB; negative when the constrained
// model is worse than the reference.
double relative_loss(double mse_ref, double mse_l);

// One conv or transposed-conv layer as the cost model sees it.
struct LayerGeom {
    std::string name;
    bool transposed;
    int cin, cout, kh, kw;
    int h_in, w_in;    // input spatial extent at the reference input size
    int h_out, w_out;  // output spatial extent
};

// Dense MACCs: H_out*W_out*Kh*Kw*Cin*Cout per conv, H_in*W_in*Kh*Kw*Cin*Cout
// per transposed conv; biases excluded.
int64_t maccs_dense(const LayerGeom& layer);

struct LayerCost {
    std::string name;
    int64_t dense_maccs;
    int64_t eff_maccs;
    int64_t dense_params;
    int64_t nnz;
    int64_t mem_dense;       // 4 bytes per parameter
    int64_t mem_sparse;      // 4 bytes per nonzero (nonzero-count accounting)
    int64_t mem_sparse_csr;  // values + column indices + row pointers
};

struct CostReport {
    std::vector<LayerCost> layers;
    int64_t total_dense_maccs = 0;
    int64_t total_eff_maccs = 0;
    int64_t total_dense_params = 0;
    int64_t total_nnz = 0;
    int64_t total_mem_dense = 0;
    int64_t total_mem_sparse = 0;
    int64_t total_mem_sparse_csr = 0;

    double maccs_reduction_pct() const;       // RM
    double memory_reduction_pct() const;      // nonzero-count basis
    double memory_reduction_csr_pct() const;  // CSR accounting
    double sparsity() const;

    // Fixed column order:
    // layer,dense_maccs,eff_maccs,dense_params,nnz,mem_dense,mem_sparse,rm_pct
    std::string to_csv() const;
};

// Effective-MACC cost of a chained layer stack. Each weight pairs with its
// geometry; dead filters fold their constant outputs downstream, so a
// filter that is all-zero removes the matching input channel of the next
// layer. live_inputs seeds the first layer's live channel set.
CostReport cost_report(const std::vector<Tensor>& weights, const std::vector<LayerGeom>& geoms,
                       int live_inputs);

}  // namespace scae
