#pragma once

#include <span>
#include <vector>

#include "scae/tensor.hpp"

namespace scae {

// Non-negative projection radius.
struct Radius {
    double eta;
    explicit Radius(double e) : eta(e) {
        if (!(e >= 0.0)) throw ContractError("projection radius must be >= 0");
    }
};

// 2-D row-major view of a conv weight tensor: one row per output filter,
// d = Cin*Kh*Kw columns. Writes through the view mutate the tensor in place;
// the view pins the underlying buffer.
class WeightView {
  public:
    WeightView(Tensor tensor, size_t rows, size_t cols)
        : tensor_(std::move(tensor)), rows_(rows), cols_(cols) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    std::span<float> row(size_t i) { return tensor_.data().subspan(i * cols_, cols_); }
    std::span<const float> row(size_t i) const { return tensor_.data().subspan(i * cols_, cols_); }
    Tensor& tensor() { return tensor_; }

  private:
    Tensor tensor_;
    size_t rows_, cols_;
};

// View of a rank-4 conv weight [Cout,Cin,Kh,Kw] as Cout x (Cin*Kh*Kw).
WeightView flatten_weight(Tensor w);

// Euclidean projection onto the l1 ball: argmin ||w-v||_2 s.t. ||w||_1 <= eta.
// Inputs already inside the ball are returned bit-identical; thresholded
// entries are written as literal 0.0f (denormals flushed).
void proj_l1(std::span<float> v, Radius eta);
void proj_l1(std::span<double> v, Radius eta);
std::vector<float> proj_l1(std::vector<float> v, Radius eta);

// Two-stage l1,1 projection: project the vector of row l1-norms onto the
// l1 ball of radius eta, then project row i onto the l1 ball of radius t_i.
// Rows whose budget t_i hits zero come out exactly zero.
void proj_l11(WeightView& view, Radius eta);

// Euclidean projection onto the l1,inf ball {V : sum_i max_j |v_ij| <= eta},
// solved by Newton iteration on the piecewise-linear dual. Rows are clipped
// at per-row levels; rows whose level hits zero come out exactly zero.
// Throws AlgorithmError if the iteration cap (10*l*d) is exceeded.
void proj_l1inf(WeightView& view, Radius eta);

// Exact-zero fraction across a set of tensors; errors on an empty set.
double sparsity(std::span<const Tensor> tensors);

}  // namespace scae
