#include "scae/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scae {

namespace {

// Writes a soft-thresholded value; anything that rounds below the smallest
// normal f32 becomes literal 0.0f.
inline float shrink_write(double value, double tau) {
    const double mag = std::abs(value) - tau;
    if (mag <= 0.0) return 0.0f;
    const float r = float(value < 0.0 ? -mag : mag);
    if (std::abs(r) < std::numeric_limits<float>::min()) return 0.0f;
    return r;
}

inline float clip_write(float value, double level) {
    const double mag = std::min(double(std::abs(value)), level);
    const float r = float(value < 0.0f ? -mag : mag);
    if (std::abs(r) < std::numeric_limits<float>::min()) return 0.0f;
    return r;
}

// Sorted-cumulative-sum threshold for the l1 projection. Caller guarantees
// ||v||_1 > eta > 0. Ties keep their original order (stable sort).
template <typename T>
double l1_threshold(std::span<const T> v, double eta) {
    std::vector<double> u(v.size());
    for (size_t i = 0; i < v.size(); ++i) u[i] = std::abs(double(v[i]));
    std::stable_sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - eta) / double(j + 1);
        if (u[j] > t) tau = t;
    }
    return tau;
}

template <typename T>
void proj_l1_impl(std::span<T> v, double eta) {
    for (T x : v)
        if (!std::isfinite(double(x))) throw NumericError("proj_l1: non-finite input");
    double norm1 = 0.0;
    for (T x : v) norm1 += std::abs(double(x));
    if (norm1 <= eta) return;  // already inside the ball, bit-identical
    if (eta == 0.0) {
        std::fill(v.begin(), v.end(), T(0));
        return;
    }
    const double tau = l1_threshold(std::span<const T>(v.data(), v.size()), eta);
    for (T& x : v) {
        if constexpr (std::is_same_v<T, float>)
            x = shrink_write(double(x), tau);
        else {
            const double mag = std::abs(double(x)) - tau;
            x = mag <= 0.0 ? T(0) : T(x < 0 ? -mag : mag);
        }
    }
}

}  // namespace

WeightView flatten_weight(Tensor w) {
    if (w.rank() != 4) throw ShapeError("flatten_weight expects a rank-4 conv weight");
    const size_t rows = size_t(w.dim(0));
    const size_t cols = size_t(w.dim(1)) * size_t(w.dim(2)) * size_t(w.dim(3));
    return WeightView(std::move(w), rows, cols);
}

void proj_l1(std::span<float> v, Radius eta) { proj_l1_impl(v, eta.eta); }

void proj_l1(std::span<double> v, Radius eta) { proj_l1_impl(v, eta.eta); }

std::vector<float> proj_l1(std::vector<float> v, Radius eta) {
    proj_l1_impl(std::span<float>(v), eta.eta);
    return v;
}

void proj_l11(WeightView& view, Radius eta) {
    const size_t l = view.rows();
    std::vector<double> row_norms(l, 0.0);
    for (size_t i = 0; i < l; ++i) {
        for (float x : view.row(i)) {
            if (!std::isfinite(x)) throw NumericError("proj_l11: non-finite input");
            row_norms[i] += std::abs(double(x));
        }
    }
    double total = 0.0;
    for (double n : row_norms) total += n;
    if (total <= eta.eta) return;  // interior point, unchanged

    std::vector<double> budgets = row_norms;
    proj_l1(std::span<double>(budgets), eta);
    for (size_t i = 0; i < l; ++i) {
        auto row = view.row(i);
        if (budgets[i] <= 0.0) {
            std::fill(row.begin(), row.end(), 0.0f);
        } else {
            proj_l1(row, Radius(budgets[i]));
        }
    }
}

void proj_l1inf(WeightView& view, Radius eta) {
    const size_t l = view.rows();
    const size_t d = view.cols();
    for (size_t i = 0; i < l; ++i)
        for (float x : view.row(i))
            if (!std::isfinite(x)) throw NumericError("proj_l1inf: non-finite input");

    if (eta.eta == 0.0) {
        for (size_t i = 0; i < l; ++i) {
            auto row = view.row(i);
            std::fill(row.begin(), row.end(), 0.0f);
        }
        return;
    }

    // Per-row sorted magnitudes and prefix sums.
    std::vector<std::vector<double>> sorted(l), prefix(l);
    double sum_max = 0.0;
    for (size_t i = 0; i < l; ++i) {
        auto& u = sorted[i];
        u.resize(d);
        auto row = view.row(i);
        for (size_t j = 0; j < d; ++j) u[j] = std::abs(double(row[j]));
        std::stable_sort(u.begin(), u.end(), std::greater<double>());
        auto& s = prefix[i];
        s.resize(d + 1, 0.0);
        for (size_t j = 0; j < d; ++j) s[j + 1] = s[j] + u[j];
        sum_max += u[0];
    }
    if (sum_max <= eta.eta) return;  // interior point, unchanged

    // Newton on theta for g(theta) = sum_i mu_i(theta) - eta, where mu_i
    // solves sum_j max(u_ij - mu, 0) = theta. g is convex, decreasing and
    // piecewise linear, so Newton from 0 converges in finitely many steps.
    const long iter_cap = 10 * long(l) * long(d);
    std::vector<size_t> k(l, 1);  // active entries per row, monotone in theta
    std::vector<double> mu(l, 0.0);
    double theta = 0.0;
    long iters = 0;
    while (true) {
        if (++iters > iter_cap)
            throw AlgorithmError("proj_l1inf: dual Newton iteration did not converge", iters - 1);
        double g = -eta.eta;
        double slope = 0.0;
        for (size_t i = 0; i < l; ++i) {
            const auto& u = sorted[i];
            const auto& s = prefix[i];
            if (theta >= s[d]) {  // row fully removed
                mu[i] = 0.0;
                continue;
            }
            size_t ki = k[i];
            while (ki < d && (s[ki] - theta) / double(ki) < u[ki]) ++ki;
            k[i] = ki;
            mu[i] = (s[ki] - theta) / double(ki);
            if (mu[i] < 0.0) mu[i] = 0.0;
            g += mu[i];
            if (mu[i] > 0.0) slope += 1.0 / double(ki);
        }
        if (g <= 0.0 || slope == 0.0) break;
        const double step = g / slope;
        if (step <= 1e-9 * std::max(1.0, theta)) break;
        theta += step;
    }

    for (size_t i = 0; i < l; ++i) {
        auto row = view.row(i);
        if (mu[i] <= 0.0) {
            std::fill(row.begin(), row.end(), 0.0f);
        } else {
            for (float& x : row) x = clip_write(x, mu[i]);
        }
    }
}

double sparsity(std::span<const Tensor> tensors) {
    if (tensors.empty()) throw ContractError("sparsity: empty tensor set");
    int64_t zeros = 0, total = 0;
    for (const Tensor& t : tensors) {
        for (float v : t.data())
            if (v == 0.0f) ++zeros;
        total += t.numel();
    }
    return double(zeros) / double(total);
}

}  // namespace scae
