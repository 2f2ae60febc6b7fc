#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "scae/projections.hpp"

using namespace scae;

namespace {

WeightView make_view(const std::vector<std::vector<float>>& rows) {
    const int l = int(rows.size());
    const int d = int(rows[0].size());
    std::vector<float> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return WeightView(Tensor::from_data({l, 1, 1, d}, flat), size_t(l), size_t(d));
}

std::vector<double> view_values(const WeightView& v) {
    std::vector<double> out;
    for (size_t i = 0; i < v.rows(); ++i)
        for (float x : v.row(i)) out.push_back(x);
    return out;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double l11_norm(const WeightView& v) {
    double s = 0.0;
    for (size_t i = 0; i < v.rows(); ++i)
        for (float x : v.row(i)) s += std::abs(double(x));
    return s;
}

double l1inf_norm(const WeightView& v) {
    double s = 0.0;
    for (size_t i = 0; i < v.rows(); ++i) {
        double m = 0.0;
        for (float x : v.row(i)) m = std::max(m, std::abs(double(x)));
        s += m;
    }
    return s;
}

}  // namespace

TEST_CASE("proj_l1 hand cases") {
    SUBCASE("interior point is bit-identical") {
        std::vector<float> v{0.5f, -0.3f};
        auto out = proj_l1(v, Radius(1.0));
        CHECK(out == v);
    }
    SUBCASE("boundary shrink [3,1] at eta=2") {
        auto out = proj_l1(std::vector<float>{3.0f, 1.0f}, Radius(2.0));
        CHECK(out[0] == 2.0f);
        CHECK(out[1] == 0.0f);
    }
    SUBCASE("zero radius zeroes everything") {
        auto out = proj_l1(std::vector<float>{1.0f, -2.0f, 0.25f}, Radius(0.0));
        for (float x : out) CHECK(x == 0.0f);
    }
    SUBCASE("non-finite input raises") {
        std::vector<float> v{1.0f, std::numeric_limits<float>::infinity()};
        CHECK_THROWS_AS(proj_l1(std::span<float>(v), Radius(1.0)), NumericError);
    }
}

TEST_CASE("proj_l11 hand trace of the two-stage algorithm") {
    auto v = make_view({{3.0f, 1.0f}, {1.0f, 0.0f}});
    proj_l11(v, Radius(2.0));
    CHECK(v.row(0)[0] == 2.0f);
    CHECK(v.row(0)[1] == 0.0f);
    CHECK(v.row(1)[0] == 0.0f);  // structurally zeroed row
    CHECK(v.row(1)[1] == 0.0f);
}

TEST_CASE("proj_l11 interior point and zero radius") {
    auto v = make_view({{0.25f, -0.25f}, {0.1f, 0.05f}});
    auto before = view_values(v);
    proj_l11(v, Radius(1.0));
    CHECK(view_values(v) == before);

    auto z = make_view({{1.0f, 2.0f}, {3.0f, 4.0f}});
    proj_l11(z, Radius(0.0));
    for (double x : view_values(z)) CHECK(x == 0.0);
}

TEST_CASE("proj_l1inf single-row and single-column reductions") {
    SUBCASE("single row clips at the l-inf level") {
        auto v = make_view({{3.0f, 1.0f}});
        proj_l1inf(v, Radius(2.0));
        CHECK(v.row(0)[0] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(v.row(0)[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("single column matches proj_l1 of the column") {
        auto v = make_view({{3.0f}, {1.0f}});
        proj_l1inf(v, Radius(2.0));
        CHECK(v.row(0)[0] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(v.row(1)[0] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("interior point unchanged") {
        auto v = make_view({{0.5f, 0.25f}, {-0.5f, 0.1f}});
        auto before = view_values(v);
        proj_l1inf(v, Radius(2.0));
        CHECK(view_values(v) == before);
    }
}

TEST_CASE("flatten_weight aliases the conv tensor") {
    Tensor w = Tensor::zeros({8, 3, 3, 3});
    auto view = flatten_weight(w);
    CHECK(view.rows() == 8);
    CHECK(view.cols() == 27);
    view.row(0)[0] = 42.0f;
    CHECK(w.data()[0] == 42.0f);

    Tensor w2 = Tensor::zeros({4, 1, 1, 1});
    auto v2 = flatten_weight(w2);
    CHECK(v2.rows() == 4);
    CHECK(v2.cols() == 1);

    CHECK_THROWS_AS(flatten_weight(Tensor::zeros({3, 3})), ShapeError);
}

TEST_CASE("sparsity counts exact zeros") {
    Tensor a = Tensor::zeros({2, 2});
    std::vector<Tensor> just_a{a};
    CHECK(sparsity(just_a) == 1.0);

    Tensor b = Tensor::from_data({2, 2}, {2.0f, 0.0f, 0.0f, 0.0f});
    std::vector<Tensor> just_b{b};
    CHECK(sparsity(just_b) == 0.75);

    Tensor c = Tensor::full({3}, 1.0f);
    std::vector<Tensor> just_c{c};
    CHECK(sparsity(just_c) == 0.0);

    std::vector<Tensor> none;
    CHECK_THROWS_AS(sparsity(none), ContractError);
}

TEST_CASE("projections match the bisection QP oracles on random matrices") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t l = 1 + rng.below(5);
        const size_t d = 1 + rng.below(5);
        std::vector<float> flat(l * d);
        for (auto& x : flat) x = float(rng.normal());
        const double eta = rng.uniform(0.05, 0.6 * double(l * d));

        std::vector<double> input(flat.begin(), flat.end());

        {
            auto mine = proj_l1(flat, Radius(eta));
            auto ref = oracle::proj_l1_bisect(input, eta);
            std::vector<double> got(mine.begin(), mine.end());
            CHECK(l2_dist(got, ref) <= 1e-5);
            double norm = 0.0;
            for (float x : mine) norm += std::abs(double(x));
            CHECK(norm <= eta + 1e-6 * std::max(1.0, eta));
        }
        {
            WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
            proj_l11(v, Radius(eta));
            auto ref = oracle::proj_l11_bisect(input, l, d, eta);
            CHECK(l2_dist(view_values(v), ref) <= 1e-5);
            CHECK(l11_norm(v) <= eta + 1e-6 * std::max(1.0, eta));
        }
        {
            WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
            proj_l1inf(v, Radius(eta));
            auto ref = oracle::proj_l1inf_bisect(input, l, d, eta);
            CHECK(l2_dist(view_values(v), ref) <= 1e-5);
            CHECK(l1inf_norm(v) <= eta + 1e-6 * std::max(1.0, eta));
        }
    }
}

TEST_CASE("projection properties: idempotence, nonexpansiveness, sign/support") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t l = 1 + rng.below(4);
        const size_t d = 1 + rng.below(4);
        std::vector<float> a(l * d), b(l * d);
        for (auto& x : a) x = float(rng.normal());
        for (auto& x : b) x = float(rng.normal());
        const double eta = rng.uniform(0.1, 2.0);

        for (int which = 0; which < 3; ++which) {
            auto apply = [&](std::vector<float> flat) {
                WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
                if (which == 0) {
                    auto row0 = v.tensor().data();
                    proj_l1(row0, Radius(eta));
                } else if (which == 1) {
                    proj_l11(v, Radius(eta));
                } else {
                    proj_l1inf(v, Radius(eta));
                }
                auto dd = v.tensor().data();
                return std::vector<float>(dd.begin(), dd.end());
            };
            const auto pa = apply(a);
            const auto pb = apply(b);
            const auto ppa = apply(pa);

            // idempotence
            for (size_t i = 0; i < pa.size(); ++i)
                CHECK(std::abs(pa[i] - ppa[i]) <= 1e-6);

            // nonexpansiveness
            double d_ab = 0.0, d_pab = 0.0;
            for (size_t i = 0; i < pa.size(); ++i) {
                d_ab += double(a[i] - b[i]) * double(a[i] - b[i]);
                d_pab += double(pa[i] - pb[i]) * double(pa[i] - pb[i]);
            }
            CHECK(std::sqrt(d_pab) <= std::sqrt(d_ab) + 1e-9);

            // sign preservation and support shrinkage (all three operators here
            // only shrink magnitudes)
            for (size_t i = 0; i < pa.size(); ++i) {
                CHECK(std::abs(pa[i]) <= std::abs(a[i]) + 1e-9);
                if (pa[i] != 0.0f) CHECK(std::signbit(pa[i]) == std::signbit(a[i]));
            }
        }
    }
}

TEST_CASE("proj_l11 produces an all-zero row below the row-norm threshold") {
    SplitMix64 rng(15);
    int structured = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const size_t l = 4, d = 3;
        std::vector<float> flat(l * d);
        for (auto& x : flat) x = float(rng.normal());
        WeightView v(Tensor::from_data({int(l), 1, 1, int(d)}, flat), l, d);
        // the weakest row dies once eta drops below sum_i (norm_i - norm_min)
        std::vector<double> norms(l, 0.0);
        for (size_t i = 0; i < l; ++i)
            for (float x : v.row(i)) norms[i] += std::abs(double(x));
        const double nmin = *std::min_element(norms.begin(), norms.end());
        double death = 0.0;
        for (double n : norms) death += n - nmin;
        proj_l11(v, Radius(0.9 * death));
        for (size_t i = 0; i < l; ++i) {
            bool all_zero = true;
            for (float x : v.row(i)) all_zero &= (x == 0.0f);
            if (all_zero) {
                ++structured;
                break;
            }
        }
    }
    CHECK(structured == 20);
}

TEST_CASE("proj_l1inf reports non-convergence instead of looping") {
    // iteration cap is 10*l*d; a 1x1 instance converges in one step, so this
    // just exercises the error type compiles/throws nothing on normal input
    auto v = make_view({{5.0f}});
    proj_l1inf(v, Radius(1.0));
    CHECK(v.row(0)[0] == doctest::Approx(1.0));
}
