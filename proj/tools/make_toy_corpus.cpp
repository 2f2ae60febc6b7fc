// Regenerates the bundled toy corpus: 16 synthetic 64x64 RGB images with a
// mix of smooth noise, sinusoids, checkerboards, gradients and rings. Fully
// deterministic; running it twice produces byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "scae/image_io.hpp"
#include "scae/prng.hpp"

using scae::SplitMix64;

namespace {

constexpr int kSize = 64;

float clamp01(double v) { return float(std::clamp(v, 0.0, 1.0)); }

// Bilinearly interpolated random control grid, one per channel.
std::vector<float> value_noise(SplitMix64& rng, int cells) {
    std::vector<float> img(3 * kSize * kSize);
    for (int c = 0; c < 3; ++c) {
        std::vector<double> grid((cells + 1) * (cells + 1));
        for (auto& g : grid) g = rng.next_double();
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const double gy = double(y) / kSize * cells;
                const double gx = double(x) / kSize * cells;
                const int y0 = int(gy), x0 = int(gx);
                const double fy = gy - y0, fx = gx - x0;
                const double v =
                    grid[y0 * (cells + 1) + x0] * (1 - fy) * (1 - fx) +
                    grid[y0 * (cells + 1) + x0 + 1] * (1 - fy) * fx +
                    grid[(y0 + 1) * (cells + 1) + x0] * fy * (1 - fx) +
                    grid[(y0 + 1) * (cells + 1) + x0 + 1] * fy * fx;
                img[(c * kSize + y) * kSize + x] = clamp01(v);
            }
    }
    return img;
}

std::vector<float> sinusoids(SplitMix64& rng, int waves) {
    std::vector<float> img(3 * kSize * kSize);
    for (int c = 0; c < 3; ++c) {
        std::vector<double> fx(waves), fy(waves), ph(waves), amp(waves);
        for (int w = 0; w < waves; ++w) {
            fx[w] = rng.uniform(0.5, 4.0);
            fy[w] = rng.uniform(0.5, 4.0);
            ph[w] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            amp[w] = rng.uniform(0.1, 0.4);
        }
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                double v = 0.5;
                for (int w = 0; w < waves; ++w)
                    v += amp[w] * std::sin(2.0 * std::numbers::pi *
                                               (fx[w] * x + fy[w] * y) / kSize +
                                           ph[w]);
                img[(c * kSize + y) * kSize + x] = clamp01(v);
            }
    }
    return img;
}

std::vector<float> checkerboard(SplitMix64& rng) {
    const int cell = 4 + int(rng.below(9));
    double ca[3], cb[3];
    for (int c = 0; c < 3; ++c) {
        ca[c] = rng.uniform(0.0, 0.45);
        cb[c] = rng.uniform(0.55, 1.0);
    }
    std::vector<float> img(3 * kSize * kSize);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const bool a = ((y / cell) + (x / cell)) % 2 == 0;
                const double grad = 0.15 * double(x) / kSize;
                img[(c * kSize + y) * kSize + x] = clamp01((a ? ca[c] : cb[c]) + grad);
            }
    return img;
}

std::vector<float> rings(SplitMix64& rng) {
    const double cx = rng.uniform(20, 44), cy = rng.uniform(20, 44);
    const double period = rng.uniform(6, 14);
    std::vector<float> img(3 * kSize * kSize);
    for (int c = 0; c < 3; ++c) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const double r = std::hypot(x - cx, y - cy);
                const double v = 0.5 + 0.45 * std::sin(2.0 * std::numbers::pi * r / period + phase);
                img[(c * kSize + y) * kSize + x] = clamp01(v);
            }
    }
    return img;
}

std::vector<float> gradient_bands(SplitMix64& rng) {
    const double angle = rng.uniform(0.0, std::numbers::pi);
    const double bands = rng.uniform(2.0, 6.0);
    std::vector<float> img(3 * kSize * kSize);
    for (int c = 0; c < 3; ++c) {
        const double off = rng.uniform(0.0, 1.0);
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const double t =
                    (x * std::cos(angle) + y * std::sin(angle)) / kSize;
                const double v = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * bands * t) +
                                 0.35 * (t + off - 0.5);
                img[(c * kSize + y) * kSize + x] = clamp01(v);
            }
    }
    return img;
}

std::vector<float> blend(const std::vector<float>& a, const std::vector<float>& b, double wa) {
    std::vector<float> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = clamp01(wa * a[i] + (1.0 - wa) * b[i]);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_dir = argc > 1 ? argv[1] : "data/toy";
    std::filesystem::create_directories(out_dir);

    std::vector<std::vector<float>> images;
    for (int i = 0; i < 4; ++i) {
        SplitMix64 rng(1000 + i);
        images.push_back(value_noise(rng, 4 + i));
    }
    for (int i = 0; i < 4; ++i) {
        SplitMix64 rng(2000 + i);
        images.push_back(sinusoids(rng, 2 + i % 2));
    }
    for (int i = 0; i < 2; ++i) {
        SplitMix64 rng(3000 + i);
        images.push_back(checkerboard(rng));
    }
    for (int i = 0; i < 2; ++i) {
        SplitMix64 rng(4000 + i);
        images.push_back(rings(rng));
    }
    for (int i = 0; i < 2; ++i) {
        SplitMix64 rng(5000 + i);
        images.push_back(gradient_bands(rng));
    }
    for (int i = 0; i < 2; ++i) {
        SplitMix64 rng(6000 + i);
        auto a = value_noise(rng, 6);
        auto b = sinusoids(rng, 2);
        images.push_back(blend(a, b, 0.55));
    }

    for (size_t i = 0; i < images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "toy%02zu.ppm", i);
        scae::save_image(scae::Tensor::from_data({3, kSize, kSize}, images[i]),
                         std::filesystem::path(out_dir) / name);
    }
    std::printf("wrote %zu images to %s\n", images.size(), out_dir.c_str());
    return 0;
}
