#include "scae/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "scae/prng.hpp"

namespace scae {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

struct PnmHeader {
    int channels;  // 3 for P6, 1 for P5
    int width, height;
    size_t payload_offset;
};

bool is_pnm_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Header tokens are separated by whitespace; '#' starts a comment to EOL.
PnmHeader parse_header(const std::string& buf) {
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
        throw ParseError("not a binary PPM/PGM (expected P5 or P6 magic)", 0);
    PnmHeader h{};
    h.channels = buf[1] == '6' ? 3 : 1;
    size_t pos = 2;
    auto next_int = [&](const char* what) -> int {
        while (pos < buf.size()) {
            if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (is_pnm_space(buf[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= buf.size()) throw ParseError(std::string("missing ") + what, pos);
        if (buf[pos] < '0' || buf[pos] > '9')
            throw ParseError(std::string("bad character in ") + what, pos);
        long v = 0;
        while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
            v = v * 10 + (buf[pos] - '0');
            if (v > 1 << 24) throw ParseError(std::string(what) + " out of range", pos);
            ++pos;
        }
        return int(v);
    };
    h.width = next_int("width");
    h.height = next_int("height");
    const int maxval = next_int("maxval");
    if (maxval != 255) throw ParseError("unsupported maxval (only 255)", pos - 1);
    if (pos >= buf.size() || !is_pnm_space(buf[pos]))
        throw ParseError("expected single whitespace after maxval", pos);
    h.payload_offset = pos + 1;
    if (h.width <= 0 || h.height <= 0) throw ParseError("empty image", 2);
    return h;
}

}  // namespace

Tensor load_image(const std::filesystem::path& path, bool force_rgb) {
    const std::string buf = read_file(path);
    const PnmHeader h = parse_header(buf);
    const size_t need = size_t(h.width) * size_t(h.height) * size_t(h.channels);
    if (buf.size() < h.payload_offset + need)
        throw ParseError("truncated payload: need " + std::to_string(need) + " bytes", buf.size());

    const int out_c = force_rgb ? 3 : h.channels;
    std::vector<float> data(size_t(out_c) * h.height * h.width);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data()) + h.payload_offset;
    const size_t plane = size_t(h.height) * h.width;
    for (int y = 0; y < h.height; ++y)
        for (int x = 0; x < h.width; ++x)
            for (int c = 0; c < h.channels; ++c) {
                const float v = float(p[(size_t(y) * h.width + x) * h.channels + c]) / 255.0f;
                data[size_t(c) * plane + size_t(y) * h.width + x] = v;
            }
    if (force_rgb && h.channels == 1)
        for (int c = 1; c < 3; ++c)
            std::copy_n(data.begin(), plane, data.begin() + long(size_t(c) * plane));
    return Tensor::from_data({out_c, h.height, h.width}, std::move(data));
}

void save_image(const Tensor& image, const std::filesystem::path& path) {
    if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1))
        throw ShapeError("save_image expects (3,H,W) or (1,H,W)");
    const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
    auto v = image.data();
    for (float x : v)
        if (!(x >= 0.0f && x <= 1.0f)) throw ContractError("save_image values must be in [0,1]");

    std::string out = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
    const size_t plane = size_t(H) * W;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) {
                const float val = v[size_t(C == 1 ? 0 : c) * plane + size_t(y) * W + x];
                const int byte = int(std::floor(double(val) * 255.0 + 0.5));  // round half up
                out.push_back(char(std::min(byte, 255)));
            }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Tensor> extract_patches(const Tensor& image, int patch_size, PatchPolicy policy,
                                    uint64_t seed, int k) {
    if (image.rank() != 3) throw ShapeError("extract_patches expects (C,H,W)");
    const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
    if (H < patch_size || W < patch_size)
        throw ShapeError("image " + std::to_string(H) + "x" + std::to_string(W) +
                         " smaller than patch size " + std::to_string(patch_size));
    auto v = image.data();
    const size_t plane = size_t(H) * W;
    auto cut = [&](int y0, int x0) {
        std::vector<float> data(size_t(C) * patch_size * patch_size);
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    data[(size_t(c) * patch_size + y) * patch_size + x] =
                        v[size_t(c) * plane + size_t(y0 + y) * W + (x0 + x)];
        return Tensor::from_data({C, patch_size, patch_size}, std::move(data));
    };

    std::vector<Tensor> patches;
    if (policy == PatchPolicy::Grid) {
        for (int y = 0; y + patch_size <= H; y += patch_size)
            for (int x = 0; x + patch_size <= W; x += patch_size) patches.push_back(cut(y, x));
    } else {
        SplitMix64 rng(seed);
        for (int i = 0; i < k; ++i) {
            const int y = int(rng.below(uint64_t(H - patch_size + 1)));
            const int x = int(rng.below(uint64_t(W - patch_size + 1)));
            patches.push_back(cut(y, x));
        }
    }
    return patches;
}

uint64_t file_hash(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    return fnv1a64(buf.data(), buf.size());
}

PatchDataset::PatchDataset(const std::filesystem::path& dir, int patch_size, uint64_t seed)
    : patch_size_(patch_size), seed_(seed) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("dataset directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (ext == ".ppm" || ext == ".pgm") files_.push_back(entry.path());
    }
    std::sort(files_.begin(), files_.end());
    if (files_.empty()) throw std::runtime_error("no .ppm/.pgm images in " + dir.string());

    content_hash_ = 0xcbf29ce484222325ull;
    for (const auto& f : files_) {
        const uint64_t h = file_hash(f);
        hashes_.push_back(h);
        content_hash_ = fnv1a64(&h, sizeof h, content_hash_);
        Tensor img = load_image(f, /*force_rgb=*/true);
        auto cut = extract_patches(img, patch_size_, PatchPolicy::Grid);
        patches_.insert(patches_.end(), cut.begin(), cut.end());
    }
}

std::vector<size_t> PatchDataset::epoch_order(int epoch) const {
    std::vector<size_t> order(patches_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_indices(order, mix_seed(seed_, uint64_t(epoch)));
    return order;
}

Tensor PatchDataset::make_batch(const std::vector<size_t>& order, size_t first,
                                size_t count) const {
    const Tensor& proto = patches_.at(order.at(first));
    const int C = proto.dim(0), P = proto.dim(1);
    Tensor batch = Tensor::zeros({int(count), C, P, P});
    auto out = batch.data();
    const size_t stride = size_t(C) * P * P;
    for (size_t b = 0; b < count; ++b) {
        auto src = patches_[order[first + b]].data();
        std::copy(src.begin(), src.end(), out.begin() + long(b * stride));
    }
    return batch;
}

std::string PatchDataset::manifest() const {
    std::string out;
    char hex[17];
    for (size_t i = 0; i < files_.size(); ++i) {
        std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)hashes_[i]);
        out += files_[i].filename().string() + "\t" + hex + "\n";
    }
    return out;
}

}  // namespace scae
