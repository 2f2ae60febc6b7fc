#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scae/tensor.hpp"

namespace scae {

// Binary PPM (P6) / PGM (P5), 8-bit maxval 255 only. Returns (C,H,W) with
// values v/255 in [0,1]; grayscale is replicated to 3 channels when
// force_rgb is set. Malformed input raises ParseError with a byte offset.
Tensor load_image(const std::filesystem::path& path, bool force_rgb = false);

// P6 writer with round-half-up 8-bit quantization. Values must be in [0,1].
void save_image(const Tensor& image, const std::filesystem::path& path);

enum class PatchPolicy { Grid, Random };

// Grid: non-overlapping tiles, right/bottom remainder dropped.
// Random: k fully-interior patches placed by the seeded PRNG.
std::vector<Tensor> extract_patches(const Tensor& image, int patch_size, PatchPolicy policy,
                                    uint64_t seed = 0, int k = 0);

// Content hash of a file (FNV-1a64 over the raw bytes).
uint64_t file_hash(const std::filesystem::path& path);

// Patch dataset over a directory of .ppm/.pgm files (sorted by name).
// Iteration order over patches is a pure function of (seed, epoch).
class PatchDataset {
  public:
    PatchDataset(const std::filesystem::path& dir, int patch_size, uint64_t seed);

    size_t patch_count() const { return patches_.size(); }
    size_t image_count() const { return files_.size(); }
    const Tensor& patch(size_t i) const { return patches_[i]; }
    const std::vector<std::filesystem::path>& files() const { return files_; }

    // Deterministic shuffled order for one epoch.
    std::vector<size_t> epoch_order(int epoch) const;
    // Stack patches[indices] into a (B,C,ps,ps) batch.
    Tensor make_batch(const std::vector<size_t>& order, size_t first, size_t count) const;

    // Combined content hash of all source files.
    uint64_t content_hash() const { return content_hash_; }
    // Newline-separated "path<TAB>hash" manifest.
    std::string manifest() const;

  private:
    std::vector<std::filesystem::path> files_;
    std::vector<uint64_t> hashes_;
    std::vector<Tensor> patches_;
    int patch_size_;
    uint64_t seed_;
    uint64_t content_hash_;
};

}  // namespace scae
