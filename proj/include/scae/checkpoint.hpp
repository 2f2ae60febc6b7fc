#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "scae/tensor.hpp"

namespace scae {

using NamedTensor = std::pair<std::string, Tensor>;

// Checkpoint container: magic "SCAE", version u16, tensor count u32, then per
// tensor: name length u16 + UTF-8 name, rank u8, extents u32 each, payload as
// little-endian f32. Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Lookup helper; throws ContractError if the name is absent.
const Tensor& checkpoint_get(const std::vector<NamedTensor>& tensors, const std::string& name);
bool checkpoint_has(const std::vector<NamedTensor>& tensors, const std::string& name);

}  // namespace scae
