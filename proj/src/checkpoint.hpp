#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace abslab {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Parameter checkpoint: a JSON header line listing (name, shape, offset) per
// tensor, followed by the flat payload of little-endian 64-bit floats.
// Offsets count elements into the payload. The header's "extra" object carries
// whatever the caller needs to rebuild the surrounding model (config, vocab).
void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors,
                     const std::string& extra_json = "{}");

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::string extra_json;

  const Tensor* find(const std::string& name) const;
};

Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint values into an existing parameter set, matching by name.
// Every destination tensor must be present with an identical shape.
void restore_parameters(const Checkpoint& ckpt, std::vector<NamedTensor>& params);

}  // namespace abslab
