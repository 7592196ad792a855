#pragma once

#include <string>

#include "trajcast/params.hpp"

namespace trajcast {

/// Binary checkpoint: magic "TJCK", u32 version, a UTF-8 config blob, then
/// one record per parameter (name, shape, f64 payload). Little-endian.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::string& config_json);

struct Checkpoint {
  std::string config_json;
  std::map<std::string, Tensor> tensors;
};

Checkpoint load_checkpoint(const std::string& path);

/// Installs loaded tensors into a store. Every parameter already present
/// must exist in the checkpoint with a matching shape; checkpoint tensors
/// not yet present are created so later lookups reuse them.
void restore_params(ParamStore& params, const Checkpoint& ckpt);

}  // namespace trajcast
