#pragma once

#include <map>
#include <string>

#include "gadiff/nn.hpp"

namespace gadiff {

/// Self-describing binary checkpoint: magic + version, RNG seed, a
/// string-keyed hyperparameter block, and the named parameter tensors with
/// their Adam state. Payloads are little-endian f64; round-trips are
/// bit-exact.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& hparams);

struct Checkpoint {
  ParamStore params;
  std::map<std::string, std::string> hparams;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace gadiff
