#pragma once

#include <string>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/learner.hpp"

namespace statsmerge {

// One binary container for every artifact on disk:
//   "SMRG" | u32:version=1 | u32:header bytes | JSON header | payload
// Tensors land in the payload as little-endian f64, row-major, in the order
// the header declares; label/index sequences as little-endian u32. Loads are
// bit-exact and failures report the byte offset of the offending field.

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

void save_sml(const SMLParams& params, const std::string& path);
SMLParams load_sml(const std::string& path);

void save_pseudoset(const PseudoLabeledSet& ps, const std::string& path);
PseudoLabeledSet load_pseudoset(const std::string& path);

}  // namespace statsmerge
