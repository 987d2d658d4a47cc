#pragma once

#include <filesystem>

#include "latticeformer/graph.hpp"

namespace latticeformer {

// Checkpoint layout, all integers little-endian:
//   u64   header length in bytes
//   JSON  {"format":"latticeformer-checkpoint","version":1,"tensors":[
//            {"name","shape","precision":"f32"|"f64","offset"}...]}
//   data  tensors back to back; offsets are relative to the data start
template <typename T>
void save_checkpoint(const ParamStore<T>& params, const std::filesystem::path& path);

// Loads every parameter of `params` by name. Precision is converted if the
// file was written at the other width. Throws InputError on a missing name,
// shape mismatch or a truncated file.
template <typename T>
void load_checkpoint(ParamStore<T>& params, const std::filesystem::path& path);

}  // namespace latticeformer
