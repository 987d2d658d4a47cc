#pragma once

#include <stdexcept>
#include <string>

namespace latticeformer {

// Raised for malformed input data (segmentation files, lattices, configs).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latticeformer
