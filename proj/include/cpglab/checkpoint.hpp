#pragma once

#include <map>
#include <string>

#include "cpglab/tensor.hpp"

namespace cpglab::ad {

// Flat named-tensor container with a versioned header and an arbitrary
// metadata string (the model writes its config JSON there). Little-endian,
// byte-stable given identical contents.
std::string save_checkpoint(const std::map<std::string, TensorPtr>& tensors,
                            const std::string& metadata);

struct Checkpoint {
    std::map<std::string, TensorPtr> tensors;
    std::string metadata;
};

Checkpoint load_checkpoint(std::string_view bytes);

void write_checkpoint_file(const std::string& path, const std::map<std::string, TensorPtr>& tensors,
                           const std::string& metadata);
Checkpoint read_checkpoint_file(const std::string& path);

}  // namespace cpglab::ad
