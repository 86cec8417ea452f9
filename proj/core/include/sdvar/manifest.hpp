#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdvar {

std::string sha256_file(const std::string& path);
std::string sha256_string(const std::string& data);

// Provenance record for a workflow run: equal manifests imply byte-identical
// outputs. Input and output files are hashed and keyed by basename; the
// config is hashed over its raw bytes.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::string& config_path, std::uint64_t seed,
                    int workers, const std::vector<std::string>& input_files,
                    const std::vector<std::string>& output_files);

std::string library_version();

}  // namespace sdvar
