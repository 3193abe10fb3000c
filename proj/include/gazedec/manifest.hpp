#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gazedec {

inline constexpr const char* kToolVersion = "gazedec 0.1.0";

// Reproducibility record written by every artifact-producing command.
// Contains no timestamps, so re-running a command rewrites it
// byte-identically.
struct RunManifest {
    std::string command;
    uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> input_hashes; // path -> fnv1a64 hex
    std::vector<std::string> outputs;

    void add_input(const std::string& path); // hashes the file content
    void write(const std::string& out_dir) const;
};

std::string hash_file_hex(const std::string& path);

} // namespace gazedec
