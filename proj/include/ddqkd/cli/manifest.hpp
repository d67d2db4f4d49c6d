#pragma once

// Run manifest: what produced an output directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ddqkd::cli {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    std::string config_source;
    std::string config_sha256;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<std::string> outputs;  // file names relative to the output directory
};

// Library versions and the active SIMD kernels, as `name: value` lines.
std::vector<std::pair<std::string, std::string>> build_info();

// Writes manifest.txt into `dir`, hashing every listed output.
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

}  // namespace ddqkd::cli
