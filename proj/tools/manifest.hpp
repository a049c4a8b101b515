#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rome_cli {

std::string sha256_file(const std::string& path);

/// Sidecar written next to every output: `<out>.manifest.json`.
struct RunManifest {
    std::vector<std::string> argv;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    void write(const std::string& primary_output) const;
};

}  // namespace rome_cli
