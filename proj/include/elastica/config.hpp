#pragma once

#include "elastica/flow.hpp"
#include "elastica/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace elastica {

/// Parsed run configuration (flat `key = value` file).
struct RunConfig {
    ModelParams model;
    int n = 0;
    FlowConfig flow;
    std::string initial_kind;
    std::vector<double> initial_params;
    std::string initial_file;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::filesystem::path base_dir; ///< directory of the config file, for relative paths

    /// All keys with their resolved values (defaults filled in), as text.
    std::map<std::string, std::string> resolved() const;
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Builds the initial state described by the config.
State build_initial(const RunConfig& cfg, const Grid& grid);

} // namespace elastica
