#pragma once

#include "elastica/config.hpp"
#include "elastica/flow.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

namespace elastica {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int stalled = 2;
inline constexpr int failure = 3;
} // namespace exit_code

/// Header of trace.csv.
extern const char* const kTraceHeader;

std::string format_trace_row(const TraceRow& row);

/// Streams trace rows and snapshots of one run into a directory.
class RunWriter : public FlowObserver {
public:
    RunWriter(const std::filesystem::path& dir, const ModelParams& params, const Grid& grid);

    void on_trace(const TraceRow& row) override;
    void on_snapshot(const Snapshot& snap) override;

private:
    std::filesystem::path dir_;
    ModelParams params_;
    Grid grid_;
    std::ofstream trace_;
};

/// Writes a state file with the extra kappa, x, y columns.
void write_snapshot(const State& state, const Grid& grid, const std::filesystem::path& path);

/// Output directory: ELASTICA_OUT if set, else the config's out_dir.
std::filesystem::path resolve_out_dir(const RunConfig& cfg);

int cmd_flow(const std::filesystem::path& config_path);
int cmd_flow(const std::vector<std::filesystem::path>& config_paths, int jobs);
int cmd_minimize(const std::filesystem::path& config_path);
int cmd_check(const std::filesystem::path& state_path, const std::filesystem::path& config_path);
/// Writes the initial state described by a config.
int cmd_init(const std::filesystem::path& config_path, const std::filesystem::path& state_path);

int cli_main(int argc, char** argv);

} // namespace elastica
