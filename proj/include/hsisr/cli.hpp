#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hsisr/trainer.hpp"

namespace hsisr {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "HSISR_OUTPUT_ROOT";

struct RunConfig {
    ScaleConfig scale;
    NetworkConfig network;
    TrainConfig train;
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> unlabeled_manifest;
    std::optional<std::filesystem::path> rgb_manifest;
    std::optional<std::filesystem::path> crf;
    /// Spectral extent of the cubes, used to place band centres on the CRF.
    double band_first_nm = 400.0;
    double band_last_nm = 700.0;
    std::filesystem::path output_dir;

    /// Cross-field checks (tau agreement, paths present).
    void validate() const;
};

/// Parses a JSON run config. Relative paths resolve against the file's directory.
/// network.tau and network.feature_width default to scale.tau and train.feature_width.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);

/// Manifest plus the optional unlabeled / RGB manifests merged into one.
DatasetManifest load_run_manifest(const RunConfig& config);

/// Output directory from, in order: explicit value, $HSISR_OUTPUT_ROOT/<name>, ./runs/<name>.
std::filesystem::path resolve_output_dir(const std::filesystem::path& explicit_dir, const std::string& name);

/// Entry point shared by the executable. Returns the process exit code:
/// 0 success, 1 validation error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace hsisr
