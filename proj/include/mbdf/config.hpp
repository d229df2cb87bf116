#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mbdf/geometry.hpp"
#include "mbdf/losses.hpp"
#include "mbdf/roi.hpp"
#include "mbdf/scene.hpp"

namespace mbdf {

/// Pipeline settings. Defaults are the detector's published operating point.
struct RunConfig {
    Range crop_x{0.0, 70.4};
    Range crop_y{-40.0, 40.0};
    Range crop_z{-3.0, 1.0};
    std::size_t input_points = 16384;
    std::vector<std::size_t> sa_samples{4096, 1024, 256, 64};
    double lambda = 1.4;
    ProposalSelection proposals{};
    RoIPooling roi{};
    FocalConfig focal{};
    BinConfig bins{};
    SyntheticSceneSpec scene{};
    std::uint64_t seed = 0;

    friend bool operator==(const RunConfig& a, const RunConfig& b);
};

// Seed streams for derive_seed(config.seed, stream).
enum class SeedStream : std::uint64_t {
    kScene = 1,
    kRoiSubsample = 2,
    kParamInit = 3,
    kInputSubsample = 4,
    kProposals = 5,
};

std::uint64_t subsystem_seed(const RunConfig& cfg, SeedStream stream);

/// Every recognised key, in render order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Throws ParseError on unknown keys or bad
/// values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Flat "key = value" text; '#' starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});
std::string render_config(const RunConfig& cfg);

RunConfig load_config(const std::string& path, RunConfig base = {});

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace mbdf
