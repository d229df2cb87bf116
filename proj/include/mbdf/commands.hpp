#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mbdf/config.hpp"
#include "mbdf/gradcheck.hpp"
#include "mbdf/sampling.hpp"

namespace mbdf {

// Report producers behind the CLI subcommands. Each returns the full report
// text; identical arguments give byte-identical output.

struct StudyInput {
    PointCloud cloud;
    AttentionScores attention;
    std::vector<bool> foreground;
};

StudyInput synthetic_study_input(const SyntheticSceneSpec& spec);

/// Loads a scan plus per-point attention (one value per line). The scan is
/// cropped to the configured range and, when larger than the input budget,
/// subsampled at random. Foreground is "inside any label box" when labels and
/// calibration are given, otherwise attention > 0.5.
StudyInput load_study_input(const RunConfig& cfg, const std::filesystem::path& cloud,
                            const std::filesystem::path& attention,
                            const std::optional<std::filesystem::path>& labels,
                            const std::optional<std::filesystem::path>& calib);

/// CSV "lambda,mean_aad,fg_fraction", one row per lambda in ascending order.
std::string cmd_sample_study(const StudyInput& input, std::size_t n,
                             const std::vector<double>& lambdas, std::size_t seed_index = 0);

/// JSON report of max relative error per parameter/input group.
std::string cmd_gradcheck(const GradcheckOptions& opts, double tolerance = 1e-5);

/// CSV "index,u,v,depth,visible". u and v are empty for points behind the
/// camera. With a positive width and height, visible also requires the pixel
/// to fall inside the image.
std::string cmd_project(const PointCloud& cloud, const ProjectionMatrix& m, std::size_t width = 0,
                        std::size_t height = 0);

struct RoiDemoOptions {
    std::size_t image_channels = 4;
    std::size_t point_channels = 4;
    std::size_t fused_channels = 8;
    std::size_t proposals_per_object = 8;
    std::size_t background_proposals = 32;
};

/// Synthetic end-to-end run of proposal selection and RoI pooling; JSON summary.
std::string cmd_roi_demo(const RunConfig& cfg, const RoiDemoOptions& opts = {});

/// Evaluates every loss term on a JSON fixture; JSON result.
std::string cmd_loss_eval(const nlohmann::json& fixture, const RunConfig& cfg);

/// Generates the configured synthetic scene. Writes the cloud as a velodyne
/// .bin and the attention as text when paths are given; returns a JSON summary.
std::string cmd_gen_scene(const SyntheticSceneSpec& spec,
                          const std::optional<std::filesystem::path>& cloud_out,
                          const std::optional<std::filesystem::path>& attention_out);

nlohmann::json box_to_json(const Box3D& b);
Box3D box_from_json(const nlohmann::json& j);

}  // namespace mbdf
