// mbdf: command-line front end for the fusion/sampling/loss library.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbdf/commands.hpp"
#include "mbdf/config.hpp"
#include "mbdf/errors.hpp"
#include "mbdf/kitti.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void emit(const std::string& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw mbdf::IoError("cannot create " + out_path);
    out << report;
    if (!out) throw mbdf::IoError("failed writing " + out_path);
}

std::vector<double> parse_lambdas(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--lambdas", "'" + item + "' is not a number");
        }
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--lambdas", "needs at least one value");
    return out;
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mbdf - attention fusion, hybrid sampling and detection-loss toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "Flat key = value configuration file");
    std::map<std::string, std::string> overrides;
    for (const auto& key : mbdf::config_keys()) {
        app.add_option("--" + key, overrides[key], "Override config key '" + key + "'");
    }
    std::string out_path;
    app.add_option("--out", out_path, "Write the report here instead of stdout");

    auto* study = app.add_subcommand("sample-study", "Mean AAD and foreground fraction per lambda");
    std::string cloud_path, attention_path, labels_path, calib_path;
    std::size_t n = 256;
    std::size_t seed_index = 0;
    std::string lambdas_text = "1.0,1.2,1.4,1.6,2.0";
    study->add_option("--cloud", cloud_path, "Velodyne .bin scan (default: synthetic scene)");
    study->add_option("--attention", attention_path, "Per-point attention, one value per line");
    study->add_option("--labels", labels_path, "KITTI labels for the foreground mask");
    study->add_option("--calib", calib_path, "KITTI calibration for the foreground mask");
    study->add_option("--n", n, "Points to sample")->capture_default_str();
    study->add_option("--lambdas", lambdas_text, "Comma-separated lambda values")
        ->capture_default_str();
    study->add_option("--seed-index", seed_index, "FPS starting index")->capture_default_str();

    auto* grad = app.add_subcommand("gradcheck", "AAF backward pass vs finite differences");
    mbdf::GradcheckOptions gopts;
    grad->add_option("--instances", gopts.instances)->capture_default_str();
    grad->add_option("--max-points", gopts.max_points)->capture_default_str();
    grad->add_option("--max-channels", gopts.max_channels)->capture_default_str();
    grad->add_option("--eps", gopts.eps)->capture_default_str();

    auto* project = app.add_subcommand("project", "Project a scan into the image");
    std::size_t width = 0;
    std::size_t height = 0;
    project->add_option("--cloud", cloud_path, "Velodyne .bin scan")->required();
    project->add_option("--calib", calib_path, "KITTI calibration file")->required();
    project->add_option("--width", width, "Image width for the visibility test");
    project->add_option("--height", height, "Image height for the visibility test");

    auto* roi = app.add_subcommand("roi-demo", "Proposal selection and RoI pooling on a synthetic scene");
    mbdf::RoiDemoOptions ropts;
    roi->add_option("--image-channels", ropts.image_channels)->capture_default_str();
    roi->add_option("--point-channels", ropts.point_channels)->capture_default_str();
    roi->add_option("--fused-channels", ropts.fused_channels)->capture_default_str();

    auto* loss = app.add_subcommand("loss-eval", "Evaluate loss terms on a JSON fixture");
    std::string fixture_path;
    loss->add_option("--fixture", fixture_path, "JSON fixture")->required();

    auto* gen = app.add_subcommand("gen-scene", "Generate the configured synthetic scene");
    std::string cloud_out, attention_out;
    gen->add_option("--cloud-out", cloud_out, "Write the scan as a velodyne .bin");
    gen->add_option("--attention-out", attention_out, "Write attention, one value per line");

    app.add_subcommand("show-config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        mbdf::RunConfig cfg;
        if (!config_path.empty()) cfg = mbdf::load_config(config_path);
        for (const auto& key : mbdf::config_keys()) {
            if (app.count("--" + key) == 0) continue;
            try {
                mbdf::set_config_value(cfg, key, overrides[key]);
            } catch (const mbdf::ParseError& e) {
                std::cerr << "--" << key << ": " << e.what() << "\n";
                return kUsageError;
            }
        }

        if (*study) {
            mbdf::StudyInput input;
            if (cloud_path.empty()) {
                input = mbdf::synthetic_study_input(cfg.scene);
            } else {
                if (attention_path.empty()) {
                    std::cerr << "sample-study: --cloud requires --attention\n";
                    return kUsageError;
                }
                input = mbdf::load_study_input(cfg, cloud_path, attention_path,
                                               optional_path(labels_path), optional_path(calib_path));
            }
            emit(mbdf::cmd_sample_study(input, n, parse_lambdas(lambdas_text), seed_index), out_path);
        } else if (*grad) {
            gopts.seed = mbdf::subsystem_seed(cfg, mbdf::SeedStream::kParamInit);
            emit(mbdf::cmd_gradcheck(gopts), out_path);
        } else if (*project) {
            const auto cloud = mbdf::read_point_cloud_bin(cloud_path);
            emit(mbdf::cmd_project(cloud, mbdf::read_calib(calib_path), width, height), out_path);
        } else if (*roi) {
            emit(mbdf::cmd_roi_demo(cfg, ropts), out_path);
        } else if (*loss) {
            std::ifstream in(fixture_path);
            if (!in) throw mbdf::IoError("cannot open " + fixture_path);
            const auto fixture = nlohmann::json::parse(in);
            emit(mbdf::cmd_loss_eval(fixture, cfg), out_path);
        } else if (*gen) {
            emit(mbdf::cmd_gen_scene(cfg.scene, optional_path(cloud_out), optional_path(attention_out)),
                 out_path);
        } else {
            emit(mbdf::render_config(cfg), out_path);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const mbdf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
