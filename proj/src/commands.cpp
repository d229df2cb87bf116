#include "mbdf/commands.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mbdf/errors.hpp"
#include "mbdf/fusion.hpp"
#include "mbdf/kitti.hpp"
#include "mbdf/losses.hpp"
#include "mbdf/random.hpp"
#include "mbdf/roi.hpp"

namespace mbdf {

namespace {

using nlohmann::json;

std::vector<double> read_attention_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            std::size_t used = 0;
            const double v = std::stod(line, &used);
            if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw ParseError("");
            if (!(v > 0.0 && v < 1.0)) throw ParseError("");
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": expected an attention score in (0, 1)");
        }
    }
    return out;
}

std::vector<double> json_numbers(const json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string("fixture: '") + what + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParseError(std::string("fixture: '") + what + "' holds a non-number");
        out.push_back(v.get<double>());
    }
    return out;
}

const json& require_key(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw MissingKey(std::string("fixture is missing '") + key + "'");
    }
    return j.at(key);
}

Matrix random_features(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

json box_to_json(const Box3D& b) {
    return {{"center", {b.center().x, b.center().y, b.center().z}},
            {"size", {b.l(), b.h(), b.w()}},
            {"yaw", b.yaw()}};
}

Box3D box_from_json(const json& j) {
    const auto c = json_numbers(require_key(j, "center"), "center");
    const auto s = json_numbers(require_key(j, "size"), "size");
    const json& yaw = require_key(j, "yaw");
    if (c.size() != 3 || s.size() != 3 || !yaw.is_number()) {
        throw ParseError("fixture: a box needs center[3], size[3] (l, h, w) and yaw");
    }
    try {
        return {{c[0], c[1], c[2]}, s[0], s[1], s[2], yaw.get<double>()};
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("fixture box: ") + e.what());
    }
}

StudyInput synthetic_study_input(const SyntheticSceneSpec& spec) {
    SyntheticScene scene = generate_scene(spec);
    return {std::move(scene.cloud), std::move(scene.attention), std::move(scene.foreground)};
}

StudyInput load_study_input(const RunConfig& cfg, const std::filesystem::path& cloud_path,
                            const std::filesystem::path& attention_path,
                            const std::optional<std::filesystem::path>& labels,
                            const std::optional<std::filesystem::path>& calib) {
    PointCloud raw = read_point_cloud_bin(cloud_path);
    const auto attention = read_attention_file(attention_path);
    if (attention.size() != raw.size()) {
        throw DimensionMismatch("attention file has " + std::to_string(attention.size()) +
                                " scores for " + std::to_string(raw.size()) + " points");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& p = raw.points[i];
        if (cfg.crop_x.contains(p.x) && cfg.crop_y.contains(p.y) && cfg.crop_z.contains(p.z)) {
            keep.push_back(i);
        }
    }
    if (keep.size() > cfg.input_points) {
        Rng rng(subsystem_seed(cfg, SeedStream::kInputSubsample));
        const auto pick = rng.sample_without_replacement(keep.size(), cfg.input_points);
        std::vector<std::size_t> chosen;
        for (auto k : pick) chosen.push_back(keep[k]);
        keep = std::move(chosen);
    }

    StudyInput out;
    out.cloud = raw.select(keep);
    for (auto i : keep) out.attention.push_back(attention[i]);
    if (labels && calib) {
        const auto boxes = read_labels(*labels);
        const PointCloud rect = transform_cloud(out.cloud, read_kitti_calib(*calib).lidar_to_rect());
        out.foreground.assign(out.cloud.size(), false);
        for (const auto& b : boxes) {
            for (auto i : points_in_box(rect, b.box)) out.foreground[i] = true;
        }
    } else {
        for (double a : out.attention) out.foreground.push_back(a > 0.5);
    }
    return out;
}

std::string cmd_sample_study(const StudyInput& input, std::size_t n,
                             const std::vector<double>& lambdas, std::size_t seed_index) {
    if (input.foreground.size() != input.cloud.size()) {
        throw DimensionMismatch("foreground mask does not match the cloud");
    }
    const auto rows = lambda_sweep(input.cloud, input.attention, n, lambdas, seed_index);
    std::string csv = "lambda,mean_aad,fg_fraction\n";
    for (const auto& row : rows) {
        const auto fg = std::count_if(row.sampled.begin(), row.sampled.end(),
                                      [&](std::size_t i) { return input.foreground[i]; });
        const double fraction = static_cast<double>(fg) / static_cast<double>(row.sampled.size());
        csv += format_double(row.lambda) + "," + format_double(row.mean_aad) + "," +
               format_double(fraction) + "\n";
    }
    return csv;
}

std::string cmd_gradcheck(const GradcheckOptions& opts, double tolerance) {
    const GradcheckReport report = run_aaf_gradcheck(opts);
    json groups = json::object();
    for (const auto& g : report.groups) {
        groups[g.name] = {{"max_relative_error", g.max_relative_error}, {"entries", g.entries}};
    }
    const json out = {
        {"seed", opts.seed},
        {"instances", report.instances},
        {"max_points", opts.max_points},
        {"max_channels", opts.max_channels},
        {"eps", opts.eps},
        {"tolerance", tolerance},
        {"groups", groups},
        {"max_relative_error", report.max_relative_error},
        {"pass", report.max_relative_error < tolerance},
    };
    return out.dump(2) + "\n";
}

std::string cmd_project(const PointCloud& cloud, const ProjectionMatrix& m, std::size_t width,
                        std::size_t height) {
    const bool bounded = width > 0 && height > 0;
    std::string csv = "index,u,v,depth,visible\n";
    const auto& r = m.rows();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        const auto proj = project_point(p, m);
        csv += std::to_string(i) + ",";
        if (!proj) {
            const double d = r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + r[2][3];
            csv += ",," + format_double(d) + ",0\n";
            continue;
        }
        bool visible = true;
        if (bounded) {
            visible = proj->u >= 0.0 && proj->u <= static_cast<double>(width - 1) &&
                      proj->v >= 0.0 && proj->v <= static_cast<double>(height - 1);
        }
        csv += format_double(proj->u) + "," + format_double(proj->v) + "," +
               format_double(proj->depth) + "," + (visible ? "1" : "0") + "\n";
    }
    return csv;
}

std::string cmd_roi_demo(const RunConfig& cfg, const RoiDemoOptions& opts) {
    const SyntheticScene scene = generate_scene(cfg.scene);
    const std::size_t n = scene.cloud.size();

    // Point-wise features: random single-modal features, fused through one AAF block.
    Rng init(subsystem_seed(cfg, SeedStream::kParamInit));
    const AAFShape shape{opts.image_channels, opts.point_channels, opts.fused_channels,
                         opts.fused_channels};
    const AAFParams params = random_aaf_params(shape, init);
    AAFInput input{random_features(n, shape.image_channels, init),
                   random_features(n, shape.point_channels, init),
                   random_features(n, shape.prev_channels, init)};
    const AAFOutput fused = aaf_forward(params, input);

    // Proposals: jittered copies of each object plus random background boxes.
    Rng prng(subsystem_seed(cfg, SeedStream::kProposals));
    std::vector<Proposal> proposals;
    for (const auto& gt : scene.boxes) {
        for (std::size_t k = 0; k < opts.proposals_per_object; ++k) {
            const Point3 c{gt.center().x + 0.15 * prng.normal(), gt.center().y + 0.05 * prng.normal(),
                           gt.center().z + 0.15 * prng.normal()};
            const double jitter = 1.0 + 0.1 * prng.uniform(-1.0, 1.0);
            proposals.push_back({Box3D(c, gt.l() * jitter, gt.h(), gt.w() * jitter,
                                       gt.yaw() + 0.1 * prng.normal()),
                                 prng.uniform(0.6, 1.0)});
        }
    }
    const double half = cfg.scene.background_extent / 2.0;
    for (std::size_t k = 0; k < opts.background_proposals; ++k) {
        const Point3 c{prng.uniform(-half, half), 0.0,
                       prng.uniform(0.0, cfg.scene.background_extent)};
        proposals.push_back({Box3D(c, prng.uniform(0.5, 4.0), prng.uniform(0.5, 2.0),
                                   prng.uniform(0.5, 2.0), prng.uniform(-3.14, 3.14)),
                             prng.uniform(0.0, 0.6)});
    }

    const auto selected = select_proposals(proposals, cfg.proposals);
    const std::uint64_t roi_seed = subsystem_seed(cfg, SeedStream::kRoiSubsample);
    json rois = json::array();
    std::size_t width = 0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto pooled = roi_pooled_fusion(selected[i], scene.cloud, input.f_image,
                                              input.f_point, fused.f_fused, cfg.roi, roi_seed + i);
        width = pooled.features.cols();
        double best_iou = 0.0;
        for (const auto& gt : scene.boxes) best_iou = std::max(best_iou, iou_3d(selected[i].box, gt));
        rois.push_back({{"box", box_to_json(selected[i].box)},
                        {"score", selected[i].score},
                        {"valid_count", pooled.valid_count},
                        {"points_in_original_box", points_in_box(scene.cloud, selected[i].box).size()},
                        {"best_gt_iou_3d", best_iou}});
    }
    const json out = {
        {"points", n},
        {"ground_truth_boxes", scene.boxes.size()},
        {"proposals_in", proposals.size()},
        {"selected", selected.size()},
        {"pre_nms_top", cfg.proposals.pre_nms_top},
        {"nms_threshold", cfg.proposals.nms_threshold},
        {"keep", cfg.proposals.keep},
        {"enlarge", cfg.roi.enlarge},
        {"roi_shape", {cfg.roi.n_points, width}},
        {"rois", rois},
    };
    return out.dump(2) + "\n";
}

std::string cmd_loss_eval(const json& fixture, const RunConfig& cfg) {
    json out = json::object();
    double cls_sum = 0.0;
    double reg_total = 0.0;

    if (fixture.contains("focal")) {
        const json& f = fixture.at("focal");
        FocalConfig fc = cfg.focal;
        if (f.contains("alpha")) fc.alpha = f.at("alpha").get<double>();
        if (f.contains("gamma")) fc.gamma = f.at("gamma").get<double>();
        json items = json::array();
        for (double c : json_numbers(require_key(f, "probabilities"), "probabilities")) {
            const double loss = focal_loss(c, fc);
            cls_sum += loss;
            items.push_back({{"c_t", c}, {"loss", loss}});
        }
        out["focal"] = {{"alpha", fc.alpha}, {"gamma", fc.gamma}, {"items", items}, {"sum", cls_sum}};
    }

    if (fixture.contains("regression")) {
        const json& r = fixture.at("regression");
        const Box3D anchor = box_from_json(require_key(r, "anchor_box"));
        const Box3D gt = box_from_json(require_key(r, "gt_box"));
        const Box3D pred_box = box_from_json(require_key(r, "pred_box"));
        const json& logits = require_key(r, "logits");
        RegressionPrediction pred;
        pred.logits_x = json_numbers(require_key(logits, "x"), "logits.x");
        pred.logits_z = json_numbers(require_key(logits, "z"), "logits.z");
        pred.logits_theta = json_numbers(require_key(logits, "theta"), "logits.theta");
        const auto res = json_numbers(require_key(r, "residuals"), "residuals");
        if (res.size() != kBoxQuantities) {
            throw ParseError("fixture: 'residuals' needs 7 values (x, y, z, l, h, w, theta)");
        }
        std::copy(res.begin(), res.end(), pred.residuals.begin());

        const BoxTarget target = encode_box_target(gt, anchor, cfg.bins);
        const RegressionTerms terms = regression_loss(pred, target, pred_box, gt, cfg.bins);
        reg_total = terms.total();
        out["regression"] = {
            {"target_bins", {{"x", target.bin_x}, {"z", target.bin_z}, {"theta", target.bin_theta}}},
            {"target_residuals", target.residuals},
            {"iou_bev", iou_bev(pred_box, gt)},
            {"bin_cross_entropy", terms.bin_ce},
            {"smooth_l1", terms.residual},
            {"iou_regularizer", terms.iou},
            {"total", reg_total},
        };
    }

    // Stage terms default to this fixture's classification and regression
    // losses for the first stage and zero for the second.
    json stages = {{"rpn_cls", cls_sum}, {"rpn_reg", reg_total}, {"rcnn_cls", 0.0}, {"rcnn_reg", 0.0}};
    if (fixture.contains("stage_terms")) {
        for (auto& [key, value] : stages.items()) {
            value = require_key(fixture.at("stage_terms"), key.c_str()).get<double>();
        }
    }
    out["stage_terms"] = stages;
    out["total"] = total_loss(stages["rpn_cls"].get<double>(), stages["rpn_reg"].get<double>(),
                              stages["rcnn_cls"].get<double>(), stages["rcnn_reg"].get<double>());
    return out.dump(2) + "\n";
}

std::string cmd_gen_scene(const SyntheticSceneSpec& spec,
                          const std::optional<std::filesystem::path>& cloud_out,
                          const std::optional<std::filesystem::path>& attention_out) {
    const SyntheticScene scene = generate_scene(spec);
    if (cloud_out) write_point_cloud_bin(*cloud_out, scene.cloud);
    if (attention_out) {
        std::ofstream out(*attention_out);
        if (!out) throw IoError("cannot create " + attention_out->string());
        for (double a : scene.attention) out << format_double(a) << "\n";
    }
    json boxes = json::array();
    for (const auto& b : scene.boxes) boxes.push_back(box_to_json(b));
    const auto fg = std::count(scene.foreground.begin(), scene.foreground.end(), true);
    const json out = {
        {"seed", spec.seed},
        {"points", scene.cloud.size()},
        {"foreground_points", fg},
        {"background_points", scene.cloud.size() - static_cast<std::size_t>(fg)},
        {"attention_foreground", 0.5 + spec.attention_contrast / 2.0},
        {"attention_background", 0.5 - spec.attention_contrast / 2.0},
        {"boxes", boxes},
    };
    return out.dump(2) + "\n";
}

}  // namespace mbdf
