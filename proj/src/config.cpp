#include "mbdf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <system_error>

#include "mbdf/errors.hpp"
#include "mbdf/random.hpp"

namespace mbdf {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("config key '" + std::string(key) + "': '" + std::string(text) +
                         "' is not a number");
    }
    return v;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("config key '" + std::string(key) + "': '" + std::string(text) +
                         "' is not a non-negative integer");
    }
    return v;
}

std::vector<std::string_view> split_commas(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        out.push_back(trim(text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

Range to_range(std::string_view key, std::string_view text) {
    const auto parts = split_commas(text);
    if (parts.size() != 2) {
        throw ParseError("config key '" + std::string(key) + "' expects 'min,max'");
    }
    Range r{to_double(key, parts[0]), to_double(key, parts[1])};
    if (!(r.min < r.max)) {
        throw ParseError("config key '" + std::string(key) + "' needs min < max");
    }
    return r;
}

struct KeyHandler {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
KeyHandler real_key(Field field) {
    return {[field](RunConfig& c, std::string_view k, std::string_view v) {
                field(c) = to_double(k, v);
            },
            [field](const RunConfig& c) { return format_double(field(c)); }};
}

template <typename Field>
KeyHandler count_key(Field field) {
    return {[field](RunConfig& c, std::string_view k, std::string_view v) {
                field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(to_unsigned(k, v));
            },
            [field](const RunConfig& c) {
                return std::to_string(field(c));
            }};
}

template <typename Field>
KeyHandler range_key(Field field) {
    return {[field](RunConfig& c, std::string_view k, std::string_view v) {
                field(c) = to_range(k, v);
            },
            [field](const RunConfig& c) {
                const Range& r = field(c);
                return format_double(r.min) + "," + format_double(r.max);
            }};
}

using Table = std::vector<std::pair<std::string, KeyHandler>>;

const Table& table() {
    static const Table t = [] {
        Table t;
        t.emplace_back("crop_x", range_key([](auto& c) -> auto& { return c.crop_x; }));
        t.emplace_back("crop_y", range_key([](auto& c) -> auto& { return c.crop_y; }));
        t.emplace_back("crop_z", range_key([](auto& c) -> auto& { return c.crop_z; }));
        t.emplace_back("input_points",
                       count_key([](auto& c) -> auto& { return c.input_points; }));
        t.emplace_back(
            "sa_samples",
            KeyHandler{[](RunConfig& c, std::string_view k, std::string_view v) {
                           std::vector<std::size_t> out;
                           for (auto part : split_commas(v)) out.push_back(to_unsigned(k, part));
                           c.sa_samples = std::move(out);
                       },
                       [](const RunConfig& c) {
                           std::string s;
                           for (std::size_t i = 0; i < c.sa_samples.size(); ++i) {
                               if (i) s += ",";
                               s += std::to_string(c.sa_samples[i]);
                           }
                           return s;
                       }});
        t.emplace_back("lambda", real_key([](auto& c) -> auto& { return c.lambda; }));
        t.emplace_back("pre_nms_top", count_key([](auto& c) -> auto& {
                           return c.proposals.pre_nms_top;
                       }));
        t.emplace_back("nms_threshold", real_key([](auto& c) -> auto& {
                           return c.proposals.nms_threshold;
                       }));
        t.emplace_back("post_nms_keep",
                       count_key([](auto& c) -> auto& { return c.proposals.keep; }));
        t.emplace_back("roi_enlarge",
                       real_key([](auto& c) -> auto& { return c.roi.enlarge; }));
        t.emplace_back("roi_points",
                       count_key([](auto& c) -> auto& { return c.roi.n_points; }));
        t.emplace_back("focal_alpha",
                       real_key([](auto& c) -> auto& { return c.focal.alpha; }));
        t.emplace_back("focal_gamma",
                       real_key([](auto& c) -> auto& { return c.focal.gamma; }));
        t.emplace_back("bin_x_range",
                       real_key([](auto& c) -> auto& { return c.bins.x.half_range; }));
        t.emplace_back("bin_x_count",
                       count_key([](auto& c) -> auto& { return c.bins.x.count; }));
        t.emplace_back("bin_z_range",
                       real_key([](auto& c) -> auto& { return c.bins.z.half_range; }));
        t.emplace_back("bin_z_count",
                       count_key([](auto& c) -> auto& { return c.bins.z.count; }));
        t.emplace_back("bin_theta_count", count_key([](auto& c) -> auto& {
                           return c.bins.theta.count;
                       }));
        t.emplace_back("scene_clusters",
                       count_key([](auto& c) -> auto& { return c.scene.clusters; }));
        t.emplace_back("scene_points_per_cluster", count_key([](auto& c) -> auto& {
                           return c.scene.points_per_cluster;
                       }));
        t.emplace_back("scene_cluster_radius", real_key([](auto& c) -> auto& {
                           return c.scene.cluster_radius;
                       }));
        t.emplace_back("scene_background_points", count_key([](auto& c) -> auto& {
                           return c.scene.background_points;
                       }));
        t.emplace_back("scene_background_extent", real_key([](auto& c) -> auto& {
                           return c.scene.background_extent;
                       }));
        t.emplace_back("scene_attention_contrast", real_key([](auto& c) -> auto& {
                           return c.scene.attention_contrast;
                       }));
        t.emplace_back("scene_seed",
                       count_key([](auto& c) -> auto& { return c.scene.seed; }));
        t.emplace_back("seed", count_key([](auto& c) -> auto& { return c.seed; }));
        return t;
    }();
    return t;
}

const KeyHandler& handler(std::string_view key) {
    for (const auto& [name, h] : table()) {
        if (name == key) return h;
    }
    throw ParseError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
    for (const auto& [name, h] : table()) {
        if (h.get(a) != h.get(b)) return false;
    }
    return true;
}

std::uint64_t subsystem_seed(const RunConfig& cfg, SeedStream stream) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(stream));
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, h] : table()) k.push_back(name);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    handler(key).set(cfg, key, value);
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
    return handler(key).get(cfg);
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

std::string render_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [name, h] : table()) {
        out += name + " = " + h.get(cfg) + "\n";
    }
    return out;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace mbdf
