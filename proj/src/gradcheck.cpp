#include "mbdf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mbdf {

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(-scale, scale);
    return m;
}

Vector random_vector(std::size_t n, Rng& rng, double scale) {
    Vector v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

double weighted_sum(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

Matrix as_row(const Vector& v) { return Matrix(1, v.size(), v); }

// A field of the instance, viewed as a matrix that can be read and replaced.
struct Field {
    const char* name;
    std::function<Matrix(const AAFParams&, const AAFInput&)> get;
    std::function<void(AAFParams&, AAFInput&, const Matrix&)> set;
    std::function<Matrix(const AAFGradients&)> grad;
};

std::vector<Field> fields() {
    auto vec_set = [](Vector& dst, const Matrix& m) {
        dst.assign(m.values().begin(), m.values().end());
    };
    return {
        {"w_image", [](auto& p, auto&) { return p.w_image; },
         [](auto& p, auto&, const Matrix& m) { p.w_image = m; },
         [](const AAFGradients& g) { return g.params.w_image; }},
        {"b_image", [](auto& p, auto&) { return as_row(p.b_image); },
         [vec_set](auto& p, auto&, const Matrix& m) { vec_set(p.b_image, m); },
         [](const AAFGradients& g) { return as_row(g.params.b_image); }},
        {"w_point", [](auto& p, auto&) { return p.w_point; },
         [](auto& p, auto&, const Matrix& m) { p.w_point = m; },
         [](const AAFGradients& g) { return g.params.w_point; }},
        {"b_point", [](auto& p, auto&) { return as_row(p.b_point); },
         [vec_set](auto& p, auto&, const Matrix& m) { vec_set(p.b_point, m); },
         [](const AAFGradients& g) { return as_row(g.params.b_point); }},
        {"w_out", [](auto& p, auto&) { return p.w_out; },
         [](auto& p, auto&, const Matrix& m) { p.w_out = m; },
         [](const AAFGradients& g) { return g.params.w_out; }},
        {"b_out", [](auto& p, auto&) { return as_row(p.b_out); },
         [vec_set](auto& p, auto&, const Matrix& m) { vec_set(p.b_out, m); },
         [](const AAFGradients& g) { return as_row(g.params.b_out); }},
        {"f_image", [](auto&, auto& in) { return in.f_image; },
         [](auto&, auto& in, const Matrix& m) { in.f_image = m; },
         [](const AAFGradients& g) { return g.input.f_image; }},
        {"f_point", [](auto&, auto& in) { return in.f_point; },
         [](auto&, auto& in, const Matrix& m) { in.f_point = m; },
         [](const AAFGradients& g) { return g.input.f_point; }},
        {"f_fused_prev", [](auto&, auto& in) { return in.f_fused_prev; },
         [](auto&, auto& in, const Matrix& m) { in.f_fused_prev = m; },
         [](const AAFGradients& g) { return g.input.f_fused_prev; }},
    };
}

}  // namespace

AAFParams random_aaf_params(const AAFShape& shape, Rng& rng, double scale) {
    AAFParams p;
    p.w_image = random_matrix(shape.gate_inputs(), 1, rng, scale);
    p.b_image = random_vector(1, rng, scale);
    p.w_point = random_matrix(shape.gate_inputs(), 1, rng, scale);
    p.b_point = random_vector(1, rng, scale);
    p.w_out = random_matrix(shape.head_inputs(), shape.out_channels, rng, scale);
    p.b_out = random_vector(shape.out_channels, rng, scale);
    return p;
}

AAFInput random_aaf_input(const AAFShape& shape, std::size_t n, Rng& rng, double scale) {
    return {random_matrix(n, shape.image_channels, rng, scale),
            random_matrix(n, shape.point_channels, rng, scale),
            random_matrix(n, shape.prev_channels, rng, scale)};
}

double relative_error(double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    return denom == 0.0 ? 0.0 : std::abs(analytic - numeric) / denom;
}

GradcheckReport run_aaf_gradcheck(const GradcheckOptions& opts) {
    const auto all = fields();
    GradcheckReport report;
    report.instances = opts.instances;
    for (const auto& f : all) report.groups.push_back({f.name, 0.0, 0});

    Rng rng(opts.seed);
    for (std::size_t inst = 0; inst < opts.instances; ++inst) {
        const std::size_t n = 1 + rng.below(opts.max_points);
        AAFShape shape;
        shape.image_channels = 1 + rng.below(opts.max_channels);
        shape.point_channels = 1 + rng.below(opts.max_channels);
        shape.prev_channels = 1 + rng.below(opts.max_channels);
        shape.out_channels = 1 + rng.below(opts.max_channels);
        const AAFParams params = random_aaf_params(shape, rng);
        const AAFInput input = random_aaf_input(shape, n, rng);
        const Matrix upstream = random_matrix(n, shape.out_channels, rng, 1.0);
        const AAFGradients analytic = aaf_backward(params, input, upstream);

        for (std::size_t fi = 0; fi < all.size(); ++fi) {
            const Field& field = all[fi];
            const auto objective = [&](const Matrix& probe) {
                AAFParams p = params;
                AAFInput in = input;
                field.set(p, in, probe);
                return weighted_sum(aaf_forward(p, in).f_fused, upstream);
            };
            const Matrix numeric = finite_diff_grad(objective, field.get(params, input), opts.eps);
            const Matrix exact = field.grad(analytic);
            GroupError& group = report.groups[fi];
            for (std::size_t k = 0; k < numeric.size(); ++k) {
                const double err = relative_error(exact.values()[k], numeric.values()[k]);
                group.max_relative_error = std::max(group.max_relative_error, err);
                report.max_relative_error = std::max(report.max_relative_error, err);
            }
            group.entries += numeric.size();
        }
    }
    return report;
}

}  // namespace mbdf
