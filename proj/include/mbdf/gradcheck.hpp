#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mbdf/fusion.hpp"
#include "mbdf/random.hpp"

namespace mbdf {

/// Uniform [-scale, scale] parameters.
AAFParams random_aaf_params(const AAFShape& shape, Rng& rng, double scale = 0.1);

/// Uniform [-scale, scale] inputs with n rows.
AAFInput random_aaf_input(const AAFShape& shape, std::size_t n, Rng& rng, double scale = 1.0);

/// |a - b| / max(|a|, |b|); zero when both are zero.
double relative_error(double analytic, double numeric);

struct GradcheckOptions {
    std::uint64_t seed = 0;
    std::size_t instances = 100;
    std::size_t max_points = 4;
    std::size_t max_channels = 3;
    double eps = 1e-5;
};

struct GroupError {
    std::string name;  // parameter or input field
    double max_relative_error = 0.0;
    std::size_t entries = 0;
};

struct GradcheckReport {
    std::vector<GroupError> groups;  // fixed field order
    double max_relative_error = 0.0;
    std::size_t instances = 0;
};

/// Compares aaf_backward against central differences of
/// sum(upstream * f_fused) on random instances.
GradcheckReport run_aaf_gradcheck(const GradcheckOptions& opts);

}  // namespace mbdf
