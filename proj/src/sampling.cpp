#include "mbdf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

void check_count(std::size_t cloud_size, std::size_t n) {
    if (n == 0 || n > cloud_size) {
        throw InvalidCount("cannot sample " + std::to_string(n) + " of " +
                           std::to_string(cloud_size) + " points");
    }
}

}  // namespace

std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t n,
                                                 std::size_t seed_index) {
    check_count(cloud.size(), n);
    if (seed_index >= cloud.size()) {
        throw InvalidArgument("FPS seed index " + std::to_string(seed_index) + " out of range");
    }
    std::vector<double> min_dist(cloud.size(), std::numeric_limits<double>::infinity());
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::size_t current = seed_index;
    for (;;) {
        chosen.push_back(current);
        min_dist[current] = -1.0;
        if (chosen.size() == n) break;

        const Point3& c = cloud.points[current];
        std::size_t best = 0;
        double best_dist = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (min_dist[i] < 0.0) continue;
            min_dist[i] = std::min(min_dist[i], squared_distance(cloud.points[i], c));
            // Strict comparison keeps the lower index on ties.
            if (min_dist[i] > best_dist) {
                best_dist = min_dist[i];
                best = i;
            }
        }
        current = best;
    }
    return chosen;
}

std::size_t candidate_count(std::size_t cloud_size, std::size_t n, double lambda) {
    check_count(cloud_size, n);
    const double ratio = static_cast<double>(cloud_size) / static_cast<double>(n);
    // Relative slack so that lambda = N/n computed in floating point is accepted.
    constexpr double slack = 1e-9;
    if (!(lambda >= 1.0 - slack && lambda <= ratio * (1.0 + slack))) {
        throw InvalidArgument("lambda " + std::to_string(lambda) + " outside [1, " +
                              std::to_string(ratio) + "]");
    }
    const double raw = lambda * static_cast<double>(n);
    // lambda * n like 1.4 * 5 evaluates to 7.000000000000001; absorb that.
    const auto m = static_cast<std::size_t>(std::ceil(raw - slack * std::max(1.0, raw)));
    return std::clamp<std::size_t>(m, n, cloud_size);
}

std::vector<std::size_t> hybrid_sample(const PointCloud& cloud, std::span<const double> attention,
                                       const SamplerConfig& cfg) {
    if (attention.size() != cloud.size()) {
        throw DimensionMismatch("attention has " + std::to_string(attention.size()) +
                                " scores for " + std::to_string(cloud.size()) + " points");
    }
    const std::size_t m = candidate_count(cloud.size(), cfg.n, cfg.lambda);
    std::vector<std::size_t> candidates = farthest_point_sampling(cloud, m, cfg.seed_index);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (attention[a] != attention[b]) return attention[a] > attention[b];
        return a < b;
    });
    candidates.resize(cfg.n);
    return candidates;
}

AadResult aad(const PointCloud& cloud, std::span<const std::size_t> sampled, bool root) {
    constexpr std::size_t k = 3;
    if (sampled.size() < k + 1) {
        throw TooFewPoints("AAD needs at least 4 sampled points, got " +
                           std::to_string(sampled.size()));
    }
    AadResult out;
    out.per_point.resize(sampled.size());
    std::vector<double> d;
    d.reserve(sampled.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        d.clear();
        const Point3& p = cloud.points.at(sampled[i]);
        for (std::size_t j = 0; j < sampled.size(); ++j) {
            if (j == i) continue;
            const double sq = squared_distance(p, cloud.points.at(sampled[j]));
            d.push_back(root ? std::sqrt(sq) : sq);
        }
        std::partial_sort(d.begin(), d.begin() + k, d.end());
        out.per_point[i] = (d[0] + d[1] + d[2]) / 3.0;
    }
    // Sum in index order so the mean depends only on the sampled set.
    std::vector<std::size_t> order(sampled.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sampled[a] < sampled[b]; });
    double total = 0.0;
    for (auto i : order) total += out.per_point[i];
    out.mean = total / static_cast<double>(sampled.size());
    return out;
}

std::vector<SweepRow> lambda_sweep(const PointCloud& cloud, std::span<const double> attention,
                                   std::size_t n, std::span<const double> lambdas,
                                   std::size_t seed_index) {
    std::vector<double> sorted(lambdas.begin(), lambdas.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<SweepRow> rows;
    rows.reserve(sorted.size());
    for (double lambda : sorted) {
        SweepRow row;
        row.lambda = lambda;
        row.sampled = hybrid_sample(cloud, attention, {n, lambda, seed_index});
        row.mean_aad = aad(cloud, row.sampled).mean;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mbdf
