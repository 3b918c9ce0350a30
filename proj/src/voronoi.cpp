#include "mhp/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mhp/error.hpp"
#include "mhp/kernels.hpp"

namespace mhp::voronoi {

namespace {

void check_samples(const PointSet& generators, const PointSet& samples, const LossKind& loss) {
    if (generators.empty()) throw ValidationError("tessellate: at least one generator is required");
    for (double v : samples.flat()) {
        if (!std::isfinite(v)) throw ValidationError("tessellate: non-finite sample");
    }
    if (!loss.is_classification() && !samples.empty() && samples.dim() != generators.dim()) {
        throw ShapeError("tessellate: sample and generator dimensions differ");
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

CellStats cell_stats(const PointSet& generators, const LossKind& loss, const PointSet& samples,
                     const std::vector<std::size_t>& assignments) {
    const std::size_t m = generators.size();
    const std::size_t d = samples.dim();
    CellStats stats;
    stats.counts.assign(m, 0);
    stats.mean_loss.assign(m, 0.0);
    std::vector<double> sums(m * d, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t j = assignments[i];
        ++stats.counts[j];
        const auto y = samples[i];
        for (std::size_t k = 0; k < d; ++k) sums[j * d + k] += y[k];
        stats.mean_loss[j] += mhp::loss(loss, generators[j], kernels::point_target(loss, y));
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double c = static_cast<double>(stats.counts[j]);
        for (std::size_t k = 0; k < d; ++k) {
            sums[j * d + k] = stats.counts[j] == 0 ? std::numeric_limits<double>::quiet_NaN() : sums[j * d + k] / c;
        }
        stats.mean_loss[j] = stats.counts[j] == 0 ? std::numeric_limits<double>::quiet_NaN() : stats.mean_loss[j] / c;
    }
    stats.means = PointSet(d, std::move(sums));
    return stats;
}

}  // namespace

TessellationResult tessellate(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_samples(generators, samples, loss);
    TessellationResult out;
    auto& tess = out.tessellation;
    tess.generators = generators;
    tess.loss = loss;
    tess.assignments = kernels::assign_cells(generators, loss, samples);
    tess.cell_counts.assign(generators.size(), 0);
    for (auto j : tess.assignments) ++tess.cell_counts[j];
    out.stats = cell_stats(generators, loss, samples, tess.assignments);
    return out;
}

CentroidalResidual centroidal_residual(const Tessellation& tessellation, const CellStats& stats) {
    if (tessellation.loss.type != LossType::L2) throw ValidationError("centroidal_residual: defined for the L2 loss only");
    const std::size_t m = tessellation.generators.size();
    CentroidalResidual out;
    out.residuals.assign(m, std::numeric_limits<double>::quiet_NaN());
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
        if (stats.empty(j)) {
            out.empty_cells.push_back(j);
            continue;
        }
        out.residuals[j] = std::sqrt(squared_distance(tessellation.generators[j], stats.means[j]));
        out.max = any ? std::max(out.max, out.residuals[j]) : out.residuals[j];
        any = true;
    }
    if (!any) throw ValidationError("centroidal_residual: every cell is empty");
    return out;
}

double quantization_error(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_samples(generators, samples, loss);
    if (samples.empty()) throw ValidationError("quantization_error: no samples");
    return kernels::sum_min_loss(generators, loss, samples) / static_cast<double>(samples.size());
}

std::size_t count_distinct(const PointSet& samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) rows.emplace_back(samples[i].begin(), samples[i].end());
    std::sort(rows.begin(), rows.end());
    return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

PointSet kmeanspp_init(const PointSet& samples, std::size_t count, Rng& rng) {
    if (samples.empty()) throw ValidationError("kmeans++: no samples");
    if (count == 0) throw ValidationError("kmeans++: count must be positive");
    PointSet centers(samples.dim());
    centers.push_back(samples[rng.uniform_index(samples.size())]);
    std::vector<double> d2(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = squared_distance(samples[i], centers[0]);
    while (centers.size() < count) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (pick = 0; pick + 1 < d2.size(); ++pick) {
                if (u < d2[pick]) break;
                u -= d2[pick];
            }
            while (d2[pick] == 0.0 && pick > 0) --pick;
        } else {
            pick = rng.uniform_index(samples.size());
        }
        centers.push_back(samples[pick]);
        const auto c = centers[centers.size() - 1];
        for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = std::min(d2[i], squared_distance(samples[i], c));
    }
    return centers;
}

LloydResult lloyd(const PointSet& samples, const PointSet& init, const LloydOptions& options) {
    const LossKind l2 = LossKind::l2();
    check_samples(init, samples, l2);
    if (samples.empty()) throw ValidationError("lloyd: no samples");
    if (init.size() > count_distinct(samples)) {
        throw ValidationError("lloyd: more generators than distinct samples");
    }

    LloydResult out;
    out.generators = init;
    auto& g = out.generators;
    const std::size_t d = samples.dim();
    for (std::size_t iter = 0;; ++iter) {
        auto result = tessellate(g, l2, samples);
        auto& stats = result.stats;
        bool reseeded = false;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!stats.empty(j)) continue;
            // farthest sample from its own nearest generator
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double dist = squared_distance(samples[i], g[result.tessellation.assignments[i]]);
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            std::copy(samples[far].begin(), samples[far].end(), g[j].begin());
            result.tessellation.assignments[far] = j;
            out.reseeds.push_back({iter, j});
            reseeded = true;
        }
        out.iterations = iter;
        if (reseeded) {
            if (iter >= options.max_iters) break;
            continue;
        }

        double movement = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            movement = std::max(movement, std::sqrt(squared_distance(g[j], stats.means[j])));
        }
        out.residual = movement;
        if (movement <= options.tol) {
            out.converged = true;
            break;
        }
        if (iter >= options.max_iters) break;
        for (std::size_t j = 0; j < g.size(); ++j) {
            for (std::size_t k = 0; k < d; ++k) g[j][k] = stats.means[j][k];
        }
    }
    out.quantization_error = quantization_error(g, l2, samples);
    return out;
}

LloydResult lloyd_restarts(const PointSet& samples, std::size_t count, std::size_t restarts, Rng& rng,
                           const LloydOptions& options) {
    if (restarts == 0) throw ValidationError("lloyd: restarts must be positive");
    if (samples.empty()) throw ValidationError("lloyd: no samples");
    if (count > count_distinct(samples)) throw ValidationError("lloyd: more generators than distinct samples");
    LloydResult best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng local = rng.split();
        auto result = lloyd(samples, kmeanspp_init(samples, count, local), options);
        if (!have || result.quantization_error < best.quantization_error) {
            best = std::move(result);
            have = true;
        }
    }
    return best;
}

}  // namespace mhp::voronoi
