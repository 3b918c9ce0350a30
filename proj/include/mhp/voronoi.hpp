#pragma once

#include <cstddef>
#include <vector>

#include "mhp/dataset.hpp"
#include "mhp/losses.hpp"
#include "mhp/rng.hpp"

namespace mhp::voronoi {

/// Loss-induced partition of a sample set: each sample belongs to the
/// generator minimising the loss (lowest index on ties).
struct Tessellation {
    PointSet generators;
    LossKind loss;
    std::vector<std::size_t> assignments;
    std::vector<std::size_t> cell_counts;
};

/// Per-cell empirical statistics. Means of empty cells are NaN.
struct CellStats {
    PointSet means;
    std::vector<std::size_t> counts;
    std::vector<double> mean_loss;

    bool empty(std::size_t j) const { return counts[j] == 0; }
};

struct TessellationResult {
    Tessellation tessellation;
    CellStats stats;
};

TessellationResult tessellate(const PointSet& generators, const LossKind& loss, const PointSet& samples);

struct CentroidalResidual {
    std::vector<double> residuals;         // NaN for empty cells
    std::vector<std::size_t> empty_cells;
    double max = 0.0;                      // over nonempty cells
};

/// |g_j - mean_j|_2 per cell. L2 tessellations only; throws if every cell
/// is empty.
CentroidalResidual centroidal_residual(const Tessellation& tessellation, const CellStats& stats);

/// Mean over samples of min_j L(g_j, y).
double quantization_error(const PointSet& generators, const LossKind& loss, const PointSet& samples);

std::size_t count_distinct(const PointSet& samples);

/// k-means++ seeding drawn from the samples.
PointSet kmeanspp_init(const PointSet& samples, std::size_t count, Rng& rng);

struct LloydOptions {
    std::size_t max_iters = 500;
    double tol = 1e-6;
};

struct ReseedEvent {
    std::size_t iteration;
    std::size_t cell;
};

struct LloydResult {
    PointSet generators;
    std::size_t iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double quantization_error = 0.0;
    std::vector<ReseedEvent> reseeds;
};

/// Classical Lloyd iteration under L2 from `init`. Stops when every generator
/// is within `tol` of its cell mean; the returned generators are the ones that
/// passed that test, so their centroidal residual is <= tol when converged.
/// An empty cell is reseeded at the sample farthest from its nearest generator.
LloydResult lloyd(const PointSet& samples, const PointSet& init, const LloydOptions& options = {});

/// Best of `restarts` k-means++-seeded runs by quantization error.
LloydResult lloyd_restarts(const PointSet& samples, std::size_t count, std::size_t restarts, Rng& rng,
                           const LloydOptions& options = {});

}  // namespace mhp::voronoi
