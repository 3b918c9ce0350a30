#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mhp/dataset.hpp"
#include "mhp/rng.hpp"

namespace mhp::datagen {

// ---------------------------------------------------------------------------
// Temporal 2D distribution. Four unit quadrants of [-1,1]^2:
//   S1 = [-1,0) x [-1,0)   S2 = [-1,0) x [0,1]
//   S3 = [0,1]  x [-1,0)   S4 = [0,1]  x [0,1]
// with p(S1) = p(S4) = (1-t)/2, p(S2) = p(S3) = t/2 and nothing outside (S5).
// ---------------------------------------------------------------------------

/// 1..4 for the quadrants above, 5 for anything outside the square.
int temporal2d_region(double y1, double y2);

/// Selection probabilities of S1..S4 at time t.
std::array<double, 4> temporal2d_region_probs(double t);

/// Uniform point inside region 1..4 (closed far edges, as printed above).
std::array<double, 2> sample_temporal2d_point(double t, Rng& rng);

/// n samples at a fixed t: input = {t}, target = (y1, y2).
Dataset sample_temporal2d(double t, std::size_t n, Rng& rng);

/// n samples with t ~ Uniform[0, 1] drawn per sample.
Dataset sample_temporal2d_mixed(std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Probabilistic single-label sampling from multi-label inputs.
// ---------------------------------------------------------------------------

struct MultiLabelSpec {
    std::size_t num_classes = 0;
    /// One entry per input.
    std::vector<std::vector<std::size_t>> label_sets;
    /// input_dim features per input.
    std::vector<std::vector<double>> features;

    void validate() const;
    std::size_t input_dim() const { return features.empty() ? 0 : features.front().size(); }
};

/// Class centres on the unit circle; each input is the mean of its label
/// centres plus N(0, noise^2) per coordinate. `copies` inputs are drawn per
/// label set.
MultiLabelSpec make_multilabel_spec(std::size_t num_classes, const std::vector<std::vector<std::size_t>>& label_sets,
                                    std::size_t copies, Rng& rng, double noise = 0.1);

/// Every unordered class pair except diametrically opposite ones (whose
/// centre means would coincide at the origin).
std::vector<std::vector<std::size_t>> non_opposite_pairs(std::size_t num_classes);

/// Sample i uses input i mod #inputs; its class is drawn uniformly from that
/// input's label set on every call.
Dataset sample_multilabel(const MultiLabelSpec& spec, std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Grid frames: a dot at `start` moves to one of K terminal positions.
// ---------------------------------------------------------------------------

struct GridPos {
    std::size_t x = 0;
    std::size_t y = 0;
    bool operator==(const GridPos&) const = default;
};

struct GridFrameSpec {
    std::size_t width = 8;
    std::size_t height = 8;
    std::size_t channels = 1;
    GridPos start{1, 1};
    std::vector<GridPos> terminals{{6, 1}, {6, 6}, {1, 6}};
    std::vector<double> probabilities{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    /// Positions must keep the 3x3 kernel inside the grid; probabilities
    /// must be nonnegative and sum to 1.
    void validate() const;
    std::size_t pixels() const { return width * height * channels; }
};

/// 3x3 smoothing kernel applied to the single bright pixel; peak 1.
inline constexpr std::array<double, 9> kDotKernel{0.25, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 0.25};
inline constexpr double kDotKernelMass = 4.0;

/// Flattened frame (channel, row, column order) with a dot at `pos`.
std::vector<double> render_dot(const GridFrameSpec& spec, GridPos pos);

/// Input = frame with the dot at `start`, target = frame at the drawn terminal.
/// When `terminal_index` is non-null it receives the drawn terminal per sample.
Dataset sample_gridframe(const GridFrameSpec& spec, std::size_t n, Rng& rng,
                         std::vector<std::size_t>* terminal_index = nullptr);

// ---------------------------------------------------------------------------
// Gaussian mixtures.
// ---------------------------------------------------------------------------

/// Ancestral sampling. Covariances are row-major d x d and must be
/// symmetric positive-definite.
PointSet sample_gaussian_mixture(const std::vector<std::vector<double>>& means,
                                 const std::vector<std::vector<double>>& covariances, const std::vector<double>& weights,
                                 std::size_t n, Rng& rng);

/// Mixture samples as a regression dataset with a constant unit input.
Dataset gaussian_mixture_dataset(const PointSet& points);

}  // namespace mhp::datagen
