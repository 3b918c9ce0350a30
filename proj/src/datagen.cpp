#include "mhp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mhp/error.hpp"

namespace mhp::datagen {

int temporal2d_region(double y1, double y2) {
    if (!(y1 >= -1.0 && y1 <= 1.0 && y2 >= -1.0 && y2 <= 1.0)) return 5;
    if (y1 < 0.0) return y2 < 0.0 ? 1 : 2;
    return y2 < 0.0 ? 3 : 4;
}

std::array<double, 4> temporal2d_region_probs(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("temporal2d: t must lie in [0, 1]");
    return {(1.0 - t) / 2.0, t / 2.0, t / 2.0, (1.0 - t) / 2.0};
}

std::array<double, 2> sample_temporal2d_point(double t, Rng& rng) {
    const auto probs = temporal2d_region_probs(t);
    const double u = rng.uniform();
    int region = 4;
    double cumulative = 0.0;
    for (int r = 0; r < 3; ++r) {
        cumulative += probs[static_cast<std::size_t>(r)];
        if (u < cumulative) {
            region = r + 1;
            break;
        }
    }
    const double a = rng.uniform();
    const double b = rng.uniform();
    // negative half-axis [-1, 0), nonnegative half-axis [0, 1)
    const double neg_x = a - 1.0, pos_x = a;
    const double neg_y = b - 1.0, pos_y = b;
    switch (region) {
        case 1: return {neg_x, neg_y};
        case 2: return {neg_x, pos_y};
        case 3: return {pos_x, neg_y};
        default: return {pos_x, pos_y};
    }
}

namespace {

Dataset temporal2d_shell(std::size_t n) {
    Dataset d;
    d.input_dim = 1;
    d.target_dim = 2;
    d.inputs.reserve(n);
    d.targets.reserve(2 * n);
    return d;
}

}  // namespace

Dataset sample_temporal2d(double t, std::size_t n, Rng& rng) {
    temporal2d_region_probs(t);
    Dataset d = temporal2d_shell(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = sample_temporal2d_point(t, rng);
        d.inputs.push_back(t);
        d.targets.insert(d.targets.end(), y.begin(), y.end());
    }
    return d;
}

Dataset sample_temporal2d_mixed(std::size_t n, Rng& rng) {
    Dataset d = temporal2d_shell(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = rng.uniform();
        const auto y = sample_temporal2d_point(t, rng);
        d.inputs.push_back(t);
        d.targets.insert(d.targets.end(), y.begin(), y.end());
    }
    return d;
}

void MultiLabelSpec::validate() const {
    if (num_classes == 0) throw ValidationError("multilabel: num_classes must be positive");
    if (label_sets.empty()) throw ValidationError("multilabel: no inputs");
    if (label_sets.size() != features.size()) throw ShapeError("multilabel: label sets and features differ in count");
    const std::size_t dim = input_dim();
    if (dim == 0) throw ShapeError("multilabel: empty feature vectors");
    for (std::size_t i = 0; i < label_sets.size(); ++i) {
        if (label_sets[i].empty()) throw ValidationError("multilabel: empty label set for input " + std::to_string(i));
        for (auto c : label_sets[i]) {
            if (c >= num_classes) throw ValidationError("multilabel: class index out of range");
        }
        if (features[i].size() != dim) throw ShapeError("multilabel: inconsistent feature dimension");
    }
}

std::vector<std::vector<std::size_t>> non_opposite_pairs(std::size_t num_classes) {
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t a = 0; a < num_classes; ++a) {
        for (std::size_t b = a + 1; b < num_classes; ++b) {
            if (num_classes % 2 == 0 && b - a == num_classes / 2) continue;
            sets.push_back({a, b});
        }
    }
    return sets;
}

MultiLabelSpec make_multilabel_spec(std::size_t num_classes, const std::vector<std::vector<std::size_t>>& label_sets,
                                    std::size_t copies, Rng& rng, double noise) {
    if (num_classes == 0 || copies == 0) throw ValidationError("multilabel: num_classes and copies must be positive");
    MultiLabelSpec spec;
    spec.num_classes = num_classes;
    for (const auto& set : label_sets) {
        if (set.empty()) throw ValidationError("multilabel: empty label set");
        double cx = 0.0, cy = 0.0;
        for (auto c : set) {
            if (c >= num_classes) throw ValidationError("multilabel: class index out of range");
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(num_classes);
            cx += std::cos(angle);
            cy += std::sin(angle);
        }
        cx /= static_cast<double>(set.size());
        cy /= static_cast<double>(set.size());
        for (std::size_t k = 0; k < copies; ++k) {
            spec.label_sets.push_back(set);
            spec.features.push_back({cx + rng.normal(0.0, noise), cy + rng.normal(0.0, noise)});
        }
    }
    return spec;
}

Dataset sample_multilabel(const MultiLabelSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    Dataset d;
    d.input_dim = spec.input_dim();
    d.num_classes = spec.num_classes;
    d.inputs.reserve(n * d.input_dim);
    d.labels.reserve(n);
    d.label_sets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % spec.label_sets.size();
        const auto& set = spec.label_sets[k];
        d.inputs.insert(d.inputs.end(), spec.features[k].begin(), spec.features[k].end());
        d.labels.push_back(set[rng.uniform_index(set.size())]);
        d.label_sets.push_back(set);
    }
    return d;
}

void GridFrameSpec::validate() const {
    if (width < 3 || height < 3 || channels == 0) throw ValidationError("gridframe: grid must be at least 3x3");
    auto inside = [&](GridPos p) { return p.x >= 1 && p.y >= 1 && p.x + 1 < width && p.y + 1 < height; };
    if (!inside(start)) throw ValidationError("gridframe: start position outside grid interior");
    if (terminals.empty()) throw ValidationError("gridframe: no terminal positions");
    if (terminals.size() != probabilities.size()) throw ValidationError("gridframe: terminals/probabilities size mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < terminals.size(); ++k) {
        if (!inside(terminals[k])) throw ValidationError("gridframe: terminal position outside grid interior");
        if (!(probabilities[k] >= 0.0)) throw ValidationError("gridframe: negative probability");
        total += probabilities[k];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("gridframe: probabilities must sum to 1");
}

std::vector<double> render_dot(const GridFrameSpec& spec, GridPos pos) {
    std::vector<double> frame(spec.pixels(), 0.0);
    for (std::size_t c = 0; c < spec.channels; ++c) {
        for (std::size_t dy = 0; dy < 3; ++dy) {
            for (std::size_t dx = 0; dx < 3; ++dx) {
                const std::size_t x = pos.x + dx - 1;
                const std::size_t y = pos.y + dy - 1;
                frame[c * spec.width * spec.height + y * spec.width + x] = kDotKernel[dy * 3 + dx];
            }
        }
    }
    return frame;
}

Dataset sample_gridframe(const GridFrameSpec& spec, std::size_t n, Rng& rng, std::vector<std::size_t>* terminal_index) {
    spec.validate();
    const auto first = render_dot(spec, spec.start);
    std::vector<std::vector<double>> lasts;
    for (const auto& p : spec.terminals) lasts.push_back(render_dot(spec, p));

    Dataset d;
    d.input_dim = spec.pixels();
    d.target_dim = spec.pixels();
    d.inputs.reserve(n * d.input_dim);
    d.targets.reserve(n * d.target_dim);
    if (terminal_index) terminal_index->clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double cumulative = spec.probabilities[0];
        while (k + 1 < spec.terminals.size() && u >= cumulative) cumulative += spec.probabilities[++k];
        d.inputs.insert(d.inputs.end(), first.begin(), first.end());
        d.targets.insert(d.targets.end(), lasts[k].begin(), lasts[k].end());
        if (terminal_index) terminal_index->push_back(k);
    }
    return d;
}

namespace {

// Lower-triangular Cholesky factor; throws if the matrix is not SPD.
std::vector<double> cholesky(const std::vector<double>& a, std::size_t d) {
    std::vector<double> l(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            if (std::abs(a[i * d + j] - a[j * d + i]) > 1e-12 * (1.0 + std::abs(a[i * d + j]))) {
                throw ValidationError("gaussian mixture: covariance is not symmetric");
            }
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
            if (i == j) {
                if (!(s > 0.0)) throw ValidationError("gaussian mixture: covariance is not positive-definite");
                l[i * d + i] = std::sqrt(s);
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    return l;
}

}  // namespace

PointSet sample_gaussian_mixture(const std::vector<std::vector<double>>& means,
                                 const std::vector<std::vector<double>>& covariances, const std::vector<double>& weights,
                                 std::size_t n, Rng& rng) {
    if (means.empty()) throw ValidationError("gaussian mixture: no components");
    if (covariances.size() != means.size() || weights.size() != means.size()) {
        throw ValidationError("gaussian mixture: means, covariances and weights differ in count");
    }
    const std::size_t d = means.front().size();
    if (d == 0) throw ShapeError("gaussian mixture: zero-dimensional mean");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("gaussian mixture: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("gaussian mixture: weights must sum to 1");

    std::vector<std::vector<double>> factors;
    for (std::size_t k = 0; k < means.size(); ++k) {
        if (means[k].size() != d || covariances[k].size() != d * d) throw ShapeError("gaussian mixture: dimension mismatch");
        factors.push_back(cholesky(covariances[k], d));
    }

    PointSet out(d);
    out.raw().reserve(n * d);
    std::vector<double> z(d), y(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double cumulative = weights[0];
        while (k + 1 < weights.size() && (u >= cumulative || weights[k] == 0.0)) cumulative += weights[++k];
        for (auto& v : z) v = rng.normal();
        const auto& l = factors[k];
        for (std::size_t r = 0; r < d; ++r) {
            double s = means[k][r];
            for (std::size_t c = 0; c <= r; ++c) s += l[r * d + c] * z[c];
            y[r] = s;
        }
        out.push_back(y);
    }
    return out;
}

Dataset gaussian_mixture_dataset(const PointSet& points) {
    Dataset d;
    d.input_dim = 1;
    d.target_dim = points.dim();
    d.inputs.assign(points.size(), 1.0);
    d.targets.assign(points.flat().begin(), points.flat().end());
    return d;
}

}  // namespace mhp::datagen
