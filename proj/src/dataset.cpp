#include "mhp/dataset.hpp"

#include <cmath>

#include "mhp/error.hpp"

namespace mhp {

PointSet::PointSet(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim_ == 0 ? !data_.empty() : data_.size() % dim_ != 0) throw ShapeError("PointSet: data size is not a multiple of dim");
}

PointSet::PointSet(std::initializer_list<std::vector<double>> points) {
    for (const auto& p : points) push_back(p);
}

void PointSet::push_back(std::span<const double> p) {
    if (dim_ == 0 && data_.empty()) dim_ = p.size();
    if (p.size() != dim_) throw ShapeError("PointSet: point dimension mismatch");
    data_.insert(data_.end(), p.begin(), p.end());
}

void Dataset::validate() const {
    if (input_dim == 0) throw ShapeError("dataset: input_dim must be positive");
    if (inputs.size() % input_dim != 0) throw ShapeError("dataset: inputs not a multiple of input_dim");
    const std::size_t n = size();
    for (double v : inputs) {
        if (!std::isfinite(v)) throw ValidationError("dataset: non-finite input");
    }
    if (classification()) {
        if (labels.size() != n) throw ShapeError("dataset: label count does not match sample count");
        for (auto c : labels) {
            if (c >= num_classes) throw ValidationError("dataset: label out of range");
        }
        if (!label_sets.empty()) {
            if (label_sets.size() != n) throw ShapeError("dataset: label set count does not match sample count");
            for (const auto& s : label_sets) {
                if (s.empty()) throw ValidationError("dataset: empty label set");
                for (auto c : s) {
                    if (c >= num_classes) throw ValidationError("dataset: label set entry out of range");
                }
            }
        }
    } else {
        if (target_dim == 0) throw ShapeError("dataset: target_dim must be positive");
        if (targets.size() != n * target_dim) throw ShapeError("dataset: target count does not match sample count");
        for (double v : targets) {
            if (!std::isfinite(v)) throw ValidationError("dataset: non-finite target");
        }
    }
}

}  // namespace mhp
