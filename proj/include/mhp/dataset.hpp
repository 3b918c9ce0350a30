#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mhp/losses.hpp"

namespace mhp {

/// Row-major set of points of a fixed dimension.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> data);
    PointSet(std::initializer_list<std::vector<double>> points);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    void push_back(std::span<const double> p);
    std::span<const double> flat() const noexcept { return data_; }
    std::vector<double>& raw() noexcept { return data_; }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// Training pairs with flat storage. Regression sets carry `targets`
/// (target_dim per row); classification sets carry `labels` and optionally the
/// full true label set of each input.
struct Dataset {
    std::size_t input_dim = 0;
    std::size_t target_dim = 0;
    std::size_t num_classes = 0;
    std::vector<double> inputs;
    std::vector<double> targets;
    std::vector<std::size_t> labels;
    std::vector<std::vector<std::size_t>> label_sets;

    bool classification() const noexcept { return num_classes > 0; }
    std::size_t size() const noexcept { return input_dim == 0 ? 0 : inputs.size() / input_dim; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const double> input(std::size_t i) const { return {inputs.data() + i * input_dim, input_dim}; }
    std::span<const double> target_values(std::size_t i) const {
        return {targets.data() + i * target_dim, target_dim};
    }
    Target target(std::size_t i) const {
        return classification() ? Target::label(labels[i]) : Target::regression(target_values(i));
    }

    /// Regression targets as a point set.
    PointSet target_points() const { return PointSet(target_dim, targets); }

    /// Throws ShapeError/ValidationError on inconsistent sizes or labels.
    void validate() const;
};

}  // namespace mhp
