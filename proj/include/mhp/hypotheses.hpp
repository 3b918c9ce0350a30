#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mhp/error.hpp"

namespace mhp {

/// The M predicted output vectors for one input, stored contiguously
/// (hypothesis-major).
class HypothesisSet {
public:
    HypothesisSet() = default;
    HypothesisSet(std::size_t count, std::size_t dim) : count_(count), dim_(dim), data_(count * dim, 0.0) {}
    HypothesisSet(std::size_t count, std::size_t dim, std::vector<double> data)
        : count_(count), dim_(dim), data_(std::move(data)) {
        if (data_.size() != count_ * dim_) {
            throw ShapeError("HypothesisSet: data size does not match count * dim");
        }
    }

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> operator[](std::size_t j) const { return {data_.data() + j * dim_, dim_}; }
    std::span<double> operator[](std::size_t j) { return {data_.data() + j * dim_, dim_}; }

    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    /// The first `k` hypotheses.
    HypothesisSet head(std::size_t k) const {
        if (k == 0 || k > count_) throw ValidationError("HypothesisSet::head: k out of range");
        return HypothesisSet(k, dim_, std::vector<double>(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(k * dim_)));
    }

    bool operator==(const HypothesisSet&) const = default;

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace mhp
