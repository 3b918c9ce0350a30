#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mhp {

// Bad argument values (out-of-range probabilities, empty label sets, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Dimension mismatch between a tensor-like argument and what the callee expects.
class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss, gradient or parameter encountered during training.
class DivergenceError : public std::runtime_error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    DivergenceError(const std::string& what, std::size_t layer = npos, std::size_t epoch = npos,
                    std::size_t batch = npos)
        : std::runtime_error(what), layer_(layer), epoch_(epoch), batch_(batch) {}

    std::size_t layer() const noexcept { return layer_; }
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t layer_;
    std::size_t epoch_;
    std::size_t batch_;
};

}  // namespace mhp
