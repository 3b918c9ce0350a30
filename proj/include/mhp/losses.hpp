#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mhp {

enum class LossType { L2, CrossEntropy, TukeyBiweight };

/// Base loss that induces the tessellation of the label space.
struct LossKind {
    static constexpr double kDefaultTukeyC = 4.685;

    LossType type = LossType::L2;
    double tukey_c = kDefaultTukeyC;

    static LossKind l2() { return {LossType::L2, kDefaultTukeyC}; }
    static LossKind cross_entropy() { return {LossType::CrossEntropy, kDefaultTukeyC}; }
    static LossKind tukey(double c = kDefaultTukeyC);

    bool is_classification() const noexcept { return type == LossType::CrossEntropy; }
    bool operator==(const LossKind&) const = default;
};

/// "l2" | "cross_entropy" | "tukey:<c>"
std::string to_string(const LossKind& kind);
LossKind parse_loss_kind(const std::string& text);

/// Regression target (`values`) or class index, depending on the loss.
struct Target {
    std::span<const double> values;
    std::size_t class_index = 0;

    static Target regression(std::span<const double> v) { return {v, 0}; }
    static Target label(std::size_t c) { return {{}, c}; }
};

/// L2: 1/2 |u - v|^2.  CrossEntropy: -log softmax(u)[c].
/// TukeyBiweight: sum_i rho_c(u_i - v_i), rho_c(r) = c^2/6 (1 - (1 - (r/c)^2)^3) for |r| <= c, c^2/6 beyond.
double loss(const LossKind& kind, std::span<const double> prediction, const Target& target);

/// Gradient of `loss` with respect to the prediction, written into `out`.
void loss_grad(const LossKind& kind, std::span<const double> prediction, const Target& target, std::span<double> out);
std::vector<double> loss_grad(const LossKind& kind, std::span<const double> prediction, const Target& target);

/// Numerically stable log-softmax.
std::vector<double> log_softmax(std::span<const double> logits);

double tukey_rho(double residual, double c);
double tukey_psi(double residual, double c);

}  // namespace mhp
