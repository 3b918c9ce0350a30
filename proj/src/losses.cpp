#include "mhp/losses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mhp/error.hpp"

namespace mhp {

LossKind LossKind::tukey(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("Tukey constant must be positive and finite");
    return {LossType::TukeyBiweight, c};
}

std::string to_string(const LossKind& kind) {
    switch (kind.type) {
        case LossType::L2: return "l2";
        case LossType::CrossEntropy: return "cross_entropy";
        case LossType::TukeyBiweight: {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof(buf), kind.tukey_c);
            return "tukey:" + std::string(buf, res.ptr);
        }
    }
    return "l2";
}

LossKind parse_loss_kind(const std::string& text) {
    if (text == "l2") return LossKind::l2();
    if (text == "cross_entropy") return LossKind::cross_entropy();
    if (text == "tukey") return LossKind::tukey();
    if (text.rfind("tukey:", 0) == 0) {
        const std::string number = text.substr(6);
        double c = 0.0;
        auto res = std::from_chars(number.data(), number.data() + number.size(), c);
        if (res.ec != std::errc() || res.ptr != number.data() + number.size()) {
            throw ValidationError("malformed Tukey constant in '" + text + "'");
        }
        return LossKind::tukey(c);
    }
    throw ValidationError("unknown loss '" + text + "'");
}

namespace {

void check(const LossKind& kind, std::span<const double> prediction, const Target& target) {
    if (kind.type == LossType::CrossEntropy) {
        if (prediction.empty()) throw ShapeError("cross_entropy: empty logits");
        if (target.class_index >= prediction.size()) {
            throw ValidationError("cross_entropy: class index " + std::to_string(target.class_index) +
                                  " out of range for " + std::to_string(prediction.size()) + " classes");
        }
    } else if (prediction.size() != target.values.size()) {
        throw ShapeError("loss: prediction has " + std::to_string(prediction.size()) + " entries, target has " +
                         std::to_string(target.values.size()));
    }
}

}  // namespace

double tukey_rho(double r, double c) {
    const double sat = c * c / 6.0;
    if (std::abs(r) >= c) return sat;
    const double u = 1.0 - (r / c) * (r / c);
    return sat * (1.0 - u * u * u);
}

double tukey_psi(double r, double c) {
    if (std::abs(r) >= c) return 0.0;
    const double u = 1.0 - (r / c) * (r / c);
    return r * u * u;
}

std::vector<double> log_softmax(std::span<const double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - peak);
    const double lse = peak + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

double loss(const LossKind& kind, std::span<const double> prediction, const Target& target) {
    check(kind, prediction, target);
    switch (kind.type) {
        case LossType::L2: {
            double s = 0.0;
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                const double r = prediction[i] - target.values[i];
                s += r * r;
            }
            return 0.5 * s;
        }
        case LossType::CrossEntropy: {
            const double peak = *std::max_element(prediction.begin(), prediction.end());
            double sum = 0.0;
            for (double z : prediction) sum += std::exp(z - peak);
            return peak + std::log(sum) - prediction[target.class_index];
        }
        case LossType::TukeyBiweight: {
            double s = 0.0;
            for (std::size_t i = 0; i < prediction.size(); ++i) s += tukey_rho(prediction[i] - target.values[i], kind.tukey_c);
            return s;
        }
    }
    return 0.0;
}

void loss_grad(const LossKind& kind, std::span<const double> prediction, const Target& target, std::span<double> out) {
    check(kind, prediction, target);
    if (out.size() != prediction.size()) throw ShapeError("loss_grad: output buffer size mismatch");
    switch (kind.type) {
        case LossType::L2:
            for (std::size_t i = 0; i < prediction.size(); ++i) out[i] = prediction[i] - target.values[i];
            break;
        case LossType::CrossEntropy: {
            const double peak = *std::max_element(prediction.begin(), prediction.end());
            double sum = 0.0;
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                out[i] = std::exp(prediction[i] - peak);
                sum += out[i];
            }
            for (auto& v : out) v /= sum;
            out[target.class_index] -= 1.0;
            break;
        }
        case LossType::TukeyBiweight:
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                out[i] = tukey_psi(prediction[i] - target.values[i], kind.tukey_c);
            }
            break;
    }
}

std::vector<double> loss_grad(const LossKind& kind, std::span<const double> prediction, const Target& target) {
    std::vector<double> out(prediction.size());
    loss_grad(kind, prediction, target, out);
    return out;
}

}  // namespace mhp
