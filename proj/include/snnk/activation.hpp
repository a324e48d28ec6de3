// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "snnk/error.hpp"

namespace snnk {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

enum class ActivationKind { Sine, Cosine, Tanh, Sigmoid, Gelu, Swish, SmoothedRelu };

enum class Parity { Odd, Even, None };

// An elementwise activation f: R -> R together with its scalar parameter
// (Swish beta, SmoothedRelu mollifier width). Other kinds ignore `param`.
struct Activation {
    ActivationKind kind = ActivationKind::Sine;
    double param = 0.0;

    static Activation sine() { return {ActivationKind::Sine, 0.0}; }
    static Activation cosine() { return {ActivationKind::Cosine, 0.0}; }
    static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
    static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }
    static Activation gelu() { return {ActivationKind::Gelu, 0.0}; }
    static Activation swish(double beta) {
        require(beta > 0.0, ErrorCode::InvalidArgument, "swish beta must be positive");
        return {ActivationKind::Swish, beta};
    }
    static Activation smoothed_relu(double width) {
        require(width > 0.0, ErrorCode::InvalidArgument, "smoothed relu width must be positive");
        return {ActivationKind::SmoothedRelu, width};
    }

    Parity parity() const {
        switch (kind) {
            case ActivationKind::Sine:
            case ActivationKind::Tanh: return Parity::Odd;
            case ActivationKind::Cosine: return Parity::Even;
            default: return Parity::None;
        }
    }

    bool operator==(const Activation&) const = default;
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

inline double eval_activation(const Activation& a, double z) {
    switch (a.kind) {
        case ActivationKind::Sine: return std::sin(z);
        case ActivationKind::Cosine: return std::cos(z);
        case ActivationKind::Tanh: return std::tanh(z);
        case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case ActivationKind::Gelu: return z * standard_normal_cdf(z);
        case ActivationKind::Swish: return z / (1.0 + std::exp(-a.param * z));
        case ActivationKind::SmoothedRelu: {
            // ReLU convolved with N(0, width^2).
            const double s = a.param;
            return z * standard_normal_cdf(z / s) + s * standard_normal_pdf(z / s);
        }
    }
    return 0.0;
}

inline std::string activation_name(const Activation& a) {
    switch (a.kind) {
        case ActivationKind::Sine: return "sine";
        case ActivationKind::Cosine: return "cosine";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Gelu: return "gelu";
        case ActivationKind::Swish: return "swish";
        case ActivationKind::SmoothedRelu: return "smoothed_relu";
    }
    return "unknown";
}

// Accepts "sine", "tanh", ..., plus "swish:<beta>" and "smoothed_relu:<width>".
inline Activation parse_activation(std::string_view text) {
    std::string name(text);
    double param = 0.0;
    bool has_param = false;
    if (auto colon = name.find(':'); colon != std::string::npos) {
        try {
            param = std::stod(name.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "bad activation parameter in '" + name + "'");
        }
        has_param = true;
        name = name.substr(0, colon);
    }
    if (name == "sine" || name == "sin") return Activation::sine();
    if (name == "cosine" || name == "cos") return Activation::cosine();
    if (name == "tanh") return Activation::tanh();
    if (name == "sigmoid") return Activation::sigmoid();
    if (name == "gelu") return Activation::gelu();
    if (name == "swish") return Activation::swish(has_param ? param : 1.0);
    if (name == "smoothed_relu") return Activation::smoothed_relu(has_param ? param : 0.1);
    throw Error(ErrorCode::UnsupportedActivation, "unknown activation '" + std::string(text) + "'");
}

}  // namespace snnk
