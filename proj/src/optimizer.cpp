#include <cmath>
#include <string>

#include "matt/error.hpp"
#include "matt/numeric.hpp"

namespace matt {

OptimizerKind parse_optimizer_kind(std::string_view name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (!(config_.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
    }
}

void Optimizer::step(ParamStore& params) {
    for (const auto& p : params.items()) {
        if (!p.grad.all_finite()) {
            throw Error(ErrorCode::DivergedError, "non-finite gradient for " + p.name);
        }
    }
    ++steps_;
    const double lr = config_.learning_rate;
    if (config_.kind == OptimizerKind::Sgd) {
        for (auto& p : params.items()) {
            for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr * p.grad[i];
        }
    } else {
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double t = static_cast<double>(steps_);
        const double correction1 = 1.0 - std::pow(b1, t);
        const double correction2 = 1.0 - std::pow(b2, t);
        for (auto& p : params.items()) {
            auto [it, inserted] = moments_.try_emplace(p.name);
            auto& mom = it->second;
            if (inserted) {
                mom.first = Matrix(p.value.rows(), p.value.cols());
                mom.second = Matrix(p.value.rows(), p.value.cols());
            }
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                const double g = p.grad[i];
                mom.first[i] = b1 * mom.first[i] + (1.0 - b1) * g;
                mom.second[i] = b2 * mom.second[i] + (1.0 - b2) * g * g;
                const double m_hat = mom.first[i] / correction1;
                const double v_hat = mom.second[i] / correction2;
                p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
            }
        }
    }
    params.zero_grad();
}

}  // namespace matt
