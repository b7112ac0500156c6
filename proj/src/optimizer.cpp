#include "zv/optimizer.hpp"

#include <cmath>

namespace zv {

void TrainConfig::validate() const {
    require(lr > 0.0 && eps > 0.0 && grad_clip > 0.0, "lr, eps and grad_clip must be positive");
    require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0,
            "beta1/beta2 must lie in (0, 1), got {} / {}", beta1, beta2);
    require(weight_decay >= 0.0, "weight_decay must be non-negative");
    require(batch_size >= 1 && max_steps >= 0, "batch_size >= 1 and max_steps >= 0 required");
    require(eval_interval >= 1, "eval_interval must be >= 1");
}

TrainConfig TrainConfig::from_config(const IniConfig& cfg) {
    TrainConfig c;
    const std::string s = "train";
    c.lr = cfg.get_real(s, "lr", c.lr);
    c.beta1 = cfg.get_real(s, "beta1", c.beta1);
    c.beta2 = cfg.get_real(s, "beta2", c.beta2);
    c.eps = cfg.get_real(s, "eps", c.eps);
    c.weight_decay = cfg.get_real(s, "weight_decay", c.weight_decay);
    c.grad_clip = cfg.get_real(s, "grad_clip", c.grad_clip);
    c.batch_size = static_cast<int>(cfg.get_int(s, "batch_size", c.batch_size));
    c.max_steps = static_cast<int>(cfg.get_int(s, "max_steps", c.max_steps));
    c.seed = static_cast<uint64_t>(cfg.get_int(s, "seed", static_cast<long>(c.seed)));
    c.eval_interval = static_cast<int>(cfg.get_int(s, "eval_interval", c.eval_interval));
    c.validate();
    return c;
}

double clip_gradients(const std::vector<Param*>& params, double max_norm) {
    double sq = 0.0;
    for (const Param* p : params) {
        if (!p->requires_grad()) continue;
        for (float g : p->data->grad) sq += static_cast<double>(g) * g;
    }
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (Param* p : params) {
            if (!p->requires_grad()) continue;
            for (float& g : p->data->grad) g = static_cast<float>(g * s);
        }
    }
    return norm;
}

void adamw_step(const std::vector<Param*>& params, OptimizerState& state, const TrainConfig& cfg) {
    cfg.validate();
    if (state.slots.size() != params.size()) state.slots.resize(params.size());
    state.t += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    for (size_t pi = 0; pi < params.size(); ++pi) {
        Param* p = params[pi];
        if (!p->requires_grad()) continue;
        auto& grad = p->data->grad;
        if (grad.empty()) continue;  // no gradient reached this parameter
        auto& slot = state.slots[pi];
        if (slot.m.size() != grad.size()) {
            slot.m.assign(grad.size(), 0.0);
            slot.v.assign(grad.size(), 0.0);
        }
        auto& vals = p->values();
        for (size_t i = 0; i < grad.size(); ++i) {
            double g = grad[i];
            if (!std::isfinite(g))
                fail_runtime("adamw_step: non-finite gradient in parameter {} at element {}",
                             p->name, i);
            slot.m[i] = cfg.beta1 * slot.m[i] + (1.0 - cfg.beta1) * g;
            slot.v[i] = cfg.beta2 * slot.v[i] + (1.0 - cfg.beta2) * g * g;
            double m_hat = slot.m[i] / bc1;
            double v_hat = slot.v[i] / bc2;
            double theta = vals[i];
            theta -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
            theta -= cfg.lr * cfg.weight_decay * static_cast<double>(vals[i]);
            vals[i] = static_cast<float>(theta);
        }
    }
}

void zero_gradients(const std::vector<Param*>& params) {
    for (Param* p : params) p->zero_grad();
}

}  // namespace zv
