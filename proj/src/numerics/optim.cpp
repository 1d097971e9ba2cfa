// Copyright 2026 The mavqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mavqa/numerics/optim.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mavqa {

double lr_at_epoch(double base_lr, int epoch, int every, double factor) {
    if (epoch < 0) throw std::invalid_argument(fmt::format("lr_at_epoch: negative epoch {}", epoch));
    if (every <= 0) throw std::invalid_argument("lr_at_epoch: decay period must be positive");
    return base_lr * std::pow(factor, epoch / every);
}

double OptimState::current_lr() const { return lr_at_epoch(base_lr, epoch, decay_every, decay_factor); }

void adam_step(ParamSet& params, OptimState& opt) {
    for (const auto& p : params) {
        if (p.frozen) continue;
        for (std::size_t i = 0; i < p.grad.size(); ++i)
            if (!std::isfinite(p.grad[i]))
                throw NumericError(fmt::format("adam_step: non-finite gradient {} in parameter '{}' at flat index {} "
                                               "(step {})",
                                               p.grad[i], p.name, i, opt.step + 1));
    }

    const double lr = opt.current_lr();
    const auto& h = opt.hyper;
    opt.step += 1;
    const double t = static_cast<double>(opt.step);
    const double bc1 = 1.0 - std::pow(h.beta1, t);
    const double bc2 = 1.0 - std::pow(h.beta2, t);

    for (auto& p : params) {
        if (p.frozen) continue;
        auto m_it = opt.first_moment.find(p.name);
        if (m_it == opt.first_moment.end()) m_it = opt.first_moment.emplace(p.name, Tensor(p.value.shape())).first;
        auto v_it = opt.second_moment.find(p.name);
        if (v_it == opt.second_moment.end()) v_it = opt.second_moment.emplace(p.name, Tensor(p.value.shape())).first;
        Tensor& m = m_it->second;
        Tensor& v = v_it->second;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i] + h.weight_decay * p.value[i];
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + h.eps);
        }
    }
}

}  // namespace mavqa
