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

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mavqa/numerics/params.hpp"

namespace mavqa {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 term added to the gradient
};

struct OptimState {
    AdamConfig hyper;
    std::map<std::string, Tensor, std::less<>> first_moment;
    std::map<std::string, Tensor, std::less<>> second_moment;
    std::uint64_t step = 0;
    double base_lr = 1e-4;
    int epoch = 0;
    int decay_every = 5;
    double decay_factor = 0.5;

    double current_lr() const;
};

/// base_lr * factor^floor(epoch / every); defaults halve every 5 epochs.
double lr_at_epoch(double base_lr, int epoch, int every = 5, double factor = 0.5);

/// One Adam update of every unfrozen parameter at the state's current
/// learning rate. Throws NumericError naming the parameter on a non-finite
/// gradient, before anything is modified.
void adam_step(ParamSet& params, OptimState& opt);

}  // namespace mavqa
