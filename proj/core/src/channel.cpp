// Copyright 2026 The vve-bridge Authors
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

#include "vve/channel.hpp"

#include "vve/error.hpp"

#include <algorithm>
#include <cmath>

namespace vve::harness
{

void validate(const ChannelModel & model)
{
  if (!std::isfinite(model.fixed_delay_ms) || model.fixed_delay_ms < 0.0) {
    throw ConfigError("fixed_delay_ms must be >= 0");
  }
  if (!std::isfinite(model.jitter_ms) || model.jitter_ms < 0.0) {
    throw ConfigError("jitter_ms must be >= 0");
  }
  if (!std::isfinite(model.loss_probability) || model.loss_probability < 0.0 ||
      model.loss_probability > 1.0) {
    throw ConfigError("loss_probability must be in [0, 1]");
  }
}

double SeededRng::uniform()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

ChannelSimulator::ChannelSimulator(ChannelModel model, std::uint64_t seed)
: model_(model), rng_(seed)
{
  validate(model_);
}

ChannelVerdict ChannelSimulator::next()
{
  std::lock_guard lock(mutex_);
  const double loss_draw = rng_.uniform();
  const double jitter_draw = rng_.uniform(-1.0, 1.0);
  ChannelVerdict v;
  v.lost = loss_draw < model_.loss_probability;
  const double delay_ms = std::max(0.0, model_.fixed_delay_ms + model_.jitter_ms * jitter_draw);
  v.delay_us = static_cast<std::uint64_t>(std::llround(delay_ms * 1000.0));
  return v;
}

ChannelModel ChannelSimulator::model() const
{
  std::lock_guard lock(mutex_);
  return model_;
}

void ChannelSimulator::set_model(const ChannelModel & model)
{
  validate(model);
  std::lock_guard lock(mutex_);
  model_ = model;
}

}  // namespace vve::harness
