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

#ifndef VVE__CHANNEL_HPP_
#define VVE__CHANNEL_HPP_

#include <cstdint>
#include <mutex>
#include <random>

namespace vve::harness
{

/// Injected link impairment: delay = fixed + U(-jitter, +jitter), clamped at zero.
struct ChannelModel
{
  double fixed_delay_ms{0.0};
  double jitter_ms{0.0};
  double loss_probability{0.0};

  friend bool operator==(const ChannelModel &, const ChannelModel &) = default;
};

/// Throws ConfigError on negative delays or a loss probability outside [0, 1].
void validate(const ChannelModel & model);

/// Portable seeded draws. std::mt19937_64 output is fixed by the standard; the standard
/// distributions are not, so the mapping to [0, 1) is done here.
class SeededRng
{
public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::mt19937_64 engine_;
};

struct ChannelVerdict
{
  bool lost{false};
  std::uint64_t delay_us{0};
};

/// Draws one verdict per datagram. Every call consumes exactly two draws, so a given seed yields
/// the same sequence regardless of the model in effect.
class ChannelSimulator
{
public:
  explicit ChannelSimulator(ChannelModel model = {}, std::uint64_t seed = 0);

  ChannelVerdict next();

  ChannelModel model() const;
  void set_model(const ChannelModel & model);

private:
  mutable std::mutex mutex_;
  ChannelModel model_;
  SeededRng rng_;
};

}  // namespace vve::harness

#endif  // VVE__CHANNEL_HPP_
