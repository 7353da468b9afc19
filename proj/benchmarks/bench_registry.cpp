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


#include <vve/sync.hpp>

#include <benchmark/benchmark.h>

#include <memory>

namespace
{

namespace sy = vve::sync;
using vve::frames::Frame;
using vve::frames::GeoPose;

std::unique_ptr<sy::ActorRegistry> make_registry(int actors)
{
  auto reg = std::make_unique<sy::ActorRegistry>();
  for (int id = 1; id <= actors; ++id) {
    reg->register_actor({static_cast<sy::ActorId>(id), sy::ActorKind::vehicle,
                         vve::frames::PlanarPose{0.0, 0.0, 0.0, Frame::Fc}, std::nullopt, std::nullopt});
    reg->update_actor(static_cast<sy::ActorId>(id), GeoPose{40.0, -83.0, 0.0, 1}, 1);
  }
  return reg;
}

void BM_UpdateActor(benchmark::State & state)
{
  const auto actors = static_cast<int>(state.range(0));
  auto reg = make_registry(actors);
  std::uint64_t t = 2;
  for (auto _ : state) {
    const auto id = static_cast<sy::ActorId>(1 + t % static_cast<std::uint64_t>(actors));
    benchmark::DoNotOptimize(reg->update_actor(id, GeoPose{40.0 + 1e-7 * static_cast<double>(t % 1000), -83.0, 0.0, t}, t));
    ++t;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_UpdateActor)->Arg(2)->Arg(16)->Arg(64);

void BM_Snapshot(benchmark::State & state)
{
  auto reg = make_registry(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reg->snapshot());
  }
}
BENCHMARK(BM_Snapshot)->Arg(2)->Arg(64);

void BM_Tick(benchmark::State & state)
{
  auto reg = make_registry(static_cast<int>(state.range(0)));
  std::uint64_t t = 2;
  for (auto _ : state) {
    reg->tick(t++);
  }
}
BENCHMARK(BM_Tick)->Arg(2)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
