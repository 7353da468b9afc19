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


#include <vve/frames.hpp>
#include <vve/sync.hpp>

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace
{

using vve::frames::Frame;
using vve::frames::GeoOrigin;
using vve::frames::GeoPose;

const GeoOrigin kOrigin{40.0, -83.0};

std::vector<GeoPose> sample_poses(std::size_t n)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> off(-0.005, 0.005), hdg(-179.0, 180.0);
  std::vector<GeoPose> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({40.0 + off(rng), -83.0 + off(rng), hdg(rng), i});
  }
  return out;
}

void BM_RealToVirtual(benchmark::State & state)
{
  const auto poses = sample_poses(1024);
  const auto anchor = vve::sync::make_anchor(poses[0], {100.0, 50.0, -90.0, Frame::Fc}, kOrigin, 0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vve::sync::real_to_virtual(poses[i++ & 1023], anchor));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RealToVirtual);

void BM_VirtualToReal(benchmark::State & state)
{
  const auto poses = sample_poses(1024);
  const auto anchor = vve::sync::make_anchor(poses[0], {100.0, 50.0, -90.0, Frame::Fc}, kOrigin, 0);
  std::vector<vve::frames::PlanarPose> virt;
  for (const auto & p : poses) {
    virt.push_back(vve::sync::real_to_virtual(p, anchor));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vve::sync::virtual_to_real(virt[i++ & 1023], anchor));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_VirtualToReal);

void BM_MakeAnchor(benchmark::State & state)
{
  const auto poses = sample_poses(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
      vve::sync::make_anchor(poses[i++ & 1023], {100.0, 50.0, -90.0, Frame::Fc}, kOrigin, 0));
  }
}
BENCHMARK(BM_MakeAnchor);

}  // namespace

BENCHMARK_MAIN();
