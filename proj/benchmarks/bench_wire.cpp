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


#include <vve/wire.hpp>

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace
{

namespace w = vve::wire;

std::vector<w::Datagram> sample_datagrams(std::size_t n)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-179.0, 179.0), hdg(-179.0, 180.0);
  std::vector<w::Datagram> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({w::MsgType::pose, vve::sync::ActorKind::vehicle, static_cast<vve::sync::ActorId>(i), i * 100000,
                   lat(rng), lon(rng), hdg(rng), 5.0});
  }
  return out;
}

void BM_Encode(benchmark::State & state)
{
  const auto ds = sample_datagrams(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w::encode(ds[i++ & 255]));
  }
  state.SetBytesProcessed(state.iterations() * 52);
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State & state)
{
  std::vector<w::Frame> frames;
  for (const auto & d : sample_datagrams(256)) {
    frames.push_back(w::encode(d));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w::decode(frames[i++ & 255]));
  }
  state.SetBytesProcessed(state.iterations() * 52);
}
BENCHMARK(BM_Decode);

void BM_DecodeBadCrc(benchmark::State & state)
{
  auto frame = w::encode(sample_datagrams(1)[0]);
  frame[20] ^= 0x01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w::decode(frame));
  }
}
BENCHMARK(BM_DecodeBadCrc);

}  // namespace

BENCHMARK_MAIN();
