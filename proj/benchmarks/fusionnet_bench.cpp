#include <benchmark/benchmark.h>

#include <random>

#include "fusionnet/layers.hpp"
#include "fusionnet/mesh_io.hpp"
#include "fusionnet/models.hpp"
#include "fusionnet/renderer.hpp"
#include "fusionnet/shapes.hpp"
#include "fusionnet/transform.hpp"
#include "fusionnet/voxelizer.hpp"

using namespace fusionnet;

namespace {

Tensor<float> random_tensor(const Shape& shape, std::uint64_t seed) {
  Tensor<float> t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

void BM_Voxelize(benchmark::State& state) {
  const TriangleMesh mesh = normalize_mesh(shapes::icosphere(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(voxelize_surface(mesh, 30));
  state.counters["triangles"] = static_cast<double>(mesh.faces.size());
}
BENCHMARK(BM_Voxelize)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RotateAndVoxelize(benchmark::State& state) {
  const TriangleMesh mesh = normalize_mesh(shapes::torus(32, 16, 0.6, 0.25));
  const OrientationSet o = sample_orientations(60, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(voxelize_surface(normalize_mesh(apply_rotation(mesh, o.orientations[i++ % 60])), 30));
  }
}
BENCHMARK(BM_RotateAndVoxelize)->Unit(benchmark::kMillisecond);

void BM_RenderView(benchmark::State& state) {
  const TriangleMesh mesh = normalize_mesh(shapes::icosphere(3));
  const CameraRig rig = make_camera_rig(static_cast<int>(state.range(0)));
  int v = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_view(mesh, rig, v++ % kViewCount));
}
BENCHMARK(BM_RenderView)->Arg(64)->Arg(224)->Unit(benchmark::kMicrosecond);

void BM_Conv(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Shape in{30, 30, 30};
  auto layer = make_layer<float>(LayerSpec::conv("conv1", 64, 3), in, 1);
  const Tensor<float> x = random_tensor(batched(batch, in), 2);
  const ForwardContext ctx{true, 0};
  for (auto _ : state) {
    const Tensor<float> y = layer->forward(x, ctx);
    benchmark::DoNotOptimize(layer->backward(y, true));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_Conv)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_FullyConnected(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Shape in{64, 5, 5};
  auto layer = make_layer<float>(LayerSpec::fully_connected("fc1", 2048), in, 1);
  const Tensor<float> x = random_tensor(batched(batch, in), 3);
  const ForwardContext ctx{true, 0};
  for (auto _ : state) {
    const Tensor<float> y = layer->forward(x, ctx);
    benchmark::DoNotOptimize(layer->backward(y, true));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_FullyConnected)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Vcnn1MultiviewForward(benchmark::State& state) {
  const NetworkSpec spec = build_vcnn1(40);
  Network<float> net = instantiate<float>(spec, 1);
  std::vector<Tensor<float>> views;
  for (int v = 0; v < static_cast<int>(state.range(0)); ++v) views.push_back(random_tensor(spec.input_shape, v));
  for (auto _ : state) benchmark::DoNotOptimize(forward_multiview(net, views));
}
BENCHMARK(BM_Vcnn1MultiviewForward)->Arg(12)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
