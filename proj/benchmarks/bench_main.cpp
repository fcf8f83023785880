#include <benchmark/benchmark.h>

#include "mforge/ops.hpp"
#include "mforge/rng.hpp"
#include "mforge/tape.hpp"

namespace {

mforge::Tensor random_tensor(std::vector<int> shape, mforge::Xoshiro256pp& rng) {
  mforge::Tensor t(std::move(shape));
  for (double& v : t.vec()) v = rng.normal();
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  mforge::Xoshiro256pp rng(1);
  const auto in = random_tensor({8, 16, 16}, rng);
  const auto ker = random_tensor({16, 8, 3, 3}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mforge::conv2d_forward(in, ker, 1, 1));
  }
}
BENCHMARK(BM_Conv2dForward);

void BM_Conv2dTrainStep(benchmark::State& state) {
  mforge::Xoshiro256pp rng(2);
  const auto image = random_tensor({1, 32, 32}, rng);
  const auto ker = random_tensor({8, 1, 3, 3}, rng);
  mforge::Tensor onehot({8});
  onehot[0] = 1.0;
  for (auto _ : state) {
    mforge::Tape tape;
    auto k = tape.param(ker);
    auto h = tape.conv2d(tape.constant(image), k, 1, 1);
    h = tape.maxpool2d(h, 2, 2);
    h = tape.reshape(h, {8 * 16 * 16});
    auto w = tape.param(random_tensor({8, 8 * 16 * 16}, rng));
    auto b = tape.param(mforge::Tensor({8}));
    auto loss = tape.softmax_cross_entropy(tape.dense(h, w, b), onehot);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(k));
  }
}
BENCHMARK(BM_Conv2dTrainStep);

}  // namespace

BENCHMARK_MAIN();
