#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mforge/errors.hpp"
#include "mforge/image.hpp"
#include "mforge/kvconfig.hpp"
#include "mforge/linalg.hpp"
#include "mforge/ops.hpp"
#include "mforge/optim.hpp"
#include "mforge/rng.hpp"
#include "mforge/tape.hpp"
#include "mforge/tensor.hpp"
#include "oracles.hpp"

using namespace mforge;

namespace {

Tensor random_tensor(std::vector<int> shape, Xoshiro256pp& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.vec()) v = scale * rng.normal();
  return t;
}

}  // namespace

TEST_CASE("tensor shape and data invariants") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.shape_str() == "(2, 3, 4)");
  CHECK_THROWS_AS(Tensor({0, 2}), UsageError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), UsageError);
  t.at(1, 2, 3) = 7.0;
  CHECK(t[23] == 7.0);
}

TEST_CASE("xoshiro stream is deterministic and uniform-ish") {
  Xoshiro256pp a(42), b(42), c(43);
  double mean = 0.0;
  bool all_equal = true;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.uniform();
    const double vb = b.uniform();
    CHECK(va == vb);
    if (va != c.uniform()) all_equal = false;
    mean += va;
  }
  CHECK(!all_equal);
  CHECK(mean / 1000.0 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(hash_seed({1, 2, 3}) != hash_seed({1, 3, 2}));
  CHECK(hash_seed({1, 2, 3}) == hash_seed({1, 2, 3}));
}

TEST_CASE("conv2d identity kernel reproduces the input") {
  Tensor in({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor ker({1, 1, 1, 1}, {1.0});
  const Tensor out = conv2d_forward(in, ker, 1, 0);
  for (int i = 0; i < 9; ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("conv2d forced dot product") {
  Tensor in({1, 2, 2}, {1, 2, 3, 4});
  Tensor ker({1, 1, 2, 2}, {1, 0, 0, 1});
  const Tensor out = conv2d_forward(in, ker, 1, 0);
  CHECK(out.size() == 1);
  CHECK(out[0] == doctest::Approx(5.0));
}

TEST_CASE("conv2d matches the direct-summation oracle") {
  Xoshiro256pp rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor in = random_tensor({2, 8, 8}, rng);
    Tensor ker = random_tensor({4, 2, 3, 3}, rng);
    const Tensor fast = conv2d_forward(in, ker, 1, 1);
    const Tensor slow = oracle::conv2d_loops(in, ker, 1, 1);
    REQUIRE(fast.shape() == slow.shape());
    for (int i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d rejects bad geometry with a dimension report") {
  Tensor in({1, 4, 4});
  Tensor ker({1, 2, 3, 3});
  CHECK_THROWS_WITH_AS(conv2d_forward(in, ker, 1, 0),
                       doctest::Contains("channel mismatch"), UsageError);
  Tensor ker2({1, 1, 3, 3});
  CHECK_THROWS_WITH_AS(conv2d_forward(in, ker2, 2, 0), doctest::Contains("non-exact"), UsageError);
  Tensor ker3({1, 1, 5, 5});
  CHECK_THROWS_AS(conv2d_forward(in, ker3, 1, 0), UsageError);
}

TEST_CASE("maxpool2d basics and oracle agreement") {
  Tensor constant = Tensor::full({1, 4, 4}, 3.25);
  const Tensor pooled = maxpool2d_forward(constant, 2, 2);
  for (int i = 0; i < pooled.size(); ++i) CHECK(pooled[i] == 3.25);

  Tensor sq({1, 2, 2}, {1, 2, 3, 4});
  CHECK(maxpool2d_forward(sq, 2, 2)[0] == 4.0);

  Xoshiro256pp rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor in = random_tensor({4, 16, 16}, rng);
    const Tensor fast = maxpool2d_forward(in, 2, 2);
    const Tensor slow = oracle::maxpool_loops(in, 2, 2);
    for (int i = 0; i < fast.size(); ++i) CHECK(fast[i] == slow[i]);
  }
  Tensor odd({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(maxpool2d_forward(odd, 2, 2), UsageError);  // non-exact
  CHECK_THROWS_AS(maxpool2d_forward(sq, 3, 1), UsageError);   // window too large
}

TEST_CASE("maxpool ties route gradient to the lowest linear index") {
  Tape tape;
  Var x = tape.param(Tensor({1, 2, 2}, {5, 5, 5, 5}));
  Var y = tape.maxpool2d(x, 2, 2);
  Var loss = tape.sum(y);
  tape.backward(loss);
  const Tensor& g = tape.grad(x);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK(g[3] == 0.0);
}

TEST_CASE("dense layer matches the matmul oracle") {
  Tensor w({2, 2}, {1, 0, 0, 1});
  Tensor b({2}, {0, 0});
  Tensor x({2}, {3, 4});
  const Tensor ident = dense_forward(x, w, b);
  CHECK(ident[0] == 3.0);
  CHECK(ident[1] == 4.0);

  Tensor w2({1, 2}, {1, 1});
  Tensor b2({1}, {1});
  CHECK(dense_forward(Tensor({2}, {2, 3}), w2, b2)[0] == doctest::Approx(6.0));

  Xoshiro256pp rng(3);
  Tensor w3 = random_tensor({8, 32}, rng);
  Tensor b3 = random_tensor({8}, rng);
  Tensor x3 = random_tensor({32}, rng);
  const Tensor fast = dense_forward(x3, w3, b3);
  const auto slow = oracle::matvec_loops(w3.vec(), 8, 32, x3.vec(), b3.vec());
  for (int i = 0; i < 8; ++i) CHECK(fast[i] == doctest::Approx(slow[static_cast<std::size_t>(i)]).epsilon(1e-12));

  CHECK_THROWS_AS(dense_forward(Tensor({3}), w3, b3), UsageError);
}

TEST_CASE("relu and softmax contracts") {
  Tensor x({3}, {-1, 0, 2});
  const Tensor y = relu_forward(x);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 2.0);

  // uniform logits over k classes -> cross entropy ln(k)
  Tape tape;
  const int k = 7;
  Var logits = tape.param(Tensor::full({k}, 0.3));
  Tensor onehot({k});
  onehot[2] = 1.0;
  Var ce = tape.softmax_cross_entropy(logits, onehot);
  CHECK(tape.value(ce)[0] == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));

  Xoshiro256pp rng(5);
  Tensor raw = random_tensor({9}, rng, 3.0);
  const Tensor p = softmax(raw);
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) sum += p[i];
  CHECK(std::fabs(sum - 1.0) < 1e-12);

  // scalar-math recomputation of cross entropy
  Tape t2;
  Var lg = t2.param(raw);
  Tensor oh({9});
  oh[4] = 1.0;
  Var loss = t2.softmax_cross_entropy(lg, oh);
  double mx = raw[0];
  for (int i = 0; i < 9; ++i) mx = std::max(mx, raw[i]);
  double z = 0.0;
  for (int i = 0; i < 9; ++i) z += std::exp(raw[i] - mx);
  const double expected = -(raw[4] - mx - std::log(z));
  CHECK(t2.value(loss)[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(t2.value(loss)[0] >= 0.0);

  CHECK_THROWS_AS(relu_forward(Tensor()), UsageError);
}

TEST_CASE("backward on trivial graphs") {
  {
    Tape tape;
    Var x = tape.param(Tensor::scalar(2.5));
    tape.backward(x);  // loss = x
    CHECK(tape.grad(x)[0] == 1.0);
  }
  {
    Tape tape;
    Var x = tape.param(Tensor({2}, {1, 2}));
    Var sq = tape.mul(x, x);
    Var loss = tape.sum(sq);
    tape.backward(loss);
    CHECK(tape.grad(x)[0] == doctest::Approx(2.0));
    CHECK(tape.grad(x)[1] == doctest::Approx(4.0));
  }
  {
    // unreachable parameters get zero gradient
    Tape tape;
    Var x = tape.param(Tensor::scalar(1.0));
    Var unused = tape.param(Tensor({3}, {1, 2, 3}));
    Var loss = tape.mul(x, x);
    tape.backward(loss);
    CHECK(tape.grad(unused).max_abs() == 0.0);
  }
  {
    Tape tape;
    Var x = tape.param(Tensor({2}, {1, 2}));
    CHECK_THROWS_AS(tape.backward(x), UsageError);  // non-scalar loss
  }
}

TEST_CASE("finite differences validate every layer type") {
  Xoshiro256pp rng(1234);

  // composed network: conv -> bias -> relu -> pool -> dense -> CE
  std::vector<Tensor> params;
  params.push_back(random_tensor({3, 2, 3, 3}, rng, 0.5));  // kernels
  params.push_back(random_tensor({3}, rng, 0.1));           // conv bias
  params.push_back(random_tensor({4, 12}, rng, 0.5));       // dense w (3*2*2=12)
  params.push_back(random_tensor({4}, rng, 0.1));           // dense b
  const Tensor image = random_tensor({2, 4, 4}, rng);
  Tensor onehot({4});
  onehot[1] = 1.0;

  auto build = [&](Tape& tape, const std::vector<Tensor>& p, std::vector<Var>* vars) {
    Var img = tape.constant(image);
    Var k = tape.param(p[0]);
    Var cb = tape.param(p[1]);
    Var w = tape.param(p[2]);
    Var b = tape.param(p[3]);
    if (vars) *vars = {k, cb, w, b};
    Var h = tape.conv2d(img, k, 1, 1);
    h = tape.bias_channels(h, cb);
    h = tape.relu(h);
    h = tape.maxpool2d(h, 2, 2);
    h = tape.reshape(h, {12});
    h = tape.dense(h, w, b);
    return tape.softmax_cross_entropy(h, onehot);
  };

  auto loss_fn = [&](const std::vector<Tensor>& p) {
    Tape tape;
    return tape.value(build(tape, p, nullptr))[0];
  };

  Tape tape;
  std::vector<Var> vars;
  Var loss = build(tape, params, &vars);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  for (Var v : vars) analytic.push_back(tape.grad(v));

  const auto check = oracle::finite_difference_check(loss_fn, params, analytic, 1e-5);
  CHECK(check.checked > 100);
  CHECK(check.max_rel_err < 1e-4);
}

TEST_CASE("finite differences validate elementwise ops and losses") {
  Xoshiro256pp rng(99);
  std::vector<Tensor> params = {random_tensor({2, 4, 4}, rng, 0.8)};
  const Tensor target = random_tensor({2, 4, 4}, rng, 0.8);
  const Tensor bce_target = Tensor::full({2, 2, 2}, 1.0);

  // exercise leaky_relu, tanh, sigmoid, exp, add, sub, mul, scale, upsample,
  // squeeze/unsqueeze, split/concat, mse, l1, bce
  auto build = [&](Tape& tape, const std::vector<Tensor>& p, Var* var) {
    Var x = tape.param(p[0]);
    if (var) *var = x;
    Var a = tape.tanh_act(x);
    Var b = tape.sigmoid(tape.scale(x, 0.5));
    Var c = tape.mul(a, b);
    c = tape.add(c, tape.leaky_relu(x, 0.2));
    Var sq = tape.squeeze2(c);                    // (8,2,2)
    auto [front, back] = tape.split_channels(sq, 3);
    Var joined = tape.concat_channels(front, back);
    Var unsq = tape.unsqueeze2(joined);           // (2,4,4)
    Var up = tape.upsample2(unsq);                // (2,8,8)
    Var donw = tape.maxpool2d(up, 2, 2);          // (2,4,4)
    Var l1 = tape.l1_loss(donw, target);
    Var l2 = tape.mse_loss(tape.exp_act(tape.scale(unsq, 0.3)), target);
    Var l3 = tape.bce_with_logits(tape.maxpool2d(unsq, 2, 2), bce_target);
    return tape.add(tape.add(l1, l2), l3);
  };
  auto loss_fn = [&](const std::vector<Tensor>& p) {
    Tape tape;
    return tape.value(build(tape, p, nullptr))[0];
  };
  Tape tape;
  Var x;
  Var loss = build(tape, params, &x);
  tape.backward(loss);
  const auto check = oracle::finite_difference_check(loss_fn, params, {tape.grad(x)}, 1e-5);
  CHECK(check.max_rel_err < 1e-4);
}

TEST_CASE("finite differences validate flow-layer ops") {
  Xoshiro256pp rng(2024);
  std::vector<Tensor> params;
  params.push_back(random_tensor({4}, rng, 0.3));  // log_scale
  params.push_back(random_tensor({4}, rng, 0.3));  // bias
  Tensor mix = random_tensor({4, 4}, rng, 0.4);
  for (int i = 0; i < 4; ++i) mix[i * 4 + i] += 1.5;  // keep well-conditioned
  params.push_back(mix);
  const Tensor x0 = random_tensor({4, 3, 3}, rng);

  auto build = [&](Tape& tape, const std::vector<Tensor>& p, std::vector<Var>* vars) {
    Var x = tape.constant(x0);
    Var ls = tape.param(p[0]);
    Var b = tape.param(p[1]);
    Var w = tape.param(p[2]);
    if (vars) *vars = {ls, b, w};
    Var y = tape.actnorm(x, ls, b);
    y = tape.channel_mix(y, w);
    Var logdet = tape.add(tape.scale(tape.sum(ls), 9.0), tape.scale(tape.log_abs_det(w), 9.0));
    Var energy = tape.scale(tape.sum(tape.mul(y, y)), 0.5);
    return tape.sub(energy, logdet);
  };
  auto loss_fn = [&](const std::vector<Tensor>& p) {
    Tape tape;
    return tape.value(build(tape, p, nullptr))[0];
  };
  Tape tape;
  std::vector<Var> vars;
  Var loss = build(tape, params, &vars);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  for (Var v : vars) analytic.push_back(tape.grad(v));
  const auto check = oracle::finite_difference_check(loss_fn, params, analytic, 1e-5);
  CHECK(check.max_rel_err < 1e-4);
}

TEST_CASE("adam steps") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;

  // zero gradients leave parameters unchanged and advance t
  Tensor p({2}, {1.0, -2.0});
  std::vector<NamedParam> params = {{"p", &p}};
  AdamOptimizer opt(cfg, params);
  opt.step(params, {Tensor({2})});
  CHECK(opt.step_count() == 1);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -2.0);

  // first step with gradient 1 moves by ~lr (bias-corrected sign step);
  // hand evaluation: mhat = 1, vhat = 1 -> update = lr / (1 + eps)
  Tensor q({1}, {0.0});
  std::vector<NamedParam> qp = {{"q", &q}};
  AdamOptimizer opt2(cfg, qp);
  opt2.step(qp, {Tensor({1}, {1.0})});
  CHECK(q[0] == doctest::Approx(-0.1).epsilon(1e-6));

  // two successive steps on a quadratic decrease the loss
  Tensor w({1}, {3.0});
  std::vector<NamedParam> wp = {{"w", &w}};
  AdamOptimizer opt3(cfg, wp);
  double prev_loss = w[0] * w[0];
  for (int i = 0; i < 2; ++i) {
    opt3.step(wp, {Tensor({1}, {2.0 * w[0]})});
    const double loss = w[0] * w[0];
    CHECK(loss < prev_loss);
    prev_loss = loss;
  }

  // non-finite gradient is rejected with the parameter name
  Tensor r({1}, {0.0});
  std::vector<NamedParam> rp = {{"kernel.3", &r}};
  AdamOptimizer opt4(cfg, rp);
  CHECK_THROWS_WITH_AS(opt4.step(rp, {Tensor({1}, {std::nan("")})}),
                       doctest::Contains("kernel.3"), NumericError);
}

TEST_CASE("training determinism: identical seeds give bit-identical parameters") {
  auto run = [](std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    Tensor w = random_tensor({4, 4}, rng, 0.5);
    Tensor b({4});
    std::vector<NamedParam> params = {{"w", &w}, {"b", &b}};
    AdamConfig cfg;
    AdamOptimizer opt(cfg, params);
    const Tensor x = random_tensor({4}, rng);
    const Tensor target = random_tensor({4}, rng);
    for (int stepi = 0; stepi < 25; ++stepi) {
      Tape tape;
      Var wx = tape.param(w);
      Var bx = tape.param(b);
      Var y = tape.dense(tape.constant(x), wx, bx);
      Var loss = tape.mse_loss(y, target);
      tape.backward(loss);
      opt.step(params, {tape.grad(wx), tape.grad(bx)});
    }
    return std::make_pair(w, b);
  };
  const auto [w1, b1] = run(77);
  const auto [w2, b2] = run(77);
  for (int i = 0; i < w1.size(); ++i) CHECK(w1[i] == w2[i]);
  for (int i = 0; i < b1.size(); ++i) CHECK(b1[i] == b2[i]);
}

TEST_CASE("LU decomposition, determinant, inverse") {
  std::vector<double> a = {4, 3, 6, 3};  // det = 12 - 18 = -6
  LU lu(a, 2);
  CHECK(lu.det() == doctest::Approx(-6.0));
  CHECK(lu.log_abs_det() == doctest::Approx(std::log(6.0)));
  const auto inv = lu.inverse();
  // A * A^{-1} = I
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 2; ++k) acc += a[static_cast<std::size_t>(i) * 2 + k] * inv[static_cast<std::size_t>(k) * 2 + j];
      CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
  const auto x = lu.solve({1.0, 2.0});
  CHECK(4 * x[0] + 3 * x[1] == doctest::Approx(1.0));
  CHECK(6 * x[0] + 3 * x[1] == doctest::Approx(2.0));
}

TEST_CASE("power iteration eigenpairs") {
  // symmetric matrix with known spectrum: diag(5, 2) rotated by 45 degrees
  const double c = std::cos(0.7853981633974483), s = std::sin(0.7853981633974483);
  std::vector<double> m = {5 * c * c + 2 * s * s, (5 - 2) * c * s, (5 - 2) * c * s,
                           5 * s * s + 2 * c * c};
  const auto pairs = top_eigenpairs(m, 2, 2);
  CHECK(pairs[0].value == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(pairs[1].value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::fabs(pairs[0].vector[0]) == doctest::Approx(std::fabs(c)).epsilon(1e-6));
  // orthonormality
  const double dot = pairs[0].vector[0] * pairs[1].vector[0] + pairs[0].vector[1] * pairs[1].vector[1];
  CHECK(std::fabs(dot) < 1e-8);
}

TEST_CASE("pgm round trip and image utilities") {
  Xoshiro256pp rng(8);
  Tensor img({1, 6, 5});
  for (double& v : img.vec()) v = rng.uniform();
  write_pgm("test_core_tmp.pgm", img);
  const Tensor back = read_pgm("test_core_tmp.pgm");
  REQUIRE(back.shape() == img.shape());
  for (int i = 0; i < img.size(); ++i) {
    CHECK(back[i] == doctest::Approx(img[i]).epsilon(0.01));  // 8-bit quantisation
  }
  std::remove("test_core_tmp.pgm");

  // blur conserves mass and reduces Laplacian variance
  Tensor impulse({1, 17, 17});
  impulse.at(0, 8, 8) = 1.0;
  const Tensor blurred = gaussian_blur(impulse, 1.2);
  double mass = 0.0;
  for (double v : blurred.vec()) mass += v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gaussian_blur(impulse, 0.0).at(0, 8, 8) == 1.0);

  Tensor texture({1, 16, 16});
  for (double& v : texture.vec()) v = rng.uniform();
  CHECK(laplacian_variance(gaussian_blur(texture, 1.0)) < laplacian_variance(texture));
  CHECK(laplacian_variance(texture) == doctest::Approx(oracle::laplacian_variance_loops(texture)));
}

TEST_CASE("kv config round trip") {
  KVConfig cfg;
  cfg.set("name", "demo");
  cfg.set_int("count", 42);
  cfg.set_double("ratio", 0.30000000000000004);
  cfg.set_bool("flag", true);
  const std::string text = cfg.serialize();
  const KVConfig back = KVConfig::parse(text);
  CHECK(back.get("name") == "demo");
  CHECK(back.get_int("count") == 42);
  CHECK(back.get_double("ratio") == 0.30000000000000004);
  CHECK(back.get_bool_or("flag", false));
  CHECK(back.get_int_or("missing", 7) == 7);
  CHECK_THROWS_AS(back.get("missing"), DataError);
  CHECK_THROWS_AS(KVConfig::parse("no equals sign here"), DataError);
}
