#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "checkpoint.hpp"
#include "grad_check.hpp"
#include "ops.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace abslab;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (std::size_t i = 0; i < t.size(); ++i) t.value()[i] = rng.uniform(-1.0, 1.0);
  return t;
}

Tensor identity(std::size_t n) {
  Tensor t = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.value()[i * n + i] = 1.0;
  return t;
}

}  // namespace

TEST_CASE("matmul identity and orthogonal rows") {
  Tape tape;
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor out = ops::matmul(tape, identity(2), a);
  CHECK(out.value() == std::vector<double>{1, 2, 3, 4});

  Tensor b = Tensor::from({1, 2}, {1, 0});
  Tensor c = Tensor::from({2, 1}, {0, 5});
  CHECK(ops::matmul(tape, b, c).value() == std::vector<double>{0});
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
  Tape tape;
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  CHECK_THROWS_WITH_AS(ops::matmul(tape, a, b), doctest::Contains("(2x3)"), DimensionError);
}

TEST_CASE("matmul gradient matches central finite differences") {
  Rng rng(7);
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  const double err = grad_check(
      [&](Tape& t) { return ops::sum(t, ops::matmul(t, a, b)); }, {a, b}, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("softmax symmetry, stability, high-precision values") {
  Tape tape;
  Tensor flat = ops::softmax(tape, Tensor::from({4}, {0, 0, 0, 0}));
  for (std::size_t i = 0; i < 4; ++i) CHECK(flat[i] == doctest::Approx(0.25).epsilon(1e-12));

  Tensor hot = ops::softmax(tape, Tensor::from({2}, {1000, 0}));
  CHECK(hot[0] == doctest::Approx(1.0));
  CHECK(hot[1] == doctest::Approx(0.0));
  CHECK(std::isfinite(hot[0]));

  // Reference values computed with 50-digit arithmetic:
  // softmax(1,2,3) = e^k / (e^1+e^2+e^3).
  Tensor s = ops::softmax(tape, Tensor::from({3}, {1, 2, 3}));
  CHECK(s[0] == doctest::Approx(0.090030573170380462).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(0.24472847105479764).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(0.66524095577482183).epsilon(1e-12));
}

TEST_CASE("softmax rejects non-finite input") {
  Tape tape;
  Tensor bad = Tensor::from({2}, {std::nan(""), 1.0});
  CHECK_THROWS_AS(ops::softmax(tape, bad), NumericError);
}

TEST_CASE("softmax sums to one and is permutation equivariant") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    Tape tape;
    const std::size_t n = 1 + rng.index(8);
    Tensor x = random_tensor({n}, rng, false);
    Tensor y = ops::softmax(tape, x);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += y[i];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // Reverse the input; output must reverse with it.
    std::vector<double> rev(x.value().rbegin(), x.value().rend());
    Tensor yr = ops::softmax(tape, Tensor::from({n}, rev));
    for (std::size_t i = 0; i < n; ++i)
      CHECK(yr[i] == doctest::Approx(y[n - 1 - i]).epsilon(1e-12));
  }
}

TEST_CASE("lstm_cell zero everything gives zero hidden state") {
  Tape tape;
  const std::size_t hidden = 3, input = 2;
  LstmParams p{Tensor::zeros({4 * hidden, input}), Tensor::zeros({4 * hidden, hidden}),
               Tensor::zeros({4 * hidden})};
  LstmState s{Tensor::zeros({hidden}), Tensor::zeros({hidden})};
  LstmState out = lstm_cell(tape, Tensor::zeros({input}), s, p);
  for (std::size_t i = 0; i < hidden; ++i) {
    CHECK(out.h[i] == 0.0);
    CHECK(out.c[i] == 0.0);
  }
}

TEST_CASE("lstm_cell gradient through three chained cells") {
  Rng rng(11);
  const std::size_t hidden = 3, input = 2;
  LstmParams p{random_tensor({4 * hidden, input}, rng), random_tensor({4 * hidden, hidden}, rng),
               random_tensor({4 * hidden}, rng)};
  std::vector<Tensor> xs = {random_tensor({input}, rng), random_tensor({input}, rng),
                            random_tensor({input}, rng)};
  auto f = [&](Tape& t) {
    LstmState s{Tensor::zeros({hidden}), Tensor::zeros({hidden})};
    for (const Tensor& x : xs) s = lstm_cell(t, x, s, p);
    return ops::sum(t, s.h);
  };
  std::vector<Tensor> params = {p.w_x, p.w_h, p.b, xs[0], xs[1], xs[2]};
  CHECK(grad_check(f, params, 1e-5) < 1e-5);
}

TEST_CASE("lstm_cell saturated forget gate carries cell state") {
  Tape tape;
  const std::size_t hidden = 2, input = 1;
  LstmParams p{Tensor::zeros({4 * hidden, input}), Tensor::zeros({4 * hidden, hidden}),
               Tensor::zeros({4 * hidden})};
  // Forget-gate bias very large: f = 1, so c = c_prev + i * cand with i = 0.5,
  // cand = tanh(0) = 0, hence c == c_prev exactly.
  for (std::size_t i = 0; i < hidden; ++i) p.b.value()[hidden + i] = 1000.0;
  LstmState s{Tensor::zeros({hidden}), Tensor::from({hidden}, {0.3, -0.7})};
  LstmState out = lstm_cell(tape, Tensor::from({input}, {0.0}), s, p);
  CHECK(out.c[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(out.c[1] == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("lstm_cell rejects inconsistent dimensions") {
  Tape tape;
  LstmParams p{Tensor::zeros({8, 2}), Tensor::zeros({8, 2}), Tensor::zeros({8})};
  LstmState s{Tensor::zeros({2}), Tensor::zeros({2})};
  CHECK_THROWS_AS(lstm_cell(tape, Tensor::zeros({5}), s, p), DimensionError);
}

TEST_CASE("grad_check on quadratic, constant, and a tiny model-like chain") {
  Tensor w = Tensor::scalar(3.0, true);
  const double quad = grad_check([&](Tape& t) { return ops::mul(t, w, w); }, {w}, 1e-5);
  CHECK(quad < 1e-9);
  CHECK(w.grad()[0] == doctest::Approx(6.0));

  Tensor c = Tensor::scalar(1.5, true);
  const double constant =
      grad_check([&](Tape& t) { return ops::affine_const(t, c, 0.0, 2.0); }, {c}, 1e-4);
  CHECK(constant < 1e-8);
}

TEST_CASE("grad_check validates epsilon range and finiteness") {
  Tensor w = Tensor::scalar(2.0, true);
  CHECK_THROWS_AS(grad_check([&](Tape& t) { return ops::mul(t, w, w); }, {w}, 1e-2),
                  ConfigError);
  Tensor inf = Tensor::scalar(std::numeric_limits<double>::infinity(), true);
  CHECK_THROWS_AS(
      grad_check([&](Tape& t) { return ops::mul(t, inf, inf); }, {inf}, 1e-5),
      NumericError);
}

TEST_CASE("every primitive matches finite differences over random shapes") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    const std::size_t n = 2 + rng.index(4);
    const std::size_t m = 2 + rng.index(3);
    Tensor a = random_tensor({n}, rng);
    Tensor b = random_tensor({n}, rng);
    Tensor s = Tensor::scalar(rng.uniform(0.5, 2.0), true);
    Tensor mat = random_tensor({m, n}, rng);
    Tensor mv = random_tensor({m}, rng);
    std::vector<Tensor> params = {a, b, s, mat, mv};

    auto f = [&](Tape& t) -> Tensor {
      Tensor u = ops::add(t, a, b);
      u = ops::mul(t, u, ops::sigmoid(t, a));
      u = ops::add(t, u, ops::tanh(t, b));
      // relu probed strictly on each side of the kink so central differences
      // stay valid
      u = ops::add(t, u, ops::relu(t, ops::affine_const(t, b, 1.0, 2.2)));
      u = ops::add(t, u, ops::relu(t, ops::affine_const(t, b, 1.0, -2.2)));
      u = ops::div(t, u, ops::affine_const(t, ops::exp(t, a), 1.0, 3.0));
      u = ops::scale_by(t, u, s);
      u = ops::div_by(t, u, s);
      Tensor v = ops::matvec(t, mat, u);
      v = ops::add(t, v, ops::matvec(t, mat, a));
      Tensor w = ops::matvec_t(t, mat, ops::add(t, v, mv));
      Tensor soft = ops::softmax(t, w);
      Tensor lg = ops::log_floor(t, ops::affine_const(t, soft, 1.0, 0.5));
      Tensor parts[] = {lg, u};
      Tensor cat = ops::concat(t, parts);
      Tensor sl = ops::slice(t, cat, 1, n);
      Tensor scalars[] = {ops::dot(t, sl, sl), ops::pick(t, cat, 0),
                          ops::sum_select(t, cat, {0, 1, 1})};
      return ops::sum(t, ops::stack_scalars(t, scalars));
    };
    CHECK(grad_check(f, params, 1e-5) < 1e-5);
  }
}

TEST_CASE("gather and stack primitives match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 5000);
    Tensor table = random_tensor({5, 3}, rng);
    std::vector<int> ids = {1, 4, 1, 0};
    auto f = [&](Tape& t) {
      Tensor g = ops::gather_rows(t, table, ids);
      Tensor rows[] = {ops::row(t, table, 2), ops::row(t, g, 0)};
      Tensor stacked = ops::stack_rows(t, rows);
      return ops::sum(t, ops::matmul(t, g, ops::matmul(t, stacked, table)));
    };
    CHECK(grad_check(f, {table}, 1e-5) < 1e-5);
  }
}

TEST_CASE("adjoints accumulate when a tensor is used twice") {
  Rng rng(42);
  Tensor x = random_tensor({4}, rng);

  // f(x) = g(x) + h(x) with g = sum(sigmoid(x)), h = sum(tanh(x)).
  Tape tape;
  Tensor fsum = ops::add(tape, ops::sum(tape, ops::sigmoid(tape, x)),
                         ops::sum(tape, ops::tanh(tape, x)));
  tape.backward(fsum);
  std::vector<double> combined = x.grad();

  x.zero_grad();
  Tape t1;
  t1.backward(ops::sum(t1, ops::sigmoid(t1, x)));
  std::vector<double> g1 = x.grad();
  x.zero_grad();
  Tape t2;
  t2.backward(ops::sum(t2, ops::tanh(t2, x)));
  std::vector<double> g2 = x.grad();

  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(combined[i] == doctest::Approx(g1[i] + g2[i]).epsilon(1e-12));
}

TEST_CASE("backward seeds d(loss)/d(loss) = 1") {
  Tensor x = Tensor::scalar(2.0, true);
  Tape tape;
  Tensor y = ops::mul(tape, x, x);
  tape.backward(y);
  CHECK(y.grad()[0] == 1.0);
}

TEST_CASE("checkpoint round-trips values bit-exactly") {
  Rng rng(3);
  std::vector<NamedTensor> params;
  params.push_back({"alpha", random_tensor({3, 2}, rng)});
  params.push_back({"beta", random_tensor({5}, rng)});
  params.push_back({"gamma", Tensor::scalar(rng.normal())});

  const std::string path =
      (std::filesystem::temp_directory_path() / "abslab_ckpt_test.bin").string();
  save_checkpoint(path, params, R"({"note":"round trip"})");
  Checkpoint ckpt = load_checkpoint(path);

  REQUIRE(ckpt.tensors.size() == 3);
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(ckpt.tensors[i].name == params[i].name);
    CHECK(ckpt.tensors[i].tensor.shape() == params[i].tensor.shape());
    CHECK(ckpt.tensors[i].tensor.value() == params[i].tensor.value());
  }
  CHECK(ckpt.extra_json.find("round trip") != std::string::npos);

  // restore into a same-shaped parameter set
  std::vector<NamedTensor> fresh;
  fresh.push_back({"alpha", Tensor::zeros({3, 2}, true)});
  fresh.push_back({"beta", Tensor::zeros({5}, true)});
  fresh.push_back({"gamma", Tensor::zeros({}, true)});
  restore_parameters(ckpt, fresh);
  CHECK(fresh[0].tensor.value() == params[0].tensor.value());

  std::vector<NamedTensor> wrong;
  wrong.push_back({"alpha", Tensor::zeros({2, 3}, true)});
  CHECK_THROWS_AS(restore_parameters(ckpt, wrong), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("rng streams are reproducible and derive independent substreams") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  CHECK(Rng::derive(1, 2, 3) == Rng::derive(1, 2, 3));
  CHECK(Rng::derive(1, 2, 3) != Rng::derive(1, 2, 4));
}
