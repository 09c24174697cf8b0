#include <cmath>
#include <vector>

#include "doctest.h"
#include "shapelab/rng.hpp"
#include "shapelab/tape.hpp"
#include "support/fd.hpp"
#include "support/oracles.hpp"

using namespace shapelab;
using shapelab::testing::conv2d_oracle;
using shapelab::testing::max_grad_rel_error;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("matmul forward fixture") {
  Tape tape;
  Val a = tape.leaf(Tensor::from({1, 2}, {1, 2}));
  Val b = tape.leaf(Tensor::from({2, 1}, {3, 4}));
  Val c = tape.matmul(a, b);
  CHECK(tape.value(c).size() == 1);
  CHECK(tape.value(c)[0] == doctest::Approx(11.0).epsilon(1e-12));
}

TEST_CASE("matmul shape mismatch") {
  Tape tape;
  Val a = tape.leaf(Tensor({2, 3}));
  Val b = tape.leaf(Tensor({2, 3}));
  CHECK_THROWS_AS(tape.matmul(a, b), DimensionError);
}

TEST_CASE("matmul gradients match finite differences") {
  Rng rng(11);
  std::vector<Tensor> params{random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)};
  for (auto& p : params) p.set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    return t.sum(t.mul(t.matmul(t.leaf(ps[0]), t.leaf(ps[1])),
                       t.matmul(t.leaf(ps[0]), t.leaf(ps[1]))));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("add_rows broadcasts bias and accumulates bias gradient") {
  Rng rng(12);
  std::vector<Tensor> params{random_tensor({3, 2}, rng), random_tensor({2}, rng)};
  for (auto& p : params) p.set_requires_grad(true);
  {
    Tape tape;
    Val y = tape.add_rows(tape.leaf(params[0]), tape.leaf(params[1]));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(tape.value(y)[i * 2 + j] ==
              doctest::Approx(params[0][i * 2 + j] + params[1][j]).epsilon(1e-12));
  }
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    Val y = t.add_rows(t.leaf(ps[0]), t.leaf(ps[1]));
    return t.sum(t.mul(y, y));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("elementwise ops: forward and gradients") {
  Rng rng(13);
  std::vector<Tensor> params{random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)};
  for (auto& p : params) p.set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    Val a = t.leaf(ps[0]);
    Val b = t.leaf(ps[1]);
    return t.sum(t.add(t.mul(a, b), t.scale(a, 0.3)));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("relu forward clamps and gradient gates") {
  Tape tape;
  Tensor x = Tensor::from({4}, {-1.0, 0.0, 0.5, 2.0});
  x.set_requires_grad(true);
  Val y = tape.relu(tape.leaf(x));
  CHECK(tape.value(y)[0] == 0.0);
  CHECK(tape.value(y)[1] == 0.0);
  CHECK(tape.value(y)[2] == 0.5);
  CHECK(tape.value(y)[3] == 2.0);
  tape.backward(tape.sum(y));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);  // subgradient 0 at the kink
  CHECK(x.grad()[2] == 1.0);
  CHECK(x.grad()[3] == 1.0);
}

TEST_CASE("relu gradient matches finite differences away from the kink") {
  Rng rng(14);
  std::vector<Tensor> params{random_tensor({3, 3}, rng)};
  // Keep coordinates away from zero so the FD probe does not straddle it.
  for (int i = 0; i < params[0].size(); ++i)
    if (std::abs(params[0][i]) < 0.05) params[0][i] = 0.1;
  params[0].set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    Val y = t.relu(t.leaf(ps[0]));
    return t.sum(t.mul(y, y));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("softmax_nll fixtures") {
  SUBCASE("confident correct prediction") {
    Tape tape;
    Val logits = tape.leaf(Tensor::from({1, 2}, {10.0, -10.0}));
    Val loss = tape.softmax_nll(logits, {0});
    // ln(1 + e^-20)
    CHECK(tape.scalar_value(loss) == doctest::Approx(2.0611536181902037e-9).epsilon(1e-6));
  }
  SUBCASE("uniform logits give ln(C)") {
    Tape tape;
    Val logits = tape.leaf(Tensor({3, 5}));
    Val loss = tape.softmax_nll(logits, {0, 2, 4});
    CHECK(tape.scalar_value(loss) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("label out of range") {
    Tape tape;
    Val logits = tape.leaf(Tensor({1, 3}));
    CHECK_THROWS_AS(tape.softmax_nll(logits, {3}), IndexError);
    CHECK_THROWS_AS(tape.softmax_nll(logits, {-1}), IndexError);
  }
  SUBCASE("batch size mismatch") {
    Tape tape;
    Val logits = tape.leaf(Tensor({2, 3}));
    CHECK_THROWS_AS(tape.softmax_nll(logits, {0}), DimensionError);
  }
}

TEST_CASE("softmax_nll is stable under large logit shifts") {
  Tape tape;
  Val logits = tape.leaf(Tensor::from({1, 3}, {1000.0, 999.0, 998.0}));
  Val loss = tape.softmax_nll(logits, {0});
  const double expected = std::log(1.0 + std::exp(-1.0) + std::exp(-2.0));
  CHECK(std::isfinite(tape.scalar_value(loss)));
  CHECK(tape.scalar_value(loss) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("softmax_nll gradient matches finite differences") {
  Rng rng(15);
  std::vector<Tensor> params{random_tensor({4, 5}, rng, 2.0)};
  params[0].set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    return t.softmax_nll(t.leaf(ps[0]), {1, 0, 4, 2});
  });
  CHECK(err < 1e-4);
}

TEST_CASE("softmax_rows rows sum to one") {
  Rng rng(16);
  Tensor logits = random_tensor({6, 9}, rng, 30.0);
  Tensor p = softmax_rows(logits);
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 9; ++j) {
      CHECK(p[i * 9 + j] >= 0.0);
      s += p[i * 9 + j];
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("l2_penalty fixture and gradient") {
  Rng rng(17);
  std::vector<Tensor> params{Tensor::from({2}, {3.0, 4.0})};
  params[0].set_requires_grad(true);
  {
    Tape tape;
    Val loss = tape.l2_penalty({tape.leaf(params[0])}, 1.0);
    CHECK(tape.scalar_value(loss) == doctest::Approx(25.0).epsilon(1e-12));
  }
  {
    Tape tape;
    CHECK_THROWS_AS(tape.l2_penalty({tape.leaf(params[0])}, -0.5), ConfigError);
  }
  std::vector<Tensor> ps{random_tensor({3, 2}, rng), random_tensor({4}, rng)};
  for (auto& p : ps) p.set_requires_grad(true);
  const double err = max_grad_rel_error(ps, [](Tape& t, std::vector<Tensor>& v) {
    return t.l2_penalty({t.leaf(v[0]), t.leaf(v[1])}, 0.37);
  });
  CHECK(err < 1e-4);
}

TEST_CASE("conv2d matches the direct-summation oracle over all small extents") {
  Rng rng(18);
  for (int cin = 1; cin <= 3; ++cin)
    for (int cout = 1; cout <= 3; ++cout)
      for (int h = 1; h <= 6; ++h)
        for (int w = 1; w <= 6; ++w)
          for (int kh = 1; kh <= std::min(h, 4); ++kh)
            for (int kw = 1; kw <= std::min(w, 4); ++kw) {
              Tensor input = random_tensor({cin, h, w}, rng);
              Tensor kernels = random_tensor({cout, cin, kh, kw}, rng);
              Tensor bias = random_tensor({cout}, rng);
              for (Padding pad : {Padding::kValid, Padding::kSame}) {
                Tape tape;
                Val y = tape.conv2d(tape.leaf(input), tape.leaf(kernels), tape.leaf(bias), pad);
                const int pt = pad == Padding::kSame ? (kh - 1) / 2 : 0;
                const int pl = pad == Padding::kSame ? (kw - 1) / 2 : 0;
                Tensor ref = conv2d_oracle(input, kernels, bias, pt, pl,
                                           pad == Padding::kSame ? (kh - 1) - pt : 0,
                                           pad == Padding::kSame ? (kw - 1) - pl : 0);
                const Tensor& got = tape.value(y);
                REQUIRE(got.shape() == ref.shape());
                for (int i = 0; i < got.size(); ++i)
                  REQUIRE(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
              }
            }
}

TEST_CASE("conv2d same padding preserves spatial extent") {
  Tape tape;
  Val y = tape.conv2d(tape.leaf(Tensor({3, 10, 10})), tape.leaf(Tensor({5, 3, 5, 5})),
                      tape.leaf(Tensor({5})), Padding::kSame);
  CHECK(tape.value(y).extent(0) == 5);
  CHECK(tape.value(y).extent(1) == 10);
  CHECK(tape.value(y).extent(2) == 10);
}

TEST_CASE("conv2d rejects oversize kernels and channel mismatches") {
  Tape tape;
  CHECK_THROWS_AS(tape.conv2d(tape.leaf(Tensor({1, 3, 3})), tape.leaf(Tensor({1, 1, 4, 4})),
                              tape.leaf(Tensor({1})), Padding::kValid),
                  DimensionError);
  CHECK_THROWS_AS(tape.conv2d(tape.leaf(Tensor({2, 5, 5})), tape.leaf(Tensor({1, 3, 2, 2})),
                              tape.leaf(Tensor({1})), Padding::kValid),
                  DimensionError);
  CHECK_THROWS_AS(tape.conv2d(tape.leaf(Tensor({2, 5, 5})), tape.leaf(Tensor({3, 2, 2, 2})),
                              tape.leaf(Tensor({2})), Padding::kValid),
                  DimensionError);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(19);
  for (Padding pad : {Padding::kValid, Padding::kSame}) {
    std::vector<Tensor> params{random_tensor({2, 5, 6}, rng), random_tensor({3, 2, 3, 3}, rng),
                               random_tensor({3}, rng)};
    for (auto& p : params) p.set_requires_grad(true);
    const double err = max_grad_rel_error(params, [pad](Tape& t, std::vector<Tensor>& ps) {
      Val y = t.conv2d(t.leaf(ps[0]), t.leaf(ps[1]), t.leaf(ps[2]), pad);
      return t.sum(t.mul(y, y));
    });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("maxpool2d forward, tie-break, and routing") {
  SUBCASE("output extents use floor") {
    Tape tape;
    Val y = tape.maxpool2d(tape.leaf(Tensor({1, 10, 10})), 4, 4);
    CHECK(tape.value(y).extent(1) == 2);
    CHECK(tape.value(y).extent(2) == 2);
  }
  SUBCASE("ties route gradient to the first element in row-major order") {
    Tensor x({1, 2, 2});
    for (int i = 0; i < 4; ++i) x[i] = 7.0;
    x.set_requires_grad(true);
    Tape tape;
    Val y = tape.maxpool2d(tape.leaf(x), 2, 2);
    CHECK(tape.value(y)[0] == 7.0);
    tape.backward(tape.sum(y));
    CHECK(x.grad()[0] == 1.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] == 0.0);
    CHECK(x.grad()[3] == 0.0);
  }
  SUBCASE("window larger than input is rejected") {
    Tape tape;
    CHECK_THROWS_AS(tape.maxpool2d(tape.leaf(Tensor({1, 3, 3})), 4, 4), DimensionError);
  }
}

TEST_CASE("maxpool2d gradient matches finite differences") {
  Rng rng(20);
  std::vector<Tensor> params{random_tensor({2, 8, 8}, rng)};
  params[0].set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    Val y = t.maxpool2d(t.leaf(ps[0]), 2, 2);
    return t.sum(t.mul(y, y));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("dropout semantics") {
  Rng rng(21);
  Tensor x({1000});
  for (int i = 0; i < 1000; ++i) x[i] = 1.0;
  SUBCASE("evaluation mode is the identity") {
    Tape tape;
    Val a = tape.leaf(x);
    Val y = tape.dropout(a, 0.5, rng, false);
    CHECK(y.id == a.id);
  }
  SUBCASE("rate zero is the identity") {
    Tape tape;
    Val a = tape.leaf(x);
    CHECK(tape.dropout(a, 0.0, rng, true).id == a.id);
  }
  SUBCASE("invalid rates are rejected") {
    Tape tape;
    Val a = tape.leaf(x);
    CHECK_THROWS_AS(tape.dropout(a, 1.0, rng, true), ConfigError);
    CHECK_THROWS_AS(tape.dropout(a, -0.1, rng, true), ConfigError);
  }
  SUBCASE("inverted scaling preserves the mean") {
    double total = 0.0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
      Tape tape;
      Val y = tape.dropout(tape.leaf(x), 0.5, rng, true);
      for (int i = 0; i < 1000; ++i) total += tape.value(y)[i];
    }
    CHECK(std::abs(total / (reps * 1000.0) - 1.0) < 0.02);
  }
  SUBCASE("mask is shared between forward and backward") {
    Tensor z({50});
    for (int i = 0; i < 50; ++i) z[i] = 2.0;
    z.set_requires_grad(true);
    Tape tape;
    Val y = tape.dropout(tape.leaf(z), 0.3, rng, true);
    tape.backward(tape.sum(y));
    for (int i = 0; i < 50; ++i) {
      const double kept = tape.value(y)[i] != 0.0 ? 1.0 / 0.7 : 0.0;
      CHECK(z.grad()[i] == doctest::Approx(kept).epsilon(1e-12));
    }
  }
}

TEST_CASE("reshape and stack_rows round gradients through") {
  Rng rng(22);
  std::vector<Tensor> params{random_tensor({2, 6}, rng), random_tensor({4}, rng),
                             random_tensor({4}, rng)};
  for (auto& p : params) p.set_requires_grad(true);
  const double err = max_grad_rel_error(params, [](Tape& t, std::vector<Tensor>& ps) {
    Val flat = t.reshape(t.leaf(ps[0]), {3, 4});
    Val stacked = t.stack_rows({t.leaf(ps[1]), t.leaf(ps[2]), t.leaf(ps[2])});
    return t.sum(t.mul(flat, stacked));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("backward requires a scalar and rejects stale handles") {
  Tape tape;
  Val a = tape.leaf(Tensor({2, 2}));
  CHECK_THROWS_AS(tape.backward(a), DimensionError);
  CHECK_THROWS_AS(tape.value(Val{99}), ArgumentError);
  CHECK_THROWS_AS(tape.value(Val{}), ArgumentError);
}

TEST_CASE("gradients accumulate across shared subexpressions") {
  Tensor x = Tensor::from({1}, {3.0});
  x.set_requires_grad(true);
  Tape tape;
  Val a = tape.leaf(x);
  Val y = tape.add(tape.mul(a, a), a);  // x^2 + x -> dy/dx = 2x + 1
  tape.backward(tape.sum(y));
  CHECK(x.grad()[0] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("composite network graph end to end against finite differences") {
  Rng rng(23);
  // Two-layer perceptron with softmax loss and l2, batch of 3.
  std::vector<Tensor> params{random_tensor({6, 4}, rng, 0.7), random_tensor({4}, rng, 0.2),
                             random_tensor({4, 3}, rng, 0.7), random_tensor({3}, rng, 0.2)};
  for (auto& p : params) p.set_requires_grad(true);
  Tensor input = random_tensor({3, 6}, rng);
  const double err = max_grad_rel_error(params, [&input](Tape& t, std::vector<Tensor>& ps) {
    Val x = t.leaf(input);
    Val h = t.relu(t.add_rows(t.matmul(x, t.leaf(ps[0])), t.leaf(ps[1])));
    Val logits = t.add_rows(t.matmul(h, t.leaf(ps[2])), t.leaf(ps[3]));
    Val data = t.softmax_nll(logits, {0, 2, 1});
    Val reg = t.l2_penalty({t.leaf(ps[0]), t.leaf(ps[2])}, 0.01);
    return t.add(data, reg);
  });
  CHECK(err < 1e-4);
}

TEST_CASE("backward twice on separate tapes accumulates into leaf grads") {
  Tensor x = Tensor::from({1}, {2.0});
  x.set_requires_grad(true);
  for (int rep = 0; rep < 2; ++rep) {
    Tape tape;
    Val a = tape.leaf(x);
    tape.backward(tape.mul(a, a));
  }
  CHECK(x.grad()[0] == doctest::Approx(8.0).epsilon(1e-12));  // 2 * (2x)
}
