#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "topseg/grad_check.hpp"
#include "topseg/graph.hpp"
#include "topseg/optimizer.hpp"
#include "topseg/rng.hpp"
#include "topseg/tensor.hpp"

using namespace topseg;

namespace {

Tensor make2(std::vector<int> shape, std::vector<float> vals) {
  Tensor t(std::move(shape));
  REQUIRE(t.data.size() == vals.size());
  t.data = std::move(vals);
  return t;
}

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed,
                     float bound = 1.0f) {
  return seeded_init(std::move(shape), InitScheme::uniform(bound), seed);
}

// Reduces any node to a scalar through a fixed random projection so every
// output coordinate gets its own gradient direction.
NodeId project_to_scalar(Graph& g, NodeId x, std::uint64_t seed) {
  const Tensor& v = g.value(x);
  NodeId w = g.constant(random_tensor(v.shape, seed));
  return g.reduce_sum(g.mul(x, w));
}

}  // namespace

TEST_CASE("tensor shape validation", "[numerics]") {
  CHECK(Tensor({2, 3}).numel() == 6);
  CHECK_THROWS_AS(Tensor({0}), Error);
  CHECK_THROWS_AS(Tensor({2, -1}), Error);
  CHECK_THROWS_AS(Tensor(std::vector<int>{}), Error);
}

TEST_CASE("matmul matches hand arithmetic", "[numerics]") {
  Tensor a = make2({2, 2}, {1, 2, 3, 4});
  Tensor b = make2({2, 1}, {1, 1});
  Tensor c = matmul(a, b);
  REQUIRE(c.shape == std::vector<int>{2, 1});
  CHECK(c.data[0] == 3.0f);
  CHECK(c.data[1] == 7.0f);

  Tensor d = make2({2, 2}, {5, 6, 7, 8});
  Tensor e = matmul(a, d);
  CHECK(e.data == std::vector<float>{19, 22, 43, 50});

  CHECK_THROWS_AS(matmul(a, make2({3, 1}, {1, 1, 1})), Error);
  try {
    matmul(a, make2({3, 1}, {1, 1, 1}));
    FAIL("expected shape error");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("matmul") != std::string::npos);
  }
}

TEST_CASE("transposed matmul variants agree with explicit transpose",
          "[numerics]") {
  Tensor a = random_tensor({3, 4}, 11);
  Tensor b = random_tensor({5, 4}, 12);
  Tensor nt = matmul_nt(a, b);  // a x b^T
  REQUIRE(nt.shape == std::vector<int>{3, 5});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) {
      float acc = 0.0f;
      for (int k = 0; k < 4; ++k) acc += a.at(i, k) * b.at(j, k);
      CHECK(std::abs(nt.at(i, j) - acc) < 1e-5f);
    }
  }
  Tensor c = random_tensor({4, 3}, 13);
  Tensor d = random_tensor({4, 5}, 14);
  Tensor tn = matmul_tn(c, d);  // c^T x d
  REQUIRE(tn.shape == std::vector<int>{3, 5});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) {
      float acc = 0.0f;
      for (int k = 0; k < 4; ++k) acc += c.at(k, i) * d.at(k, j);
      CHECK(std::abs(tn.at(i, j) - acc) < 1e-5f);
    }
  }
}

TEST_CASE("activation fixed points", "[numerics]") {
  Graph g;
  NodeId x = g.constant(Tensor::row({0.0f}));
  CHECK(g.value(g.sigmoid(x)).data[0] == 0.5f);
  CHECK(g.value(g.tanh(x)).data[0] == 0.0f);
  CHECK(g.value(g.gelu(x)).data[0] == 0.0f);

  NodeId z = g.constant(Tensor::row({0.0f, 0.0f}));
  const Tensor& sm = g.value(g.softmax(z));
  CHECK(std::abs(sm.data[0] - 0.5f) < 1e-7f);
  CHECK(std::abs(sm.data[1] - 0.5f) < 1e-7f);

  // softmax([0, ln 3]) = [1/4, 3/4]
  NodeId z2 = g.constant(Tensor::row({0.0f, 1.0986123f}));
  const Tensor& sm2 = g.value(g.softmax(z2));
  CHECK(std::abs(sm2.data[0] - 0.25f) < 1e-6f);
  CHECK(std::abs(sm2.data[1] - 0.75f) < 1e-6f);
}

TEST_CASE("softmax rows sum to one and survive large inputs", "[numerics]") {
  Rng rng(99);
  Graph g;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor t({3, 7});
    for (float& v : t.data) v = float(rng.normal(0.0, 100.0));
    const Tensor& out = g.value(g.softmax(g.constant(t)));
    REQUIRE(all_finite(out));
    for (int i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 7; ++j) sum += out.at(i, j);
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
  Graph g2;
  const Tensor& big = g2.value(g2.softmax(g2.constant(Tensor::row({1000.0f, 1000.0f}))));
  CHECK(std::abs(big.data[0] - 0.5f) < 1e-6f);
}

TEST_CASE("backward matches analytic derivatives", "[numerics]") {
  // d(sum(x*x))/dx at [1,2] = [2,4]
  {
    Graph g;
    NodeId x = g.leaf("x", Tensor::row({1.0f, 2.0f}));
    NodeId loss = g.reduce_sum(g.mul(x, x));
    GradMap grads = g.backward(loss);
    CHECK(grads.at("x").data[0] == 2.0f);
    CHECK(grads.at("x").data[1] == 4.0f);
  }
  // d(sigmoid(z))/dz at 0 = 0.25
  {
    Graph g;
    NodeId z = g.leaf("z", Tensor::row({0.0f}));
    NodeId loss = g.reduce_sum(g.sigmoid(z));
    GradMap grads = g.backward(loss);
    CHECK(std::abs(grads.at("z").data[0] - 0.25f) < 1e-7f);
  }
}

TEST_CASE("backward requires a scalar loss", "[numerics]") {
  Graph g;
  NodeId x = g.leaf("x", Tensor::row({1.0f, 2.0f}));
  CHECK_THROWS_AS(g.backward(x), Error);
}

TEST_CASE("unreached leaves get zero gradients", "[numerics]") {
  Graph g;
  NodeId x = g.leaf("x", Tensor::row({1.0f, 2.0f}));
  g.leaf("unused", Tensor::row({3.0f, 4.0f, 5.0f}));
  GradMap grads = g.backward(g.reduce_sum(x));
  REQUIRE(grads.count("unused") == 1);
  CHECK(grads.at("unused").shape == std::vector<int>{1, 3});
  for (float v : grads.at("unused").data) CHECK(v == 0.0f);
}

TEST_CASE("leaves deduplicate by name", "[numerics]") {
  Graph g;
  Tensor t = Tensor::row({1.0f, 2.0f});
  NodeId a = g.leaf("w", t);
  NodeId b = g.leaf("w", t);
  CHECK(a == b);
  CHECK_THROWS_AS(g.leaf("w", Tensor::row({1.0f, 2.0f, 3.0f})), Error);

  // Gradients accumulate across every use of the shared leaf.
  NodeId loss = g.reduce_sum(g.add(g.mul(a, a), g.scale(b, 3.0f)));
  GradMap grads = g.backward(loss);
  CHECK(std::abs(grads.at("w").data[0] - 5.0f) < 1e-6f);  // 2x + 3 at x=1
  CHECK(std::abs(grads.at("w").data[1] - 7.0f) < 1e-6f);  // 2x + 3 at x=2
}

TEST_CASE("matmul chain gradient matches central differences", "[numerics]") {
  ParamStore params;
  params.emplace("a", random_tensor({2, 2}, 21));
  params.emplace("b", random_tensor({2, 2}, 22));
  params.emplace("c", random_tensor({2, 2}, 23));
  auto f = [](Graph& g, const ParamStore& p) {
    NodeId a = g.leaf("a", p.at("a"));
    NodeId b = g.leaf("b", p.at("b"));
    NodeId c = g.leaf("c", p.at("c"));
    return project_to_scalar(g, g.matmul(g.matmul(a, b), c), 24);
  };
  CHECK(grad_check(f, params) < 1e-4);
}

TEST_CASE("quadratic grad check is near exact", "[numerics]") {
  ParamStore params;
  params.emplace("x", random_tensor({4, 3}, 31));
  auto f = [](Graph& g, const ParamStore& p) {
    NodeId x = g.leaf("x", p.at("x"));
    return g.reduce_sum(g.mul(x, x));
  };
  // exact in real arithmetic; float32 evaluation leaves ~5e-5 of noise
  CHECK(grad_check(f, params) < 1e-4);
}

TEST_CASE("grad_check rejects bad epsilon and non-finite values",
          "[numerics]") {
  ParamStore params;
  params.emplace("x", Tensor::row({1.0f}));
  auto f = [](Graph& g, const ParamStore& p) {
    return g.reduce_sum(g.leaf("x", p.at("x")));
  };
  CHECK_THROWS_AS(grad_check(f, params, 0.0), Error);
  auto bad = [](Graph& g, const ParamStore& p) {
    NodeId x = g.leaf("x", p.at("x"));
    // log of a negative number
    return g.reduce_sum(g.log(g.scale(x, -1.0f)));
  };
  CHECK_THROWS_AS(grad_check(bad, params), NumericError);
}

namespace {

double kernel_check(const ScalarGraphFn& f, ParamStore& params) {
  return grad_check(f, params);
}

}  // namespace

TEST_CASE("every kernel passes a finite-difference check", "[numerics]") {
  SECTION("add, same shape") {
    ParamStore p;
    p.emplace("a", random_tensor({3, 4}, 41));
    p.emplace("b", random_tensor({3, 4}, 42));
    auto f = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(
          g, g.add(g.leaf("a", p.at("a")), g.leaf("b", p.at("b"))), 43);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("add, bias broadcast") {
    ParamStore p;
    p.emplace("a", random_tensor({3, 4}, 44));
    p.emplace("b", random_tensor({4}, 45));
    auto f = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(
          g, g.add(g.leaf("a", p.at("a")), g.leaf("b", p.at("b"))), 46);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("mul and scale") {
    ParamStore p;
    p.emplace("a", random_tensor({2, 5}, 47));
    p.emplace("b", random_tensor({2, 5}, 48));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId prod = g.mul(g.leaf("a", p.at("a")), g.leaf("b", p.at("b")));
      return project_to_scalar(g, g.scale(prod, -1.7f), 49);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("concat along both axes") {
    ParamStore p;
    p.emplace("a", random_tensor({2, 3}, 50));
    p.emplace("b", random_tensor({4, 3}, 51));
    p.emplace("c", random_tensor({2, 2}, 52));
    auto f0 = [](Graph& g, const ParamStore& p) {
      NodeId cat0 = g.concat({g.leaf("a", p.at("a")), g.leaf("b", p.at("b"))}, 0);
      return project_to_scalar(g, cat0, 53);
    };
    auto f1 = [](Graph& g, const ParamStore& p) {
      NodeId cat1 = g.concat({g.leaf("a", p.at("a")), g.leaf("c", p.at("c"))}, 1);
      return project_to_scalar(g, cat1, 54);
    };
    CHECK(kernel_check(f0, p) < 1e-3);
    CHECK(kernel_check(f1, p) < 1e-3);
  }
  SECTION("slice along both axes") {
    ParamStore p;
    p.emplace("a", random_tensor({4, 5}, 55));
    auto f0 = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(g, g.slice(g.leaf("a", p.at("a")), 0, 1, 2), 56);
    };
    auto f1 = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(g, g.slice(g.leaf("a", p.at("a")), 1, 2, 3), 57);
    };
    CHECK(kernel_check(f0, p) < 1e-3);
    CHECK(kernel_check(f1, p) < 1e-3);
  }
  SECTION("gather with repeated ids accumulates") {
    ParamStore p;
    p.emplace("table", random_tensor({5, 3}, 58));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId rows = g.gather(g.leaf("table", p.at("table")), {4, 0, 4, 2});
      return project_to_scalar(g, rows, 59);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("sigmoid tanh gelu log") {
    ParamStore p;
    p.emplace("x", random_tensor({3, 3}, 60));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId x = g.leaf("x", p.at("x"));
      NodeId s = g.sigmoid(x);
      NodeId t = g.tanh(x);
      NodeId e = g.gelu(x);
      NodeId l = g.log(s);  // sigmoid keeps log's argument positive
      return g.add(g.add(project_to_scalar(g, s, 61),
                         project_to_scalar(g, t, 62)),
                   g.add(project_to_scalar(g, e, 63),
                         project_to_scalar(g, l, 64)));
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("softmax") {
    ParamStore p;
    p.emplace("x", random_tensor({3, 5}, 65));
    auto f = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(g, g.softmax(g.leaf("x", p.at("x"))), 66);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("reduce_max0 away from ties") {
    ParamStore p;
    Tensor t({4, 3});
    float v = 0.05f;
    for (float& x : t.data) {
      x = v;
      v += 0.17f;  // distinct entries, no tie within fd epsilon
    }
    p.emplace("x", t);
    auto f = [](Graph& g, const ParamStore& p) {
      return project_to_scalar(g, g.reduce_max0(g.leaf("x", p.at("x"))), 67);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("layer_norm") {
    ParamStore p;
    p.emplace("x", random_tensor({3, 6}, 68));
    p.emplace("gain", random_tensor({6}, 69));
    p.emplace("bias", random_tensor({6}, 70));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId ln = g.layer_norm(g.leaf("x", p.at("x")),
                               g.leaf("gain", p.at("gain")),
                               g.leaf("bias", p.at("bias")));
      return project_to_scalar(g, ln, 71);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("attention with a masked key") {
    ParamStore p;
    p.emplace("q", random_tensor({2, 4, 3}, 72));
    p.emplace("k", random_tensor({2, 4, 3}, 73));
    p.emplace("v", random_tensor({2, 4, 3}, 74));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId out = g.attention(g.leaf("q", p.at("q")), g.leaf("k", p.at("k")),
                               g.leaf("v", p.at("v")), {0, 0, 0, 1});
      return project_to_scalar(g, g.merge_heads(out), 75);
    };
    CHECK(kernel_check(f, p) < 1e-3);
  }
  SECTION("split and merge heads round trip") {
    ParamStore p;
    p.emplace("x", random_tensor({4, 6}, 76));
    auto f = [](Graph& g, const ParamStore& p) {
      NodeId split = g.split_heads(g.leaf("x", p.at("x")), 3);
      return project_to_scalar(g, g.merge_heads(split), 77);
    };
    CHECK(kernel_check(f, p) < 1e-3);

    Graph g;
    NodeId x = g.leaf("x", p.at("x"));
    const Tensor& back = g.value(g.merge_heads(g.split_heads(x, 3)));
    CHECK(back.data == p.at("x").data);
  }
  SECTION("batch_loss under each loss kind") {
    for (const LossSpec& spec :
         {LossSpec::ce(), LossSpec::weighted_ce(0.2, 0.8),
          LossSpec::focal(0.8, 2.0)}) {
      ParamStore p;
      p.emplace("z", random_tensor({4, 1}, 78));
      auto f = [&spec](Graph& g, const ParamStore& p) {
        NodeId probs = g.sigmoid(g.leaf("z", p.at("z")));
        return g.batch_loss(probs, {1, 0, 1, 0}, spec);
      };
      CHECK(kernel_check(f, p) < 1e-3);
    }
  }
}

TEST_CASE("max pool sends the gradient to the first maximum at a tie",
          "[numerics]") {
  Graph g;
  Tensor t({3, 1});
  t.data = {2.0f, 2.0f, 1.0f};
  NodeId x = g.leaf("x", t);
  GradMap grads = g.backward(g.reduce_sum(g.reduce_max0(x)));
  CHECK(grads.at("x").data == std::vector<float>{1.0f, 0.0f, 0.0f});
}

TEST_CASE("adam first step moves by about minus lr", "[numerics]") {
  ParamStore params;
  params.emplace("w", Tensor::row({1.0f}));
  GradMap grads;
  grads.emplace("w", Tensor::row({1.0f}));
  OptimizerState state = OptimizerState::for_params(params);
  adam_step(params, grads, state, 0.1);
  CHECK(state.step_count == 1);
  const double delta = double(params.at("w").data[0]) - 1.0;
  CHECK(std::abs(delta + 0.1) < 1e-6);
}

TEST_CASE("adam zero gradient with fresh state is a no-op", "[numerics]") {
  ParamStore params;
  params.emplace("w", Tensor::row({1.5f, -2.5f}));
  GradMap grads;
  grads.emplace("w", Tensor::zeros({1, 2}));
  OptimizerState state = OptimizerState::for_params(params);
  adam_step(params, grads, state, 0.1);
  CHECK(params.at("w").data == std::vector<float>{1.5f, -2.5f});
}

TEST_CASE("adam matches a hand-unrolled recurrence", "[numerics]") {
  // Oracle: textbook bias-corrected recurrence with 32-bit storage of the
  // moments and parameter between steps, double arithmetic in between.
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double gseq[] = {1.0, -0.5, 2.0, 0.25, -1.0};

  float m_store = 0.0f, v_store = 0.0f, p_store = 0.3f;
  std::vector<double> want_deltas;
  for (int t = 1; t <= 5; ++t) {
    const double gval = gseq[t - 1];
    const double m = b1 * double(m_store) + (1.0 - b1) * gval;
    const double v = b2 * double(v_store) + (1.0 - b2) * gval * gval;
    m_store = float(m);
    v_store = float(v);
    const double mhat = m / (1.0 - std::pow(b1, t));
    const double vhat = v / (1.0 - std::pow(b2, t));
    const float next = float(double(p_store) - lr * mhat / (std::sqrt(vhat) + eps));
    want_deltas.push_back(double(next) - double(p_store));
    p_store = next;
  }

  ParamStore params;
  params.emplace("w", Tensor::row({0.3f}));
  OptimizerState state = OptimizerState::for_params(params);
  for (int t = 1; t <= 5; ++t) {
    GradMap grads;
    grads.emplace("w", Tensor::row({float(gseq[t - 1])}));
    const double before = params.at("w").data[0];
    adam_step(params, grads, state, lr);
    const double got = double(params.at("w").data[0]) - before;
    CHECK(std::abs(got - want_deltas[std::size_t(t - 1)]) < 1e-8);
  }
}

TEST_CASE("adam rejects unknown names and shape mismatches", "[numerics]") {
  ParamStore params;
  params.emplace("w", Tensor::row({1.0f}));
  OptimizerState state = OptimizerState::for_params(params);
  GradMap unknown;
  unknown.emplace("nope", Tensor::row({1.0f}));
  CHECK_THROWS_AS(adam_step(params, unknown, state, 0.1), Error);
  GradMap wrong;
  wrong.emplace("w", Tensor::row({1.0f, 2.0f}));
  CHECK_THROWS_AS(adam_step(params, wrong, state, 0.1), Error);
}

TEST_CASE("gradient clipping rescales only above the threshold", "[numerics]") {
  GradMap grads;
  grads.emplace("a", Tensor::row({3.0f, 4.0f}));  // norm 5
  CHECK(std::abs(grad_global_norm(grads) - 5.0) < 1e-6);
  GradMap small = grads;
  clip_gradients(small, 10.0);
  CHECK(small.at("a").data == grads.at("a").data);
  clip_gradients(grads, 1.0);
  CHECK(std::abs(grad_global_norm(grads) - 1.0) < 1e-5);
  CHECK_THROWS_AS(clip_gradients(grads, 0.0), Error);
}

TEST_CASE("seeded_init is deterministic, bounded, and strict about shapes",
          "[numerics]") {
  Tensor a = seeded_init({4, 7}, InitScheme::uniform(0.1f), 123);
  Tensor b = seeded_init({4, 7}, InitScheme::uniform(0.1f), 123);
  CHECK(a.data == b.data);
  Tensor c = seeded_init({4, 7}, InitScheme::uniform(0.1f), 124);
  CHECK(a.data != c.data);
  for (float v : a.data) {
    CHECK(v >= -0.1f);
    CHECK(v <= 0.1f);
  }
  Tensor z = seeded_init({3, 3}, InitScheme::zeros(), 5);
  for (float v : z.data) CHECK(v == 0.0f);
  CHECK_THROWS_AS(seeded_init({0, 3}, InitScheme::uniform(0.1f), 1), Error);
}

TEST_CASE("rng streams are deterministic", "[numerics]") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(7);
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  c.shuffle(v1);
  Rng d(7);
  d.shuffle(v2);
  CHECK(v1 == v2);
  std::sort(v1.begin(), v1.end());
  CHECK(v1 == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("rng distributions stay in range", "[numerics]") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    float s = rng.uniform_sym(0.25f);
    CHECK(s >= -0.25f);
    CHECK(s <= 0.25f);
    CHECK(rng.next_below(17) < 17);
  }
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal(0.0, 1.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sd - 1.0) < 0.05);
}

TEST_CASE("derive_seed separates streams by tag", "[numerics]") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "epoch-1") != derive_seed(1, "epoch-2"));
}

TEST_CASE("kernels are bit-deterministic", "[numerics]") {
  auto run = [] {
    Graph g;
    NodeId x = g.leaf("x", random_tensor({4, 6}, 301));
    NodeId gain = g.leaf("gain", Tensor::full({6}, 1.0f));
    NodeId bias = g.leaf("bias", Tensor::zeros({6}));
    NodeId ln = g.layer_norm(x, gain, bias);
    NodeId heads = g.split_heads(ln, 2);
    NodeId att = g.attention(heads, heads, heads, {0, 0, 1, 0});
    return g.value(g.merge_heads(att));
  };
  Tensor a = run();
  Tensor b = run();
  REQUIRE(a.data.size() == b.data.size());
  CHECK(std::memcmp(a.data.data(), b.data.data(),
                    a.data.size() * sizeof(float)) == 0);
}

TEST_CASE("attention refuses a fully masked key set", "[numerics]") {
  Graph g;
  NodeId x = g.leaf("x", random_tensor({1, 2, 3}, 88));
  CHECK_THROWS_AS(g.attention(x, x, x, {1, 1}), Error);
  CHECK_THROWS_AS(g.attention(x, x, x, {0}), Error);
}

TEST_CASE("split_heads requires divisibility", "[numerics]") {
  Graph g;
  NodeId x = g.leaf("x", random_tensor({4, 6}, 89));
  CHECK_THROWS_AS(g.split_heads(x, 4), Error);
}
