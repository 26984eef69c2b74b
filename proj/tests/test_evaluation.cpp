#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "topseg/evaluation.hpp"

using namespace topseg;

TEST_CASE("precision recall and f1 from hand-counted confusion cells",
          "[evaluation]") {
  EvalReport r = prf1({1, 0, 1, 1}, {1, 1, 0, 1});
  CHECK(r.tp == 2);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(std::abs(r.precision() - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(r.recall() - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(r.f1() - 2.0 / 3.0) < 1e-12);

  EvalReport perfect = prf1({0, 1, 0, 1}, {0, 1, 0, 1});
  CHECK(perfect.f1() == 1.0);

  CHECK_THROWS_AS(prf1({1, 0}, {1}), Error);
  CHECK_THROWS_AS(prf1({2, 0}, {1, 0}), Error);
  CHECK_THROWS_AS(prf1({1, 0}, {1, 3}), Error);
}

TEST_CASE("zero denominators score zero instead of dividing", "[evaluation]") {
  EvalReport none = prf1({0, 0, 0}, {0, 0, 0});
  CHECK(none.precision() == 0.0);
  CHECK(none.recall() == 0.0);
  CHECK(none.f1() == 0.0);

  EvalReport misses = prf1({0, 0}, {1, 1});
  CHECK(misses.precision() == 0.0);
  CHECK(misses.recall() == 0.0);
  CHECK(misses.f1() == 0.0);

  EvalReport ghosts = prf1({1, 1}, {0, 0});
  CHECK(ghosts.precision() == 0.0);
  CHECK(ghosts.f1() == 0.0);
}

TEST_CASE("thresholding is inclusive at the boundary", "[evaluation]") {
  CHECK(threshold_probs({0.5f}, 0.5) == std::vector<int>{1});
  CHECK(threshold_probs({0.4999f}, 0.5) == std::vector<int>{0});
  CHECK(threshold_probs({0.1f, 0.9f, 0.5f}, 0.5) ==
        std::vector<int>{0, 1, 1});
  CHECK(threshold_probs({0.2f, 0.3f}, 0.0) == std::vector<int>{1, 1});
}

TEST_CASE("boundary prediction drops the final sentence", "[evaluation]") {
  CHECK(predict_boundaries({0.9f, 0.1f, 0.8f}, 0.5) ==
        std::vector<int>{1, 0});
  CHECK(predict_boundaries({0.2f, 0.7f}, 0.5) == std::vector<int>{0});
  CHECK_THROWS_AS(predict_boundaries({0.9f}, 0.5), Error);
  CHECK_THROWS_AS(predict_boundaries({}, 0.5), Error);
}

TEST_CASE("corpus evaluation pools counts across documents", "[evaluation]") {
  // gold candidates: doc a -> {1,0}, doc b -> {0,1}
  std::vector<SegDocument> docs = {
      document_from_segments({{"one"}, {"two", "three"}}, "a"),
      document_from_segments({{"one", "two"}, {"three"}}, "b")};

  auto probs_fn = [](const SegDocument& d) -> std::vector<float> {
    if (d.doc_id == "a") return {0.9f, 0.7f};  // preds {1,1}: tp 1, fp 1
    return {0.2f, 0.3f};                       // preds {0,0}: fn 1
  };
  EvalReport r = evaluate_corpus(probs_fn, docs, 0.5);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(std::abs(r.f1() - 0.5) < 1e-12);

  // micro average: pooled counts, not a mean of per-document scores
  auto perfect_a = [](const SegDocument& d) -> std::vector<float> {
    if (d.doc_id == "a") return {0.9f, 0.1f};  // exact
    return {0.9f, 0.1f};                       // fp 1, fn 1
  };
  EvalReport pooled = evaluate_corpus(perfect_a, docs, 0.5);
  CHECK(pooled.tp == 1);
  CHECK(pooled.fp == 1);
  CHECK(pooled.fn == 1);
}

TEST_CASE("corpus evaluation validates its inputs", "[evaluation]") {
  auto ones = [](const SegDocument& d) {
    return std::vector<float>(d.size() - 1, 1.0f);
  };
  CHECK_THROWS_AS(evaluate_corpus(ones, {}, 0.5), Error);

  std::vector<SegDocument> short_doc = {
      document_from_segments({{"only"}}, "s")};
  CHECK_THROWS_AS(evaluate_corpus(ones, short_doc, 0.5), Error);

  std::vector<SegDocument> docs = {
      document_from_segments({{"one"}, {"two"}}, "a")};
  auto wrong_count = [](const SegDocument&) {
    return std::vector<float>{0.5f, 0.5f, 0.5f};
  };
  CHECK_THROWS_AS(evaluate_corpus(wrong_count, docs, 0.5), Error);
}
