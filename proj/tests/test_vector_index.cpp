#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace drugrag;
using testsupport::fixture_kb;

namespace {

std::string serialize(const VectorIndex& index) {
  std::ostringstream out(std::ios::binary);
  index.save(out);
  return out.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

class FailingProvider final : public EmbeddingProvider {
 public:
  std::string fingerprint() const override { return "failing"; }
  std::size_t dimension() const override { return 8; }
  std::size_t max_input_chars() const override { return 1000; }
  EmbeddingVector embed(std::string_view text) const override {
    if (text.find("metformin") != std::string_view::npos) throw std::runtime_error("upstream timeout");
    return HashEmbedder(8).embed(text);
  }
};

class ShortProvider final : public EmbeddingProvider {
 public:
  std::string fingerprint() const override { return "short"; }
  std::size_t dimension() const override { return 16; }
  std::size_t max_input_chars() const override { return 1000; }
  EmbeddingVector embed(std::string_view) const override { return EmbeddingVector{std::vector<float>(8, 1.0f)}; }
};

const VectorIndex& fixture_index_b() {
  static const VectorIndex index =
      build_index(export_corpus(*fixture_kb(), CorpusFormat::kB), HashEmbedder(), 1);
  return index;
}

}  // namespace

TEST(Chunking, OneChunkPerNonemptyLine) {
  const auto kb = fixture_kb();
  const auto corpus_a = render_corpus(*kb, CorpusFormat::kA);
  const auto a = chunk_corpus(corpus_a, CorpusFormat::kA, *kb);
  EXPECT_EQ(a.size(), kb->drugs().size());
  const auto b = chunk_corpus(render_corpus(*kb, CorpusFormat::kB), CorpusFormat::kB, *kb);
  EXPECT_EQ(b, export_corpus(*kb, CorpusFormat::kB));

  std::string joined;
  for (const auto& c : a) joined += c.text + "\n";
  EXPECT_EQ(joined, corpus_a);
}

TEST(Chunking, ThreeDrugsAndBlankLines) {
  const auto kb = fixture_kb();
  const auto all = export_corpus(*kb, CorpusFormat::kA);
  const std::string corpus = "\n" + all[0].text + "\n\n" + all[1].text + "\r\n   \n" + all[2].text;
  const auto chunks = chunk_corpus(corpus, CorpusFormat::kA, *kb);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[1], all[1]);
}

TEST(Chunking, Errors) {
  const auto kb = fixture_kb();
  EXPECT_EQ(code_of([&] { chunk_corpus("\n \n", CorpusFormat::kA, *kb); }), ErrorCode::kEmptyCorpus);
  EXPECT_EQ(code_of([&] { chunk_corpus("hello world\n", CorpusFormat::kA, *kb); }), ErrorCode::kMalformedCorpusLine);
  EXPECT_EQ(code_of([&] {
              chunk_corpus("The drug metformin may cause insomnia as an adverse effect, adverse reaction, or side effect.",
                           CorpusFormat::kB, *kb);
            }),
            ErrorCode::kMalformedCorpusLine);
}

TEST(HashEmbed, DeterministicAndNormalized) {
  const auto a = hash_embed("The drug aspirin may cause shock");
  EXPECT_EQ(a, hash_embed("The drug aspirin may cause shock"));
  EXPECT_EQ(a.size(), kDefaultDimension);
  EXPECT_NEAR(l2_norm(a.values), 1.0, 1e-6);
  EXPECT_NEAR(cosine(a.values, a.values), 1.0, 1e-12);
  EXPECT_EQ(hash_embed("ASPIRIN, shock!"), hash_embed("aspirin shock"));
  EXPECT_EQ(l2_norm(hash_embed("  ...  ").values), 0.0);
}

TEST(HashEmbed, TokenDisjointTextsAreNearOrthogonal) {
  std::mt19937_64 rng(99);
  auto word = [&](char first) {
    std::string w(1, first);
    for (int i = 0; i < 6; ++i) w.push_back(static_cast<char>('a' + rng() % 26));
    return w;
  };
  for (int i = 0; i < 100; ++i) {
    std::string x, y;
    for (int j = 0; j < 8; ++j) {
      x += word('x') + " ";  // distinct leading letters keep the token sets disjoint
      y += word('y') + " ";
    }
    EXPECT_LT(std::abs(cosine(hash_embed(x).values, hash_embed(y).values)), 0.1) << x << "|" << y;
  }
}

TEST(HashEmbed, SharedTokensRankTheMatchingLine) {
  const auto& index = fixture_index_b();
  const auto q = hash_embed("aspirin urticaria");
  const Chunk* target = nullptr;
  double target_score = 0.0;
  for (const auto& e : index.entries()) {
    if (e.chunk.text == "The drug aspirin may cause urticaria as an adverse effect, adverse reaction, or side effect.") {
      target = &e.chunk;
      target_score = cosine(q.values, e.vector.values);
    }
  }
  ASSERT_NE(target, nullptr);
  std::size_t beaten = 0;
  for (const auto& e : index.entries()) {
    if (&e.chunk != target && target_score > cosine(q.values, e.vector.values)) ++beaten;
  }
  EXPECT_GE(static_cast<double>(beaten), 0.95 * static_cast<double>(index.size() - 1));
}

TEST(Cosine, SymmetryAndScaleInvariance) {
  const auto a = hash_embed("nausea vomiting");
  const auto b = hash_embed("nausea headache");
  std::vector<float> scaled(b.values);
  for (auto& x : scaled) x *= 3.5f;
  EXPECT_DOUBLE_EQ(cosine(a.values, b.values), cosine(b.values, a.values));
  EXPECT_NEAR(cosine(a.values, scaled), cosine(a.values, b.values), 1e-7);
  EXPECT_THROW(cosine(a.values, hash_embed("x", 64).values), Error);
}

TEST(TopK, SelfSimilarityFirst) {
  const auto& index = fixture_index_b();
  for (std::size_t i = 0; i < index.size(); i += 97) {
    const auto& e = index.entries()[i];
    const auto hits = index.top_k(e.vector.values, 5);
    ASSERT_EQ(hits.size(), 5u);
    EXPECT_NEAR(hits[0].score, 1.0, 1e-9);
    // exact duplicates of a vector can only arise from identical token sets
    EXPECT_EQ(hits[0].chunk->text, e.chunk.text);
  }
}

TEST(TopK, WholeIndexWhenKExceedsSizeAndTieBreak) {
  VectorIndex index(3, "manual");
  index.add(Chunk{"c", CorpusFormat::kA, "d3", std::nullopt, "c"}, EmbeddingVector{{1, 0, 0}});
  index.add(Chunk{"a", CorpusFormat::kA, "d1", std::nullopt, "a"}, EmbeddingVector{{2, 0, 0}});
  index.add(Chunk{"b", CorpusFormat::kA, "d2", std::nullopt, "b"}, EmbeddingVector{{0, 1, 0}});
  const std::vector<float> q{1, 0.5f, 0};
  const auto hits = index.top_k(q, 10);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].chunk->chunk_id, "a");
  EXPECT_EQ(hits[1].chunk->chunk_id, "c");
  EXPECT_EQ(hits[2].chunk->chunk_id, "b");
  EXPECT_EQ(hits[0].score, hits[1].score);
  EXPECT_EQ(index.top_k(q, 1).size(), 1u);
}

TEST(TopK, Errors) {
  VectorIndex empty(4, "x");
  const std::vector<float> q4{1, 0, 0, 0};
  EXPECT_EQ(code_of([&] { empty.top_k(q4); }), ErrorCode::kEmptyIndex);
  const auto& index = fixture_index_b();
  const auto q64 = hash_embed("aspirin", 64);
  EXPECT_EQ(code_of([&] { index.top_k(q64.values); }), ErrorCode::kDimensionMismatch);
  const auto q = hash_embed("aspirin");
  EXPECT_EQ(code_of([&] { index.top_k(q.values, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { index.search(HashEmbedder(kDefaultDimension, 1), "aspirin"); }), ErrorCode::kProviderMismatch);
  EXPECT_EQ(index.search(HashEmbedder(), "aspirin urticaria").size(), 5u);
}

TEST(TopK, MatchesBruteForce) {
  const auto& index = fixture_index_b();
  std::mt19937_64 rng(5);
  std::normal_distribution<float> gauss;
  for (int round = 0; round < 50; ++round) {
    std::vector<float> q(kDefaultDimension);
    for (auto& x : q) x = gauss(rng);
    std::vector<std::pair<double, std::string>> all;
    for (const auto& e : index.entries()) all.emplace_back(-cosine(q, e.vector.values), e.chunk.chunk_id);
    std::sort(all.begin(), all.end());
    const auto hits = index.top_k(q, 5);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      EXPECT_EQ(hits[i].chunk->chunk_id, all[i].second);
      EXPECT_NEAR(hits[i].score, -all[i].first, 1e-9);
    }
  }
}

TEST(Index, AddValidation) {
  VectorIndex index(2, "x");
  index.add(Chunk{"a", CorpusFormat::kA, "d", std::nullopt, "t"}, EmbeddingVector{{1, 0}});
  EXPECT_EQ(code_of([&] { index.add(Chunk{"b", CorpusFormat::kA, "d", std::nullopt, "t"}, EmbeddingVector{{1, 0, 0}}); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { index.add(Chunk{"b", CorpusFormat::kA, "d", std::nullopt, "t"}, EmbeddingVector{{0, 0}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { index.add(Chunk{"b", CorpusFormat::kA, "d", std::nullopt, "t"}, EmbeddingVector{{NAN, 0}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { index.add(Chunk{"a", CorpusFormat::kA, "d", std::nullopt, "t"}, EmbeddingVector{{0, 1}}); }),
            ErrorCode::kInvalidArgument);
}

TEST(Index, BuildIsDeterministicAndParallelSafe) {
  const auto chunks = export_corpus(*fixture_kb(), CorpusFormat::kB);
  const auto& serial = fixture_index_b();
  EXPECT_EQ(serial.size(), chunks.size());
  const auto parallel = build_index(chunks, HashEmbedder(), 4, 7);
  EXPECT_EQ(serialize(parallel), serialize(serial));
  for (std::size_t i = 0; i < chunks.size(); ++i) EXPECT_EQ(parallel.entries()[i].chunk, chunks[i]);
}

TEST(Index, SaveLoadRoundTrip) {
  const auto& index = fixture_index_b();
  const auto bytes = serialize(index);
  EXPECT_EQ(bytes.substr(0, 8), std::string("DRAGIDX\0", 8));
  std::istringstream in(bytes, std::ios::binary);
  const auto loaded = VectorIndex::load(in);
  EXPECT_EQ(loaded.fingerprint(), index.fingerprint());
  EXPECT_EQ(serialize(loaded), bytes);

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2), std::ios::binary);
  EXPECT_EQ(code_of([&] { VectorIndex::load(truncated); }), ErrorCode::kIo);
  std::istringstream junk("not an index", std::ios::binary);
  EXPECT_EQ(code_of([&] { VectorIndex::load(junk); }), ErrorCode::kIo);
}

TEST(Index, ProviderFailureNamesTheChunk) {
  const auto chunks = export_corpus(*fixture_kb(), CorpusFormat::kA);
  try {
    build_index(chunks, FailingProvider(), 2, 3);
    FAIL() << "expected ProviderFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderFailure);
    const auto metformin_id = make_chunk_id(CorpusFormat::kA, fixture_kb()->find_drug_by_name("metformin")->drug_id, std::nullopt);
    EXPECT_NE(std::string(e.what()).find(metformin_id), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("upstream timeout"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { build_index(chunks, ShortProvider()); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { build_index({}, HashEmbedder()); }), ErrorCode::kEmptyCorpus);
}

namespace {

class CountingProvider final : public EmbeddingProvider {
 public:
  std::string fingerprint() const override { return inner_.fingerprint(); }
  std::size_t dimension() const override { return inner_.dimension(); }
  std::size_t max_input_chars() const override { return inner_.max_input_chars(); }
  EmbeddingVector embed(std::string_view text) const override {
    ++calls;
    return inner_.embed(text);
  }
  mutable std::size_t calls = 0;

 private:
  HashEmbedder inner_{64};
};

}  // namespace

TEST(EmbeddingCache, HitsAfterFirstUseAndAcrossInstances) {
  const auto dir = std::filesystem::temp_directory_path() / ("drugrag_cache_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  auto inner = std::make_shared<CountingProvider>();
  {
    const CachedEmbeddingProvider cache(inner, dir);
    EXPECT_EQ(cache.fingerprint(), inner->fingerprint());
    const std::vector<std::string> texts{"headache", "nausea", "headache"};
    const auto first = cache.embed_batch(texts);
    EXPECT_EQ(inner->calls, 3u);
    EXPECT_EQ(first[0].values, HashEmbedder(64).embed("headache").values);
    const auto second = cache.embed_batch(texts);
    EXPECT_EQ(inner->calls, 3u);
    EXPECT_EQ(cache.hits(), 3u);
    EXPECT_EQ(second[1].values, first[1].values);
  }
  const CachedEmbeddingProvider reopened(inner, dir);
  EXPECT_EQ(reopened.embed("nausea").values, HashEmbedder(64).embed("nausea").values);
  EXPECT_EQ(inner->calls, 3u);
  EXPECT_EQ(reopened.embed("rash").values.size(), 64u);
  EXPECT_EQ(inner->calls, 4u);
  std::filesystem::remove_all(dir);
}
