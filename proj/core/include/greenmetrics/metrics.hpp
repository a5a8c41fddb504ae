#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace greenmetrics {

struct TokenSeq {
  std::vector<std::string> tokens;

  bool operator==(const TokenSeq&) const = default;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PRF&) const = default;
};

// Token-aligned embedding vectors, one per token, all the same dimension.
struct EmbeddingSeq {
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> vectors;

  bool operator==(const EmbeddingSeq&) const = default;
};

struct MetricScore {
  PRF rouge1;
  PRF rouge2;
  PRF rougeL;
  double meteor = 0.0;
  std::optional<PRF> bertscore;

  bool operator==(const MetricScore&) const = default;
};

// Lowercases and splits on anything that is not a letter or digit; bullet
// markers and punctuation disappear. Empty input gives an empty sequence.
TokenSeq tokenize(std::string_view text);

// Clipped n-gram overlap with harmonic F1. Either side short of one n-gram
// scores zero across the board.
PRF rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);

// Longest common subsequence, precision over the candidate length and
// recall over the reference length.
PRF rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// Exact-match unigram alignment, greedy left-to-right over the candidate
// with ties broken by the earliest unused reference position. Combines the
// recall-weighted mean 10PR/(R+9P) with the fragmentation penalty
// 0.5*(chunks/m)^3. No stemming or synonym stages.
double meteor(const TokenSeq& candidate, const TokenSeq& reference);

// Greedy cosine matching over precomputed token embeddings: recall averages
// each reference token's best match, precision each candidate token's.
// No IDF weighting, no baseline rescaling.
PRF bertscore_precomputed(const EmbeddingSeq& candidate, const EmbeddingSeq& reference);

struct CorpusScores {
  std::vector<MetricScore> per_pair;
  MetricScore corpus;  // arithmetic mean per component
};

// Scores every (candidate, reference) pair and averages. When embeddings are
// supplied they must cover every pair, index-aligned.
CorpusScores score_corpus(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>>* embeddings = nullptr);

// Two-column TSV: candidate TAB reference, one pair per line.
std::vector<std::pair<std::string, std::string>> load_pairs_tsv(
    const std::filesystem::path& path);

// First line "<token_count> <dimension>", then one token per line followed
// by its components.
EmbeddingSeq parse_embedding_file(const std::filesystem::path& path);

// Directory of per-pair files <n>.cand.emb / <n>.ref.emb, 1-based line
// numbers into the pairs file.
std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>> load_embedding_dir(
    const std::filesystem::path& dir, std::size_t pair_count);

// Deterministic pairwise summation; order-independent at full precision for
// the corpus means.
double pairwise_sum(std::span<const double> values);

}  // namespace greenmetrics
