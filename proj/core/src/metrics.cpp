#include "greenmetrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "greenmetrics/errors.hpp"

namespace greenmetrics {

namespace {

// Codepoint ranges treated as separators beyond ASCII, so bullets, dashes
// and list markers vanish while accented words survive intact.
bool is_separator_cp(uint32_t cp) {
  return (cp >= 0x00A0 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F);
}

uint32_t lower_cp(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;  // Latin-1
  return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one codepoint; malformed bytes come back as (0, 1) which the
// tokenizer treats as a separator.
std::pair<uint32_t, size_t> next_codepoint(std::string_view s, size_t i) {
  const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1))
    return {static_cast<uint32_t>((b0 & 0x1F) << 6 | (byte(i + 1) & 0x3F)), 2};
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2))
    return {static_cast<uint32_t>((b0 & 0x0F) << 12 | (byte(i + 1) & 0x3F) << 6 |
                                  (byte(i + 2) & 0x3F)),
            3};
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3))
    return {static_cast<uint32_t>((b0 & 0x07) << 18 | (byte(i + 1) & 0x3F) << 12 |
                                  (byte(i + 2) & 0x3F) << 6 | (byte(i + 3) & 0x3F)),
            4};
  return {0, 1};
}

double harmonic_f1(double p, double r) {
  return (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  std::string current;
  size_t i = 0;
  while (i < text.size()) {
    auto [cp, len] = next_codepoint(text, i);
    i += len;
    bool is_token_char;
    if (cp < 0x80) {
      is_token_char = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
                      (cp >= 'A' && cp <= 'Z');
    } else {
      is_token_char = !is_separator_cp(cp);
    }
    if (is_token_char) {
      append_utf8(current, lower_cp(cp));
    } else if (!current.empty()) {
      seq.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) seq.tokens.push_back(std::move(current));
  return seq;
}

PRF rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
  if (n < 1) raise(errc::invariant_violation, "rouge_n needs n >= 1");
  const auto count_grams = [n](const TokenSeq& seq) {
    std::unordered_map<std::string, int> counts;
    if (seq.tokens.size() < static_cast<size_t>(n)) return counts;
    for (size_t i = 0; i + n <= seq.tokens.size(); ++i) {
      std::string gram = seq.tokens[i];
      for (int k = 1; k < n; ++k) {
        gram.push_back('\x1f');
        gram += seq.tokens[i + k];
      }
      ++counts[gram];
    }
    return counts;
  };

  const auto cand_grams = count_grams(candidate);
  const auto ref_grams = count_grams(reference);
  if (cand_grams.empty() || ref_grams.empty()) return {};

  long long cand_total = 0;
  for (const auto& [_, c] : cand_grams) cand_total += c;
  long long ref_total = 0;
  for (const auto& [_, c] : ref_grams) ref_total += c;

  long long matched = 0;
  for (const auto& [gram, c] : cand_grams) {
    auto it = ref_grams.find(gram);
    if (it != ref_grams.end()) matched += std::min(c, it->second);
  }

  PRF out;
  out.precision = static_cast<double>(matched) / static_cast<double>(cand_total);
  out.recall = static_cast<double>(matched) / static_cast<double>(ref_total);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

PRF rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  const size_t m = candidate.tokens.size();
  const size_t n = reference.tokens.size();
  if (m == 0 || n == 0) return {};

  // Row-rolling LCS table.
  std::vector<size_t> prev(n + 1, 0), curr(n + 1, 0);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      if (candidate.tokens[i - 1] == reference.tokens[j - 1])
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  const double lcs = static_cast<double>(prev[n]);

  PRF out;
  out.precision = lcs / static_cast<double>(m);
  out.recall = lcs / static_cast<double>(n);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

double meteor(const TokenSeq& candidate, const TokenSeq& reference) {
  const size_t nc = candidate.tokens.size();
  const size_t nr = reference.tokens.size();
  if (nc == 0 || nr == 0) return 0.0;

  std::vector<bool> used(nr, false);
  std::vector<std::pair<size_t, size_t>> alignment;  // (candidate pos, reference pos)
  for (size_t ci = 0; ci < nc; ++ci) {
    for (size_t rj = 0; rj < nr; ++rj) {
      if (!used[rj] && candidate.tokens[ci] == reference.tokens[rj]) {
        used[rj] = true;
        alignment.emplace_back(ci, rj);
        break;
      }
    }
  }
  const size_t matches = alignment.size();
  if (matches == 0) return 0.0;

  size_t chunks = 1;
  for (size_t k = 1; k < alignment.size(); ++k) {
    if (alignment[k].first != alignment[k - 1].first + 1 ||
        alignment[k].second != alignment[k - 1].second + 1)
      ++chunks;
  }

  const double p = static_cast<double>(matches) / static_cast<double>(nc);
  const double r = static_cast<double>(matches) / static_cast<double>(nr);
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(chunks) / static_cast<double>(matches);
  const double penalty = 0.5 * frag * frag * frag;
  return f_mean * (1.0 - penalty);
}

PRF bertscore_precomputed(const EmbeddingSeq& candidate, const EmbeddingSeq& reference) {
  if (candidate.vectors.empty() || reference.vectors.empty())
    raise(errc::empty_sequence, "bertscore needs non-empty embedding sequences");
  const size_t dim = candidate.vectors.front().size();
  auto check_side = [&](const EmbeddingSeq& side, const char* name) {
    if (side.tokens.size() != side.vectors.size())
      raise(errc::dimension_mismatch,
            std::string(name) + " embedding sequence: token/vector count mismatch");
    for (const auto& v : side.vectors) {
      if (v.size() != dim)
        raise(errc::dimension_mismatch,
              std::string(name) + " embedding sequence: inconsistent vector dimension");
      for (double x : v)
        if (!std::isfinite(x))
          raise(errc::non_finite_vector,
                std::string(name) + " embedding sequence: non-finite component");
    }
  };
  check_side(candidate, "candidate");
  check_side(reference, "reference");
  if (dim == 0) raise(errc::dimension_mismatch, "embedding dimension must be >= 1");

  // Identical vectors score exactly 1 so self-similarity is not eroded by
  // rounding; other cosines are clamped into [0,1].
  auto similarity = [dim](const std::vector<double>& a, const std::vector<double>& b) {
    if (a == b) return 1.0;
    double dot = 0, na = 0, nb = 0;
    for (size_t k = 0; k < dim; ++k) {
      dot += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    if (na == 0 || nb == 0) return 0.0;
    const double cosv = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(cosv, 0.0, 1.0);
  };

  double precision_acc = 0;
  for (const auto& cv : candidate.vectors) {
    double best = 0;
    for (const auto& rv : reference.vectors) best = std::max(best, similarity(cv, rv));
    precision_acc += best;
  }
  double recall_acc = 0;
  for (const auto& rv : reference.vectors) {
    double best = 0;
    for (const auto& cv : candidate.vectors) best = std::max(best, similarity(cv, rv));
    recall_acc += best;
  }

  PRF out;
  out.precision = precision_acc / static_cast<double>(candidate.vectors.size());
  out.recall = recall_acc / static_cast<double>(reference.vectors.size());
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0;
    for (double v : values) acc += v;
    return acc;
  }
  const size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

double pairwise_mean(const std::vector<double>& values) {
  return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace

CorpusScores score_corpus(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>>* embeddings) {
  if (pairs.empty()) raise(errc::empty_corpus, "corpus has no pairs");
  if (embeddings && embeddings->size() != pairs.size())
    raise(errc::missing_embeddings,
          "embeddings cover " + std::to_string(embeddings->size()) + " of " +
              std::to_string(pairs.size()) + " pairs");

  CorpusScores out;
  out.per_pair.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto cand = tokenize(pairs[i].first);
    const auto ref = tokenize(pairs[i].second);
    MetricScore score;
    score.rouge1 = rouge_n(cand, ref, 1);
    score.rouge2 = rouge_n(cand, ref, 2);
    score.rougeL = rouge_l(cand, ref);
    score.meteor = meteor(cand, ref);
    if (embeddings)
      score.bertscore = bertscore_precomputed((*embeddings)[i].first, (*embeddings)[i].second);
    out.per_pair.push_back(std::move(score));
  }

  auto mean_of = [&](auto&& get) {
    std::vector<double> column;
    column.reserve(out.per_pair.size());
    for (const auto& s : out.per_pair) column.push_back(get(s));
    return pairwise_mean(column);
  };
  auto mean_prf = [&](auto&& get) {
    PRF prf;
    prf.precision = mean_of([&](const MetricScore& s) { return get(s).precision; });
    prf.recall = mean_of([&](const MetricScore& s) { return get(s).recall; });
    prf.f1 = mean_of([&](const MetricScore& s) { return get(s).f1; });
    return prf;
  };
  out.corpus.rouge1 = mean_prf([](const MetricScore& s) -> const PRF& { return s.rouge1; });
  out.corpus.rouge2 = mean_prf([](const MetricScore& s) -> const PRF& { return s.rouge2; });
  out.corpus.rougeL = mean_prf([](const MetricScore& s) -> const PRF& { return s.rougeL; });
  out.corpus.meteor = mean_of([](const MetricScore& s) { return s.meteor; });
  if (embeddings)
    out.corpus.bertscore = mean_prf([](const MetricScore& s) -> const PRF& { return *s.bertscore; });
  return out;
}

std::vector<std::pair<std::string, std::string>> load_pairs_tsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::file_unreadable, "cannot read pairs file '" + path.string() + "'");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      raise(errc::schema_violation, path.string() + ": line " + std::to_string(row) +
                                        ": expected exactly one tab separator");
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

EmbeddingSeq parse_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::file_unreadable, "cannot read embedding file '" + path.string() + "'");
  const std::string origin = path.string();

  std::string line;
  if (!std::getline(in, line))
    raise(errc::schema_violation, origin + ": empty file, expected '<count> <dimension>' header");
  std::istringstream header(line);
  long long count = -1, dim = -1;
  if (!(header >> count >> dim) || count < 0 || dim < 1) {
    std::string rest;
    raise(errc::schema_violation,
          origin + ": header must be '<count> <dimension>' with count >= 0 and dimension >= 1");
  }

  // Whitespace-split with from_chars so "inf"/"nan" parse as numbers and
  // then fail the finiteness check, rather than failing as text.
  const auto split_ws = [](const std::string& s) {
    std::vector<std::string> fields;
    size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
      size_t start = i;
      while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
      if (i > start) fields.push_back(s.substr(start, i - start));
    }
    return fields;
  };

  EmbeddingSeq seq;
  seq.tokens.reserve(count);
  seq.vectors.reserve(count);
  for (long long i = 0; i < count; ++i) {
    if (!std::getline(in, line))
      raise(errc::schema_violation, origin + ": expected " + std::to_string(count) +
                                        " token lines, found " + std::to_string(i));
    const std::string row_id = origin + ": line " + std::to_string(i + 2);
    const auto fields = split_ws(line);
    if (fields.size() != static_cast<size_t>(dim) + 1)
      raise(errc::schema_violation, row_id + ": expected a token and " + std::to_string(dim) +
                                        " components, got " + std::to_string(fields.size()) +
                                        " fields");
    std::vector<double> vec(dim);
    for (long long k = 0; k < dim; ++k) {
      const std::string& f = fields[k + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[k]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        raise(errc::schema_violation, row_id + ": component '" + f + "' is not a number");
    }
    for (double x : vec)
      if (!std::isfinite(x))
        raise(errc::non_finite_vector, row_id + ": non-finite component");
    seq.tokens.push_back(fields.front());
    seq.vectors.push_back(std::move(vec));
  }
  return seq;
}

std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>> load_embedding_dir(
    const std::filesystem::path& dir, std::size_t pair_count) {
  std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>> out;
  out.reserve(pair_count);
  for (size_t i = 1; i <= pair_count; ++i) {
    const auto cand_path = dir / (std::to_string(i) + ".cand.emb");
    const auto ref_path = dir / (std::to_string(i) + ".ref.emb");
    if (!std::filesystem::exists(cand_path) || !std::filesystem::exists(ref_path))
      raise(errc::missing_embeddings,
            "pair " + std::to_string(i) + ": expected '" + cand_path.string() + "' and '" +
                ref_path.string() + "'");
    out.emplace_back(parse_embedding_file(cand_path), parse_embedding_file(ref_path));
  }
  return out;
}

}  // namespace greenmetrics
