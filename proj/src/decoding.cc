// Copyright 2026 The cometkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cometkb/decoding.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cometkb/error.h"
#include "cometkb/random.h"

namespace cometkb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Generated tokens are capped at the object segment plus its END slot.
int max_tokens(const DecodeContext& ctx) { return ctx.max_object + 1; }

ActivationCache<float> prime(const DecodeContext& ctx, std::span<const int> prefix,
                             std::vector<float>* logits) {
  if (prefix.empty()) throw ArgumentError("decoding needs a non-empty prefix");
  if (static_cast<int>(prefix.size()) + max_tokens(ctx) - 1 > ctx.config.max_seq_len) {
    throw ArgumentError("prefix of " + std::to_string(prefix.size()) + " tokens plus " +
                        std::to_string(max_tokens(ctx)) + " generated tokens exceeds max_seq_len " +
                        std::to_string(ctx.config.max_seq_len));
  }
  ActivationCache<float> cache(*ctx.params, ctx.config);
  for (int token : prefix) *logits = cache.append(token);
  return cache;
}

struct Hypothesis {
  std::vector<int> tokens;
  double score = 0.0;
  ActivationCache<float> cache;
  std::vector<double> next;  // allowed log-probs for the next token
};

// Finished candidates: score descending, then earlier END, then token ids.
bool candidate_before(const GenerationCandidate& a, const GenerationCandidate& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace

DecodeContext::DecodeContext(const Parameters<float>& p, const ModelConfig& c,
                             std::vector<std::uint8_t> allow, int end, int max_obj)
    : params(&p), config(c), allowed(std::move(allow)), end_id(end), max_object(max_obj) {
  if (static_cast<int>(allowed.size()) != config.vocab_size) {
    throw ArgumentError("allowed-token mask has " + std::to_string(allowed.size()) +
                        " entries for a vocabulary of " + std::to_string(config.vocab_size));
  }
  if (end_id < 0 || end_id >= config.vocab_size || !allowed[end_id]) {
    throw ArgumentError("END token must be an allowed vocabulary entry");
  }
  if (max_object < 0) throw ArgumentError("max_object must be >= 0");
}

DecodeContext DecodeContext::for_vocabulary(const Parameters<float>& params,
                                            const ModelConfig& config, const Vocabulary& vocab,
                                            int max_object) {
  return DecodeContext(params, config, vocab.generation_mask(), vocab.end_id(), max_object);
}

std::vector<double> allowed_log_probs(std::span<const float> logits,
                                      std::span<const std::uint8_t> allowed) {
  if (logits.size() != allowed.size()) {
    throw ShapeError("logits of " + std::to_string(logits.size()) + " against a mask of " +
                     std::to_string(allowed.size()));
  }
  double peak = kNegInf;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed[i]) peak = std::max(peak, static_cast<double>(logits[i]));
  }
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed[i]) z += std::exp(static_cast<double>(logits[i]) - peak);
  }
  const double log_z = peak + std::log(z);
  std::vector<double> out(logits.size(), kNegInf);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed[i]) out[i] = static_cast<double>(logits[i]) - log_z;
  }
  return out;
}

std::vector<int> decoding_prefix(const EncodedSequence& sequence) {
  return std::vector<int>(sequence.tokens.begin(),
                          sequence.tokens.begin() + sequence.object_start);
}

GenerationCandidate greedy(const DecodeContext& ctx, std::span<const int> prefix) {
  std::vector<float> logits;
  ActivationCache<float> cache = prime(ctx, prefix, &logits);
  GenerationCandidate out;
  for (int step = 0; step < max_tokens(ctx); ++step) {
    const std::vector<double> lp = allowed_log_probs(logits, ctx.allowed);
    int best = -1;
    for (int tok = 0; tok < static_cast<int>(lp.size()); ++tok) {
      if (lp[tok] == kNegInf) continue;
      if (best < 0 || out.log_prob + lp[tok] > out.log_prob + lp[best]) best = tok;
    }
    out.tokens.push_back(best);
    out.log_prob += lp[best];
    if (best == ctx.end_id) {
      out.terminated = true;
      break;
    }
    if (step + 1 < max_tokens(ctx)) logits = cache.append(best);
  }
  return out;
}

std::vector<GenerationCandidate> beam_search(const DecodeContext& ctx,
                                             std::span<const int> prefix, int beam) {
  if (beam < 1) throw ArgumentError("beam width must be >= 1, got " + std::to_string(beam));
  std::vector<float> logits;
  ActivationCache<float> root = prime(ctx, prefix, &logits);
  std::vector<Hypothesis> live;
  live.push_back({{}, 0.0, std::move(root), allowed_log_probs(logits, ctx.allowed)});
  std::vector<GenerationCandidate> pool;

  struct Expansion {
    double score;
    int parent;
    int token;
  };
  std::vector<Expansion> expansions;
  for (int step = 0; step < max_tokens(ctx) && !live.empty(); ++step) {
    expansions.clear();
    for (int h = 0; h < static_cast<int>(live.size()); ++h) {
      const auto& lp = live[h].next;
      for (int tok = 0; tok < static_cast<int>(lp.size()); ++tok) {
        if (lp[tok] != kNegInf) expansions.push_back({live[h].score + lp[tok], h, tok});
      }
    }
    // Live hypotheses share a length, so lexicographic order on the full token
    // list is parent tokens then the new token.
    auto before = [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return live[a.parent].tokens < live[b.parent].tokens;
      return a.token < b.token;
    };
    const std::size_t keep = std::min<std::size_t>(beam, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(), before);

    const bool last_step = step + 1 == max_tokens(ctx);
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion& e = expansions[i];
      const Hypothesis& parent = live[e.parent];
      std::vector<int> tokens = parent.tokens;
      tokens.push_back(e.token);
      if (e.token == ctx.end_id) {
        pool.push_back({std::move(tokens), e.score, true});
        continue;
      }
      Hypothesis h{std::move(tokens), e.score, parent.cache, {}};
      if (!last_step) h.next = allowed_log_probs(h.cache.append(e.token), ctx.allowed);
      next.push_back(std::move(h));
    }
    live = std::move(next);

    std::sort(pool.begin(), pool.end(), candidate_before);
    if (static_cast<int>(pool.size()) >= beam && !live.empty()) {
      double best_live = kNegInf;
      for (const auto& h : live) best_live = std::max(best_live, h.score);
      // Scores only fall as tokens are added, so no live hypothesis can
      // overtake the pool's b-th entry.
      if (best_live <= pool[beam - 1].log_prob) live.clear();
    }
  }

  std::sort(pool.begin(), pool.end(), candidate_before);
  if (static_cast<int>(pool.size()) > beam) pool.resize(beam);
  std::vector<GenerationCandidate> capped;
  for (auto& h : live) capped.push_back({std::move(h.tokens), h.score, false});
  std::sort(capped.begin(), capped.end(), candidate_before);
  for (auto& c : capped) {
    if (static_cast<int>(pool.size()) >= beam) break;
    pool.push_back(std::move(c));
  }
  return pool;
}

std::vector<int> top_k_set(std::span<const double> log_probs, int k) {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(log_probs.size()); ++i) {
    if (log_probs[i] != kNegInf) ids.push_back(i);
  }
  const std::size_t keep = std::min<std::size_t>(std::max(k, 0), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + keep, ids.end(), [&](int a, int b) {
    if (log_probs[a] != log_probs[b]) return log_probs[a] > log_probs[b];
    return a < b;
  });
  ids.resize(keep);
  return ids;
}

std::vector<GenerationCandidate> top_k_sample(const DecodeContext& ctx,
                                              std::span<const int> prefix, int k,
                                              int n_samples, std::uint64_t seed) {
  if (k < 1 || k > ctx.config.vocab_size) {
    throw ArgumentError("top-k needs 1 <= k <= vocabulary size, got " + std::to_string(k));
  }
  if (n_samples < 0) throw ArgumentError("n_samples must be >= 0");
  std::vector<float> root_logits;
  const ActivationCache<float> root = prime(ctx, prefix, &root_logits);
  const std::vector<double> root_lp = allowed_log_probs(root_logits, ctx.allowed);
  Rng rng(seed);

  std::vector<GenerationCandidate> out;
  for (int n = 0; n < n_samples; ++n) {
    ActivationCache<float> cache = root;
    std::vector<double> lp = root_lp;
    GenerationCandidate c;
    for (int step = 0; step < max_tokens(ctx); ++step) {
      const std::vector<int> choices = top_k_set(lp, k);
      const double peak = lp[choices.front()];
      double total = 0.0;
      for (int id : choices) total += std::exp(lp[id] - peak);
      const double u = rng.uniform() * total;
      int token = choices.back();
      double cumulative = 0.0;
      for (int id : choices) {
        cumulative += std::exp(lp[id] - peak);
        if (u < cumulative) {
          token = id;
          break;
        }
      }
      c.tokens.push_back(token);
      c.log_prob += lp[token];
      if (token == ctx.end_id) {
        c.terminated = true;
        break;
      }
      if (step + 1 < max_tokens(ctx)) lp = allowed_log_probs(cache.append(token), ctx.allowed);
    }
    out.push_back(std::move(c));
  }
  return out;
}

double score_candidate(const DecodeContext& ctx, std::span<const int> prefix,
                       std::span<const int> tokens) {
  if (prefix.empty()) throw ArgumentError("scoring needs a non-empty prefix");
  if (tokens.empty()) return 0.0;
  std::vector<int> input(prefix.begin(), prefix.end());
  input.insert(input.end(), tokens.begin(), tokens.end() - 1);
  const nn::Tensor<float> logits =
      forward_logits(*ctx.params, ctx.config, input, static_cast<int>(input.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int row = static_cast<int>(prefix.size() - 1 + i);
    total += allowed_log_probs(logits.row(row), ctx.allowed)[tokens[i]];
  }
  return total;
}

std::string_view decoder_name(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kGreedy: return "greedy";
    case DecoderKind::kBeam: return "beam";
    case DecoderKind::kTopK: return "topk";
  }
  return "?";
}

DecoderKind parse_decoder(std::string_view name) {
  if (name == "greedy") return DecoderKind::kGreedy;
  if (name == "beam") return DecoderKind::kBeam;
  if (name == "topk") return DecoderKind::kTopK;
  throw ArgumentError("unknown decoder '" + std::string(name) + "' (greedy, beam, topk)");
}

}  // namespace cometkb
