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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. The trend checks train several desk-scale models on the
// synthetic mini-KB and take several minutes on one CPU core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "cometkb/checkpoint.h"
#include "cometkb/decoding.h"
#include "cometkb/evaluation.h"
#include "cometkb/random.h"
#include "cometkb/synthetic.h"
#include "cometkb/text.h"
#include "cometkb/training.h"
#include "support.h"

namespace cometkb {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// ---- 1 -----------------------------------------------------------------------

Outcome gradient_check() {
  const auto start = Clock::now();
  const ModelConfig c = testing::tiny_config(20, 8, 2, 1, 16, 10);
  const auto p = testing::random_parameters<double>(c, 1, 0.3);
  Rng rng(1);
  std::vector<EncodedSequence> seqs(3);
  for (auto& s : seqs) {
    s.tokens.resize(10);
    for (int& t : s.tokens) t = static_cast<int>(rng.below(20));
    s.loss_mask.assign(10, 0);
    const int begin = 3 + static_cast<int>(rng.below(3));
    for (int t = begin; t < begin + 1 + static_cast<int>(rng.below(4)); ++t) s.loss_mask[t] = 1;
  }
  const PackedBatch batch = pack_batch(std::span<const EncodedSequence>(seqs));
  std::vector<nn::Tensor<double>> leaves;
  visit_slots(p, [&](const std::string&, ParamKind, const nn::Tensor<double>& t) { leaves.push_back(t); });
  const auto r = testing::check_gradients(leaves, [&](nn::Graph<double>& g, const std::vector<nn::Var>& v) {
    ParameterVars vars;
    vars.blocks.resize(1);
    std::size_t i = 0;
    visit_slots(vars, [&](const std::string&, ParamKind, nn::Var& slot) { slot = v[i++]; });
    return tuple_loss(g, forward(g, vars, c, batch.tokens, batch.seq_len), batch);
  });
  const double secs = seconds_since(start);
  return {r.max_relative_error < 1e-5 && secs < 30.0 &&
              r.checked == static_cast<long>(parameter_count(p)),
          fmt("%ld parameters, max relative error %.3g, %.1fs", r.checked, r.max_relative_error, secs)};
}

// ---- 2 -----------------------------------------------------------------------

Outcome causality() {
  ModelConfig c = ModelConfig::desk(40);
  c.max_seq_len = 24;
  const auto p = testing::random_parameters<float>(c, 2, 0.5);
  Rng rng(2);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> tokens(24);
    for (int& t : tokens) t = static_cast<int>(rng.below(40));
    const auto before = forward_logits(p, c, tokens, 24);
    const int t = static_cast<int>(rng.below(24));
    tokens[t] = (tokens[t] + 1 + static_cast<int>(rng.below(39))) % 40;
    for (int i = t + 1; i < 24; ++i)
      if (rng.below(2)) tokens[i] = static_cast<int>(rng.below(40));
    const auto after = forward_logits(p, c, tokens, 24);
    for (int r = 0; r < t; ++r)
      for (int w = 0; w < 40; ++w) violations += before(r, w) != after(r, w);
    // The perturbed position itself must react, or the test is vacuous.
    bool moved = false;
    for (int w = 0; w < 40; ++w) moved = moved || before(t, w) != after(t, w);
    violations += !moved;
  }
  return {violations == 0, fmt("200 perturbations, %d violations", violations)};
}

// ---- 3 -----------------------------------------------------------------------

Outcome layout_suite() {
  const SyntheticKb kb = make_synthetic_kb(3);
  std::vector<std::string> words;
  for (const auto& line : kb.text)
    for (const auto& w : split_words(line)) words.push_back(w);
  Rng rng(3);
  long bad = 0, total = 0;
  for (const char* name : {"atomic", "conceptnet"}) {
    const SchemaSet schemas = SchemaSet::builtin(name);
    const Vocabulary v = Vocabulary::build(kb.tuples, schemas, 1, kb.text);
    for (bool meta : {false, true}) {
      if (meta && std::string(name) == "conceptnet") continue;
      EncodingOptions opt;
      opt.mode = std::string(name) == "atomic" ? RelationMode::kSymbol : RelationMode::kLanguage;
      opt.meta_tokens = meta;
      opt.layout = Layout::defaults_for(schemas, opt.mode, meta);
      for (int i = 0; i < 1000; ++i) {
        auto phrase = [&](int lo, int hi) {
          std::string out;
          for (int n = lo + static_cast<int>(rng.below(hi - lo + 1)); n > 0; --n)
            out += words[rng.below(words.size())] + " ";
          return out;
        };
        const KnowledgeTuple t{phrase(1, opt.layout.max_subject),
                               schemas.relations()[rng.below(schemas.size())].id,
                               phrase(0, opt.layout.max_object), Partition::kTrain};
        const EncodedSequence s = encode_tuple(v, schemas, t, opt);
        const auto rendered = render_relation(schemas.at(t.relation), opt.mode);
        const int first = opt.mode == RelationMode::kSymbol ? v.special_id(rendered[0])
                                                            : v.word_id(rendered[0]);
        bool ok = s.tokens[opt.layout.relation_start()] == first;
        for (int k = s.subject_length; k < opt.layout.relation_start(); ++k) ok = ok && s.tokens[k] == v.pad_id();
        ok = ok && s.masked_count() == static_cast<int>(split_words(t.object).size()) + 1;
        for (int k = 0; k < s.length(); ++k) {
          if (!s.loss_mask[k]) continue;
          ok = ok && k + 1 >= opt.layout.object_start() && k + 1 <= opt.layout.object_start() + s.object_length;
        }
        bad += !ok;
        ++total;
      }
    }
  }
  return {bad == 0, fmt("%ld tuples over symbol, symbol+meta and language layouts, %ld violations", total, bad)};
}

// ---- 4 -----------------------------------------------------------------------

double log_softmax_at(std::span<const float> logits, int id) {
  double z = 0;
  for (float v : logits) z += std::exp(double(v));
  return double(logits[id]) - std::log(z);
}

Outcome decoding_oracle() {
  const int vocab = 5, end = 1, max_object = 2, cap = 3;
  int optimal = 0, greedy_equal = 0, topk_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelConfig c = testing::tiny_config(vocab, 8, 2, 1, 16, 8);
    const auto p = testing::random_parameters<float>(c, 100 + trial, 0.8);
    const std::vector<std::uint8_t> allowed(vocab, 1);
    const DecodeContext ctx(p, c, allowed, end, max_object);
    Rng rng(trial);
    std::vector<int> prefix(3);
    for (int& t : prefix) t = static_cast<int>(rng.below(vocab));

    // Exhaustive search over every END-terminated continuation.
    std::vector<int> best_tokens;
    double best = -INFINITY;
    std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& cur) {
      for (int tok = 0; tok < vocab; ++tok) {
        cur.push_back(tok);
        if (tok == end) {
          std::vector<int> input = prefix;
          input.insert(input.end(), cur.begin(), cur.end() - 1);
          const auto logits = forward_logits(p, c, input, static_cast<int>(input.size()));
          double score = 0;
          for (std::size_t i = 0; i < cur.size(); ++i)
            score += log_softmax_at(logits.row(int(prefix.size() - 1 + i)), cur[i]);
          if (score > best) best = score, best_tokens = cur;
        } else if (static_cast<int>(cur.size()) < cap) {
          walk(cur);
        }
        cur.pop_back();
      }
    };
    std::vector<int> cur;
    walk(cur);
    const auto beam = beam_search(ctx, prefix, 125);
    optimal += !beam.empty() && beam[0].terminated && beam[0].tokens == best_tokens &&
               std::abs(beam[0].log_prob - best) < 1e-5;

    const auto g = greedy(ctx, prefix);
    const auto b1 = beam_search(ctx, prefix, 1);
    greedy_equal += b1.size() == 1 && b1[0].tokens == g.tokens;

    bool in_set = true;
    for (const auto& s : top_k_sample(ctx, prefix, 2, 10, trial)) {
      std::vector<int> input = prefix;
      input.insert(input.end(), s.tokens.begin(), s.tokens.end());
      const auto logits = forward_logits(p, c, input, static_cast<int>(input.size()));
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const auto row = logits.row(int(prefix.size() - 1 + i));
        int above = 0;
        for (float v : row) above += v > row[s.tokens[i]];
        in_set = in_set && above < 2;
      }
    }
    topk_ok += in_set;
  }
  return {optimal == 100 && greedy_equal == 100 && topk_ok == 100,
          fmt("beam optimal %d/100, greedy==beam(1) %d/100, top-k in set %d/100", optimal,
              greedy_equal, topk_ok)};
}

// ---- 5 -----------------------------------------------------------------------

Outcome metric_oracles() {
  Rng rng(5);
  auto words = [&](int max_len) {
    testing::Words w(rng.below(max_len + 1));
    for (auto& x : w) x = std::string(1, static_cast<char>('a' + rng.below(4)));
    return w;
  };
  int bleu_ok = 0, novelty_ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    std::vector<Tokens> cands;
    std::vector<std::vector<Tokens>> refs(n);
    for (int i = 0; i < n; ++i) {
      cands.push_back(words(6));
      for (int j = 0, m = 1 + static_cast<int>(rng.below(3)); j < m; ++j) refs[i].push_back(words(6));
    }
    const auto o = testing::oracle_bleu2(cands, refs);
    const BleuStats s = bleu2_stats(cands, refs);
    bleu_ok += s.matches[0] == o.match[0] && s.matches[1] == o.match[1] && s.totals[0] == o.total[0] &&
               s.totals[1] == o.total[1] && s.candidate_length == o.c && s.reference_length == o.r &&
               bleu2_from_stats(s) == o.value;

    std::vector<KnowledgeTuple> gen(1 + rng.below(8)), train(rng.below(8));
    for (auto* list : {&gen, &train})
      for (auto& t : *list)
        t = {std::string(1, char('a' + rng.below(3))), rng.below(2) ? "R" : "S",
             std::string(1, char('p' + rng.below(5))), Partition::kTrain};
    const NoveltyMetrics m = novelty_metrics(gen, train);
    const auto on = testing::oracle_novelty(gen, train);
    novelty_ok += m.n_t_sro == on.sro && m.n_t_o == on.o && m.n_u_o == on.u;
  }
  const Stopwords sw = Stopwords::builtin();
  const std::vector<KnowledgeTuple> train = {{"doctor", "CapableOf", "save person life", Partition::kTrain},
                                             {"cat", "IsA", "animal", Partition::kTrain}};
  const std::vector<KnowledgeTuple> dev = {{"doctor", "CapableOf", "save life", Partition::kDev},
                                           {"cat", "IsA", "the animal", Partition::kDev},
                                           {"cat", "IsA", "small pet", Partition::kDev}};
  const EditProfile prof = edit_distance_profile(dev, train, sw);
  const bool edit_ok = prof.distances.size() == 3 && std::abs(prof.distances[0] - 1.0 / 3.0) < 1e-12 &&
                       prof.distances[1] == 0.0 && prof.distances[2] == 1.0;
  return {bleu_ok == 1000 && novelty_ok == 1000 && edit_ok,
          fmt("bleu2 %d/1000, novelty %d/1000, edit distances %.4f %.1f %.1f", bleu_ok, novelty_ok,
              prof.distances.size() > 0 ? prof.distances[0] : -1.0,
              prof.distances.size() > 1 ? prof.distances[1] : -1.0,
              prof.distances.size() > 2 ? prof.distances[2] : -1.0)};
}

// ---- mini-KB experiments -------------------------------------------------------

struct MiniKb {
  SyntheticKb kb = make_synthetic_kb(7);
  SchemaSet schemas = SchemaSet::builtin("atomic");
  DatasetSplit split = make_split(kb.tuples);
  Vocabulary vocab;
  EncodingOptions options;
  std::vector<EncodedSequence> dev;
  ModelConfig model;

  MiniKb() {
    std::vector<KnowledgeTuple> all = split.train;
    all.insert(all.end(), split.dev.begin(), split.dev.end());
    all.insert(all.end(), split.test.begin(), split.test.end());
    vocab = Vocabulary::build(all, schemas, 1, kb.text);
    options.layout = Layout::defaults_for(schemas, RelationMode::kSymbol, false);
    options.layout.max_subject = 4;
    options.layout.max_object = 6;
    dev = encode_tuples(vocab, schemas, split.dev, options);
    model = ModelConfig::desk(vocab.size());
  }
  std::vector<EncodedSequence> encode(const std::vector<KnowledgeTuple>& t) const {
    return encode_tuples(vocab, schemas, t, options);
  }
};

const MiniKb& mini_kb() {
  static const MiniKb kb;
  return kb;
}

TrainConfig desk_config(std::uint64_t seed) {
  TrainConfig c = TrainConfig::preset("desk");
  c.seed = seed;
  return c;
}

// Best-dev perplexity of a model fine-tuned on `fraction` of the train split.
double finetune_ppl(double fraction, std::uint64_t seed, const Parameters<float>* init,
                    Parameters<float>* best = nullptr) {
  const MiniKb& m = mini_kb();
  TrainConfig cfg = desk_config(seed);
  const DatasetSplit split = fraction < 1.0 ? subsample_training(m.split, fraction, seed) : m.split;
  const auto train_set = m.encode(split.train);
  Parameters<float> start =
      init ? *init : init_parameters<float>(m.model, m.vocab.num_specials(), derive_seed(seed, 0));
  TrainResult r = train(std::move(start), m.model, train_set, m.dev, cfg);
  if (best) *best = std::move(r.best);
  return std::exp(r.best_dev_loss);
}

Parameters<float> pretrained(std::uint64_t seed) {
  const MiniKb& m = mini_kb();
  std::vector<std::string> text, dev;
  for (std::size_t i = 0; i < m.kb.text.size(); ++i) (i % 10 == 9 ? dev : text).push_back(m.kb.text[i]);
  TrainConfig cfg = desk_config(seed);
  cfg.total_steps = 1000;
  return pretrain_lm(m.vocab, text, dev, 16, m.model, cfg).best;
}

// ---- 6 -----------------------------------------------------------------------

Outcome overfit() {
  const auto start = Clock::now();
  const MiniKb& m = mini_kb();
  // 50 tuples with distinct (subject, relation) prefixes, so a perfect fit
  // exists.
  std::vector<KnowledgeTuple> subset;
  std::set<std::string> prefixes;
  for (const auto& t : m.split.train) {
    if (prefixes.insert(t.subject + "|" + t.relation).second) subset.push_back(t);
    if (subset.size() == 50) break;
  }
  const auto seqs = m.encode(subset);
  TrainConfig cfg = desk_config(1);
  cfg.total_steps = 2000;
  cfg.patience = 1000;
  const auto init = init_parameters<float>(m.model, m.vocab.num_specials(), derive_seed(1, 0));
  const TrainResult r = train(init, m.model, seqs, seqs, cfg);
  const double loss = masked_nll(r.best, m.model, seqs).mean();
  const double ppl = perplexity(r.best, m.model, seqs);
  const double secs = seconds_since(start);
  return {subset.size() == 50 && loss < 0.1 && ppl < 1.2 && secs < 300,
          fmt("50 tuples, train loss %.4f/token, gold ppl %.4f after %lld steps, %.0fs", loss, ppl,
              static_cast<long long>(r.best_step), secs)};
}

// ---- 7, 8, 9 ---------------------------------------------------------------------

struct TrendRuns {
  double ppl[3][3] = {};  // seed x {1%, 10%, 100%}
  double pretrained_ppl[3] = {};
  Parameters<float> best_full;
  double seconds_full = 0;
};

TrendRuns& trend_runs() {
  static TrendRuns runs = [] {
    TrendRuns r;
    const double fractions[3] = {0.01, 0.1, 1.0};
    for (int s = 0; s < 3; ++s) {
      for (int f = 0; f < 3; ++f) {
        const auto start = Clock::now();
        const bool keep = s == 0 && f == 2;
        r.ppl[s][f] = finetune_ppl(fractions[f], s + 1, nullptr, keep ? &r.best_full : nullptr);
        if (keep) r.seconds_full = seconds_since(start);
        std::printf("     seed %d fraction %.2f: best dev ppl %.3f\n", s + 1, fractions[f], r.ppl[s][f]);
        std::fflush(stdout);
      }
    }
    return r;
  }();
  return runs;
}

Outcome mini_kb_learning() {
  const MiniKb& m = mini_kb();
  TrendRuns& runs = trend_runs();
  const auto start = Clock::now();
  const double unigram = unigram_baseline_ppl(m.split.train, m.split.dev);
  const double ppl = runs.ppl[0][2];

  // Decode every relation for every held-out test subject.
  std::set<std::string> subjects;
  for (const auto& t : m.split.test) subjects.insert(t.subject);
  const DecodeContext ctx = DecodeContext::for_vocabulary(runs.best_full, m.model, m.vocab,
                                                          m.options.layout.max_object);
  std::vector<KnowledgeTuple> generated;
  for (const auto& s : subjects) {
    for (const auto& rel : m.schemas.relations()) {
      const KnowledgeTuple probe{s, rel.id, "", Partition::kTest};
      const auto prefix = decoding_prefix(encode_tuple(m.vocab, m.schemas, probe, m.options));
      for (const auto& c : beam_search(ctx, prefix, 5))
        generated.push_back({s, rel.id, m.vocab.decode(c.tokens), Partition::kTest});
    }
  }
  const NoveltyMetrics nov = novelty_metrics(generated, m.split.train);
  const double secs = runs.seconds_full + seconds_since(start);
  return {ppl <= 0.8 * unigram && nov.n_t_sro == 100.0 && secs < 600,
          fmt("dev ppl %.3f vs unigram %.3f (ratio %.3f); %ld tuples for %zu held-out subjects, "
              "N/T sro %.1f, N/T o %.1f; %.0fs",
              ppl, unigram, ppl / unigram, nov.generated, subjects.size(), nov.n_t_sro, nov.n_t_o, secs)};
}

Outcome data_efficiency() {
  TrendRuns& runs = trend_runs();
  int monotone = 0;
  std::string detail;
  for (int s = 0; s < 3; ++s) {
    const bool ok = runs.ppl[s][0] > runs.ppl[s][1] && runs.ppl[s][1] > runs.ppl[s][2];
    monotone += ok;
    detail += fmt("seed %d: %.2f > %.2f > %.2f %s; ", s + 1, runs.ppl[s][0], runs.ppl[s][1],
                  runs.ppl[s][2], ok ? "yes" : "no");
  }
  return {monotone >= 2, detail + fmt("monotone in %d/3 seeds", monotone)};
}

Outcome pretraining_transfer() {
  TrendRuns& runs = trend_runs();
  int wins = 0;
  std::string detail;
  for (int s = 0; s < 3; ++s) {
    const Parameters<float> init = pretrained(s + 1);
    runs.pretrained_ppl[s] = finetune_ppl(1.0, s + 1, &init);
    const bool ok = runs.pretrained_ppl[s] <= runs.ppl[s][2];
    wins += ok;
    detail += fmt("seed %d: pretrained %.3f vs scratch %.3f; ", s + 1, runs.pretrained_ppl[s], runs.ppl[s][2]);
  }
  return {wins >= 2, detail + fmt("pretrained <= scratch in %d/3 seeds", wins)};
}

// ---- 10 ----------------------------------------------------------------------

Outcome determinism() {
  const MiniKb& m = mini_kb();
  auto run_once = [&]() {
    TrainConfig cfg = desk_config(9);
    cfg.total_steps = 150;
    cfg.eval_every = 50;
    const auto subset = subsample_training(m.split, 0.2, 9);
    const auto init = init_parameters<float>(m.model, m.vocab.num_specials(), derive_seed(9, 0));
    TrainResult r = train(init, m.model, m.encode(subset.train), m.dev, cfg);
    Checkpoint ck{m.model, m.vocab.hash(), {{"seed", "9"}}, std::move(r.best)};
    std::string bytes = serialize_checkpoint(ck);
    const DecodeContext ctx = DecodeContext::for_vocabulary(ck.params, m.model, m.vocab, 6);
    std::string outputs = loss_curve_csv(r.curve);
    for (std::size_t i = 0; i < 10; ++i) {
      const auto prefix = decoding_prefix(m.dev[i]);
      for (const auto& c : beam_search(ctx, prefix, 3)) outputs += m.vocab.decode(c.tokens) + fmt("|%.17g\n", c.log_prob);
      for (const auto& c : top_k_sample(ctx, prefix, 5, 3, i)) outputs += m.vocab.decode(c.tokens) + "\n";
    }
    return std::make_tuple(std::move(bytes), std::move(outputs), std::move(ck));
  };
  const auto [bytes_a, out_a, ck] = run_once();
  const auto [bytes_b, out_b, ck_b] = run_once();

  const auto path = std::filesystem::temp_directory_path() / "cometkb_acceptance.ckpt";
  save_checkpoint(path, ck);
  const Checkpoint loaded = load_checkpoint(path, m.vocab.hash());
  std::filesystem::remove(path);
  bool logits_equal = true;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& s = m.dev[i];
    logits_equal = logits_equal && forward_logits(loaded.params, loaded.config, s.tokens, s.length()) ==
                                       forward_logits(ck.params, ck.config, s.tokens, s.length());
  }
  const bool pass = bytes_a == bytes_b && out_a == out_b && logits_equal &&
                    serialize_checkpoint(loaded) == bytes_a;
  return {pass, fmt("checkpoint bytes %s (%zu bytes), outputs %s, reloaded logits %s",
                    bytes_a == bytes_b ? "identical" : "differ", bytes_a.size(),
                    out_a == out_b ? "identical" : "differ", logits_equal ? "bit-identical" : "differ")};
}

// ---- 11 ----------------------------------------------------------------------

Outcome preset_constants() {
  const TrainConfig a = TrainConfig::preset("atomic-paper");
  const TrainConfig c = TrainConfig::preset("conceptnet-paper");
  bool ok = a.max_lr == 6.25e-5 && a.warmup_steps == 100 && a.total_steps == 50000 &&
            c.max_lr == 1e-5 && c.warmup_steps == 200 && c.total_steps == 100000;
  for (const TrainConfig* p : {&a, &c})
    ok = ok && p->clip_norm == 1.0 && p->model.dropout == 0.1 && p->batch_size == 64 &&
         p->model.n_layers == 12 && p->model.d_model == 768 && p->model.n_heads == 12;
  return {ok, fmt("atomic %g/%d/%d, conceptnet %g/%d/%d, clip %g, dropout %g, batch %d", a.max_lr,
                  a.warmup_steps, a.total_steps, c.max_lr, c.warmup_steps, c.total_steps, a.clip_norm,
                  a.model.dropout, a.batch_size)};
}

}  // namespace
}  // namespace cometkb

int main() {
  using namespace cometkb;
  report(1, "gradient correctness", gradient_check);
  report(2, "causality", causality);
  report(3, "layout", layout_suite);
  report(4, "decoding oracle", decoding_oracle);
  report(5, "metric oracles", metric_oracles);
  report(6, "overfit", overfit);
  report(7, "mini-KB learning", mini_kb_learning);
  report(8, "data-efficiency trend", data_efficiency);
  report(9, "pretraining-transfer trend", pretraining_transfer);
  report(10, "determinism and round trip", determinism);
  report(11, "preset constants", preset_constants);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
