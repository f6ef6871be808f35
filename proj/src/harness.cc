#include "advqa/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "advqa/errors.h"
#include "advqa/utf8.h"

namespace advqa {

namespace {

// Owns the per-example slots; workers hand finished rows to it.
class Collector {
 public:
  explicit Collector(std::size_t n) : rows_(n) {}

  void put(std::size_t index, ExampleRecord row) {
    std::lock_guard<std::mutex> lock(mu_);
    rows_[index] = std::move(row);
  }

  std::vector<ExampleRecord> take() {
    std::lock_guard<std::mutex> lock(mu_);
    return std::move(rows_);
  }

 private:
  std::mutex mu_;
  std::vector<ExampleRecord> rows_;
};

ExampleRecord attack_one(const QAExample& ex, const AttackConfig& config,
                         const ModelGateway& gateway, bool& unreachable) {
  ExampleRecord row;
  row.example_id = ex.id;
  row.question = ex.question;
  row.kind = ex.kind;
  row.references = ex.references;
  row.context = ex.context;
  try {
    row.outcome = attack(ex, config, gateway);
    const AttackOutcome& o = row.outcome;
    const std::string& prediction =
        o.success && o.attacked_answer ? *o.attacked_answer : o.original_answer;
    row.f1 = f1_score(prediction, ex.references);
    row.em = exact_match(prediction, ex.references);
    row.em_strict = exact_match_strict(prediction, ex.references);
    if (o.success && o.best) {
      const std::string& adv = o.best->text;
      row.bleu1 = bleu1(adv, ex.context);
      row.rouge1 = rouge1(adv, ex.context);
      row.sim = similarity(adv, ex.context, gateway);
      row.mod_rate = modification_rate(tokenize(ex.context), o.best->substitutions);
      row.ppl = gateway.perplexity(adv);
    }
  } catch (const AttackError& e) {
    row.errored = true;
    row.error = e.what();
    row.outcome.queries_used = e.queries_used();
    unreachable = e.unreachable();
  } catch (const GatewayUnreachable& e) {
    row.errored = true;
    row.error = e.what();
    unreachable = true;
  } catch (const GatewayError& e) {
    row.errored = true;
    row.error = e.what();
  }
  return row;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

CampaignAggregate aggregate(const std::vector<ExampleRecord>& rows) {
  CampaignAggregate agg;
  agg.n_examples = rows.size();
  std::vector<double> f1, em, em_strict, queries, seconds;
  std::vector<double> bleu, rouge, sim, mod, ppl;
  for (const ExampleRecord& r : rows) {
    if (r.errored) {
      ++agg.n_errored;
      continue;
    }
    f1.push_back(r.f1);
    em.push_back(r.em);
    em_strict.push_back(r.em_strict);
    queries.push_back(static_cast<double>(r.outcome.queries_used));
    seconds.push_back(r.outcome.elapsed.count());
    if (!r.outcome.success) continue;
    ++agg.n_success;
    if (r.bleu1) bleu.push_back(*r.bleu1);
    if (r.rouge1) rouge.push_back(*r.rouge1);
    if (r.sim) sim.push_back(*r.sim);
    if (r.mod_rate) mod.push_back(*r.mod_rate);
    if (r.ppl) ppl.push_back(*r.ppl);
  }
  const std::size_t ok = agg.n_examples - agg.n_errored;
  agg.success_rate = ok ? 100.0 * static_cast<double>(agg.n_success) / ok : 0.0;
  agg.queries_per_sample = mean(queries);

  MetricReport& m = agg.metrics;
  m.f1 = 100.0 * mean(f1);
  m.em = 100.0 * mean(em);
  m.em_strict = 100.0 * mean(em_strict);
  // With no successful attack the output contexts are the originals.
  m.bleu1 = bleu.empty() ? 100.0 : 100.0 * mean(bleu);
  m.rouge1 = rouge.empty() ? 100.0 : 100.0 * mean(rouge);
  m.sim = sim.empty() ? 100.0 : 100.0 * mean(sim);
  m.mod_rate = mod.empty() ? 0.0 : 100.0 * mean(mod);
  if (!ppl.empty()) m.ppl = mean(ppl);
  if (ok) m.seconds_per_sample = mean(seconds);
  return agg;
}

CampaignResult run_campaign(const std::vector<QAExample>& dataset,
                            const AttackConfig& config, const ModelGateway& gateway,
                            std::size_t workers) {
  if (dataset.empty()) throw UsageError("run_campaign: dataset is empty");
  workers = std::clamp<std::size_t>(workers, 1, dataset.size());
  const auto started = std::chrono::steady_clock::now();

  Collector collector(dataset.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> unreachable_count{0};
  auto work = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      bool unreachable = false;
      collector.put(i, attack_one(dataset[i], config, gateway, unreachable));
      if (unreachable) ++unreachable_count;
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  CampaignResult result;
  result.config = config;
  result.workers = workers;
  result.per_example = collector.take();
  result.aggregate = aggregate(result.per_example);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::size_t errored = result.aggregate.n_errored;
  if (2 * errored > dataset.size()) {
    const ExampleRecord* first = nullptr;
    for (const ExampleRecord& r : result.per_example) {
      if (r.errored) {
        first = &r;
        break;
      }
    }
    throw CampaignError(std::to_string(errored) + " of " +
                            std::to_string(dataset.size()) +
                            " examples failed; first error: " + first->error,
                        unreachable_count.load() == errored);
  }
  return result;
}

SweepAxis parse_sweep_axis(std::string_view tag) {
  if (tag == "top_k") return SweepAxis::kTopK;
  if (tag == "d") return SweepAxis::kD;
  if (tag == "mode") return SweepAxis::kMode;
  throw UsageError("unknown sweep axis '" + std::string(tag) +
                   "' (expected top_k, d or mode)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kTopK:
      return "top_k";
    case SweepAxis::kD:
      return "d";
    case SweepAxis::kMode:
      return "mode";
  }
  return "top_k";
}

std::vector<SweepPoint> sweep(const std::vector<QAExample>& dataset,
                              const AttackConfig& base, SweepAxis axis,
                              const std::vector<std::string>& values,
                              const ModelGateway& gateway, std::size_t workers) {
  if (values.empty()) throw UsageError("sweep: no axis values given");
  std::vector<AttackConfig> configs;
  for (const std::string& v : values) {
    AttackConfig c = base;
    if (axis == SweepAxis::kMode) {
      c.mode = parse_ranking_mode(v);
    } else {
      std::size_t parsed = 0;
      long n = -1;
      try {
        n = std::stol(v, &parsed);
      } catch (const std::exception&) {
      }
      if (n < 0 || parsed != v.size()) {
        throw UsageError("sweep value '" + v + "' is not a non-negative integer");
      }
      (axis == SweepAxis::kTopK ? c.top_k : c.d) = static_cast<std::size_t>(n);
    }
    configs.push_back(c);
  }
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({values[i], run_campaign(dataset, configs[i], gateway, workers)});
  }
  return out;
}

namespace {

long char_index_of(std::string_view haystack, std::string_view needle) {
  const std::size_t pos = haystack.find(needle);
  if (pos == std::string_view::npos) return -1;
  return static_cast<long>(utf8::length(haystack.substr(0, pos)));
}

}  // namespace

RetrainExport export_retraining_set(const std::vector<QAExample>& train,
                                    const std::vector<ExampleRecord>& outcomes,
                                    double proportion, std::uint64_t seed) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw UsageError("proportion must lie in [0, 1]");
  }
  std::map<std::string, const QAExample*> by_id;
  for (const QAExample& ex : train) by_id.emplace(ex.id, &ex);

  RetrainExport out;
  std::vector<QAExample> usable;
  for (const ExampleRecord& r : outcomes) {
    if (r.errored || !r.outcome.success || !r.outcome.best) continue;
    auto it = by_id.find(r.example_id);
    if (it == by_id.end()) continue;
    QAExample adv = *it->second;
    adv.id += "#adv";
    adv.context = r.outcome.best->text;
    adv.answer_starts.clear();
    bool found = false;
    for (const std::string& ref : adv.references) {
      const long start = char_index_of(adv.context, ref);
      found = found || start >= 0;
      adv.answer_starts.push_back(start);
    }
    if (!found) {
      ++out.n_excluded;
      continue;
    }
    usable.push_back(std::move(adv));
  }

  const auto wanted = static_cast<std::size_t>(
      std::llround(proportion * static_cast<double>(train.size())));
  if (wanted > usable.size()) {
    throw Error("retraining export shortfall: need " + std::to_string(wanted) +
                " successful adversarial examples, have " +
                std::to_string(usable.size()) + " usable (" +
                std::to_string(out.n_excluded) + " excluded)");
  }
  std::vector<QAExample> picked;
  std::mt19937_64 rng(seed);
  std::sample(usable.begin(), usable.end(), std::back_inserter(picked), wanted, rng);

  out.document = to_squad_v1(train);
  nlohmann::json& paragraphs = out.document["data"][0]["paragraphs"];
  for (const QAExample& adv : picked) {
    nlohmann::json doc = to_squad_v1({adv});
    nlohmann::json para = doc["data"][0]["paragraphs"][0];
    para["qas"][0]["augmented"] = true;
    paragraphs.push_back(std::move(para));
  }
  out.n_original = train.size();
  out.n_augmented = picked.size();
  return out;
}

TransferReport transfer_eval(const std::vector<ExampleRecord>& outcomes,
                             const std::vector<QAExample>& dataset,
                             const ModelGateway& target) {
  std::map<std::string, const QAExample*> by_id;
  for (const QAExample& ex : dataset) by_id.emplace(ex.id, &ex);

  TransferReport report;
  std::vector<double> f1, em, flips;
  for (const ExampleRecord& r : outcomes) {
    if (r.errored || !r.outcome.success || !r.outcome.best) continue;
    auto it = by_id.find(r.example_id);
    if (it == by_id.end()) {
      throw UsageError("transfer: example '" + r.example_id + "' not in dataset");
    }
    const QAExample& ex = *it->second;
    const AnswerReply before = target.answer(ex.question, ex.context, ex.kind);
    const AnswerReply after = target.answer(ex.question, r.outcome.best->text, ex.kind);
    f1.push_back(f1_score(after.answer_text, ex.references));
    em.push_back(exact_match(after.answer_text, ex.references));
    flips.push_back(answer_flipped(before, after) ? 1.0 : 0.0);
  }
  if (f1.empty()) throw Error("transfer: no successful adversarial examples to replay");
  report.n_adversarial = f1.size();
  report.f1 = 100.0 * mean(f1);
  report.em = 100.0 * mean(em);
  report.success_rate = 100.0 * mean(flips);
  return report;
}

std::vector<QAExample> examples_from_records(const std::vector<ExampleRecord>& rows) {
  std::vector<QAExample> out;
  out.reserve(rows.size());
  for (const ExampleRecord& r : rows) {
    QAExample ex;
    ex.id = r.example_id;
    ex.question = r.question;
    ex.context = r.context;
    ex.references = r.references;
    ex.answer_starts.assign(r.references.size(), -1);
    ex.unanswerable = r.references.empty();
    ex.kind = r.kind;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace advqa
