#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advqa/corpus.h"
#include "advqa/gateway.h"
#include "advqa/metrics.h"
#include "advqa/perturb.h"
#include "json.hpp"

namespace advqa {

// One row of a campaign: the example, what the attack did, and its metrics.
// Answer metrics are in [0, 1] and use the attacked answer on success, the
// unperturbed answer otherwise. Context metrics are only filled for
// successful attacks.
struct ExampleRecord {
  std::string example_id;
  std::string question;
  QueryKind kind = QueryKind::kInformative;
  std::vector<std::string> references;
  std::string context;

  bool errored = false;
  std::string error;

  AttackOutcome outcome;

  double f1 = 0.0;
  double em = 0.0;
  double em_strict = 0.0;
  std::optional<double> bleu1;
  std::optional<double> rouge1;
  std::optional<double> sim;
  std::optional<double> mod_rate;
  std::optional<double> ppl;
};

struct CampaignAggregate {
  // Answer metrics over every non-errored example; context metrics over
  // successful attacks only.
  MetricReport metrics;
  std::size_t n_examples = 0;
  std::size_t n_errored = 0;
  std::size_t n_success = 0;
  double success_rate = 0.0;  // percent of non-errored examples
  double queries_per_sample = 0.0;
};

struct CampaignResult {
  AttackConfig config;
  std::vector<ExampleRecord> per_example;
  CampaignAggregate aggregate;
  double wall_seconds = 0.0;
  std::size_t workers = 1;
  // Wall-clock fields are serialized only when set; they are the only
  // nondeterministic part of a report.
  bool timing_recorded = false;
};

// Attacks every example with a pool of `workers` threads. A failing example
// is recorded as errored; more than half errored raises CampaignError.
CampaignResult run_campaign(const std::vector<QAExample>& dataset,
                            const AttackConfig& config, const ModelGateway& gateway,
                            std::size_t workers = 1);

// Recomputes the aggregate from per_example rows.
CampaignAggregate aggregate(const std::vector<ExampleRecord>& rows);

enum class SweepAxis { kTopK, kD, kMode };

SweepAxis parse_sweep_axis(std::string_view tag);  // top_k | d | mode
std::string_view to_string(SweepAxis axis);

struct SweepPoint {
  std::string value;
  CampaignResult result;
};

// One campaign per axis value, everything else as in `base`.
std::vector<SweepPoint> sweep(const std::vector<QAExample>& dataset,
                              const AttackConfig& base, SweepAxis axis,
                              const std::vector<std::string>& values,
                              const ModelGateway& gateway, std::size_t workers = 1);

struct RetrainExport {
  nlohmann::json document;  // squad-v1 schema
  std::size_t n_original = 0;
  std::size_t n_augmented = 0;
  // Successful adversaries dropped because the answer text no longer occurs
  // in the perturbed context.
  std::size_t n_excluded = 0;
};

// All of `train` plus round(proportion * |train|) successful adversarial
// contexts drawn with `seed`. Adversarial records keep question and answers,
// get a recomputed answer_start and `"augmented": true`. Throws Error on a
// shortfall of usable adversaries.
RetrainExport export_retraining_set(const std::vector<QAExample>& train,
                                    const std::vector<ExampleRecord>& outcomes,
                                    double proportion, std::uint64_t seed);

struct TransferReport {
  std::size_t n_adversarial = 0;
  double f1 = 0.0;  // percent, target model on adversarial contexts
  double em = 0.0;
  // Percent of adversarial contexts that change the target model's answer
  // relative to its answer on the original context.
  double success_rate = 0.0;
};

// Replays the successful adversaries from `outcomes` against `target`.
// `dataset` supplies question, references and original context by id.
TransferReport transfer_eval(const std::vector<ExampleRecord>& outcomes,
                             const std::vector<QAExample>& dataset,
                             const ModelGateway& target);

// QAExamples reconstructed from campaign rows.
std::vector<QAExample> examples_from_records(const std::vector<ExampleRecord>& rows);

}  // namespace advqa
