// advqa: attack campaigns, sweeps, dataset export and the mock model server.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advqa/conformance.h"
#include "advqa/corpus.h"
#include "advqa/errors.h"
#include "advqa/gateway_server.h"
#include "advqa/harness.h"
#include "advqa/mock_gateway.h"
#include "advqa/mockcorpus.h"
#include "advqa/remote_gateway.h"
#include "advqa/report.h"

namespace {

using namespace advqa;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitUnreachable = 3;
constexpr int kExitCampaign = 4;

struct GatewayOptions {
  std::string url;
  bool mock = false;
  std::string lexicon;
  int window = 2;
  int timeout_ms = 30000;
  int max_inflight = 8;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--gateway-url", url,
                    "Model gateway base URL (default: $ADVQA_GATEWAY_URL)");
    cmd->add_flag("--mock", mock, "Use the in-process mock model");
    cmd->add_option("--lexicon", lexicon,
                    "Synonym table for --mock (JSON map or corpus manifest)");
    cmd->add_option("--window", window, "Relevance window of the mock model")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-inflight", max_inflight, "Concurrent request bound")
        ->check(CLI::PositiveNumber);
  }

  // Builds the gateway; remote gateways must answer a health probe.
  std::unique_ptr<ModelGateway> open() const {
    if (mock) {
      SynonymTable table = lexicon.empty() ? SynonymTable::builtin()
                                           : SynonymTable::load(lexicon);
      return std::make_unique<MockGateway>(std::move(table), window);
    }
    std::string target = url;
    if (target.empty()) {
      if (const char* env = std::getenv("ADVQA_GATEWAY_URL")) target = env;
    }
    if (target.empty()) {
      throw UsageError("no gateway: pass --gateway-url, set ADVQA_GATEWAY_URL or use --mock");
    }
    auto remote = std::make_unique<RemoteGateway>(
        target, std::chrono::milliseconds(timeout_ms), max_inflight);
    if (!remote->health().ok) throw GatewayUnreachable(target + " reports not ok");
    return remote;
  }
};

struct AttackOptions {
  std::string dataset;
  std::string format = "squad-v1";
  std::size_t top_k = 5;
  std::size_t d = 2;
  std::string mode = "hrf";
  std::string strategy = "greedy";
  bool signed_rbr = false;
  bool exclude_answer_words = false;
  bool no_early_stop = false;
  std::size_t workers = 4;
  std::uint64_t seed = 0;
  std::string report_out = "-";
  std::string report_format = "json";
  bool timing = false;
  std::optional<double> gerr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", format, "squad-v1 | squad-v2 | boolq-jsonl");
    cmd->add_option("--top-k", top_k, "Words to perturb");
    cmd->add_option("--d", d, "Synonyms per word");
    cmd->add_option("--mode", mode, "abr | rbr | hrf");
    cmd->add_option("--strategy", strategy, "single | greedy | joint");
    cmd->add_flag("--signed-rbr", signed_rbr, "Keep the sign of removal scores");
    cmd->add_flag("--exclude-answer-words", exclude_answer_words,
                  "Never substitute words of a reference answer");
    cmd->add_flag("--no-early-stop", no_early_stop, "Keep substituting after a flip");
    cmd->add_option("--workers", workers, "Examples attacked in parallel")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Seed recorded in the report");
    cmd->add_option("--report-out", report_out, "Report path, - for stdout");
    cmd->add_option("--report-format", report_format, "json | csv | md");
    cmd->add_flag("--timing", timing, "Include wall-clock fields in the report");
    cmd->add_option("--gerr", gerr, "Externally computed grammar error rate");
  }

  AttackConfig config() const {
    AttackConfig c;
    c.top_k = top_k;
    c.d = d;
    c.mode = parse_ranking_mode(mode);
    c.strategy = parse_strategy(strategy);
    c.signed_rbr = signed_rbr;
    c.exclude_answer_words = exclude_answer_words;
    c.early_stop = !no_early_stop;
    c.seed = seed;
    return c;
  }

  void finish(CampaignResult& result) const {
    result.timing_recorded = timing;
    if (gerr) result.aggregate.metrics.gerr = gerr;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_output(path, j.dump(2) + "\n");
}

int run_attack(const AttackOptions& opt, const GatewayOptions& gw_opt) {
  const AttackConfig config = opt.config();
  const ReportFormat format = parse_report_format(opt.report_format);
  const auto dataset = load_dataset(opt.dataset, parse_dataset_format(opt.format));
  const auto gateway = gw_opt.open();
  CampaignResult result = run_campaign(dataset, config, *gateway, opt.workers);
  opt.finish(result);
  write_output(opt.report_out, render(result, format));
  return kExitOk;
}

int run_sweep(const AttackOptions& opt, const GatewayOptions& gw_opt,
              const std::string& axis_tag, const std::string& values) {
  const AttackConfig config = opt.config();
  const SweepAxis axis = parse_sweep_axis(axis_tag);
  const ReportFormat format = parse_report_format(opt.report_format);
  const auto dataset = load_dataset(opt.dataset, parse_dataset_format(opt.format));
  const auto gateway = gw_opt.open();
  auto points = sweep(dataset, config, axis, split_list(values), *gateway, opt.workers);
  for (SweepPoint& p : points) opt.finish(p.result);
  write_output(opt.report_out, render_sweep(axis, points, format));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial attacks on question answering models"};
  app.require_subcommand(1);

  AttackOptions attack_opt;
  GatewayOptions attack_gw;
  CLI::App* attack_cmd = app.add_subcommand("attack", "Attack every example of a dataset");
  attack_opt.add_to(attack_cmd);
  attack_gw.add_to(attack_cmd);

  AttackOptions sweep_opt;
  GatewayOptions sweep_gw;
  std::string axis;
  std::string values;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "One campaign per value of an axis");
  sweep_opt.add_to(sweep_cmd);
  sweep_gw.add_to(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "top_k | d | mode")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated axis values")->required();

  std::string train_path, train_format = "squad-v1", outcomes_path, export_out = "-";
  double proportion = 0.0;
  std::uint64_t export_seed = 0;
  CLI::App* export_cmd =
      app.add_subcommand("export-retrain", "Mix successful adversaries into a training set");
  export_cmd->add_option("--train", train_path, "Training set")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--format", train_format, "Format of --train");
  export_cmd->add_option("--outcomes", outcomes_path, "JSON report of an attack run")
      ->required()
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--proportion", proportion, "Adversarial records per training record")
      ->required();
  export_cmd->add_option("--seed", export_seed, "Sampling seed");
  export_cmd->add_option("--out", export_out, "Output path, - for stdout");

  std::string transfer_outcomes, transfer_out = "-";
  GatewayOptions transfer_gw;
  CLI::App* transfer_cmd =
      app.add_subcommand("transfer", "Replay adversarial contexts against another model");
  transfer_cmd->add_option("--outcomes", transfer_outcomes, "JSON report of an attack run")
      ->required()
      ->check(CLI::ExistingFile);
  transfer_cmd->add_option("--out", transfer_out, "Output path, - for stdout");
  transfer_gw.add_to(transfer_cmd);

  std::string serve_host = "127.0.0.1", serve_lexicon;
  int serve_port = 8080, serve_window = 2;
  CLI::App* serve_cmd =
      app.add_subcommand("mock-serve", "Serve the mock model over the wire protocol");
  serve_cmd->add_option("--port", serve_port, "Port, 0 for any free port");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--lexicon", serve_lexicon, "Synonym table (JSON)");
  serve_cmd->add_option("--window", serve_window, "Relevance window")
      ->check(CLI::NonNegativeNumber);

  mockcorpus::SynthSpec spec;
  std::string corpus_out = "-", manifest_out;
  CLI::App* corpus_cmd =
      app.add_subcommand("mock-corpus", "Generate a synthetic corpus for the mock model");
  corpus_cmd->add_option("--out", corpus_out, "squad-v1 output, - for stdout");
  corpus_cmd->add_option("--manifest", manifest_out, "Ground truth and lexicon output");
  corpus_cmd->add_option("--n", spec.n_examples, "Number of examples");
  corpus_cmd->add_option("--seed", spec.seed, "Generator seed");
  corpus_cmd->add_option("--kind-mix", spec.kind_mix, "Fraction of Boolean examples")
      ->check(CLI::Range(0.0, 1.0));

  std::string conf_url, golden_path, record_out;
  bool schema_only = false;
  CLI::App* conf_cmd = app.add_subcommand(
      "conformance", "Check a gateway server against the golden protocol suite");
  conf_cmd->add_option("--gateway-url", conf_url, "Server base URL (default: $ADVQA_GATEWAY_URL)");
  conf_cmd->add_option("--golden", golden_path, "Golden suite")->required()->check(CLI::ExistingFile);
  conf_cmd->add_flag("--schema-only", schema_only, "Compare keys and types, not values");
  conf_cmd->add_option("--record", record_out, "Write observed responses as a new suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*attack_cmd) return run_attack(attack_opt, attack_gw);
    if (*sweep_cmd) return run_sweep(sweep_opt, sweep_gw, axis, values);

    if (*export_cmd) {
      const auto train = load_dataset(train_path, parse_dataset_format(train_format));
      const CampaignResult outcomes = load_campaign(outcomes_path);
      const RetrainExport ex =
          export_retraining_set(train, outcomes.per_example, proportion, export_seed);
      write_json(export_out, ex.document);
      std::cerr << "exported " << ex.n_original << " original + " << ex.n_augmented
                << " adversarial records (" << ex.n_excluded << " excluded)\n";
      return kExitOk;
    }

    if (*transfer_cmd) {
      const CampaignResult outcomes = load_campaign(transfer_outcomes);
      const auto gateway = transfer_gw.open();
      const TransferReport report = transfer_eval(
          outcomes.per_example, examples_from_records(outcomes.per_example), *gateway);
      write_json(transfer_out, to_json(report));
      return kExitOk;
    }

    if (*serve_cmd) {
      SynonymTable table = serve_lexicon.empty() ? SynonymTable::builtin()
                                                 : SynonymTable::load(serve_lexicon);
      const MockGateway mock(std::move(table), serve_window);
      GatewayServer server(mock);
      const int port = server.bind(serve_host, serve_port);
      if (port < 0) {
        std::cerr << "advqa: cannot bind " << serve_host << ":" << serve_port << "\n";
        return kExitUsage;
      }
      std::cout << "listening on " << serve_host << ":" << port << std::endl;
      server.serve();
      return kExitOk;
    }

    if (*corpus_cmd) {
      const mockcorpus::SynthCorpus corpus = mockcorpus::generate(spec);
      write_json(corpus_out, to_squad_v1(corpus.examples, "mockcorpus"));
      if (!manifest_out.empty()) write_json(manifest_out, mockcorpus::manifest(corpus, spec));
      return kExitOk;
    }

    if (*conf_cmd) {
      if (conf_url.empty()) {
        if (const char* env = std::getenv("ADVQA_GATEWAY_URL")) conf_url = env;
      }
      if (conf_url.empty()) throw UsageError("pass --gateway-url or set ADVQA_GATEWAY_URL");
      const auto cases = conformance::load_suite(golden_path);
      if (!record_out.empty()) {
        write_json(record_out,
                   conformance::suite_to_json(conformance::record_suite(conf_url, cases)));
        return kExitOk;
      }
      const auto mode =
          schema_only ? conformance::Mode::kSchemaOnly : conformance::Mode::kExact;
      std::size_t failed = 0;
      for (const auto& r : conformance::run_suite(conf_url, cases, mode)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed) std::cout << ": " << r.detail;
        std::cout << "\n";
        failed += r.passed ? 0 : 1;
      }
      std::cout << (cases.size() - failed) << "/" << cases.size() << " cases passed\n";
      return failed == 0 ? kExitOk : kExitCampaign;
    }
  } catch (const UsageError& e) {
    std::cerr << "advqa: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DatasetError& e) {
    std::cerr << "advqa: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GatewayUnreachable& e) {
    std::cerr << "advqa: gateway unreachable: " << e.what() << "\n";
    return kExitUnreachable;
  } catch (const CampaignError& e) {
    std::cerr << "advqa: campaign failed: " << e.what() << "\n";
    return e.unreachable() ? kExitUnreachable : kExitCampaign;
  } catch (const std::invalid_argument& e) {
    std::cerr << "advqa: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "advqa: " << e.what() << "\n";
    return kExitCampaign;
  }
  return kExitUsage;
}
