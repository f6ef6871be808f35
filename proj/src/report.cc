#include "advqa/report.h"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "advqa/errors.h"

namespace advqa {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view tag) {
  if (tag == "json") return ReportFormat::kJson;
  if (tag == "csv") return ReportFormat::kCsv;
  if (tag == "md") return ReportFormat::kMarkdown;
  throw UsageError("unknown report format '" + std::string(tag) +
                   "' (expected json, csv or md)");
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json score_and_drop(double score) {
  return {{"score", score}, {"drop", 100.0 - score}};
}

json substitutions_to_json(const std::vector<Substitution>& subs) {
  json out = json::array();
  for (const Substitution& s : subs) {
    out.push_back({{"word_index", s.word_index},
                   {"original", s.original},
                   {"candidate", s.candidate},
                   {"mlm_score", s.mlm_score}});
  }
  return out;
}

json record_to_json(const ExampleRecord& r, bool timing) {
  const AttackOutcome& o = r.outcome;
  json j = {{"id", r.example_id},
            {"question", r.question},
            {"kind", std::string(to_string(r.kind))},
            {"references", r.references},
            {"context", r.context},
            {"status", r.errored ? "error" : "ok"},
            {"success", o.success},
            {"original_answer", o.original_answer},
            {"attacked_answer", o.attacked_answer ? json(*o.attacked_answer) : json()},
            {"gap", opt(o.gap)},
            {"queries_used", o.queries_used},
            {"adversarial_context", o.best ? json(o.best->text) : json()},
            {"substitutions", o.best ? substitutions_to_json(o.best->substitutions)
                                     : json::array()},
            {"metrics",
             {{"f1", r.f1},
              {"em", r.em},
              {"em_strict", r.em_strict},
              {"bleu1", opt(r.bleu1)},
              {"rouge1", opt(r.rouge1)},
              {"sim", opt(r.sim)},
              {"mod_rate", opt(r.mod_rate)},
              {"ppl", opt(r.ppl)}}}};
  if (r.errored) j["error"] = r.error;
  if (timing) j["seconds"] = o.elapsed.count();
  return j;
}

ExampleRecord record_from_json(const json& j) {
  ExampleRecord r;
  r.example_id = j.at("id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.kind = parse_query_kind(j.at("kind").get<std::string>());
  r.references = j.at("references").get<std::vector<std::string>>();
  r.context = j.at("context").get<std::string>();
  r.errored = j.at("status").get<std::string>() == "error";
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  AttackOutcome& o = r.outcome;
  o.success = j.at("success").get<bool>();
  o.original_answer = j.at("original_answer").get<std::string>();
  if (!j.at("attacked_answer").is_null()) {
    o.attacked_answer = j.at("attacked_answer").get<std::string>();
  }
  o.gap = opt_double(j, "gap");
  o.queries_used = j.at("queries_used").get<std::size_t>();
  if (!j.at("adversarial_context").is_null()) {
    CandidateContext c;
    c.text = j.at("adversarial_context").get<std::string>();
    for (const json& s : j.at("substitutions")) {
      c.substitutions.push_back({s.at("word_index").get<std::size_t>(),
                                 s.at("original").get<std::string>(),
                                 s.at("candidate").get<std::string>(),
                                 s.at("mlm_score").get<double>()});
    }
    o.best = std::move(c);
  }
  if (j.contains("seconds")) {
    o.elapsed = std::chrono::duration<double>(j.at("seconds").get<double>());
  }
  const json& m = j.at("metrics");
  r.f1 = m.at("f1").get<double>();
  r.em = m.at("em").get<double>();
  r.em_strict = m.at("em_strict").get<double>();
  r.bleu1 = opt_double(m, "bleu1");
  r.rouge1 = opt_double(m, "rouge1");
  r.sim = opt_double(m, "sim");
  r.mod_rate = opt_double(m, "mod_rate");
  r.ppl = opt_double(m, "ppl");
  return r;
}

json aggregate_to_json(const CampaignAggregate& a, bool timing) {
  const MetricReport& m = a.metrics;
  json j = {{"populations",
             {{"answer_metrics", "all"}, {"context_metrics", "successful"}}},
            {"n_examples", a.n_examples},
            {"n_errored", a.n_errored},
            {"n_success", a.n_success},
            {"success_rate", a.success_rate},
            {"queries_per_sample", a.queries_per_sample},
            {"f1", m.f1},
            {"em", m.em},
            {"em_strict", m.em_strict},
            {"bleu1", score_and_drop(m.bleu1)},
            {"rouge1", score_and_drop(m.rouge1)},
            {"sim", m.sim},
            {"mod_rate", m.mod_rate},
            {"ppl", opt(m.ppl)},
            {"gerr", opt(m.gerr)}};
  if (timing) j["seconds_per_sample"] = opt(m.seconds_per_sample);
  return j;
}

CampaignAggregate aggregate_from_json(const json& j) {
  CampaignAggregate a;
  a.n_examples = j.at("n_examples").get<std::size_t>();
  a.n_errored = j.at("n_errored").get<std::size_t>();
  a.n_success = j.at("n_success").get<std::size_t>();
  a.success_rate = j.at("success_rate").get<double>();
  a.queries_per_sample = j.at("queries_per_sample").get<double>();
  MetricReport& m = a.metrics;
  m.f1 = j.at("f1").get<double>();
  m.em = j.at("em").get<double>();
  m.em_strict = j.at("em_strict").get<double>();
  m.bleu1 = j.at("bleu1").at("score").get<double>();
  m.rouge1 = j.at("rouge1").at("score").get<double>();
  m.sim = j.at("sim").get<double>();
  m.mod_rate = j.at("mod_rate").get<double>();
  m.ppl = opt_double(j, "ppl");
  m.gerr = opt_double(j, "gerr");
  m.seconds_per_sample = opt_double(j, "seconds_per_sample");
  return a;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : ""; }

struct Column {
  const char* name;
  std::string (*cell)(const CampaignResult&);
};

const std::vector<Column>& summary_columns() {
  static const std::vector<Column> kColumns = {
      {"n_examples", [](const CampaignResult& r) { return std::to_string(r.aggregate.n_examples); }},
      {"n_success", [](const CampaignResult& r) { return std::to_string(r.aggregate.n_success); }},
      {"success_rate", [](const CampaignResult& r) { return num(r.aggregate.success_rate); }},
      {"f1", [](const CampaignResult& r) { return num(r.aggregate.metrics.f1); }},
      {"em", [](const CampaignResult& r) { return num(r.aggregate.metrics.em); }},
      {"em_strict", [](const CampaignResult& r) { return num(r.aggregate.metrics.em_strict); }},
      {"bleu1", [](const CampaignResult& r) { return num(r.aggregate.metrics.bleu1); }},
      {"bleu1_drop", [](const CampaignResult& r) { return num(100.0 - r.aggregate.metrics.bleu1); }},
      {"rouge1", [](const CampaignResult& r) { return num(r.aggregate.metrics.rouge1); }},
      {"rouge1_drop", [](const CampaignResult& r) { return num(100.0 - r.aggregate.metrics.rouge1); }},
      {"sim", [](const CampaignResult& r) { return num(r.aggregate.metrics.sim); }},
      {"mod_rate", [](const CampaignResult& r) { return num(r.aggregate.metrics.mod_rate); }},
      {"ppl", [](const CampaignResult& r) { return num(r.aggregate.metrics.ppl); }},
      {"queries_per_sample", [](const CampaignResult& r) { return num(r.aggregate.queries_per_sample); }},
  };
  return kColumns;
}

std::string render_csv(const CampaignResult& result) {
  std::ostringstream os;
  os << "id,status,success,original_answer,attacked_answer,gap,queries_used,"
        "n_substitutions,f1,em,em_strict,bleu1,rouge1,sim,mod_rate,ppl\n";
  for (const ExampleRecord& r : result.per_example) {
    const AttackOutcome& o = r.outcome;
    os << csv_field(r.example_id) << ',' << (r.errored ? "error" : "ok") << ','
       << (o.success ? 1 : 0) << ',' << csv_field(o.original_answer) << ','
       << csv_field(o.attacked_answer.value_or("")) << ',' << num(o.gap) << ','
       << o.queries_used << ',' << (o.best ? o.best->substitutions.size() : 0) << ','
       << num(r.f1) << ',' << num(r.em) << ',' << num(r.em_strict) << ','
       << num(r.bleu1) << ',' << num(r.rouge1) << ',' << num(r.sim) << ','
       << num(r.mod_rate) << ',' << num(r.ppl) << '\n';
  }
  return os.str();
}

std::string config_line(const AttackConfig& c) {
  std::ostringstream os;
  os << "top_k=" << c.top_k << " d=" << c.d << " mode=" << to_string(c.mode)
     << " strategy=" << to_string(c.strategy) << " signed_rbr=" << c.signed_rbr
     << " exclude_answer_words=" << c.exclude_answer_words
     << " early_stop=" << c.early_stop << " seed=" << c.seed;
  return os.str();
}

std::string render_markdown(const CampaignResult& result) {
  std::ostringstream os;
  os << "# Attack report\n\n`" << config_line(result.config) << "`\n\n"
     << "Answer metrics cover all examples; context metrics cover successful "
        "attacks only.\n\n| metric | value |\n|---|---|\n";
  for (const Column& c : summary_columns()) {
    os << "| " << c.name << " | " << c.cell(result) << " |\n";
  }
  if (result.timing_recorded && result.aggregate.metrics.seconds_per_sample) {
    os << "| seconds_per_sample | " << num(result.aggregate.metrics.seconds_per_sample)
       << " |\n";
  }
  return os.str();
}

}  // namespace

json to_json(const AttackConfig& c) {
  return {{"top_k", c.top_k},
          {"d", c.d},
          {"mode", std::string(to_string(c.mode))},
          {"strategy", std::string(to_string(c.strategy))},
          {"signed_rbr", c.signed_rbr},
          {"exclude_answer_words", c.exclude_answer_words},
          {"early_stop", c.early_stop},
          {"seed", c.seed}};
}

AttackConfig attack_config_from_json(const json& j) {
  AttackConfig c;
  c.top_k = j.at("top_k").get<std::size_t>();
  c.d = j.at("d").get<std::size_t>();
  c.mode = parse_ranking_mode(j.at("mode").get<std::string>());
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.signed_rbr = j.at("signed_rbr").get<bool>();
  c.exclude_answer_words = j.at("exclude_answer_words").get<bool>();
  c.early_stop = j.at("early_stop").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json to_json(const CampaignResult& result) {
  json rows = json::array();
  for (const ExampleRecord& r : result.per_example) {
    rows.push_back(record_to_json(r, result.timing_recorded));
  }
  json j = {{"config", to_json(result.config)},
            {"per_example", rows},
            {"aggregate", aggregate_to_json(result.aggregate, result.timing_recorded)}};
  if (result.timing_recorded) {
    j["wall_seconds"] = result.wall_seconds;
    j["workers"] = result.workers;
  }
  return j;
}

CampaignResult campaign_from_json(const json& j) {
  try {
    CampaignResult r;
    r.config = attack_config_from_json(j.at("config"));
    for (const json& row : j.at("per_example")) {
      r.per_example.push_back(record_from_json(row));
    }
    r.aggregate = aggregate_from_json(j.at("aggregate"));
    if (j.contains("wall_seconds")) {
      r.timing_recorded = true;
      r.wall_seconds = j.at("wall_seconds").get<double>();
      r.workers = j.at("workers").get<std::size_t>();
    }
    return r;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed campaign report: ") + e.what());
  }
}

CampaignResult load_campaign(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open report '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw UsageError("report '" + path + "' is not valid JSON: " + e.what());
  }
  return campaign_from_json(j);
}

std::string render(const CampaignResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return to_json(result).dump(2) + "\n";
    case ReportFormat::kCsv:
      return render_csv(result);
    case ReportFormat::kMarkdown:
      return render_markdown(result);
  }
  return {};
}

json sweep_to_json(SweepAxis axis, const std::vector<SweepPoint>& points) {
  json table = json::array();
  json campaigns = json::array();
  for (const SweepPoint& p : points) {
    json row = {{"axis", std::string(to_string(axis))}, {"value", p.value}};
    const json agg = aggregate_to_json(p.result.aggregate, p.result.timing_recorded);
    for (const auto& [k, v] : agg.items()) {
      if (k != "populations") row[k] = v;
    }
    table.push_back(std::move(row));
    campaigns.push_back(to_json(p.result));
  }
  return {{"axis", std::string(to_string(axis))}, {"table", table}, {"campaigns", campaigns}};
}

std::string render_sweep(SweepAxis axis, const std::vector<SweepPoint>& points,
                         ReportFormat format) {
  if (format == ReportFormat::kJson) return sweep_to_json(axis, points).dump(2) + "\n";
  const auto& cols = summary_columns();
  std::ostringstream os;
  if (format == ReportFormat::kCsv) {
    os << "axis,value";
    for (const Column& c : cols) os << ',' << c.name;
    os << '\n';
    for (const SweepPoint& p : points) {
      os << to_string(axis) << ',' << csv_field(p.value);
      for (const Column& c : cols) os << ',' << c.cell(p.result);
      os << '\n';
    }
    return os.str();
  }
  os << "| axis | value |";
  for (const Column& c : cols) os << ' ' << c.name << " |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) os << "---|";
  os << '\n';
  for (const SweepPoint& p : points) {
    os << "| " << to_string(axis) << " | " << p.value << " |";
    for (const Column& c : cols) os << ' ' << c.cell(p.result) << " |";
    os << '\n';
  }
  return os.str();
}

json to_json(const TransferReport& report) {
  return {{"n_adversarial", report.n_adversarial},
          {"f1", report.f1},
          {"em", report.em},
          {"success_rate", report.success_rate}};
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << contents;
}

}  // namespace advqa
