// Acceptance run for criteria 1-8. Prints one PASS/FAIL line per criterion
// and exits non-zero if any fails.
//
//   acceptance <path to advqa binary> <golden suite>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "advqa/conformance.h"
#include "advqa/harness.h"
#include "advqa/metrics.h"
#include "advqa/mock_gateway.h"
#include "advqa/mockcorpus.h"
#include "advqa/perturb.h"
#include "advqa/ranking.h"
#include "advqa/report.h"
#include "advqa/utf8.h"
#include "test_support.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace advqa {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// A failed check. The message becomes the FAIL line's detail.
struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

mockcorpus::SynthCorpus corpus(std::size_t n, std::uint64_t seed, double kind_mix) {
  mockcorpus::SynthSpec spec;
  spec.n_examples = n;
  spec.seed = seed;
  spec.kind_mix = kind_mix;
  return mockcorpus::generate(spec);
}

// 1. Raw removal scores against deletion rescoring.
std::string rbr_oracle() {
  const auto start = Clock::now();
  const auto synth = corpus(100, 101, 0.0);
  const MockGateway mock(synth.lexicon);
  const testing::MockOracle oracle;
  std::size_t checked = 0;
  for (const QAExample& ex : synth.examples) {
    const auto ctx = tokenize(ex.context);
    const auto words = testing::word_texts(ctx);
    const auto q = testing::MockOracle::question_set(ex.question);
    const std::string answer = words[oracle.answer_index(q, words)];
    const Eigen::VectorXd raw = rbr_raw_scores(ex.question, ctx, answer, mock);
    require(raw.size() == static_cast<Eigen::Index>(words.size()), ex.id + ": size");
    const double base = oracle.score(q, words, answer);
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto rest = words;
      rest.erase(rest.begin() + static_cast<long>(i));
      const double expect = std::abs(base - oracle.score(q, rest, answer));
      const double got = raw(static_cast<Eigen::Index>(i));
      require(std::abs(got - expect) <= 1e-9,
              ex.id + " word " + std::to_string(i) + ": " + fmt(got) + " vs " + fmt(expect));
      ++checked;
    }
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 10.0, "took " + fmt(elapsed) + " s");
  return std::to_string(checked) + " words, " + fmt(elapsed) + " s";
}

// Independent answer/gap model for the exhaustive search.
struct Judged {
  std::string answer;
  double margin = 0.0;  // informative: answer log-prob; Boolean: yes - no
};

Judged judge(const QAExample& ex, const std::vector<std::string>& words,
             const testing::MockOracle& oracle) {
  const auto q = testing::MockOracle::question_set(ex.question);
  if (ex.kind == QueryKind::kBoolean) {
    const auto keys = testing::MockOracle::keys(words);
    const std::set<std::string> present(keys.begin(), keys.end());
    double hit = 0;
    for (const std::string& w : q) hit += present.count(w) ? 1.0 : 0.0;
    const double yes = q.empty() ? 0.5 : hit / static_cast<double>(q.size());
    return {yes >= 0.5 ? "yes" : "no", yes - (1.0 - yes)};
  }
  if (words.empty()) return {"", std::log(0.5)};
  const std::string a = words[oracle.answer_index(q, words)];
  return {a, oracle.score(q, words, a)};
}

// 2. SingleWord picks the max-gap flipping candidate of the full grid.
std::string single_word_optimality() {
  const auto synth = corpus(100, 202, 0.25);
  const MockGateway mock(synth.lexicon);
  const testing::MockOracle oracle;
  AttackConfig config;
  config.strategy = Strategy::kSingleWord;
  std::size_t successes = 0, grid = 0;
  for (const QAExample& ex : synth.examples) {
    const auto ctx = tokenize(ex.context);
    const auto words = testing::word_texts(ctx);
    const Judged base = judge(ex, words, oracle);
    const auto targets =
        rank_targets(ex, ctx, mock.answer(ex.question, ex.context, ex.kind), config, mock)
            .targets;

    bool found = false;
    double best_gap = 0.0;
    std::size_t best_index = 0;
    std::string best_word;
    for (std::size_t t : targets.indices) {
      const auto* lex = synth.lexicon.find(words[t]);
      const std::vector<std::string> pool =
          lex ? *lex : std::vector<std::string>{"entity", "item", "thing"};
      std::size_t used = 0;
      for (const std::string& syn : pool) {
        if (used == config.d) break;
        if (utf8::to_lower(syn) == utf8::to_lower(words[t])) continue;
        ++used;
        ++grid;
        auto perturbed = words;
        perturbed[t] = syn;
        const Judged j = judge(ex, perturbed, oracle);
        if (normalize_answer(j.answer) == normalize_answer(base.answer)) continue;
        const double gap = ex.kind == QueryKind::kBoolean
                               ? (base.answer == "yes" ? base.margin - j.margin
                                                       : j.margin - base.margin)
                               : j.margin - base.margin;
        if (!found || gap > best_gap) {
          found = true;
          best_gap = gap;
          best_index = t;
          best_word = syn;
        }
      }
    }

    const AttackOutcome got = attack(ex, config, mock);
    require(got.success == found, ex.id + ": success " + std::to_string(got.success) +
                                      " vs oracle " + std::to_string(found));
    if (!found) continue;
    ++successes;
    require(got.best && got.best->substitutions.size() == 1, ex.id + ": not one substitution");
    const Substitution& s = got.best->substitutions[0];
    require(s.word_index == best_index && s.candidate == best_word,
            ex.id + ": chose " + std::to_string(s.word_index) + "/" + s.candidate +
                ", oracle " + std::to_string(best_index) + "/" + best_word);
    require(got.gap && std::abs(*got.gap - best_gap) <= 1e-9,
            ex.id + ": gap " + fmt(got.gap.value_or(NAN)) + " vs " + fmt(best_gap));
  }
  return std::to_string(successes) + "/100 flipped, " + std::to_string(grid) +
         " candidates enumerated";
}

// 3. Ranking laws over random score vectors.
std::string ranking_invariants() {
  testing::Gen gen(303);
  const int kVectors = 1000;
  for (int iter = 0; iter < kVectors; ++iter) {
    const auto n = static_cast<Eigen::Index>(gen.between(1, 20));
    Eigen::VectorXd abr(n), raw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      abr(i) = gen.coin() ? static_cast<double>(gen.below(3)) : gen.unit();
      raw(i) = gen.coin() ? static_cast<double>(gen.below(3)) : gen.unit() * 4.0;
    }
    const WordScores s = fuse(min_max_normalize(abr), min_max_normalize(raw));
    require(s.fused.minCoeff() >= 0.0 && s.fused.maxCoeff() <= 2.0, "fused out of [0, 2]");

    std::vector<bool> mask(static_cast<std::size_t>(n));
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = gen.below(4) != 0;
      eligible += mask[i] ? 1 : 0;
    }
    const EligibilityFn pred = [&](std::size_t i) { return static_cast<bool>(mask[i]); };
    std::vector<std::size_t> previous;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(n) + 1; ++k) {
      const auto idx = top_k_select(s, k, pred).indices;
      require(idx.size() == std::min(k, eligible), "size != min(k, eligible)");
      for (std::size_t j = 0; j < idx.size(); ++j) {
        require(mask[idx[j]], "ineligible index selected");
        if (j > 0) {
          const double a = s.fused(static_cast<Eigen::Index>(idx[j - 1]));
          const double b = s.fused(static_cast<Eigen::Index>(idx[j]));
          require(a > b || (a == b && idx[j - 1] < idx[j]), "order or tie break violated");
        }
      }
      // Any unselected eligible word ranks below the last selected one.
      if (!idx.empty()) {
        const std::set<std::size_t> chosen(idx.begin(), idx.end());
        const double last = s.fused(static_cast<Eigen::Index>(idx.back()));
        for (std::size_t i = 0; i < mask.size(); ++i) {
          if (!mask[i] || chosen.count(i)) continue;
          const double v = s.fused(static_cast<Eigen::Index>(i));
          require(v < last || (v == last && i > idx.back()), "better word left out");
        }
      }
      require(std::equal(previous.begin(), previous.end(), idx.begin()), "prefix violated");
      previous = idx;
    }

    const double c = 0.05 + gen.unit() * 50.0;
    const WordScores scaled =
        fuse(min_max_normalize(abr), min_max_normalize((raw * c).eval()));
    require(top_k_select(scaled, 1).indices == top_k_select(s, 1).indices,
            "argmax moved under scaling by " + fmt(c));
  }
  return std::to_string(kVectors) + " vectors";
}

double counted_matches(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  std::vector<bool> used(ref.size(), false);
  double hits = 0;
  for (const std::string& h : hyp) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == h) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

// 4. Context metric oracles and answer metric fixtures.
std::string metric_oracles() {
  testing::Gen gen(404);
  for (int iter = 0; iter < 200; ++iter) {
    const auto orig = gen.words(gen.between(1, 25), 10);
    auto adv = orig;
    for (std::size_t i = gen.between(1, 4); i > 0; --i) {
      adv[gen.below(adv.size())] = "sub" + std::to_string(gen.below(3));
    }
    const double c = static_cast<double>(adv.size());
    const double r = static_cast<double>(orig.size());
    const std::string a = gen.sentence(adv, true);
    const std::string o = gen.sentence(orig, true);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    require(std::abs(bleu1(a, o) - counted_matches(adv, orig) / c * bp) <= 1e-12, "bleu1: " + a);
    require(std::abs(rouge1(a, o) - counted_matches(orig, adv) / r) <= 1e-12, "rouge1: " + a);
  }

  struct Fixture {
    std::string prediction;
    std::vector<std::string> references;
    double f1, em;
  };
  const std::vector<Fixture> fixtures = {
      {"The French crown", {"William I of Normandy"}, 0.0, 0.0},
      {"William I of Normandy", {"William I of Normandy"}, 1.0, 1.0},
      {"the French crown", {"French crown"}, 1.0, 1.0},
      {"French army", {"the French crown jewels"}, 0.4, 0.0},
      {"b b c", {"b c c"}, 2.0 / 3.0, 0.0},
      {"crown", {"throne", "French crown"}, 2.0 / 3.0, 0.0},
      {"Yes.", {"yes"}, 1.0, 1.0},
      {"no", {"yes"}, 0.0, 0.0},
      {"", {""}, 1.0, 1.0},
      {"", {"Normandy"}, 0.0, 0.0},
      {"an answer", {"answer"}, 1.0, 1.0},
      {"Rollo, of Normandy", {"Rollo"}, 0.5, 0.0},
  };
  for (const Fixture& f : fixtures) {
    require(f1_score(f.prediction, f.references) == f.f1 &&
                exact_match(f.prediction, f.references) == f.em,
            "fixture '" + f.prediction + "': f1 " + fmt(f1_score(f.prediction, f.references)));
  }
  return "200 pairs, " + std::to_string(fixtures.size()) + " fixtures";
}

struct CampaignRuns {
  std::vector<CampaignResult> all;
  double abr = 0, rbr = 0, hrf = 0;
  std::vector<double> by_top_k, by_d;
  double seconds = 0;
};

const CampaignRuns& default_campaigns() {
  static const CampaignRuns runs = [] {
    const auto start = Clock::now();
    CampaignRuns out;
    const auto synth = mockcorpus::generate(mockcorpus::SynthSpec{});
    const MockGateway mock(synth.lexicon);
    const auto run = [&](const AttackConfig& config) {
      out.all.push_back(run_campaign(synth.examples, config, mock));
      return out.all.back().aggregate.success_rate;
    };
    for (RankingMode mode : {RankingMode::kABR, RankingMode::kRBR, RankingMode::kHRF}) {
      AttackConfig config;
      config.mode = mode;
      const double rate = run(config);
      (mode == RankingMode::kABR ? out.abr : mode == RankingMode::kRBR ? out.rbr : out.hrf) =
          rate;
    }
    for (std::size_t k : {3, 5, 7, 10}) {
      AttackConfig config;
      config.top_k = k;
      out.by_top_k.push_back(k == 5 ? out.hrf : run(config));
    }
    for (std::size_t d : {1, 2, 3}) {
      AttackConfig config;
      config.d = d;
      out.by_d.push_back(d == 2 ? out.hrf : run(config));
    }
    out.seconds = seconds_since(start);
    return out;
  }();
  return runs;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : "/") + fmt(x);
  return out;
}

// 5. Mode ordering and budget trends on the default corpus.
std::string mode_ordering() {
  const CampaignRuns& r = default_campaigns();
  const std::string rates = "abr " + fmt(r.abr) + ", rbr " + fmt(r.rbr) + ", hrf " +
                            fmt(r.hrf) + "; top_k " + join(r.by_top_k) + "; d " + join(r.by_d);
  require(r.hrf >= r.abr - 2.0 && r.hrf >= r.rbr - 2.0, "mode ordering: " + rates);
  for (const auto* trend : {&r.by_top_k, &r.by_d}) {
    for (std::size_t i = 1; i < trend->size(); ++i) {
      require((*trend)[i] >= (*trend)[i - 1] - 2.0, "trend: " + rates);
    }
  }
  require(r.seconds < 120.0, "took " + fmt(r.seconds) + " s");
  return rates + " (" + fmt(r.seconds) + " s)";
}

// 6. Substitution budget and bleu floor on every successful outcome.
std::string modification_bound() {
  std::size_t checked = 0;
  for (const CampaignResult& c : default_campaigns().all) {
    const double k = static_cast<double>(c.config.top_k);
    for (const ExampleRecord& row : c.per_example) {
      if (!row.outcome.success) continue;
      const double n = static_cast<double>(tokenize(row.context).size());
      const auto& subs = row.outcome.best->substitutions;
      const std::string where = row.example_id + " (top_k " + fmt(k) + ")";
      require(subs.size() <= c.config.top_k, where + ": too many substitutions");
      require(*row.mod_rate <= k / n + 1e-12, where + ": mod_rate " + fmt(*row.mod_rate));
      const double b = bleu1(row.outcome.best->text, row.context);
      require(b >= 1.0 - k / n - 1e-9, where + ": bleu1 " + fmt(b));
      ++checked;
    }
  }
  require(checked > 0, "no successful outcomes");
  return std::to_string(checked) + " successful outcomes";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "'" + cli + "' " + args;
  const int rc = std::system(cmd.c_str());
  require(rc == 0, "exit status " + std::to_string(rc) + ": " + cmd);
}

// 7. Byte-identical CLI reports and the retraining export count.
std::string determinism(const std::string& cli, const fs::path& dir) {
  const fs::path data = dir / "corpus.json", manifest = dir / "manifest.json";
  run_cli(cli, "mock-corpus --n 100 --seed 7 --out '" + data.string() + "' --manifest '" +
                   manifest.string() + "'");
  const std::string attack = "attack --mock --lexicon '" + manifest.string() + "' --dataset '" +
                             data.string() + "' --seed 7 --report-out ";
  const fs::path a = dir / "a.json", b = dir / "b.json";
  run_cli(cli, attack + "'" + a.string() + "'");
  run_cli(cli, attack + "'" + b.string() + "' --workers 1");
  const std::string first = slurp(a);
  require(!first.empty() && first == slurp(b), "reports differ");

  const json report = json::parse(first);
  const std::size_t successes = report["aggregate"]["n_success"].get<std::size_t>();
  require(successes >= 30, "only " + std::to_string(successes) + " successes");
  const fs::path mixed = dir / "retrain.json";
  run_cli(cli, "export-retrain --train '" + data.string() + "' --outcomes '" + a.string() +
                   "' --proportion 0.3 --seed 7 --out '" + mixed.string() + "' 2>/dev/null");
  const json exported = json::parse(slurp(mixed));
  std::size_t records = 0, flagged = 0;
  for (const json& article : exported["data"]) {
    for (const json& p : article["paragraphs"]) {
      for (const json& qa : p["qas"]) {
        ++records;
        flagged += qa.value("augmented", false) ? 1 : 0;
      }
    }
  }
  require(records == 130 && flagged == 30,
          std::to_string(records) + " records, " + std::to_string(flagged) + " flagged");
  return std::to_string(first.size()) + "-byte reports, " + std::to_string(successes) +
         " successes, 130 records / 30 flagged";
}

// Child process running `advqa mock-serve --port 0`.
class ServerProcess {
 public:
  explicit ServerProcess(const std::string& cli) {
    int fds[2];
    require(pipe(fds) == 0, "pipe failed");
    pid_ = fork();
    require(pid_ >= 0, "fork failed");
    if (pid_ == 0) {
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      close(fds[1]);
      execl(cli.c_str(), cli.c_str(), "mock-serve", "--port", "0", static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    std::string line;
    char ch;
    while (read(fds[0], &ch, 1) == 1 && ch != '\n') line += ch;
    close(fds[0]);
    const auto colon = line.rfind(':');
    require(line.rfind("listening on ", 0) == 0 && colon != std::string::npos,
            "unexpected banner '" + line + "'");
    url_ = "http://127.0.0.1:" + line.substr(colon + 1);
  }
  ~ServerProcess() {
    if (pid_ > 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, nullptr, 0);
    }
  }
  const std::string& url() const { return url_; }

 private:
  pid_t pid_ = -1;
  std::string url_;
};

// 8. The served mock against the recorded suite.
std::string golden_suite(const std::string& cli, const std::string& golden) {
  const auto cases = conformance::load_suite(golden);
  std::set<std::string> endpoints;
  for (const auto& c : cases) endpoints.insert(c.endpoint);
  require(endpoints.size() == 7, std::to_string(endpoints.size()) + " endpoints in suite");
  const ServerProcess server(cli);
  std::size_t passed = 0;
  std::string first_failure;
  for (const auto& r : conformance::run_suite(server.url(), cases, conformance::Mode::kExact)) {
    if (r.passed) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = r.name + ": " + r.detail;
    }
  }
  require(passed == cases.size(), std::to_string(passed) + "/" + std::to_string(cases.size()) +
                                      " passed; " + first_failure);
  return std::to_string(passed) + "/" + std::to_string(cases.size()) + " cases, 7 endpoints";
}

}  // namespace
}  // namespace advqa

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <advqa binary> <golden suite>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::string golden = argv[2];
  const fs::path dir = fs::temp_directory_path() / ("advqa-acceptance-" + std::to_string(getpid()));
  fs::create_directories(dir);

  using advqa::Failure;
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"rbr oracle equivalence", advqa::rbr_oracle},
      {"single-word selection optimality", advqa::single_word_optimality},
      {"ranking invariants", advqa::ranking_invariants},
      {"metric oracles", advqa::metric_oracles},
      {"mode ordering at mock scale", advqa::mode_ordering},
      {"modification bound", advqa::modification_bound},
      {"determinism", [&] { return advqa::determinism(cli, dir); }},
      {"protocol golden suite", [&] { return advqa::golden_suite(cli, golden); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string verdict, detail;
    try {
      detail = criteria[i].second();
      verdict = "PASS";
    } catch (const Failure& f) {
      verdict = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    failed += verdict == "FAIL" ? 1 : 0;
    std::cout << verdict << " " << (i + 1) << " " << criteria[i].first << ": " << detail
              << std::endl;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return failed == 0 ? 0 : 1;
}
