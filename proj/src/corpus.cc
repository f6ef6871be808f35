#include "advqa/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "advqa/errors.h"
#include "advqa/utf8.h"

namespace advqa {

using nlohmann::json;

std::string_view to_string(QueryKind kind) {
  return kind == QueryKind::kBoolean ? "boolean" : "informative";
}

QueryKind parse_query_kind(std::string_view tag) {
  if (tag == "boolean") return QueryKind::kBoolean;
  if (tag == "informative") return QueryKind::kInformative;
  throw UsageError("unknown query kind '" + std::string(tag) + "'");
}

DatasetFormat parse_dataset_format(std::string_view tag) {
  if (tag == "squad-v1") return DatasetFormat::kSquadV1;
  if (tag == "squad-v2") return DatasetFormat::kSquadV2;
  if (tag == "boolq-jsonl") return DatasetFormat::kBoolqJsonl;
  throw UsageError("unknown dataset format '" + std::string(tag) +
                   "' (expected squad-v1, squad-v2 or boolq-jsonl)");
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

const json& require(const json& obj, const char* field,
                    const std::string& locus) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw DatasetError(locus, std::string("missing required field '") + field +
                                  "'");
  }
  return obj.at(field);
}

std::string require_string(const json& obj, const char* field,
                           const std::string& locus) {
  const json& v = require(obj, field, locus);
  if (!v.is_string()) {
    throw DatasetError(locus, std::string("field '") + field +
                                  "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<QAExample> parse_squad(const json& doc, bool v2) {
  std::vector<QAExample> out;
  const json& data = require(doc, "data", "<root>");
  if (!data.is_array()) throw DatasetError("<root>", "'data' must be an array");
  for (std::size_t di = 0; di < data.size(); ++di) {
    const std::string dloc = "data[" + std::to_string(di) + "]";
    const json& paragraphs = require(data[di], "paragraphs", dloc);
    for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
      const std::string ploc = dloc + ".paragraphs[" + std::to_string(pi) + "]";
      const std::string context = require_string(paragraphs[pi], "context", ploc);
      if (blank(context)) throw DatasetError(ploc, "field 'context' is empty");
      const json& qas = require(paragraphs[pi], "qas", ploc);
      for (std::size_t qi = 0; qi < qas.size(); ++qi) {
        const std::string qloc = ploc + ".qas[" + std::to_string(qi) + "]";
        const json& qa = qas[qi];
        QAExample ex;
        ex.id = require_string(qa, "id", qloc);
        ex.question = require_string(qa, "question", qloc);
        ex.context = context;
        ex.kind = QueryKind::kInformative;
        if (v2 && qa.value("is_impossible", false)) {
          ex.unanswerable = true;
          out.push_back(std::move(ex));
          continue;
        }
        const json& answers = require(qa, "answers", qloc);
        if (!answers.is_array() || answers.empty()) {
          throw DatasetError(qloc, "field 'answers' must be a non-empty array");
        }
        for (std::size_t ai = 0; ai < answers.size(); ++ai) {
          const std::string aloc = qloc + ".answers[" + std::to_string(ai) + "]";
          ex.references.push_back(require_string(answers[ai], "text", aloc));
          const json& start = answers[ai].contains("answer_start")
                                  ? answers[ai].at("answer_start")
                                  : json();
          ex.answer_starts.push_back(start.is_number_integer()
                                         ? start.get<long>()
                                         : -1L);
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

std::vector<QAExample> parse_boolq(std::string_view contents) {
  std::vector<QAExample> out;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string loc = "line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(loc, std::string("malformed JSON: ") + e.what());
    }
    QAExample ex;
    ex.kind = QueryKind::kBoolean;
    ex.question = require_string(rec, "question", loc);
    ex.context = require_string(rec, "passage", loc);
    if (blank(ex.context)) throw DatasetError(loc, "field 'passage' is empty");
    const json& answer = require(rec, "answer", loc);
    if (!answer.is_boolean()) {
      throw DatasetError(loc, "field 'answer' must be a boolean");
    }
    ex.references = {answer.get<bool>() ? "yes" : "no"};
    ex.answer_starts = {-1};
    if (rec.contains("id") && rec["id"].is_string()) {
      ex.id = rec["id"].get<std::string>();
    } else if (rec.contains("idx") && rec["idx"].is_number_integer()) {
      ex.id = "boolq-" + std::to_string(rec["idx"].get<long>());
    } else {
      ex.id = "boolq-" + std::to_string(line_no);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

std::vector<QAExample> parse_dataset(std::string_view contents,
                                     DatasetFormat format) {
  if (format == DatasetFormat::kBoolqJsonl) return parse_boolq(contents);
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    throw DatasetError("byte " + std::to_string(e.byte),
                       std::string("malformed JSON: ") + e.what());
  }
  return parse_squad(doc, format == DatasetFormat::kSquadV2);
}

std::vector<QAExample> load_dataset(const std::string& path,
                                    DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open dataset '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str(), format);
  } catch (const DatasetError& e) {
    throw DatasetError(path + ":" + e.locus(), e.detail());
  }
}

json to_squad_v1(const std::vector<QAExample>& examples,
                 std::string_view title) {
  json paragraphs = json::array();
  std::map<std::string, std::size_t> by_context;
  for (const QAExample& ex : examples) {
    auto [it, inserted] = by_context.emplace(ex.context, paragraphs.size());
    if (inserted) {
      paragraphs.push_back({{"context", ex.context}, {"qas", json::array()}});
    }
    json answers = json::array();
    for (std::size_t i = 0; i < ex.references.size(); ++i) {
      const long start = i < ex.answer_starts.size() ? ex.answer_starts[i] : -1;
      answers.push_back({{"answer_start", start}, {"text", ex.references[i]}});
    }
    json qa = {{"id", ex.id}, {"question", ex.question}, {"answers", answers}};
    if (ex.unanswerable) qa["is_impossible"] = true;
    paragraphs[it->second]["qas"].push_back(std::move(qa));
  }
  return json{{"version", "1.1"},
              {"data", json::array({{{"title", std::string(title)},
                                     {"paragraphs", paragraphs}}})}};
}

TokenizedContext tokenize(std::string_view text) {
  TokenizedContext out;
  out.source = std::string(text);
  const std::u32string cps = utf8::to_u32(text);
  out.char_length = cps.size();

  // Byte offset of every character, plus the end.
  std::vector<std::size_t> bytes(cps.size() + 1, 0);
  {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      bytes[i] = pos;
      utf8::decode(text, pos);
    }
    bytes[cps.size()] = text.size();
  }

  auto emit = [&](std::size_t b, std::size_t e, bool is_word) {
    Span s;
    s.start = b;
    s.end = e;
    s.is_word = is_word;
    s.byte_start = bytes[b];
    s.byte_end = bytes[e];
    s.text = out.source.substr(s.byte_start, s.byte_end - s.byte_start);
    out.all_spans.push_back(s);
    if (is_word) out.words.push_back(std::move(s));
  };

  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    if (utf8::is_space(cps[i])) {
      ++i;
      continue;
    }
    if (utf8::is_alnum(cps[i])) {
      std::size_t j = i + 1;
      while (j < n) {
        if (utf8::is_alnum(cps[j])) {
          ++j;
        } else if ((utf8::is_apostrophe(cps[j]) || utf8::is_hyphen(cps[j])) &&
                   j + 1 < n && utf8::is_alnum(cps[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      emit(i, j, true);
      i = j;
    } else {
      std::size_t j = i + 1;
      while (j < n && !utf8::is_space(cps[j]) && !utf8::is_alnum(cps[j])) ++j;
      emit(i, j, false);
      i = j;
    }
  }
  return out;
}

std::string splice(const TokenizedContext& ctx, std::size_t word_index,
                   std::string_view replacement) {
  if (word_index >= ctx.words.size()) {
    throw std::out_of_range("splice: word index " + std::to_string(word_index) +
                            " out of range");
  }
  const Span& w = ctx.words[word_index];
  std::string out = ctx.source;
  out.replace(w.byte_start, w.byte_end - w.byte_start, replacement);
  return out;
}

std::string splice(
    const TokenizedContext& ctx,
    const std::vector<std::pair<std::size_t, std::string>>& replacements) {
  std::vector<std::pair<std::size_t, std::string>> sorted = replacements;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::string out = ctx.source;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& [index, text] = sorted[i];
    if (index >= ctx.words.size()) {
      throw std::out_of_range("splice: word index " + std::to_string(index) +
                              " out of range");
    }
    if (i > 0 && sorted[i - 1].first == index) {
      throw std::invalid_argument("splice: duplicate word index " +
                                  std::to_string(index));
    }
    const Span& w = ctx.words[index];
    out.replace(w.byte_start, w.byte_end - w.byte_start, text);
  }
  return out;
}

std::string delete_word(const TokenizedContext& ctx, std::size_t word_index) {
  if (word_index >= ctx.words.size()) {
    throw std::out_of_range("delete_word: word index " +
                            std::to_string(word_index) + " out of range");
  }
  const Span& w = ctx.words[word_index];
  const std::string& src = ctx.source;
  std::size_t begin = w.byte_start;
  std::size_t end = w.byte_end;
  if (end < src.size()) {
    std::size_t pos = end;
    if (utf8::is_space(utf8::decode(src, pos))) {
      return src.substr(0, begin) + src.substr(pos);
    }
  }
  if (begin > 0) {
    std::size_t prev = begin - 1;
    while (prev > 0 && (static_cast<unsigned char>(src[prev]) & 0xC0) == 0x80) {
      --prev;
    }
    std::size_t pos = prev;
    if (utf8::is_space(utf8::decode(src, pos))) begin = prev;
  }
  return src.substr(0, begin) + src.substr(end);
}

std::string normalize_answer(std::string_view text) {
  // Lowercase and drop punctuation; whitespace becomes a separator.
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::decode(text, pos);
    if (utf8::is_space(cp)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else if (utf8::is_alnum(cp)) {
      utf8::append(cur, utf8::to_lower(cp));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));

  std::string out;
  for (const std::string& t : tokens) {
    if (t == "a" || t == "an" || t == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in(normalize_answer(text));
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace advqa
