#include "advqa/conformance.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "advqa/errors.h"
#include "httplib.h"

namespace advqa::conformance {

using nlohmann::json;

namespace {

constexpr double kTolerance = 1e-9;

struct Reply {
  int status = 0;
  std::string body;
};

class Endpoint {
 public:
  explicit Endpoint(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    const std::size_t slash =
        base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = base_url.substr(0, slash);
    if (slash != std::string::npos) prefix_ = base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  Reply post(const std::string& path, const std::string& body) const {
    httplib::Client client(host_);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    auto res = client.Post(prefix_ + path, body, "application/json");
    if (!res) {
      throw GatewayUnreachable("cannot reach " + host_ + prefix_ + path + ": " +
                               httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  std::string host_;
  std::string prefix_;
};

std::string request_body(const Case& c) {
  return c.raw_request.empty() ? c.request.dump() : c.raw_request;
}

bool is_success(int status) { return status >= 200 && status < 300; }

std::string type_name(const json& j) { return j.type_name(); }

std::string compare_at(const json& e, const json& a, Mode mode, const std::string& path) {
  const bool numbers = e.is_number() && a.is_number();
  if (!numbers && e.type() != a.type()) {
    return path + ": expected " + type_name(e) + ", got " + type_name(a);
  }
  if (e.is_object()) {
    for (const auto& [key, value] : e.items()) {
      if (!a.contains(key)) return path + "." + key + ": missing";
      std::string why = compare_at(value, a.at(key), mode, path + "." + key);
      if (!why.empty()) return why;
    }
    if (mode == Mode::kExact) {
      for (const auto& [key, value] : a.items()) {
        if (!e.contains(key)) return path + "." + key + ": unexpected key";
      }
    }
    return {};
  }
  if (e.is_array()) {
    if (mode == Mode::kExact && e.size() != a.size()) {
      return path + ": expected " + std::to_string(e.size()) + " elements, got " +
             std::to_string(a.size());
    }
    if (mode == Mode::kSchemaOnly) {
      if (e.empty()) return {};
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::string why = compare_at(e.front(), a[i], mode, path + "[" + std::to_string(i) + "]");
        if (!why.empty()) return why;
      }
      return {};
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
      std::string why = compare_at(e[i], a[i], mode, path + "[" + std::to_string(i) + "]");
      if (!why.empty()) return why;
    }
    return {};
  }
  if (mode == Mode::kSchemaOnly) return {};
  if (numbers) {
    const double x = e.get<double>();
    const double y = a.get<double>();
    if (std::abs(x - y) > kTolerance) {
      return path + ": expected " + e.dump() + ", got " + a.dump();
    }
    return {};
  }
  if (e != a) return path + ": expected " + e.dump() + ", got " + a.dump();
  return {};
}

}  // namespace

std::vector<Case> parse_suite(const json& doc) {
  if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array()) {
    throw UsageError("golden suite must be an object with a \"cases\" array");
  }
  std::vector<Case> out;
  for (const json& j : doc["cases"]) {
    try {
      Case c;
      c.name = j.at("name").get<std::string>();
      c.endpoint = j.at("endpoint").get<std::string>();
      if (j.contains("raw_request")) {
        c.raw_request = j.at("raw_request").get<std::string>();
      } else {
        c.request = j.at("request");
      }
      c.status = j.value("status", 200);
      if (j.contains("response")) c.response = j.at("response");
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw UsageError("golden case #" + std::to_string(out.size()) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Case> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open golden suite " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw UsageError("golden suite " + path + " is not valid JSON");
  return parse_suite(doc);
}

json suite_to_json(const std::vector<Case>& cases) {
  json arr = json::array();
  for (const Case& c : cases) {
    json j = {{"name", c.name}, {"endpoint", c.endpoint}};
    if (c.raw_request.empty()) {
      j["request"] = c.request;
    } else {
      j["raw_request"] = c.raw_request;
    }
    j["status"] = c.status;
    if (!c.response.is_null()) j["response"] = c.response;
    arr.push_back(std::move(j));
  }
  return {{"cases", arr}};
}

std::string compare(const json& expected, const json& actual, Mode mode) {
  return compare_at(expected, actual, mode, "$");
}

std::vector<CaseResult> run_suite(const std::string& base_url,
                                  const std::vector<Case>& cases, Mode mode) {
  const Endpoint endpoint(base_url);
  std::vector<CaseResult> results;
  for (const Case& c : cases) {
    CaseResult r{c.name, false, {}};
    const Reply reply = endpoint.post(c.endpoint, request_body(c));
    const json body = json::parse(reply.body, nullptr, false);
    if (reply.status != c.status) {
      r.detail = "status " + std::to_string(reply.status) + ", expected " +
                 std::to_string(c.status) + ": " + reply.body.substr(0, 200);
    } else if (body.is_discarded()) {
      r.detail = "response is not JSON";
    } else if (!is_success(c.status)) {
      if (!body.is_object() || !body.contains("error") || !body["error"].is_string()) {
        r.detail = "error response lacks an \"error\" string";
      }
    } else {
      r.detail = compare(c.response, body, mode);
    }
    r.passed = r.detail.empty();
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<Case> record_suite(const std::string& base_url, std::vector<Case> cases) {
  const Endpoint endpoint(base_url);
  for (Case& c : cases) {
    const Reply reply = endpoint.post(c.endpoint, request_body(c));
    c.status = reply.status;
    c.response = is_success(reply.status) ? json::parse(reply.body) : json();
  }
  return cases;
}

}  // namespace advqa::conformance
