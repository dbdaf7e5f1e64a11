#include "kasper/brain.hpp"

#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace kasper::brain {

using nlohmann::json;

SkillRegistry SkillRegistry::defaults() {
  SkillRegistry r;
  r.templates = {
      "Here is an art and beauty tip for: {query}",
      "Here is the latest on business and finance for: {query}",
      "Opening communications for: {query}",
      "Sending this to your car: {query}",
      "Here is a food and drink suggestion for: {query}",
      "Let's play! Your request: {query}",
      "Here is a health and fitness note for: {query}",
      "Here is something matching your interests: {query}",
      "Here is what I know about: {query}",
      "Here is a lifestyle idea for: {query}",
      "Here is what is on screen for: {query}",
      "Playing: {query}",
      "Here are the headlines for: {query}",
      "Here is something funny for: {query}",
      "Let me work that out: {query}",
      "Noted. Your task: {query}",
      "Added to your shopping list: {query}",
      "Here is what your circle is up to: {query}",
      "Here is the sports update for: {query}",
      "Here is your route for: {query}",
      "Running the utility for: {query}",
      "Here is the weather for: {query}",
  };
  return r;
}

void SkillRegistry::load_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw intent::IntentError("cannot open skill override file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw intent::MalformedLine(path, line_no, "missing tab separator");
    }
    int idx = intent::class_index(line.substr(0, tab));
    if (idx < 0) throw intent::MalformedLine(path, line_no, "unknown class label");
    templates[static_cast<std::size_t>(idx)] = line.substr(tab + 1);
  }
}

std::string route(int intent_class, const std::string& text, const SkillRegistry& registry) {
  if (intent_class < 0 || intent_class >= intent::kNumClasses) {
    throw intent::IntentError("intent class out of range");
  }
  std::string out = registry.templates[static_cast<std::size_t>(intent_class)];
  const std::string placeholder = "{query}";
  std::size_t pos = 0;
  while ((pos = out.find(placeholder, pos)) != std::string::npos) {
    out.replace(pos, placeholder.size(), text);
    pos += text.size();
  }
  return out;
}

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

QueryResponse handle_query(const std::string& text, const intent::ModelBundle* bundle,
                           const SkillRegistry& registry, const std::string& algo) {
  if (!bundle) throw QueryError(503, "no checkpoint loaded");
  const std::string query = trimmed(text);
  if (query.empty()) throw QueryError(400, "empty query text");
  if (!algo.empty() && !intent::is_known_algorithm(algo)) {
    throw QueryError(400, "unknown algorithm: " + algo);
  }

  intent::Prediction pred;
  try {
    pred = intent::classify_with(*bundle, algo, query);
  } catch (const intent::AlgorithmUnavailable& e) {
    throw QueryError(400, e.what());
  }

  QueryResponse qr;
  qr.intent = std::string(intent::class_label(pred.argmax));
  qr.confidence = pred.confidence;
  qr.response = route(pred.argmax, query, registry);
  qr.classifier = algo.empty() ? bundle->default_algo : algo;
  return qr;
}

InProcessBrain::InProcessBrain(std::shared_ptr<const intent::ModelBundle> bundle,
                               SkillRegistry registry)
    : bundle_(std::move(bundle)), registry_(std::move(registry)) {}

QueryResponse InProcessBrain::query(const std::string& text, const std::string& algo) {
  return handle_query(text, bundle_.get(), registry_, algo);
}

HttpBrain::HttpBrain(std::string base_url) : base_url_(std::move(base_url)) {}

QueryResponse HttpBrain::query(const std::string& text, const std::string& algo) {
  httplib::Client client(base_url_);
  client.set_read_timeout(30, 0);
  std::string path = "/query";
  if (!algo.empty()) path += "?algo=" + algo;
  json body = {{"text", text}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw QueryError(503, "brain unreachable at " + base_url_);
  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::exception&) {
    throw QueryError(res->status, "malformed brain response");
  }
  if (res->status != 200) {
    throw QueryError(res->status, parsed.value("error", "brain error"));
  }
  QueryResponse qr;
  qr.intent = parsed.at("intent").get<std::string>();
  qr.confidence = parsed.at("confidence").get<double>();
  qr.response = parsed.at("response").get<std::string>();
  qr.classifier = parsed.at("classifier").get<std::string>();
  return qr;
}

// ---- service ---------------------------------------------------------------

struct BrainService::Impl {
  httplib::Server server;
  std::thread worker;
  SkillRegistry registry;
  mutable std::mutex bundle_mu;
  std::shared_ptr<const intent::ModelBundle> bundle;

  std::shared_ptr<const intent::ModelBundle> snapshot() const {
    std::lock_guard<std::mutex> lock(bundle_mu);
    return bundle;
  }

  void wire_routes() {
    server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
      auto current = snapshot();
      try {
        json body = json::parse(req.body);
        if (!body.contains("text") || !body["text"].is_string()) {
          throw QueryError(400, "request body needs a string 'text' field");
        }
        const std::string algo = req.get_param_value("algo");
        QueryResponse qr =
            handle_query(body["text"].get<std::string>(), current.get(), registry, algo);
        json out = {{"intent", qr.intent},
                    {"confidence", qr.confidence},
                    {"response", qr.response},
                    {"classifier", qr.classifier}};
        res.set_content(out.dump(), "application/json");
      } catch (const QueryError& e) {
        res.status = e.http_status;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", std::string("bad json: ") + e.what()}}.dump(),
                        "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      if (snapshot()) {
        res.set_content(json{{"status", "ok"}}.dump(), "application/json");
      } else {
        res.status = 503;
        res.set_content(json{{"error", "no checkpoint loaded"}}.dump(), "application/json");
      }
    });
  }
};

BrainService::BrainService(SkillRegistry registry) : impl_(std::make_unique<Impl>()) {
  impl_->registry = std::move(registry);
  impl_->wire_routes();
}

BrainService::~BrainService() { stop(); }

void BrainService::set_bundle(std::shared_ptr<const intent::ModelBundle> bundle) {
  std::lock_guard<std::mutex> lock(impl_->bundle_mu);
  impl_->bundle = std::move(bundle);
}

int BrainService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw QueryError(500, "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw QueryError(500, "cannot bind " + host + ":" + std::to_string(port));
    }
  }
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void BrainService::run_blocking(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw QueryError(500, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void BrainService::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace kasper::brain
