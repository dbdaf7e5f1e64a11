#pragma once

// The "KASPER API": skill templates keyed by intent class, the query handler,
// and a local HTTP wrapper (POST /query, GET /health). Also the client side,
// so callers can talk to an in-process bundle or a remote service through one
// interface.

#include <array>
#include <memory>
#include <string>

#include "kasper/checkpoint.hpp"
#include "kasper/intent.hpp"

namespace kasper::brain {

struct SkillRegistry {
  // one response template per class, each with a {query} placeholder
  std::array<std::string, intent::kNumClasses> templates;

  static SkillRegistry defaults();
  // Override file: "<class-label>\t<template>" lines.
  void load_overrides(const std::string& path);
};

// Substitutes the utterance for every {query} in the class template.
std::string route(int intent_class, const std::string& text, const SkillRegistry& registry);

struct QueryResponse {
  std::string intent;      // class label
  double confidence = 0.0;
  std::string response;
  std::string classifier;  // cnn|rnn|knn|fuzzy
};

struct QueryError : std::runtime_error {
  QueryError(int status, const std::string& message)
      : std::runtime_error(message), http_status(status) {}
  int http_status;
};

// Classify + route. algo empty = bundle default. Throws QueryError(400) for
// empty/unknown input and QueryError(503) when no bundle is loaded.
QueryResponse handle_query(const std::string& text, const intent::ModelBundle* bundle,
                           const SkillRegistry& registry, const std::string& algo = "");

// ---- client interface -------------------------------------------------------

class BrainClient {
 public:
  virtual ~BrainClient() = default;
  virtual QueryResponse query(const std::string& text, const std::string& algo = "") = 0;
  virtual std::string endpoint() const = 0;
};

class InProcessBrain : public BrainClient {
 public:
  InProcessBrain(std::shared_ptr<const intent::ModelBundle> bundle, SkillRegistry registry);
  QueryResponse query(const std::string& text, const std::string& algo = "") override;
  std::string endpoint() const override { return "in-process"; }

 private:
  std::shared_ptr<const intent::ModelBundle> bundle_;
  SkillRegistry registry_;
};

class HttpBrain : public BrainClient {
 public:
  explicit HttpBrain(std::string base_url);  // e.g. "http://127.0.0.1:7431"
  QueryResponse query(const std::string& text, const std::string& algo = "") override;
  std::string endpoint() const override { return base_url_; }

 private:
  std::string base_url_;
};

// ---- service ---------------------------------------------------------------

inline constexpr const char* kDefaultBindHost = "127.0.0.1";
inline constexpr int kDefaultBindPort = 7431;

class BrainService {
 public:
  explicit BrainService(SkillRegistry registry = SkillRegistry::defaults());
  ~BrainService();

  // Atomic swap; in-flight requests finish on the bundle they started with.
  void set_bundle(std::shared_ptr<const intent::ModelBundle> bundle);

  // Starts serving on a background thread. port 0 picks a free port;
  // returns the bound port.
  int start(const std::string& host = kDefaultBindHost, int port = kDefaultBindPort);
  // Serves on the calling thread until stop() (CLI `serve` mode).
  void run_blocking(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kasper::brain
