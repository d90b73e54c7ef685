// Copyright 2026 The Presque Authors.
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

#pragma once

#include <algorithm>
#include <cstdlib>
#include <future>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "presque/error.hpp"
#include "presque/scorer.hpp"

namespace presque {

struct RemoteScorerConfig {
  std::string url;             // e.g. http://localhost:8000
  int timeout_seconds = 60;
  std::size_t max_batch = 64;  // pairs per request
  std::size_t parallelism = 4; // concurrent requests per score_batch call
};

// URL from PRESQUE_SCORER_URL, or empty when unset.
inline std::string scorer_url_from_env() {
  const char* v = std::getenv("PRESQUE_SCORER_URL");
  return v ? std::string(v) : std::string();
}

// Client for POST /v1/score and GET /v1/health. The backend identity is
// "remote:<model_id>", fetched once from the health endpoint.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "remote scorer needs a URL");
    }
    if (cfg_.max_batch == 0 || cfg_.parallelism == 0) {
      throw Error(ErrorCode::kInvalidArgument, "max_batch and parallelism must be >= 1");
    }
    auto scheme = cfg_.url.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto path = cfg_.url.find('/', host_start);
    origin_ = cfg_.url.substr(0, path);
    if (path != std::string::npos) base_path_ = cfg_.url.substr(path);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  std::string id() const override { return "remote:" + model_id(); }

  const std::string& model_id() const {
    std::lock_guard lock(mu_);
    if (model_id_.empty()) {
      auto cli = client();
      auto res = cli.Get(base_path_ + "/v1/health");
      if (!res) {
        throw Error(ErrorCode::kBackendUnavailable,
                    cfg_.url + ": " + httplib::to_string(res.error()));
      }
      if (res->status != 200) {
        throw Error(ErrorCode::kBackendUnavailable,
                    cfg_.url + "/v1/health returned status " + std::to_string(res->status));
      }
      auto body = nlohmann::json::parse(res->body, nullptr, false);
      if (body.is_discarded() || !body.contains("model_id") || !body["model_id"].is_string()) {
        throw Error(ErrorCode::kProtocolError, "health response lacks model_id");
      }
      model_id_ = body["model_id"].get<std::string>();
    }
    return model_id_;
  }

  static std::string encode_request(std::span<const EntailmentQuery> queries) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& q : queries) {
      pairs.push_back({{"premise", q.premise}, {"hypothesis", q.hypothesis}});
    }
    return nlohmann::json{{"pairs", pairs}}.dump();
  }

  struct DecodedResponse {
    std::vector<EntailmentResult> results;
    std::string model_id;
  };

  static DecodedResponse decode_response(const std::string& body, std::size_t expected) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kProtocolError, "response is not a JSON object");
    }
    if (!j.contains("results") || !j["results"].is_array()) {
      throw Error(ErrorCode::kProtocolError, "response lacks a results array");
    }
    if (!j.contains("model_id") || !j["model_id"].is_string()) {
      throw Error(ErrorCode::kProtocolError, "response lacks model_id");
    }
    DecodedResponse out;
    out.model_id = j["model_id"].get<std::string>();
    if (j["results"].size() != expected) {
      throw Error(ErrorCode::kProtocolError,
                  "expected " + std::to_string(expected) + " results, got " +
                      std::to_string(j["results"].size()));
    }
    for (const auto& item : j["results"]) {
      EntailmentResult r;
      for (auto [name, slot] : {std::pair{"entail", &r.entail},
                                std::pair{"neutral", &r.neutral},
                                std::pair{"contradict", &r.contradict}}) {
        if (!item.is_object() || !item.contains(name) || !item[name].is_number()) {
          throw Error(ErrorCode::kProtocolError, std::string("result lacks '") + name + "'");
        }
        *slot = item[name].get<double>();
      }
      if (!is_simplex(r)) {
        throw Error(ErrorCode::kProtocolError, "result is not a probability simplex");
      }
      out.results.push_back(r);
    }
    return out;
  }

 protected:
  std::vector<EntailmentResult> do_score_batch(
      std::span<const EntailmentQuery> queries) override {
    const std::string expected_model = model_id();
    std::vector<std::span<const EntailmentQuery>> chunks;
    for (std::size_t i = 0; i < queries.size(); i += cfg_.max_batch) {
      chunks.push_back(queries.subspan(i, std::min(cfg_.max_batch, queries.size() - i)));
    }
    std::vector<std::vector<EntailmentResult>> results(chunks.size());
    // Waves of at most `parallelism` in-flight requests; each chunk writes
    // only its own slot so completion order cannot leak into the output.
    for (std::size_t start = 0; start < chunks.size(); start += cfg_.parallelism) {
      std::size_t stop = std::min(chunks.size(), start + cfg_.parallelism);
      std::vector<std::future<std::vector<EntailmentResult>>> wave;
      for (std::size_t c = start; c < stop; ++c) {
        wave.push_back(std::async(std::launch::async, [this, &chunks, c, &expected_model] {
          return post_chunk(chunks[c], expected_model);
        }));
      }
      for (std::size_t c = start; c < stop; ++c) results[c] = wave[c - start].get();
    }
    std::vector<EntailmentResult> out;
    out.reserve(queries.size());
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(cfg_.timeout_seconds, 0);
    cli.set_read_timeout(cfg_.timeout_seconds, 0);
    cli.set_write_timeout(cfg_.timeout_seconds, 0);
    return cli;
  }

  std::vector<EntailmentResult> post_chunk(std::span<const EntailmentQuery> chunk,
                                           const std::string& expected_model) const {
    auto cli = client();
    auto res = cli.Post(base_path_ + "/v1/score", encode_request(chunk), "application/json");
    if (!res) {
      throw Error(ErrorCode::kBackendUnavailable,
                  cfg_.url + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 503) {
      throw Error(ErrorCode::kBackendUnavailable, cfg_.url + ": model not loaded (503)");
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProtocolError,
                  cfg_.url + "/v1/score returned status " + std::to_string(res->status));
    }
    DecodedResponse decoded = decode_response(res->body, chunk.size());
    if (decoded.model_id != expected_model) {
      throw Error(ErrorCode::kProtocolError, "model_id changed from '" + expected_model +
                                                 "' to '" + decoded.model_id + "'");
    }
    return std::move(decoded.results);
  }

  RemoteScorerConfig cfg_;
  std::string origin_;
  std::string base_path_;
  mutable std::mutex mu_;
  mutable std::string model_id_;
};

}  // namespace presque
