#pragma once

/// @file remote_oracle.hpp
/// HTTP client for a model server speaking the /v1 scoring protocol:
///
///   GET  /v1/health -> {"status":"ok","model":"<id>","max_concurrency":<int>}
///   POST /v1/score  {"image_png_b64":"...","labels":[...]} -> {"probs":[...]}
///   errors          -> 400 {"error":"<message>"}
///
/// Transport failures are retried; protocol violations are not.

#include <httplib.h>

#include <chrono>
#include <json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "msla/errors.hpp"
#include "msla/oracle.hpp"
#include "msla/png_io.hpp"

namespace msla {

class RemoteOracle final : public ProbabilityOracle {
 public:
  /// Health-checks `endpoint` (e.g. "http://127.0.0.1:8080") before returning.
  RemoteOracle(std::string endpoint, double timeout_seconds, int retries)
      : endpoint_(std::move(endpoint)), timeout_(timeout_seconds), retries_(retries) {
    if (!(timeout_ > 0.0)) throw InvalidArgument("timeout must be positive");
    if (retries_ < 0) throw InvalidArgument("retries must be non-negative");
    health_check();
  }

  [[nodiscard]] int max_concurrency() const override { return max_concurrency_; }
  [[nodiscard]] const std::string& model_id() const { return model_; }
  [[nodiscard]] const std::string& endpoint() const { return endpoint_; }

 protected:
  ProbDist do_score(const Image& img, const LabelSet& labels) const override {
    const auto png_bytes = png::encode_rgb(img);
    nlohmann::json body;
    body["image_png_b64"] =
        httplib::detail::base64_encode(std::string(png_bytes.begin(), png_bytes.end()));
    body["labels"] = labels.labels();

    auto res = with_retries([&](httplib::Client& cli) {
      return cli.Post("/v1/score", body.dump(), "application/json");
    });
    if (res->status == 400) {
      throw OracleError("server rejected score request: " + error_message(res->body));
    }
    if (res->status != 200) {
      throw OracleUnavailable("score request failed with HTTP " + std::to_string(res->status));
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("score reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("probs") || !reply["probs"].is_array()) {
      throw MalformedResponse("score reply lacks a probs array");
    }
    std::vector<double> probs;
    for (const auto& v : reply["probs"]) {
      if (!v.is_number()) throw MalformedResponse("non-numeric probability in score reply");
      probs.push_back(v.get<double>());
    }
    if (probs.size() != labels.size()) {
      throw MalformedResponse("score reply has " + std::to_string(probs.size()) +
                              " probabilities for " + std::to_string(labels.size()) + " labels");
    }
    try {
      return ProbDist(std::move(probs));
    } catch (const InvalidDistribution& e) {
      throw MalformedResponse(std::string("invalid distribution from server: ") + e.what());
    }
  }

 private:
  [[nodiscard]] httplib::Client make_client() const {
    httplib::Client cli(endpoint_);
    const auto usec = std::chrono::microseconds(static_cast<long long>(timeout_ * 1e6));
    cli.set_connection_timeout(usec);
    cli.set_read_timeout(usec);
    cli.set_write_timeout(usec);
    return cli;
  }

  template <class Request>
  httplib::Result with_retries(Request&& request) const {
    httplib::Error last = httplib::Error::Unknown;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
      auto cli = make_client();
      auto res = request(cli);
      if (res && res->status < 500) return res;
      if (res) {
        last = httplib::Error::Unknown;
        continue;
      }
      last = res.error();
    }
    const std::string why = httplib::to_string(last);
    if (last == httplib::Error::Read || last == httplib::Error::Write ||
        last == httplib::Error::ConnectionTimeout) {
      throw Timeout("oracle at " + endpoint_ + " timed out: " + why);
    }
    throw OracleUnavailable("oracle at " + endpoint_ + " unavailable: " + why);
  }

  static std::string error_message(const std::string& body) {
    try {
      const auto j = nlohmann::json::parse(body);
      if (j.is_object() && j.contains("error") && j["error"].is_string()) {
        return j["error"].get<std::string>();
      }
    } catch (const nlohmann::json::exception&) {
    }
    return body;
  }

  void health_check() {
    httplib::Result res;
    try {
      res = with_retries([](httplib::Client& cli) { return cli.Get("/v1/health"); });
    } catch (const Timeout& e) {
      throw OracleUnavailable(e.what());
    }
    if (res->status != 200) {
      throw OracleUnavailable("health check returned HTTP " + std::to_string(res->status));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      if (j.at("status").get<std::string>() != "ok") {
        throw OracleUnavailable("oracle reports status " + j.at("status").dump());
      }
      model_ = j.at("model").get<std::string>();
      max_concurrency_ = j.at("max_concurrency").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("malformed health reply: ") + e.what());
    }
    if (max_concurrency_ < 1) {
      throw MalformedResponse("health reply advertises max_concurrency < 1");
    }
  }

  std::string endpoint_;
  double timeout_;
  int retries_;
  std::string model_;
  int max_concurrency_ = 1;
};

}  // namespace msla
