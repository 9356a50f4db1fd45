#include <gtest/gtest.h>

#include "msla/remote_oracle.hpp"
#include "support/fake_server.hpp"

namespace msla {
namespace {

using testing::FakeModelServer;

const LabelSet kLabels({"cat", "dog", "stop sign"}, 2);

TEST(RemoteOracle, HealthReportsModelAndConcurrency) {
  FakeModelServer server(6);
  const RemoteOracle oracle(server.url(), 5.0, 0);
  EXPECT_EQ(oracle.model_id(), "fake-model");
  EXPECT_EQ(oracle.max_concurrency(), 6);
}

TEST(RemoteOracle, ScoresAndSendsWireFields) {
  FakeModelServer server;
  nlohmann::json seen;
  server.on_score([&](const nlohmann::json& req, httplib::Response& res) {
    seen = req;
    res.set_content(R"({"probs":[0.1,0.2,0.7]})", "application/json");
  });
  const RemoteOracle oracle(server.url(), 5.0, 0);
  const ProbDist d = oracle.score(Image({64, 64}), kLabels);
  EXPECT_EQ(d.top1(), 2u);
  EXPECT_DOUBLE_EQ(d[1], 0.2);
  EXPECT_EQ(oracle.query_count(), 1u);
  ASSERT_TRUE(seen.contains("labels"));
  EXPECT_EQ(seen["labels"], nlohmann::json({"cat", "dog", "stop sign"}));
  // base64 of the 8-byte PNG signature prefix
  EXPECT_EQ(seen["image_png_b64"].get<std::string>().rfind("iVBORw0KGgo", 0), 0u);
}

TEST(RemoteOracle, SumOffByTwentyPercentIsMalformed) {
  FakeModelServer server;
  server.on_score(FakeModelServer::fixed({0.3, 0.3, 0.2}));
  const RemoteOracle oracle(server.url(), 5.0, 0);
  EXPECT_THROW(oracle.score(Image({64, 64}), kLabels), MalformedResponse);
  EXPECT_EQ(oracle.query_count(), 0u);
}

TEST(RemoteOracle, WrongLengthIsMalformed) {
  FakeModelServer server;
  server.on_score(FakeModelServer::fixed({0.5, 0.5}));
  const RemoteOracle oracle(server.url(), 5.0, 0);
  EXPECT_THROW(oracle.score(Image({64, 64}), kLabels), MalformedResponse);
}

TEST(RemoteOracle, NonJsonReplyIsMalformed) {
  FakeModelServer server;
  server.on_score([](const nlohmann::json&, httplib::Response& res) {
    res.set_content("<html>oops</html>", "text/html");
  });
  const RemoteOracle oracle(server.url(), 5.0, 0);
  EXPECT_THROW(oracle.score(Image({64, 64}), kLabels), MalformedResponse);
}

TEST(RemoteOracle, ServerErrorMessageIsSurfaced) {
  FakeModelServer server;
  server.on_score([](const nlohmann::json&, httplib::Response& res) {
    res.status = 400;
    res.set_content(R"({"error":"labels must be non-empty"})", "application/json");
  });
  const RemoteOracle oracle(server.url(), 5.0, 2);
  try {
    (void)oracle.score(Image({64, 64}), kLabels);
    FAIL() << "expected OracleError";
  } catch (const MalformedResponse&) {
    FAIL() << "400 is a rejection, not a malformed reply";
  } catch (const OracleError& e) {
    EXPECT_NE(std::string(e.what()).find("labels must be non-empty"), std::string::npos);
  }
  EXPECT_EQ(server.score_calls(), 1);  // not retried
}

TEST(RemoteOracle, ServerFailuresAreRetried) {
  FakeModelServer server;
  int calls = 0;
  server.on_score([&](const nlohmann::json&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"probs":[0.2,0.2,0.6]})", "application/json");
  });
  const RemoteOracle oracle(server.url(), 5.0, 2);
  EXPECT_EQ(oracle.score(Image({64, 64}), kLabels).top1(), 2u);
  EXPECT_EQ(server.score_calls(), 3);
}

TEST(RemoteOracle, RetriesExhaustedIsUnavailable) {
  FakeModelServer server;
  server.on_score([](const nlohmann::json&, httplib::Response& res) { res.status = 500; });
  const RemoteOracle oracle(server.url(), 5.0, 1);
  EXPECT_THROW(oracle.score(Image({64, 64}), kLabels), OracleUnavailable);
  EXPECT_EQ(server.score_calls(), 2);
}

TEST(RemoteOracle, SlowServerTimesOut) {
  FakeModelServer server;
  server.on_score([](const nlohmann::json&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"probs":[0.2,0.2,0.6]})", "application/json");
  });
  const RemoteOracle oracle(server.url(), 0.3, 0);
  EXPECT_THROW(oracle.score(Image({64, 64}), kLabels), Timeout);
}

TEST(RemoteOracle, UnreachableEndpoint) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again, so nothing listens there
  EXPECT_THROW(RemoteOracle("http://127.0.0.1:" + std::to_string(port), 1.0, 1), OracleUnavailable);
}

TEST(RemoteOracle, UnhealthyStatus) {
  FakeModelServer server(1, "loading");
  EXPECT_THROW(RemoteOracle(server.url(), 1.0, 0), OracleUnavailable);
}

TEST(RemoteOracle, ConstructorValidation) {
  EXPECT_THROW(RemoteOracle("http://127.0.0.1:1", 0.0, 0), InvalidArgument);
  EXPECT_THROW(RemoteOracle("http://127.0.0.1:1", 1.0, -1), InvalidArgument);
}

}  // namespace
}  // namespace msla
