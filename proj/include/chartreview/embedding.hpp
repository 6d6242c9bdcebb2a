#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace chartreview {

using Vector = Eigen::VectorXd;

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual Vector embed(std::string_view text) = 0;
  virtual std::vector<Vector> embed_batch(const std::vector<std::string>& texts);
};

// Unit-normalises v in place; a zero vector becomes e0.
void normalize_or_e0(Vector& v);

// Signed feature hashing of lowercase byte 3-grams, L2-normalised.
class HashingEmbedder final : public EmbeddingBackend {
 public:
  explicit HashingEmbedder(int dim = 256);

  int dim() const override { return dim_; }
  std::string name() const override;
  Vector embed(std::string_view text) override;

 private:
  int dim_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;  // e.g. http://localhost:8081/v1/embeddings
  std::string model;
  std::string token;
  int dim = 384;
  int max_attempts = 3;
  std::chrono::milliseconds backoff{200};
  std::chrono::seconds timeout{30};
};

// POST {model, input: [texts]} -> {vectors: [[...]]}.
class RemoteEmbedder final : public EmbeddingBackend {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig cfg);

  int dim() const override { return cfg_.dim; }
  std::string name() const override { return "remote:" + cfg_.model; }
  Vector embed(std::string_view text) override;
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  RemoteEmbedderConfig cfg_;
};

struct HttpTarget {
  std::string scheme_host_port;
  std::string path;
};

// Splits "http://host:port/path" for httplib::Client.
HttpTarget split_url(const std::string& url);

}  // namespace chartreview
