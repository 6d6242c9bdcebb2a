#include "chartreview/embedding.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;

std::vector<Vector> EmbeddingBackend::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

void normalize_or_e0(Vector& v) {
  double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) {
    v.setZero();
    if (v.size() > 0) v[0] = 1.0;
    return;
  }
  v /= n;
}

HashingEmbedder::HashingEmbedder(int dim) : dim_(dim) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "embedding dim must be >= 1");
}

std::string HashingEmbedder::name() const { return "hash3:" + std::to_string(dim_); }

Vector HashingEmbedder::embed(std::string_view text) {
  Vector v = Vector::Zero(dim_);
  auto lower = ascii_lower(text);
  for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
    auto h = fnv1a64(std::string_view(lower).substr(i, 3));
    auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_));
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  normalize_or_e0(v);
  return v;
}

HttpTarget split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) fail(ErrorCode::InvalidArgument, "endpoint must include a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) fail(ErrorCode::InvalidArgument, "remote embedder needs an endpoint");
  if (cfg_.max_attempts < 1) cfg_.max_attempts = 1;
}

Vector RemoteEmbedder::embed(std::string_view text) { return embed_batch({std::string(text)}).front(); }

std::vector<Vector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
  auto target = split_url(cfg_.endpoint);
  json body = {{"model", cfg_.model}, {"input", texts}};
  auto payload = body.dump();

  std::string last_error;
  auto delay = cfg_.backoff;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    httplib::Client cli(target.scheme_host_port);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    httplib::Headers headers;
    if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);
    auto res = cli.Post(target.path, headers, payload, "application/json");
    if (res && res->status == 200) {
      auto doc = json::parse(res->body, nullptr, false);
      if (doc.is_discarded() || !doc.contains("vectors") || !doc["vectors"].is_array() ||
          doc["vectors"].size() != texts.size()) {
        last_error = "malformed embedding response";
      } else {
        std::vector<Vector> out;
        for (const auto& row : doc["vectors"]) {
          if (!row.is_array() || static_cast<int>(row.size()) != cfg_.dim) {
            fail(ErrorCode::DimensionMismatch, "remote embedding has dim " + std::to_string(row.size()) +
                                                   ", expected " + std::to_string(cfg_.dim));
          }
          Vector v(cfg_.dim);
          for (int i = 0; i < cfg_.dim; ++i) v[i] = row[static_cast<std::size_t>(i)].get<double>();
          normalize_or_e0(v);
          out.push_back(std::move(v));
        }
        return out;
      }
    } else {
      last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    }
    if (attempt < cfg_.max_attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  fail(ErrorCode::BackendUnavailable, "embedding endpoint " + cfg_.endpoint + " failed after " +
                                          std::to_string(cfg_.max_attempts) + " attempts: " + last_error);
}

}  // namespace chartreview
