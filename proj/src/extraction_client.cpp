// Copyright 2026 The semtwin Authors
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

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semtwin/error.hpp"
#include "semtwin/ingest.hpp"

namespace semtwin::ingest {

std::string document_key(std::string_view document_text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(document_text.data(), document_text.size(), digest.data(),
                 &len, EVP_sha256(), nullptr) != 1) {
    throw IngestError("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

ReplayClient::ReplayClient(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw IngestError("replay store " + dir_.string() + " is not a directory");
  }
}

std::string ReplayClient::extract(const std::string&,
                                  const std::string& document_text) {
  auto path = dir_ / (document_key(document_text) + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IngestError("no stored response for document " +
                      document_key(document_text) + " in " + dir_.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ReplayClient::record(const std::string& document_text,
                          const std::string& response) {
  auto path = dir_ / (document_key(document_text) + ".json");
  std::ofstream out(path, std::ios::binary);
  out << response;
  if (!out) throw IngestError("cannot write " + path.string());
}

HttpClient::HttpClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw ConfigError("extraction endpoint URL is empty");
  }
}

std::string HttpClient::extract(const std::string& prompt,
                                const std::string&) {
  httplib::Client client(config_.base_url);
  client.set_read_timeout(config_.timeout_s, 0);
  client.set_write_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", 0},
      {"messages", {{{"role", "user"}, {"content", prompt}}}},
  };
  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw IngestError("extraction request to " + config_.base_url +
                      " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw IngestError("extraction endpoint returned HTTP " +
                      std::to_string(res->status) + ": " + res->body);
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("unexpected chat-completion response: ") +
                      e.what());
  }
}

}  // namespace semtwin::ingest
