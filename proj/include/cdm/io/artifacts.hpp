#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cdm/dataset.hpp"
#include "cdm/error.hpp"

namespace cdm::io {

// Writes primary artifacts plus a `<name>.meta.json` sidecar carrying the
// config hash. Nothing time-dependent goes into either file.
class OutputDir {
 public:
  OutputDir(std::filesystem::path root, std::string command, std::string config_hash)
      : root_(std::move(root)), command_(std::move(command)), hash_(std::move(config_hash)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + root_.string() + ": " + ec.message());
  }

  const std::filesystem::path& root() const { return root_; }
  const std::string& config_hash() const { return hash_; }

  void set_provenance(const Provenance& p) {
    provenance_ = {{"headlines", p.headline_source}, {"headlines_hash", p.headline_hash},
                   {"responses", p.response_source}, {"responses_hash", p.response_hash}};
  }

  std::filesystem::path write(const std::string& name, const std::string& content,
                              const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) const {
    const auto path = root_ / name;
    std::filesystem::create_directories(path.parent_path());
    write_raw(path, content);
    nlohmann::ordered_json meta;
    meta["artifact"] = name;
    meta["command"] = command_;
    meta["config_hash"] = hash_;
    if (!provenance_.is_null()) meta["data"] = provenance_;
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    write_raw(path.string() + ".meta.json", meta.dump(2) + "\n");
    return path;
  }

  static void write_raw(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }

 private:
  std::filesystem::path root_;
  std::string command_;
  std::string hash_;
  nlohmann::ordered_json provenance_;
};

}  // namespace cdm::io
