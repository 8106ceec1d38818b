#include "dampwave/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "dampwave/types.hpp"

namespace dampwave {

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  raw_row(header);
  rows_ = 0;
}

CsvTable& CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values)
    cells.push_back(fmt17(v));
  return raw_row(cells);
}

CsvTable& CsvTable::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw ValidationError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ReportBundle::ReportBundle(std::string command, nlohmann::json config, std::filesystem::path out_dir)
    : command_(std::move(command)), config_(std::move(config)), out_dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec || !std::filesystem::is_directory(out_dir_))
    throw ValidationError("cannot create output directory " + out_dir_.string());
}

void ReportBundle::write_text(const std::string& name, const std::string& content) {
  const auto path = out_dir_ / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw ValidationError("cannot write " + path.string());
  f << content;
  f.close();
  if (!f)
    throw ValidationError("write failed for " + path.string());
  files_.emplace_back(name, sha256_hex(content));
}

void ReportBundle::write_json(const std::string& name, const nlohmann::json& doc) {
  nlohmann::json out = doc;
  out["config"] = config_;
  // output location only goes in the manifest, so results compare across directories
  out["config"].erase("output");
  write_text(name, out.dump(2) + "\n");
}

nlohmann::json ReportBundle::manifest() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, hash] : files_)
    files.push_back({{"file", name}, {"sha256", hash}});
  return {{"command", command_}, {"config", config_}, {"files", files}, {"timings", timings_}};
}

void ReportBundle::finish() {
  const auto path = out_dir_ / "manifest.json";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw ValidationError("cannot write " + path.string());
  f << manifest().dump(2) << "\n";
}

} // namespace dampwave
