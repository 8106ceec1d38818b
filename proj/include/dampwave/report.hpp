#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace dampwave {

/// 17 significant digits, "%.17g".
std::string fmt17(double value);

/// Comma-separated table with LF line endings and 17-digit floats.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<double>& values);
  /// Mixed row; each cell is already formatted.
  CsvTable& raw_row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_; }
  const std::string& str() const { return text_; }

private:
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Collects the files written by one command, with content hashes and timings.
class ReportBundle {
public:
  ReportBundle(std::string command, nlohmann::json config, std::filesystem::path out_dir);

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& doc);
  void time(const std::string& stage, double seconds) { timings_[stage] = seconds; }

  const std::filesystem::path& out_dir() const { return out_dir_; }
  const nlohmann::json& config() const { return config_; }
  /// Manifest: command, config echo, files with sha256, timings.
  nlohmann::json manifest() const;
  /// Writes manifest.json next to the outputs.
  void finish();

private:
  std::string command_;
  nlohmann::json config_;
  std::filesystem::path out_dir_;
  std::vector<std::pair<std::string, std::string>> files_; // name, sha256
  nlohmann::json timings_ = nlohmann::json::object();
};

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

} // namespace dampwave
