#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coalsisr/datasim.hpp"

namespace coalsisr::cli {

/// CSV with header locus,allele,count. Loci keep the order in which their id
/// first appears. Throws ParseError with the offending line.
Dataset parse_dataset(std::istream& in, int K);
Dataset read_dataset(const std::filesystem::path& path, int K);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// A table with a fixed column schema.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  /// Cells are formatted by the caller; the count must match the schema.
  void row(std::vector<std::string> cells);
  std::size_t size() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Ingestion format, loci numbered from 1.
CsvTable dataset_table(const Dataset& d);

/// Shortest decimal text that reads back to the same double.
std::string num(double v);

/// Records every artifact with its column schema, plus run metadata, in
/// manifest.json.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, std::string command, nlohmann::json config, std::string config_hash,
           std::uint64_t seed);
  void write_table(const std::string& name, const CsvTable& t);
  void write_file(const std::string& name, const std::string& content, const std::string& kind);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  /// Writes manifest.json; call last.
  void close();

 private:
  std::filesystem::path dir_;
  nlohmann::json meta_;
  nlohmann::json files_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace coalsisr::cli
