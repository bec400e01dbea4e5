#include "cli/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "coalsisr/error.hpp"

#ifndef COALSISR_VERSION
#define COALSISR_VERSION "unknown"
#endif

namespace coalsisr::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long parse_int(const std::string& s, const char* what, std::size_t line) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) throw ParseError(std::string(what) + " '" + s + "' is not an integer", line);
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, int K) {
  if (K < 1) throw Error("allele range must be positive");
  std::string line;
  std::size_t no = 0;
  bool header = false;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::size_t> first_line;
  Dataset d;
  d.K = K;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t);
    if (!header) {
      if (cells != std::vector<std::string>{"locus", "allele", "count"})
        throw ParseError("expected header locus,allele,count", no);
      header = true;
      continue;
    }
    if (cells.size() != 3) throw ParseError("expected 3 fields, found " + std::to_string(cells.size()), no);
    if (cells[0].empty()) throw ParseError("empty locus id", no);
    const long allele = parse_int(cells[1], "allele", no);
    const long count = parse_int(cells[2], "count", no);
    if (allele < 1 || allele > K)
      throw ParseError("allele " + std::to_string(allele) + " outside 1.." + std::to_string(K), no);
    if (count < 1) throw ParseError("count must be a positive integer", no);
    auto it = index.find(cells[0]);
    if (it == index.end()) {
      it = index.emplace(cells[0], d.loci.size()).first;
      first_line[cells[0]] = no;
      order.push_back(cells[0]);
      d.loci.emplace_back(K);
    }
    d.loci[it->second].add(static_cast<int>(allele), static_cast<int>(count));
  }
  if (!header) throw ParseError("empty dataset file", 0);
  if (d.loci.empty()) throw ParseError("dataset has no rows", no);
  const int n = d.loci.front().size();
  for (std::size_t l = 1; l < d.loci.size(); ++l)
    if (d.loci[l].size() != n)
      throw ParseError("locus '" + order[l] + "' has " + std::to_string(d.loci[l].size()) + " genes, locus '" + order[0] +
                           "' has " + std::to_string(n),
                       first_line[order[l]]);
  return d;
}

Dataset read_dataset(const std::filesystem::path& path, int K) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_dataset(in, K);
}

CsvTable dataset_table(const Dataset& d) {
  CsvTable t({"locus", "allele", "count"});
  for (std::size_t l = 0; l < d.loci.size(); ++l)
    for (int a : d.loci[l].occupied())
      t.row({std::to_string(l + 1), std::to_string(a), std::to_string(d.loci[l].count(a))});
  return t;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

void CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw Error("table row has " + std::to_string(cells.size()) + " cells for " + std::to_string(columns_.size()) +
                " columns");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

std::string num(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

Manifest::Manifest(std::filesystem::path dir, std::string command, nlohmann::json config, std::string config_hash,
                   std::uint64_t seed)
    : dir_(std::move(dir)) {
  meta_ = {{"command", std::move(command)},
           {"version", COALSISR_VERSION},
           {"seed", seed},
           {"config_hash", std::move(config_hash)},
           {"config", std::move(config)}};
}

void Manifest::write_table(const std::string& name, const CsvTable& t) {
  write_atomic(dir_ / name, t.str());
  files_[name] = {{"kind", "csv"}, {"columns", t.columns()}, {"rows", t.size()}};
}

void Manifest::write_file(const std::string& name, const std::string& content, const std::string& kind) {
  write_atomic(dir_ / name, content);
  files_[name] = {{"kind", kind}};
}

void Manifest::close() {
  nlohmann::json m = meta_;
  m["files"] = files_;
  for (const auto& [k, v] : extra_.items()) m[k] = v;
  write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace coalsisr::cli
