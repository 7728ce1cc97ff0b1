#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "blowup/field.hpp"

namespace blowup {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary snapshot: t (f64), L (f64), N (u32), then N interleaved re/im f64,
// all little-endian.
void write_snapshot(const std::filesystem::path& p, const ComplexField& u);
ComplexField read_snapshot(const std::filesystem::path& p);

// CSV snapshot: "t,L,N" / values / "re,im" / N rows.
void write_snapshot_csv(const std::filesystem::path& p, const ComplexField& u);
ComplexField read_snapshot_csv(const std::filesystem::path& p);

// Picks the reader by extension (.csv or binary).
ComplexField read_any_snapshot(const std::filesystem::path& p);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

// Deterministic CSV: a "# manifest <hash>" line, a header, then rows printed
// with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> columns, std::string manifest_hash);
  void row(const std::vector<double>& values);
  std::string str() const { return out_; }
  void save(const std::filesystem::path& p) const { write_text(p, out_); }

 private:
  std::size_t ncol_;
  std::string out_;
};

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string manifest_hash;
  std::size_t col(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& p);

// Run manifest: written as manifest.json next to the outputs; hash covers
// subcommand, config text and constants provenance (not wall-clock).
struct Manifest {
  std::string subcommand;
  std::string config_toml;
  nlohmann::json provenance;
  std::vector<std::string> outputs;
  double wall_seconds = 0;
  long steps = 0;

  std::string hash() const;
  nlohmann::json to_json(const std::filesystem::path& dir) const;
  void save(const std::filesystem::path& dir) const;
};

}  // namespace blowup
