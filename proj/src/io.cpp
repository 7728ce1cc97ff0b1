#include "blowup/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace blowup {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::string& buf, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  buf.append(b, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw IoError("snapshot: truncated file");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", p.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", p.string()));
  out << text;
}

void write_snapshot(const fs::path& p, const ComplexField& u) {
  std::string buf;
  buf.reserve(20 + 16 * u.N);
  put<double>(buf, u.t);
  put<double>(buf, u.L);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(u.N));
  for (const cd& v : u.values) {
    put<double>(buf, v.real());
    put<double>(buf, v.imag());
  }
  write_text(p, buf);
}

ComplexField read_snapshot(const fs::path& p) {
  std::string buf = read_text(p);
  std::size_t pos = 0;
  double t = get<double>(buf, pos);
  double L = get<double>(buf, pos);
  std::uint32_t N = get<std::uint32_t>(buf, pos);
  if (buf.size() != 20 + 16 * static_cast<std::size_t>(N))
    throw IoError(fmt::format("snapshot '{}': size does not match N = {}", p.string(), N));
  ComplexField u = ComplexField::zeros(L, N, t);
  for (std::uint32_t i = 0; i < N; ++i) {
    double re = get<double>(buf, pos), im = get<double>(buf, pos);
    u.values[i] = {re, im};
  }
  return u;
}

void write_snapshot_csv(const fs::path& p, const ComplexField& u) {
  std::string out = "t,L,N\n";
  out += fmt::format("{},{},{}\nre,im\n", format_number(u.t), format_number(u.L), u.N);
  for (const cd& v : u.values) out += fmt::format("{},{}\n", format_number(v.real()), format_number(v.imag()));
  write_text(p, out);
}

ComplexField read_snapshot_csv(const fs::path& p) {
  std::stringstream in(read_text(p));
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line)) throw IoError(fmt::format("snapshot '{}': truncated", p.string()));
    return line;
  };
  if (next().rfind("t,L,N", 0) != 0) throw IoError(fmt::format("snapshot '{}': missing t,L,N header", p.string()));
  double t = 0, L = 0;
  std::size_t N = 0;
  if (std::sscanf(next().c_str(), "%lf,%lf,%zu", &t, &L, &N) != 3)
    throw IoError(fmt::format("snapshot '{}': malformed header values", p.string()));
  next();
  ComplexField u = ComplexField::zeros(L, N, t);
  for (std::size_t i = 0; i < N; ++i) {
    double re = 0, im = 0;
    if (std::sscanf(next().c_str(), "%lf,%lf", &re, &im) != 2)
      throw IoError(fmt::format("snapshot '{}': malformed row {}", p.string(), i));
    u.values[i] = {re, im};
  }
  return u;
}

ComplexField read_any_snapshot(const fs::path& p) {
  return p.extension() == ".csv" ? read_snapshot_csv(p) : read_snapshot(p);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string sha256_file(const fs::path& p) { return sha256_hex(read_text(p)); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(std::vector<std::string> columns, std::string manifest_hash) : ncol_(columns.size()) {
  out_ = fmt::format("# manifest {}\n{}\n", manifest_hash, fmt::join(columns, ","));
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncol_) throw IoError("csv: row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ += ',';
    out_ += format_number(values[i]);
  }
  out_ += '\n';
}

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw IoError(fmt::format("csv: no column '{}'", name));
}

CsvTable read_csv(const fs::path& p) {
  std::stringstream in(read_text(p));
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# manifest ", 0) == 0) t.manifest_hash = line.substr(11);
      continue;
    }
    std::stringstream ls(line);
    std::string cell;
    if (!header) {
      while (std::getline(ls, cell, ',')) t.columns.push_back(cell);
      header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw IoError(fmt::format("csv '{}': ragged row", p.string()));
    t.rows.push_back(std::move(row));
  }
  if (!header) throw IoError(fmt::format("csv '{}': no header", p.string()));
  return t;
}

std::string Manifest::hash() const {
  return sha256_hex(subcommand + "\n" + config_toml + "\n" + provenance.dump());
}

nlohmann::json Manifest::to_json(const fs::path& dir) const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["hash"] = hash();
  j["config"] = config_toml;
  j["provenance"] = provenance;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outputs) {
    fs::path p = dir / o;
    outs.push_back({{"path", o}, {"sha256", fs::exists(p) ? sha256_file(p) : ""}});
  }
  j["outputs"] = outs;
  j["wall_seconds"] = wall_seconds;
  j["steps"] = steps;
  return j;
}

void Manifest::save(const fs::path& dir) const { write_text(dir / "manifest.json", to_json(dir).dump(2) + "\n"); }

}  // namespace blowup
