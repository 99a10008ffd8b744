#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "billiard/harness.hpp"

namespace billiard::harness {

namespace {

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptRun(path.string() + ": missing");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw CorruptRun(path.string() + ": not valid JSON (" + e.what() + ")");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

std::string sha256_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorruptRun(file.string() + ": missing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& files, const std::string& started,
                    const std::string& finished) {
  Json list = Json::array();
  for (const std::string& f : files) {
    const auto path = cfg.output_dir / f;
    list.push_back({{"path", f}, {"sha256", sha256_hex(path)}, {"bytes", std::filesystem::file_size(path)}});
  }
  Json m{{"format_version", kFormatVersion},
         {"artifact_version", kArtifactVersion},
         {"command", cfg.command},
         {"master_seed", cfg.master_seed},
         {"workers", cfg.workers},
         {"config", cfg.document},
         {"started", started},
         {"finished", finished},
         {"files", list}};
  write_text(cfg.output_dir / "manifest.json", m.dump(2) + "\n");
}

Json verify_run(const std::filesystem::path& dir) {
  const Json m = read_json(dir / "manifest.json");
  if (!m.contains("files") || !m["files"].is_array()) throw CorruptRun((dir / "manifest.json").string() + ": no file list");
  for (const auto& f : m["files"]) {
    const std::string name = f.at("path").get<std::string>();
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) throw CorruptRun(path.string() + ": listed in the manifest but missing");
    if (sha256_hex(path) != f.at("sha256").get<std::string>()) {
      throw CorruptRun(path.string() + ": digest does not match the manifest");
    }
  }
  return m;
}

std::vector<std::filesystem::path> export_run(const std::filesystem::path& dir, ExportFormat format) {
  verify_run(dir);
  const Json report = read_json(dir / "report.json");
  if (!report.contains("tables")) throw CorruptRun((dir / "report.json").string() + ": no tables");
  const auto target = dir / "export";
  std::filesystem::create_directories(target);
  std::vector<std::filesystem::path> out;
  for (const auto& [name, j] : report["tables"].items()) {
    const Table t = table_from_json(name, j);
    if (format == ExportFormat::csv) {
      out.push_back(target / (name + ".csv"));
      write_text(out.back(), to_csv(t));
    } else {
      Json doc{{"format_version", kFormatVersion}, {"table", name}};
      doc.update(to_json(t));
      out.push_back(target / (name + ".json"));
      write_text(out.back(), doc.dump(2) + "\n");
    }
  }
  return out;
}

}  // namespace billiard::harness
