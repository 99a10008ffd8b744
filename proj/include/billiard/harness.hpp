#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "billiard/error.hpp"
#include "billiard/geom.hpp"
#include "billiard/probe.hpp"
#include "billiard/symbolic.hpp"
#include "billiard/types.hpp"
#include "json.hpp"

namespace billiard::harness {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kInvalid = 1, kRuntime = 2, kFailed = 3 };

// "file:line: message"
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class CorruptRun : public Error {
 public:
  using Error::Error;
};

// Either a sampled point (seed) or explicit coordinates.
struct PointSpec {
  std::optional<std::uint64_t> seed;
  std::optional<PhasePoint> initial;
};

struct SimulateSpec {
  PointSpec point;
  std::optional<std::size_t> events;
  std::optional<double> time;
};

struct NeutralSpec {
  PointSpec point;
  std::size_t events = 3;
  bool fd_check = false;
};

struct StatsSpec {
  SymbolicSequence sequence;
  std::size_t samples = 1000;
  DimensionStatsOptions options;
};

struct CurveConfig {
  PointSpec point;
  std::uint64_t direction_seed = 0;
  double half_width = 0.05;
  std::size_t samples = 64;
};

struct ProbeKSpec {
  CurveConfig curve;
};

// Either one configured curve, or `tuned` curves across the parallelity locus.
struct ProbeJSpec {
  std::optional<CurveConfig> curve;
  std::size_t events = 3;
  std::size_t tuned = 0;
  double half_width = 1e-3;
  std::size_t samples = 17;
};

struct GeomSpec {
  std::vector<geom::LineFamily> families;
  std::size_t random_2d = 0;
  std::size_t random_3d = 0;
  std::size_t samples = 64;
  double rank_rel = 1e-9;
};

struct CpfSpec {
  std::size_t realizations = 200;
};

using CommandSpec = std::variant<SimulateSpec, NeutralSpec, StatsSpec, ProbeKSpec, ProbeJSpec, EnsembleSpec, GeomSpec,
                                 CpfSpec>;

struct RunConfig {
  std::string command;
  SystemParams params;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "run";
  unsigned workers = 1;
  CommandSpec spec;
  Json document;  // the config as read, echoed into the manifest
  std::string source;
};

// The recognised command block names, in documentation order.
const std::vector<std::string>& command_names();

// Throws ConfigError anchored at the offending line.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

std::string to_csv(const Table& table);
Json to_json(const Table& table);
Table table_from_json(const std::string& name, const Json& j);

struct Outcome {
  Json report;  // contains every table under "tables"
  std::vector<Table> tables;
  bool pass = true;
};

// Runs the command in memory. Library errors propagate.
Outcome execute(const RunConfig& config);

// Runs the command and writes report.json, one CSV per table and
// manifest.json into config.output_dir. Returns kOk or kFailed.
int run(const RunConfig& config);

// Work items 0..items-1 spread over `workers` threads; results are returned
// in item order. The first failure (lowest index among those observed) is
// rethrown after every started item has finished.
template <class F>
auto sweep(std::size_t items, unsigned workers, F&& work) -> std::vector<decltype(work(std::size_t{}))> {
  using R = decltype(work(std::size_t{}));
  std::vector<std::optional<R>> slots(items);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  auto loop = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items) return;
      try {
        slots[i].emplace(work(i));
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        abort = true;
      }
    }
  };
  const std::size_t extra = std::min<std::size_t>(workers > 0 ? workers - 1 : 0, items > 0 ? items - 1 : 0);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(items);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---- manifest and export --------------------------------------------------

std::string sha256_hex(const std::filesystem::path& file);

void write_manifest(const RunConfig& config, const std::vector<std::string>& files, const std::string& started,
                    const std::string& finished);

// Checks that manifest.json exists and every listed file matches its digest.
// Throws CorruptRun otherwise. Returns the manifest.
Json verify_run(const std::filesystem::path& dir);

enum class ExportFormat { csv, json };

// Re-emits every table of report.json into dir/export/<table>.<ext>.
// Returns the written paths.
std::vector<std::filesystem::path> export_run(const std::filesystem::path& dir, ExportFormat format);

// Configures the "billiard" spdlog logger from BILLIARD_LOG.
void setup_logging();

}  // namespace billiard::harness
