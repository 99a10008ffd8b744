#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "billiard/core.hpp"
#include "billiard/dynamics.hpp"
#include "billiard/harness.hpp"
#include "billiard/neutral.hpp"

namespace billiard::harness {

namespace {

constexpr double kJAgreement = 1e-6;
constexpr double kCpfTolerance = 1e-10;
constexpr std::size_t kCpfAttempts = 20000;

std::shared_ptr<spdlog::logger> log() {
  if (auto l = spdlog::get("billiard")) return l;
  setup_logging();
  return spdlog::get("billiard");
}

Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

Json vector_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json point_json(const PhasePoint& x) { return Json{{"q", matrix_json(x.q)}, {"v", matrix_json(x.v)}}; }

Json params_json(const SystemParams& p) {
  return Json{{"n_balls", p.n_balls},
              {"nu", p.nu},
              {"radius", p.radius},
              {"time_cap", p.time_cap},
              {"tolerances",
               {{"rank_rel", p.tol.rank_rel},
                {"tangency_eps", p.tol.tangency_eps},
                {"coincidence_eps", p.tol.coincidence_eps},
                {"bisection_res", p.tol.bisection_res},
                {"fd_step", p.tol.fd_step}}}};
}

Json pair_json(const Pair& p) { return Json::array({p.first + 1, p.second + 1}); }

Json optional_dim(int d) { return d < 0 ? Json(nullptr) : Json(d); }

PhasePoint resolve_point(const PointSpec& spec, const RunConfig& cfg) {
  if (spec.initial) return *spec.initial;
  return sample_phase_point(cfg.params, spec.seed.value_or(cfg.master_seed));
}

CurveSpec resolve_curve(const CurveConfig& c, const RunConfig& cfg) {
  return admissible(cfg.params,
                    random_curve(resolve_point(c.point, cfg), c.direction_seed, c.half_width, c.samples));
}

Table crossings_table() {
  return Table{"crossings", {"kind", "u_star", "residual", "dim_left", "dim_at", "dim_right", "pair_i", "pair_j"}, {}};
}

void add_crossing(Table& t, const CrossingReport& c) {
  Json pi = nullptr, pj = nullptr;
  if (c.witness) {
    pi = c.witness->pair.first + 1;
    pj = c.witness->pair.second + 1;
  }
  t.rows.push_back({std::string(to_string(c.kind)), c.u_star, c.residual, optional_dim(c.dim_left),
                    optional_dim(c.dim_at), optional_dim(c.dim_right), pi, pj});
}

Json crossing_json(const CrossingReport& c, const Tolerances& tol) {
  Json j{{"kind", std::string(to_string(c.kind))},
         {"u_star", c.u_star},
         {"residual", c.residual},
         {"accepted", c.accepted(tol)}};
  if (c.kind == CrossingKind::K) {
    j["bracket_pair_stable"] = c.bracket_pair_stable;
    if (c.witness) {
      j["pair"] = pair_json(c.witness->pair);
      j["tau"] = c.witness->time;
      j["event_kind"] = std::string(to_string(c.witness->kind));
    }
  } else {
    j["dims"] = Json::array({c.dim_left, c.dim_at, c.dim_right});
    j["sigma_min"] = c.sigma_min;
    j["sigma_max"] = c.sigma_max;
  }
  return j;
}

// ---- commands ---------------------------------------------------------------

Outcome simulate(const RunConfig& cfg, const SimulateSpec& s) {
  const PhasePoint x = resolve_point(s.point, cfg);
  const StopRule stop = s.events ? StopRule::after_events(*s.events) : StopRule::at_time(*s.time);
  const TrajectorySegment seg = advance_flow(cfg.params, x, stop);

  const int nu = cfg.params.nu;
  Table events{"events", {"index", "time", "pair_i", "pair_j", "kind"}, {}};
  for (const char* prefix : {"normal_", "v_rel_pre_", "v_rel_post_"}) {
    for (int c = 1; c <= nu; ++c) events.columns.push_back(prefix + std::to_string(c));
  }
  for (std::size_t k = 0; k < seg.events.size(); ++k) {
    const CollisionEvent& e = seg.events[k];
    std::vector<Json> row{k + 1, e.time, e.pair.first + 1, e.pair.second + 1, std::string(to_string(e.kind))};
    for (const Vec* v : {&e.normal, &e.v_rel_pre, &e.v_rel_post}) {
      for (int c = 0; c < nu; ++c) row.push_back((*v)[c]);
    }
    events.rows.push_back(std::move(row));
  }

  Outcome out;
  out.report["events"] = seg.events.size();
  out.report["horizon"] = seg.horizon;
  out.report["sequence"] = SymbolicSequence::from_segment(seg).to_string();
  out.report["momentum_drift"] = (seg.final.total_momentum() - x.total_momentum()).norm();
  out.report["energy_drift"] = std::abs(seg.final.kinetic() - x.kinetic());
  out.report["initial"] = point_json(x);
  out.report["final"] = point_json(seg.final);
  out.tables.push_back(std::move(events));
  return out;
}

Outcome neutral(const RunConfig& cfg, const NeutralSpec& s) {
  const PhasePoint x = resolve_point(s.point, cfg);
  const StopRule stop = StopRule::after_events(s.events);
  const TrajectorySegment seg = advance_flow(cfg.params, x, stop);
  const SymbolicSequence seq = SymbolicSequence::from_segment(seg);

  Table t{"neutral", {"prefix", "dimension", "sigma_min", "sigma_max"}, {}};
  std::vector<int> profile;
  for (std::size_t m = 0; m <= seg.events.size(); ++m) {
    const NeutralSpaceResult r = neutral_space(seg, cfg.params.tol, m);
    profile.push_back(r.dimension);
    t.rows.push_back({m, r.dimension, r.sigma_min, r.sigma_max});
  }
  const NeutralSpaceResult full = neutral_space(seg, cfg.params.tol);
  const bool connected = collision_graph(cfg.params.n_balls, seq, seq.size()).connected();

  Outcome out;
  out.report["events"] = seg.events.size();
  out.report["sequence"] = seq.to_string();
  out.report["profile"] = profile;
  out.report["dimension"] = full.dimension;
  out.report["connected"] = connected;
  out.report["sufficient"] = connected ? Json(full.dimension == 1) : Json(nullptr);
  out.report["singular_values"] = vector_json(full.singular_values);
  out.report["dq_basis"] = matrix_json(full.dq_basis);
  if (s.fd_check) {
    try {
      const FdKernelResult fd = fd_jacobian_kernel(cfg.params, x, stop);
      out.report["fd_dimension"] = fd.dimension;
      out.report["fd_agrees"] = fd.dimension == full.dimension;
      out.pass = fd.dimension == full.dimension;
    } catch (const FragileSegment& e) {
      out.report["fd_fragile"] = e.what();
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

Outcome stats(const RunConfig& cfg, const StatsSpec& s) {
  std::vector<DimensionSample> samples;
  if (s.samples > 0) {
    samples.push_back(dimension_sample(cfg.params, s.sequence, cfg.master_seed, 0, RealizationMode::rejection,
                                       s.options));
    const RealizationMode mode = samples.front().mode;
    auto rest = sweep(s.samples - 1, cfg.workers, [&](std::size_t i) {
      return dimension_sample(cfg.params, s.sequence, cfg.master_seed, i + 1, mode, s.options);
    });
    for (auto& r : rest) samples.push_back(std::move(r));
  }
  const DimensionStats st = summarize_dimension_stats(cfg.params, s.sequence, cfg.master_seed, samples, s.options);

  Table t{"dimensions", {"prefix", "dimension", "count"}, {}};
  Json hist = Json::array();
  for (std::size_t m = 0; m < st.histogram.size(); ++m) {
    Json h = Json::object();
    for (const auto& [dim, count] : st.histogram[m]) {
      t.rows.push_back({m, dim, count});
      h[std::to_string(dim)] = count;
    }
    hist.push_back(h);
  }
  Outcome out;
  out.report["sequence"] = st.sequence.to_string();
  out.report["samples"] = st.samples;
  out.report["mode"] = std::string(to_string(st.mode));
  out.report["delta"] = st.delta;
  out.report["monotone"] = st.monotone;
  out.report["delta_J"] = st.delta_J ? Json(*st.delta_J) : Json(nullptr);
  out.report["j_points"] = st.j_points;
  out.report["histogram"] = hist;
  out.pass = st.monotone;
  out.tables.push_back(std::move(t));
  return out;
}

Outcome probe_k(const RunConfig& cfg, const ProbeKSpec& s) {
  const CurveSpec curve = resolve_curve(s.curve, cfg);
  const std::vector<CrossingReport> found = scan_K(cfg.params, curve);
  Table t = crossings_table();
  Json list = Json::array();
  std::size_t accepted = 0;
  for (const CrossingReport& c : found) {
    add_crossing(t, c);
    list.push_back(crossing_json(c, cfg.params.tol));
    if (c.accepted(cfg.params.tol)) ++accepted;
  }
  Outcome out;
  out.report["u_range"] = Json::array({curve.u_min, curve.u_max});
  out.report["samples"] = curve.samples;
  out.report["accepted"] = accepted;
  out.report["crossings"] = list;
  out.tables.push_back(std::move(t));
  return out;
}

Outcome probe_j(const RunConfig& cfg, const ProbeJSpec& s) {
  Table t = crossings_table();
  Outcome out;
  if (s.curve) {
    const CurveSpec curve = resolve_curve(*s.curve, cfg);
    Json list = Json::array();
    for (const CrossingReport& c : scan_J(cfg.params, curve, StopRule::after_events(s.events))) {
      add_crossing(t, c);
      list.push_back(crossing_json(c, cfg.params.tol));
    }
    out.report["u_range"] = Json::array({curve.u_min, curve.u_max});
    out.report["crossings"] = list;
    out.tables.push_back(std::move(t));
    return out;
  }

  struct Item {
    double u_root = 0.0;
    std::vector<CrossingReport> crossings;
  };
  const auto items = sweep(s.tuned, cfg.workers, [&](std::size_t i) {
    const TunedCurve tc = tuned_parallelity_curve(cfg.params, derive_seed(cfg.master_seed, i), s.half_width, s.samples);
    return Item{tc.u_root, scan_J(cfg.params, tc.curve, StopRule::after_events(3))};
  });
  Table agree{"agreement", {"curve", "u_root", "u_star", "difference", "dim_left", "dim_at", "dim_right"}, {}};
  double worst = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (const CrossingReport& c : items[i].crossings) add_crossing(t, c);
    if (items[i].crossings.size() != 1 || !items[i].crossings.front().accepted(cfg.params.tol)) {
      agree.rows.push_back({i, items[i].u_root, nullptr, nullptr, nullptr, nullptr, nullptr});
      out.pass = false;
      continue;
    }
    const CrossingReport& c = items[i].crossings.front();
    const double diff = std::abs(c.u_star - items[i].u_root);
    worst = std::max(worst, diff);
    if (diff <= kJAgreement) ++matched;
    agree.rows.push_back({i, items[i].u_root, c.u_star, diff, c.dim_left, c.dim_at, c.dim_right});
  }
  out.pass = out.pass && matched == items.size();
  out.report["tuned_curves"] = items.size();
  out.report["matched"] = matched;
  out.report["max_difference"] = worst;
  out.report["tolerance"] = kJAgreement;
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(agree));
  return out;
}

Outcome noncoincidence(const RunConfig& cfg, EnsembleSpec spec) {
  spec.master_seed = cfg.master_seed;
  auto outcomes = sweep(spec.curves, cfg.workers, [&](std::size_t i) {
    CurveOutcome o = noncoincidence_curve(cfg.params, spec, i);
    log()->debug("curve {}: {} witnesses", i, o.witnesses.size());
    return o;
  });
  const NoncoincidenceReport r = summarize_noncoincidence(spec, std::move(outcomes));
  Table t{"witnesses", {"curve", "u_star", "residual", "pair_i", "pair_j", "connected", "sufficient", "dimension"}, {}};
  for (const KWitness& w : r.witnesses) {
    t.rows.push_back({w.curve, w.u_star, w.residual, w.pair.first + 1, w.pair.second + 1, w.connected, w.sufficient,
                      optional_dim(w.dimension)});
  }
  Outcome out;
  out.report["curves"] = r.curves;
  out.report["curves_skipped"] = r.curves_skipped;
  out.report["accepted"] = r.accepted;
  out.report["sufficient"] = r.sufficient;
  out.report["non_sufficient"] = r.non_sufficient;
  out.report["sufficient_fraction"] = r.sufficient_fraction();
  out.report["disconnected"] = r.disconnected;
  out.report["singular"] = r.singular;
  out.report["unstable"] = r.unstable;
  out.report["verdict"] = r.pass ? "PASS" : "FAIL";
  out.pass = r.pass;
  out.tables.push_back(std::move(t));
  return out;
}

Outcome geom_check(const RunConfig& cfg, const GeomSpec& s) {
  struct Item {
    std::string source;
    geom::LineFamily family;
  };
  std::vector<Item> items;
  for (const auto& f : s.families) items.push_back({"config", f});
  auto random2 = sweep(s.random_2d, cfg.workers,
                       [&](std::size_t i) { return geom::random_family_2d(derive_seed(cfg.master_seed, i)); });
  auto random3 = sweep(s.random_3d, cfg.workers, [&](std::size_t i) {
    return geom::random_family_3d(derive_seed(cfg.master_seed ^ 0x3d3d3d3dULL, i));
  });
  for (auto& f : random2) items.push_back({"random_2d", std::move(f)});
  for (auto& f : random3) items.push_back({"random_3d", std::move(f)});

  struct Result {
    bool admissible = false;
    geom::SpanReport span;
    std::optional<geom::EnvelopeReport> envelope;
  };
  const auto results = sweep(items.size(), cfg.workers, [&](std::size_t i) {
    const geom::LineFamily& f = items[i].family;
    Result r;
    r.admissible = f.admissible();
    r.span = geom::span_test(f, s.samples, s.rank_rel,
                             r.admissible ? geom::Admissibility::required : geom::Admissibility::waived);
    try {
      r.envelope = geom::envelope_check(f, s.samples);
    } catch (const EnvelopeMismatch&) {
    }
    return r;
  });

  Table t{"geom",
          {"family", "source", "conic", "ambient", "admissible", "dimension", "sigma_min", "envelope_case",
           "envelope_residual"},
          {}};
  Outcome out;
  std::size_t full = 0, admissible = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Result& r = results[i];
    t.rows.push_back({i, items[i].source, std::string(geom::to_string(items[i].family.conic.kind)), r.span.ambient,
                      r.admissible, r.span.dimension, r.span.sigma_min,
                      r.envelope ? Json(std::string(geom::to_string(r.envelope->which))) : Json(nullptr),
                      r.envelope ? Json(r.envelope->max_residual) : Json(nullptr)});
    if (!r.envelope) out.pass = false;
    if (!r.admissible) continue;
    ++admissible;
    if (r.span.dimension == r.span.ambient) {
      ++full;
    } else {
      out.pass = false;
    }
  }
  out.report["families"] = items.size();
  out.report["admissible"] = admissible;
  out.report["full_span"] = full;
  out.tables.push_back(std::move(t));
  return out;
}

Outcome cpf_example(const RunConfig& cfg, const CpfSpec& s) {
  const std::vector<Pair> pairs{{0, 1}, {0, 2}, {1, 2}};
  Mat expected_disp(3, 2);
  expected_disp << 1.0 / 3, 1.0 / 3, -2.0 / 3, 1.0 / 3, 1.0 / 3, -2.0 / 3;
  const std::vector<double> expected_pre{0.0, 0.5}, expected_post{-1.0, 0.5};

  struct Item {
    std::size_t attempt = 0;
    EliminatedRelation rel;
    double relation_residual = 0.0;
    DisplacementCoefficients disp;
    std::vector<int> profile;
  };
  const auto items = sweep(s.realizations, cfg.workers, [&](std::size_t i) {
    const std::uint64_t base = derive_seed(cfg.master_seed, i);
    for (std::size_t k = 0; k < kCpfAttempts; ++k) {
      TrajectorySegment seg;
      try {
        seg = advance_flow(cfg.params, sample_phase_point(cfg.params, derive_seed(base, k)), StopRule::after_events(3));
      } catch (const SingularEvent&) {
        continue;
      }
      if (seg.pairs() != pairs) continue;
      Item it;
      it.attempt = k;
      const NeutralitySystem sys = build_neutrality_system(seg);
      it.rel = cpf_eliminate(sys, 2);
      const NeutralSpaceResult ns = neutral_space(sys, cfg.params.tol);
      for (int b = 0; b < ns.dimension; ++b) {
        it.relation_residual = std::max(it.relation_residual, it.rel.residual(ns.alpha_basis.col(b)));
      }
      it.disp = displacement_coefficients(seg, 2, 1, cfg.params.tol);
      it.profile = dimension_profile(seg, cfg.params.tol);
      return it;
    }
    throw SequenceUnrealizable("cpf-example: realization " + std::to_string(i) + " not found within " +
                               std::to_string(kCpfAttempts) + " attempts");
  });

  Table t{"cpf",
          {"realization", "attempt", "pre_1", "post_1", "pre_2", "post_2", "coefficient_error", "displacement_error",
           "relation_residual", "profile"},
          {}};
  double coef_err = 0.0, disp_err = 0.0, residual = 0.0;
  bool profiles_ok = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    double ce = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      ce = std::max({ce, std::abs(it.rel.pre[k] - expected_pre[k]), std::abs(it.rel.post[k] - expected_post[k])});
    }
    const double de = (it.disp.coefficients - expected_disp).cwiseAbs().maxCoeff();
    coef_err = std::max(coef_err, ce);
    disp_err = std::max(disp_err, de);
    residual = std::max(residual, it.relation_residual);
    profiles_ok = profiles_ok && it.profile == std::vector<int>{4, 3, 2, 1};
    std::string prof;
    for (int d : it.profile) prof += (prof.empty() ? "" : " ") + std::to_string(d);
    t.rows.push_back({i, it.attempt, it.rel.pre[0], it.rel.post[0], it.rel.pre[1], it.rel.post[1], ce, de,
                      it.relation_residual, prof});
  }

  Outcome out;
  out.report["sequence"] = "(1,2);(1,3);(2,3)";
  out.report["realizations"] = items.size();
  if (!items.empty()) {
    const Item& first = items.front();
    // The relation for the third collision reads
    // alpha_3 g_3^- = post_1 alpha_1 g_1^+ + pre_2 alpha_2 g_2^- + post_2 alpha_2 g_2^+.
    out.report["coefficients"] = Json::array({first.rel.post[0], first.rel.pre[1], first.rel.post[1]});
    out.report["displacement_coefficients"] = matrix_json(first.disp.coefficients);
    out.report["profile"] = first.profile;
  }
  out.report["expected_coefficients"] = Json::array({-1.0, 0.5, 0.5});
  out.report["max_coefficient_error"] = coef_err;
  out.report["max_displacement_error"] = disp_err;
  out.report["max_relation_residual"] = residual;
  out.report["tolerance"] = kCpfTolerance;
  out.pass = coef_err <= kCpfTolerance && disp_err <= kCpfTolerance && profiles_ok;
  out.tables.push_back(std::move(t));
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

// ---- tables -------------------------------------------------------------------

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      const Json& cell = row[c];
      if (cell.is_null()) continue;
      out += cell.is_string() ? cell.get<std::string>() : cell.dump();
    }
    out += "\n";
  }
  return out;
}

Json to_json(const Table& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) rows.push_back(Json(row));
  return Json{{"columns", table.columns}, {"rows", rows}};
}

Table table_from_json(const std::string& name, const Json& j) {
  Table t;
  t.name = name;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) t.rows.push_back(row.get<std::vector<Json>>());
  return t;
}

// ---- execution ------------------------------------------------------------------

Outcome execute(const RunConfig& cfg) {
  Outcome out = std::visit(
      [&](const auto& spec) -> Outcome {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, SimulateSpec>) return simulate(cfg, spec);
        if constexpr (std::is_same_v<T, NeutralSpec>) return neutral(cfg, spec);
        if constexpr (std::is_same_v<T, StatsSpec>) return stats(cfg, spec);
        if constexpr (std::is_same_v<T, ProbeKSpec>) return probe_k(cfg, spec);
        if constexpr (std::is_same_v<T, ProbeJSpec>) return probe_j(cfg, spec);
        if constexpr (std::is_same_v<T, EnsembleSpec>) return noncoincidence(cfg, spec);
        if constexpr (std::is_same_v<T, GeomSpec>) return geom_check(cfg, spec);
        if constexpr (std::is_same_v<T, CpfSpec>) return cpf_example(cfg, spec);
      },
      cfg.spec);

  Json report{{"format_version", kFormatVersion},
              {"command", cfg.command},
              {"master_seed", cfg.master_seed},
              {"params", params_json(cfg.params)},
              {"result", out.report},
              {"pass", out.pass}};
  Json tables = Json::object();
  for (const Table& t : out.tables) tables[t.name] = to_json(t);
  report["tables"] = tables;
  out.report = std::move(report);
  return out;
}

int run(const RunConfig& cfg) {
  const std::string started = utc_now();
  log()->info("{}: master_seed {} workers {}", cfg.command, cfg.master_seed, cfg.workers);
  const Outcome out = execute(cfg);

  std::filesystem::create_directories(cfg.output_dir);
  std::vector<std::string> files{"report.json"};
  write_file(cfg.output_dir / "report.json", out.report.dump(2) + "\n");
  for (const Table& t : out.tables) {
    files.push_back(t.name + ".csv");
    write_file(cfg.output_dir / files.back(), to_csv(t));
  }
  write_manifest(cfg, files, started, utc_now());
  log()->info("{}: wrote {} files to {}", cfg.command, files.size() + 1, cfg.output_dir.string());
  if (!out.pass) {
    log()->error("{}: experiment FAIL", cfg.command);
    return kFailed;
  }
  return kOk;
}

void setup_logging() {
  auto logger = spdlog::get("billiard");
  if (!logger) logger = spdlog::stderr_color_mt("billiard");
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("BILLIARD_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::err);
    if (level != "error") logger->error("BILLIARD_LOG={} not recognised (error, info, debug); using error", level);
  }
}

}  // namespace billiard::harness
