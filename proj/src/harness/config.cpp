#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "billiard/core.hpp"
#include "billiard/harness.hpp"

namespace billiard::harness {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",       "neutral",    "stats",      "probe-k",
                                              "probe-j",        "noncoincidence", "geom-check", "cpf-example"};
  return names;
}

namespace {

using Path = std::vector<std::string>;

std::string pointer(const Path& path) {
  std::string out;
  for (const auto& p : path) out += "/" + p;
  return out.empty() ? "/" : out;
}

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Line of the member named by `path`, found by walking the quoted keys in
// document order. Array indices keep the position of their parent.
int line_of(const std::string& text, const Path& path) {
  std::size_t pos = 0;
  for (const std::string& key : path) {
    if (!key.empty() && std::isdigit(static_cast<unsigned char>(key.front()))) continue;
    const std::string quoted = "\"" + key + "\"";
    std::size_t at = pos;
    while (true) {
      at = text.find(quoted, at);
      if (at == std::string::npos) return line_of_offset(text, pos);
      std::size_t after = at + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      at += quoted.size();
    }
    pos = at;
  }
  return line_of_offset(text, pos);
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const Path& path, const std::string& message) const {
    throw ConfigError(source_, line_of(text_, path), pointer(path) + ": " + message);
  }

  void only_keys(const Json& obj, const Path& path, const std::vector<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Path p = path;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  const Json* find(const Json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const Json& obj, const Path& path, const std::string& key, double fallback) const {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(child(path, key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(child(path, key), "must be finite");
    return x;
  }

  double positive(const Json& obj, const Path& path, const std::string& key, double fallback) const {
    const double x = number(obj, path, key, fallback);
    if (!(x > 0.0)) fail(child(path, key), "must be positive, got " + show(x));
    return x;
  }

  std::uint64_t unsigned_int(const Json& obj, const Path& path, const std::string& key, std::uint64_t fallback,
                             std::uint64_t min = 0) const {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      fail(child(path, key), "expected a non-negative integer");
    }
    const std::uint64_t x = v->get<std::uint64_t>();
    if (x < min) fail(child(path, key), "must be at least " + std::to_string(min));
    return x;
  }

  bool boolean(const Json& obj, const Path& path, const std::string& key, bool fallback) const {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(child(path, key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const Json& obj, const Path& path, const std::string& key) const {
    const Json* v = find(obj, key);
    if (!v || !v->is_string()) fail(child(path, key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const Json& v, const Path& path, std::size_t size) const {
    if (!v.is_array() || v.size() != size) fail(path, "expected an array of " + std::to_string(size) + " numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(path, "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Mat matrix(const Json& v, const Path& path, int rows, int cols) const {
    if (!v.is_array() || static_cast<int>(v.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows (one per ball)");
    }
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const std::vector<double> row = numbers(v[i], path, cols);
      for (int c = 0; c < cols; ++c) m(i, c) = row[c];
    }
    return m;
  }

  static Path child(Path p, const std::string& key) {
    p.push_back(key);
    return p;
  }

  static std::string show(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

SystemParams read_params(const Reader& r, const Json& j) {
  const Path path{"params"};
  r.only_keys(j, path, {"n_balls", "nu", "radius", "time_cap", "tolerances"});
  SystemParams p;
  p.n_balls = static_cast<int>(r.unsigned_int(j, path, "n_balls", 3, 2));
  p.nu = static_cast<int>(r.unsigned_int(j, path, "nu", 2, 2));
  p.radius = r.positive(j, path, "radius", 0.1);
  if (!(p.radius < 0.25)) r.fail(Reader::child(path, "radius"), "must be below 1/4");
  p.time_cap = r.positive(j, path, "time_cap", p.time_cap);
  if (const Json* t = r.find(j, "tolerances")) {
    const Path tp = Reader::child(path, "tolerances");
    r.only_keys(*t, tp, {"rank_rel", "tangency_eps", "coincidence_eps", "bisection_res", "fd_step"});
    p.tol.rank_rel = r.positive(*t, tp, "rank_rel", p.tol.rank_rel);
    if (!(p.tol.rank_rel < 1.0)) r.fail(Reader::child(tp, "rank_rel"), "must be below 1");
    p.tol.tangency_eps = r.positive(*t, tp, "tangency_eps", p.tol.tangency_eps);
    p.tol.coincidence_eps = r.positive(*t, tp, "coincidence_eps", p.tol.coincidence_eps);
    p.tol.bisection_res = r.positive(*t, tp, "bisection_res", p.tol.bisection_res);
    p.tol.fd_step = r.positive(*t, tp, "fd_step", p.tol.fd_step);
  }
  try {
    p.validate();
  } catch (const InvalidParams& e) {
    r.fail(path, e.what());
  }
  return p;
}

PointSpec read_point(const Reader& r, const Json& block, const Path& path, const SystemParams& params) {
  PointSpec out;
  const Json* seed = r.find(block, "seed");
  const Json* initial = r.find(block, "initial");
  if (seed && initial) r.fail(Reader::child(path, "initial"), "give either seed or initial, not both");
  if (seed) out.seed = r.unsigned_int(block, path, "seed", 0);
  if (initial) {
    const Path ip = Reader::child(path, "initial");
    r.only_keys(*initial, ip, {"q", "v"});
    if (!r.find(*initial, "q") || !r.find(*initial, "v")) r.fail(ip, "needs q and v");
    PhasePoint x;
    x.q = r.matrix((*initial)["q"], Reader::child(ip, "q"), params.n_balls, params.nu);
    x.v = r.matrix((*initial)["v"], Reader::child(ip, "v"), params.n_balls, params.nu);
    for (Eigen::Index i = 0; i < x.q.size(); ++i) x.q.data()[i] = wrap_unit(x.q.data()[i]);
    if (!satisfies_invariants(x, params, 1e-9, 1e-12)) {
      r.fail(ip, "needs zero total momentum, unit sum of |v_i|^2 (to 1e-9) and no overlapping balls");
    }
    out.initial = x;
  }
  return out;
}

CurveConfig read_curve(const Reader& r, const Json& j, const Path& path, const SystemParams& params) {
  r.only_keys(j, path, {"seed", "initial", "direction_seed", "half_width", "samples"});
  CurveConfig c;
  c.point = read_point(r, j, path, params);
  c.direction_seed = r.unsigned_int(j, path, "direction_seed", 0);
  c.half_width = r.positive(j, path, "half_width", c.half_width);
  c.samples = r.unsigned_int(j, path, "samples", c.samples, 2);
  return c;
}

geom::LineFamily read_family(const Reader& r, const Json& j, const Path& path) {
  r.only_keys(j, path, {"conic", "orientation", "s_range", "carrier"});
  const Json* conic = r.find(j, "conic");
  if (!conic) r.fail(path, "needs a conic");
  const Path cp = Reader::child(path, "conic");
  r.only_keys(*conic, cp, {"kind", "center", "semi_axes", "rotation"});
  const std::string kind = r.string(*conic, cp, "kind");
  const Json* center = r.find(*conic, "center");
  if (!center) r.fail(cp, "needs a center");
  const std::vector<double> c = r.numbers(*center, Reader::child(cp, "center"), 2);
  geom::ConicSpec spec;
  if (kind == "point") {
    if (r.find(*conic, "semi_axes")) r.fail(Reader::child(cp, "semi_axes"), "a point conic has no semi-axes");
    spec = geom::ConicSpec::point(geom::Vec2(c[0], c[1]));
  } else if (kind == "ellipse") {
    const Json* axes = r.find(*conic, "semi_axes");
    if (!axes) r.fail(cp, "an ellipse needs semi_axes");
    const std::vector<double> ab = r.numbers(*axes, Reader::child(cp, "semi_axes"), 2);
    try {
      spec = geom::ConicSpec::ellipse(geom::Vec2(c[0], c[1]), ab[0], ab[1], r.number(*conic, cp, "rotation", 0.0));
    } catch (const InvalidFamily& e) {
      r.fail(Reader::child(cp, "semi_axes"), e.what());
    }
  } else {
    r.fail(Reader::child(cp, "kind"), "expected \"point\" or \"ellipse\"");
  }

  std::optional<geom::Carrier> carrier;
  if (const Json* cj = r.find(j, "carrier")) {
    const Path kp = Reader::child(path, "carrier");
    r.only_keys(*cj, kp, {"normal", "distance"});
    const Json* normal = r.find(*cj, "normal");
    if (!normal) r.fail(kp, "needs a normal");
    const std::vector<double> n = r.numbers(*normal, Reader::child(kp, "normal"), 3);
    const geom::Vec3 nv(n[0], n[1], n[2]);
    if (nv.norm() == 0.0) r.fail(Reader::child(kp, "normal"), "must be non-zero");
    try {
      carrier = geom::Carrier::at_distance(nv, r.positive(*cj, kp, "distance", 0.5));
    } catch (const InvalidFamily& e) {
      r.fail(Reader::child(kp, "distance"), e.what());
    }
  }

  int orientation = 1;
  if (const Json* oj = r.find(j, "orientation")) {
    if (!oj->is_number_integer() || (oj->get<int>() != 1 && oj->get<int>() != -1)) {
      r.fail(Reader::child(path, "orientation"), "must be 1 or -1");
    }
    orientation = oj->get<int>();
  }

  geom::LineFamily f;
  if (const Json* sr = r.find(j, "s_range")) {
    const std::vector<double> s = r.numbers(*sr, Reader::child(path, "s_range"), 2);
    if (!(s[0] < s[1])) r.fail(Reader::child(path, "s_range"), "needs s_min < s_max");
    f.conic = spec;
    f.orientation = orientation;
    f.carrier = carrier;
    f.s_min = s[0];
    f.s_max = s[1];
  } else {
    try {
      f = geom::transversal_family(spec, orientation, carrier);
    } catch (const NoTransversalEntry& e) {
      r.fail(path, e.what());
    }
  }
  return f;
}

CommandSpec read_block(const Reader& r, const std::string& command, const Json& b, const SystemParams& params) {
  const Path path{command};
  if (command == "simulate") {
    r.only_keys(b, path, {"seed", "initial", "events", "time"});
    SimulateSpec s;
    s.point = read_point(r, b, path, params);
    const bool has_events = r.find(b, "events"), has_time = r.find(b, "time");
    if (has_events == has_time) r.fail(path, "give exactly one of events or time");
    if (has_events) s.events = r.unsigned_int(b, path, "events", 0);
    if (has_time) s.time = r.positive(b, path, "time", 1.0);
    return s;
  }
  if (command == "neutral") {
    r.only_keys(b, path, {"seed", "initial", "events", "fd_check"});
    NeutralSpec s;
    s.point = read_point(r, b, path, params);
    s.events = r.unsigned_int(b, path, "events", s.events);
    s.fd_check = r.boolean(b, path, "fd_check", false);
    return s;
  }
  if (command == "stats") {
    r.only_keys(b, path, {"sequence", "samples", "j_curves", "rejection_budget", "phantom_budget"});
    SymbolicSequence seq;
    try {
      seq = SymbolicSequence::parse(r.string(b, path, "sequence"), params.n_balls);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.fail(Reader::child(path, "sequence"), e.what());
    }
    StatsSpec s{std::move(seq), 1000, {}};
    s.samples = r.unsigned_int(b, path, "samples", s.samples);
    s.options.j_curves = r.unsigned_int(b, path, "j_curves", 0);
    s.options.rejection_budget = r.unsigned_int(b, path, "rejection_budget", s.options.rejection_budget);
    s.options.phantom_budget = r.unsigned_int(b, path, "phantom_budget", s.options.phantom_budget);
    return s;
  }
  if (command == "probe-k") {
    r.only_keys(b, path, {"curve"});
    if (!r.find(b, "curve")) r.fail(path, "needs a curve");
    return ProbeKSpec{read_curve(r, b["curve"], Reader::child(path, "curve"), params)};
  }
  if (command == "probe-j") {
    r.only_keys(b, path, {"curve", "events", "tuned", "half_width", "samples"});
    ProbeJSpec s;
    s.events = r.unsigned_int(b, path, "events", s.events, 1);
    s.tuned = r.unsigned_int(b, path, "tuned", 0);
    s.half_width = r.positive(b, path, "half_width", s.half_width);
    s.samples = r.unsigned_int(b, path, "samples", s.samples, 3);
    if (const Json* c = r.find(b, "curve")) s.curve = read_curve(r, *c, Reader::child(path, "curve"), params);
    if (s.curve.has_value() == (s.tuned > 0)) r.fail(path, "give exactly one of curve or tuned");
    if (s.tuned > 0 && (params.n_balls != 3 || params.nu != 2)) {
      r.fail(Reader::child(path, "tuned"), "tuned curves need n_balls = 3 and nu = 2");
    }
    return s;
  }
  if (command == "noncoincidence") {
    r.only_keys(b, path, {"curves", "half_width", "samples", "min_accepted", "forward_events"});
    EnsembleSpec s;
    s.curves = r.unsigned_int(b, path, "curves", s.curves);
    s.half_width = r.positive(b, path, "half_width", s.half_width);
    s.samples = r.unsigned_int(b, path, "samples", s.samples, 2);
    s.min_accepted = r.unsigned_int(b, path, "min_accepted", s.min_accepted);
    s.forward_events = r.unsigned_int(b, path, "forward_events", s.forward_events, 1);
    return s;
  }
  if (command == "geom-check") {
    r.only_keys(b, path, {"families", "random_2d", "random_3d", "samples", "rank_rel"});
    GeomSpec s;
    if (const Json* fams = r.find(b, "families")) {
      const Path fp = Reader::child(path, "families");
      if (!fams->is_array()) r.fail(fp, "expected an array");
      for (std::size_t i = 0; i < fams->size(); ++i) {
        s.families.push_back(read_family(r, (*fams)[i], Reader::child(fp, std::to_string(i))));
      }
    }
    s.random_2d = r.unsigned_int(b, path, "random_2d", 0);
    s.random_3d = r.unsigned_int(b, path, "random_3d", 0);
    s.samples = r.unsigned_int(b, path, "samples", s.samples, 20);
    s.rank_rel = r.positive(b, path, "rank_rel", s.rank_rel);
    return s;
  }
  r.only_keys(b, path, {"realizations"});
  if (params.n_balls != 3 || params.nu != 2) r.fail({"params"}, "cpf-example needs n_balls = 3 and nu = 2");
  return CpfSpec{r.unsigned_int(b, path, "realizations", 200)};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    if (const auto at = msg.find("]: "); at != std::string::npos) msg = msg.substr(at + 3);
    throw ConfigError(source, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), msg);
  }
  const Reader r(text, source);
  if (!doc.is_object()) r.fail({}, "config must be a JSON object");

  std::vector<std::string> allowed{"format_version", "params", "master_seed", "output_dir", "workers"};
  for (const auto& c : command_names()) allowed.push_back(c);
  r.only_keys(doc, {}, allowed);

  if (!r.find(doc, "format_version")) r.fail({}, "missing format_version");
  if (r.unsigned_int(doc, {}, "format_version", 0) != static_cast<std::uint64_t>(kFormatVersion)) {
    r.fail({"format_version"}, "unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
  }

  RunConfig cfg;
  cfg.document = doc;
  cfg.source = source;
  if (!r.find(doc, "params")) r.fail({}, "missing params");
  cfg.params = read_params(r, doc["params"]);
  cfg.master_seed = r.unsigned_int(doc, {}, "master_seed", 1);
  if (r.find(doc, "output_dir")) cfg.output_dir = r.string(doc, {}, "output_dir");
  cfg.workers = static_cast<unsigned>(r.unsigned_int(doc, {}, "workers", 1, 1));

  std::vector<std::string> present;
  for (const auto& c : command_names()) {
    if (r.find(doc, c)) present.push_back(c);
  }
  if (present.empty()) r.fail({}, "no command block (expected one of simulate, neutral, stats, probe-k, probe-j, "
                                  "noncoincidence, geom-check, cpf-example)");
  if (present.size() > 1) r.fail({present[1]}, "more than one command block (also " + present[0] + ")");
  cfg.command = present.front();
  cfg.spec = read_block(r, cfg.command, doc[cfg.command], cfg.params);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 1, "cannot read config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace billiard::harness
