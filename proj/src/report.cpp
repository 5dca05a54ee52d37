#include "loopspec/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace loopspec {

using json = nlohmann::ordered_json;

const char* version_string() {
#ifdef LOOPSPEC_VERSION
  return "loopspec " LOOPSPEC_VERSION;
#else
  return "loopspec";
#endif
}

namespace {

int line_at_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

class Checker {
 public:
  Checker(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    const std::size_t leaf = field.find_last_of('.');
    const std::string key = "\"" + (leaf == std::string::npos ? field : field.substr(leaf + 1)) + "\"";
    const std::size_t pos = text_.find(key);
    if (pos != std::string::npos) os << ":" << line_at_offset(text_, pos);
    os << ": field '" << field << "': " << msg;
    throw Error(ErrorKind::Config, os.str());
  }

  void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }

  double number(const json& obj, const std::string& key, const std::string& path, double fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(path, "expected a number");
    return obj[key].get<double>();
  }

  int integer(const json& obj, const std::string& key, const std::string& path, int fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail(path, "expected an integer");
    return obj[key].get<int>();
  }

  bool boolean(const json& obj, const std::string& key, const std::string& path, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(path, "expected true or false");
    return obj[key].get<bool>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& path,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) fail(path, "expected a string");
    return obj[key].get<std::string>();
  }

  std::vector<double> numbers(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.contains(key)) return {};
    if (!obj[key].is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const json& v : obj[key]) {
      if (!v.is_number()) fail(path, "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  const std::string& text_;
  std::string origin_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, origin + ":" + std::to_string(line_at_offset(text, e.byte)) +
                                       ": parse error: " + e.what());
  }
  const Checker ck(text, origin);
  if (!doc.is_object()) ck.fail("<root>", "expected an object");
  ck.only_keys(doc, "", {"curve", "samples", "betas", "j_max", "n_modes", "operator", "halfwidth",
                         "mesh", "strip", "export_pencil", "neumann_sign", "tolerance_scale",
                         "output", "threads"});

  RunConfig cfg;
  if (!doc.contains("curve") || !doc["curve"].is_object()) ck.fail("curve", "required object missing");
  const json& c = doc["curve"];
  ck.only_keys(c, "curve", {"kind", "radius", "semi_a", "semi_b", "x_cos", "x_sin", "y_cos", "y_sin",
                            "orientation"});
  cfg.curve.kind = ck.string(c, "kind", "curve.kind", "");
  const std::string orient = ck.string(c, "orientation", "curve.orientation", "ccw");
  if (orient == "ccw") cfg.curve.orientation = Orientation::CounterClockwise;
  else if (orient == "cw") cfg.curve.orientation = Orientation::Clockwise;
  else ck.fail("curve.orientation", "expected \"ccw\" or \"cw\"");
  if (cfg.curve.kind == "circle") {
    cfg.curve.radius = ck.number(c, "radius", "curve.radius", 1.0);
    if (!(cfg.curve.radius > 0.0)) ck.fail("curve.radius", "must be positive");
  } else if (cfg.curve.kind == "ellipse") {
    cfg.curve.semi_a = ck.number(c, "semi_a", "curve.semi_a", 2.0);
    cfg.curve.semi_b = ck.number(c, "semi_b", "curve.semi_b", 1.0);
    if (!(cfg.curve.semi_a > 0.0)) ck.fail("curve.semi_a", "must be positive");
    if (!(cfg.curve.semi_b > 0.0)) ck.fail("curve.semi_b", "must be positive");
  } else if (cfg.curve.kind == "fourier") {
    cfg.curve.fourier.x_cos = ck.numbers(c, "x_cos", "curve.x_cos");
    cfg.curve.fourier.x_sin = ck.numbers(c, "x_sin", "curve.x_sin");
    cfg.curve.fourier.y_cos = ck.numbers(c, "y_cos", "curve.y_cos");
    cfg.curve.fourier.y_sin = ck.numbers(c, "y_sin", "curve.y_sin");
  } else {
    ck.fail("curve.kind", "expected \"circle\", \"ellipse\" or \"fourier\"");
  }

  cfg.samples = ck.integer(doc, "samples", "samples", cfg.samples);
  if (cfg.samples < 16) ck.fail("samples", "need at least 16");
  if (doc.contains("betas")) {
    cfg.betas = ck.numbers(doc, "betas", "betas");
    if (cfg.betas.empty()) ck.fail("betas", "empty sweep");
    for (std::size_t k = 0; k < cfg.betas.size(); ++k) {
      if (!(cfg.betas[k] > 0.0 && cfg.betas[k] < 1.0)) ck.fail("betas", "values must lie in (0, 1)");
      if (k > 0 && !(cfg.betas[k] < cfg.betas[k - 1])) ck.fail("betas", "values must be strictly descending");
    }
  }
  cfg.j_max = ck.integer(doc, "j_max", "j_max", cfg.j_max);
  if (cfg.j_max < 1) ck.fail("j_max", "must be >= 1");
  cfg.n_modes = ck.integer(doc, "n_modes", "n_modes", cfg.n_modes);
  if (cfg.n_modes < 0) ck.fail("n_modes", "must be >= 0");
  if (cfg.n_modes > 0 && cfg.n_modes < cfg.j_max) ck.fail("n_modes", "must be >= j_max");
  cfg.operator_kind = ck.string(doc, "operator", "operator", cfg.operator_kind);
  if (cfg.operator_kind != "S" && cfg.operator_kind != "S0" && cfg.operator_kind != "U+" &&
      cfg.operator_kind != "U-")
    ck.fail("operator", "expected \"S\", \"S0\", \"U+\" or \"U-\"");
  cfg.halfwidth = ck.number(doc, "halfwidth", "halfwidth", cfg.halfwidth);
  if (cfg.halfwidth < 0.0) ck.fail("halfwidth", "must be >= 0");

  if (doc.contains("mesh")) {
    const json& m = doc["mesh"];
    if (!m.is_object()) ck.fail("mesh", "expected an object");
    ck.only_keys(m, "mesh", {"grid_1d", "transverse", "n_s", "n_u", "grading"});
    cfg.mesh.grid_1d = ck.integer(m, "grid_1d", "mesh.grid_1d", cfg.mesh.grid_1d);
    cfg.mesh.transverse = ck.integer(m, "transverse", "mesh.transverse", cfg.mesh.transverse);
    cfg.mesh.n_s = ck.integer(m, "n_s", "mesh.n_s", cfg.mesh.n_s);
    cfg.mesh.n_u = ck.integer(m, "n_u", "mesh.n_u", cfg.mesh.n_u);
    cfg.mesh.grading = ck.number(m, "grading", "mesh.grading", cfg.mesh.grading);
    const int modes = cfg.n_modes > 0 ? cfg.n_modes : cfg.j_max + 8;
    if (cfg.mesh.grid_1d != 0 && cfg.mesh.grid_1d < 4 * modes)
      ck.fail("mesh.grid_1d", "must be 0 or at least 4 n_modes");
    if (cfg.mesh.transverse < 32) ck.fail("mesh.transverse", "need at least 32");
    if (cfg.mesh.n_s < 32) ck.fail("mesh.n_s", "need at least 32");
    if (cfg.mesh.n_u < 16) ck.fail("mesh.n_u", "need at least 16");
  }

  cfg.strip = ck.boolean(doc, "strip", "strip", cfg.strip);
  cfg.export_pencil = ck.boolean(doc, "export_pencil", "export_pencil", cfg.export_pencil);
  cfg.neumann_sign = ck.number(doc, "neumann_sign", "neumann_sign", cfg.neumann_sign);
  if (cfg.neumann_sign != 1.0 && cfg.neumann_sign != -1.0) ck.fail("neumann_sign", "expected 1 or -1");
  cfg.tolerance_scale = ck.number(doc, "tolerance_scale", "tolerance_scale", cfg.tolerance_scale);
  if (!(cfg.tolerance_scale > 0.0)) ck.fail("tolerance_scale", "must be positive");
  cfg.threads = ck.integer(doc, "threads", "threads", cfg.threads);
  if (cfg.threads < 1) ck.fail("threads", "must be >= 1");

  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_object()) ck.fail("output", "expected an object");
    ck.only_keys(o, "output", {"dir", "formats"});
    cfg.out_dir = ck.string(o, "dir", "output.dir", cfg.out_dir);
    if (o.contains("formats")) {
      if (!o["formats"].is_array() || o["formats"].empty()) ck.fail("output.formats", "expected a non-empty array");
      cfg.formats.clear();
      for (const json& f : o["formats"]) {
        if (!f.is_string() || (f != "csv" && f != "json")) ck.fail("output.formats", "entries must be \"csv\" or \"json\"");
        cfg.formats.push_back(f.get<std::string>());
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json to_json(const RunConfig& cfg) {
  json c;
  c["kind"] = cfg.curve.kind;
  if (cfg.curve.kind == "circle") {
    c["radius"] = cfg.curve.radius;
  } else if (cfg.curve.kind == "ellipse") {
    c["semi_a"] = cfg.curve.semi_a;
    c["semi_b"] = cfg.curve.semi_b;
  } else {
    c["x_cos"] = cfg.curve.fourier.x_cos;
    c["x_sin"] = cfg.curve.fourier.x_sin;
    c["y_cos"] = cfg.curve.fourier.y_cos;
    c["y_sin"] = cfg.curve.fourier.y_sin;
  }
  c["orientation"] = cfg.curve.orientation == Orientation::CounterClockwise ? "ccw" : "cw";

  json j;
  j["curve"] = c;
  j["samples"] = cfg.samples;
  j["betas"] = cfg.betas;
  j["j_max"] = cfg.j_max;
  j["n_modes"] = cfg.n_modes;
  j["operator"] = cfg.operator_kind;
  j["halfwidth"] = cfg.halfwidth;
  j["mesh"] = {{"grid_1d", cfg.mesh.grid_1d},
               {"transverse", cfg.mesh.transverse},
               {"n_s", cfg.mesh.n_s},
               {"n_u", cfg.mesh.n_u},
               {"grading", cfg.mesh.grading}};
  j["strip"] = cfg.strip;
  j["export_pencil"] = cfg.export_pencil;
  j["neumann_sign"] = cfg.neumann_sign;
  j["tolerance_scale"] = cfg.tolerance_scale;
  j["output"] = {{"dir", cfg.out_dir}, {"formats", cfg.formats}};
  j["threads"] = cfg.threads;
  return j;
}

Curve make_curve(const CurveConfig& cfg) {
  if (cfg.kind == "circle") return Curve::circle(cfg.radius, cfg.orientation);
  if (cfg.kind == "ellipse") return Curve::ellipse(cfg.semi_a, cfg.semi_b, cfg.orientation);
  if (cfg.kind == "fourier") return Curve::fourier(cfg.fourier, cfg.orientation);
  throw Error(ErrorKind::Config, "unknown curve kind '" + cfg.kind + "'");
}

std::string format_number(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

Table::Table(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

Table& Table::row() {
  cells_.emplace_back();
  cells_.back().reserve(columns_.size());
  return *this;
}

Table& Table::add(double x) {
  cells_.back().push_back(x);
  return *this;
}
Table& Table::add(int x) {
  cells_.back().push_back(x);
  return *this;
}
Table& Table::add(bool x) {
  cells_.back().push_back(x);
  return *this;
}
Table& Table::add(const std::string& x) {
  cells_.back().push_back(x);
  return *this;
}

void Table::write_csv(std::ostream& os, const json& meta) const {
  os << "# " << version_string() << "\n";
  os << "# table: " << name_ << "\n";
  os << "# config: " << meta.dump() << "\n";
  for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
  os << "\n";
  for (const auto& r : cells_) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << ",";
      const json& v = r[c];
      if (v.is_number_float()) os << format_number(v.get<double>());
      else if (v.is_boolean()) os << (v.get<bool>() ? "true" : "false");
      else if (v.is_string()) os << v.get<std::string>();
      else os << v.dump();
    }
    os << "\n";
  }
}

json Table::to_json() const {
  json t;
  t["columns"] = columns_;
  json rows = json::array();
  for (const auto& r : cells_) rows.push_back(json(r));
  t["rows"] = rows;
  return t;
}

void write_outputs(const std::string& dir, const std::string& stem, const RunConfig& cfg,
                   const std::vector<Table>& tables, const json& extra) {
  std::filesystem::create_directories(dir);
  const json meta = to_json(cfg);
  for (const std::string& fmt : cfg.formats) {
    if (fmt == "csv") {
      for (const Table& t : tables) {
        const std::string name = tables.size() == 1 ? stem : stem + "_" + t.name();
        std::ofstream os(std::filesystem::path(dir) / (name + ".csv"));
        t.write_csv(os, meta);
        if (!os) throw Error(ErrorKind::Config, "cannot write " + name + ".csv in " + dir);
      }
      if (!extra.empty()) {
        std::ofstream os(std::filesystem::path(dir) / (stem + "_summary.json"));
        json doc;
        doc["version"] = version_string();
        doc["config"] = meta;
        for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
        os << doc.dump(2) << "\n";
      }
    } else {
      json doc;
      doc["version"] = version_string();
      doc["config"] = meta;
      json tabs;
      for (const Table& t : tables) tabs[t.name()] = t.to_json();
      doc["tables"] = tabs;
      for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
      std::ofstream os(std::filesystem::path(dir) / (stem + ".json"));
      os << doc.dump(2) << "\n";
      if (!os) throw Error(ErrorKind::Config, "cannot write " + stem + ".json in " + dir);
    }
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::NotClosed:
    case ErrorKind::SelfIntersecting:
    case ErrorKind::TooFewSamples:
    case ErrorKind::DegenerateSpeed:
      return 2;
    case ErrorKind::OffsetTooLarge:
    case ErrorKind::HalfwidthTooLarge:
    case ErrorKind::NoNegativeEigenvalue:
    case ErrorKind::CouplingTooWeak:
    case ErrorKind::InvalidBeta:
    case ErrorKind::HypothesisViolated:
      return 3;
    default:
      return 4;
  }
}

}  // namespace loopspec
