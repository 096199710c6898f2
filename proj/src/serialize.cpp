#include "metocean/serialize.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metocean/error.hpp"

namespace metocean {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double json_to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorKind::Schema, "expected a number, got " + j.dump());
}

namespace {

Json number_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

std::vector<double> doubles(const Json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(json_to_double(x));
  return v;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw Error(ErrorKind::Schema, std::string("missing field '") + name + "'");
  return j.at(name);
}

void check_schema(const Json& j, const std::string& type) {
  if (!j.contains("schema") || j.at("schema") != kSchemaVersion || !j.contains("type") || j.at("type") != type) {
    throw Error(ErrorKind::Schema, "expected a " + type + " document with schema " + kSchemaVersion);
  }
}

}  // namespace

Json to_json(const MarginalModel& m) {
  Json body = Json::array();
  for (const auto& b : m.body) body.push_back({{"x", number_array(b.x)}, {"p", number_array(b.p)}});
  return {{"schema", kSchemaVersion},
          {"type", "ppc-marginal"},
          {"variable", m.variable},
          {"tau", json_number(m.tau)},
          {"xi", json_number(m.xi)},
          {"psi", number_array(m.psi)},
          {"sigma", number_array(m.sigma)},
          {"penalty", json_number(m.penalty)},
          {"bin_weight", number_array(m.bin_weight)},
          {"body", body}};
}

MarginalModel marginal_from_json(const Json& j) {
  check_schema(j, "ppc-marginal");
  MarginalModel m;
  m.variable = field(j, "variable").get<std::string>();
  m.tau = json_to_double(field(j, "tau"));
  m.xi = json_to_double(field(j, "xi"));
  m.psi = doubles(field(j, "psi"));
  m.sigma = doubles(field(j, "sigma"));
  m.penalty = json_to_double(field(j, "penalty"));
  m.bin_weight = doubles(field(j, "bin_weight"));
  for (const auto& b : field(j, "body")) m.body.push_back({doubles(field(b, "x")), doubles(field(b, "p"))});
  if (m.psi.size() != m.sigma.size() || m.psi.size() != m.body.size()) {
    throw Error(ErrorKind::Schema, "marginal model: per-bin arrays differ in length");
  }
  return m;
}

Json to_json(const CEModel& m) {
  return {{"schema", kSchemaVersion},
          {"type", "conditional-extremes"},
          {"q", m.q},
          {"kappa", json_number(m.kappa)},
          {"psi_L", json_number(m.psi_L)},
          {"alpha", number_array(m.alpha)},
          {"beta", json_number(m.beta)},
          {"mu", json_number(m.mu)},
          {"zeta", json_number(m.zeta)},
          {"penalty", json_number(m.penalty)},
          {"residuals", number_array(m.residuals)},
          {"warnings", m.warnings}};
}

CEModel ce_from_json(const Json& j) {
  check_schema(j, "conditional-extremes");
  CEModel m;
  m.q = field(j, "q").get<int>();
  m.kappa = json_to_double(field(j, "kappa"));
  m.psi_L = json_to_double(field(j, "psi_L"));
  m.alpha = doubles(field(j, "alpha"));
  m.beta = json_to_double(field(j, "beta"));
  m.mu = json_to_double(field(j, "mu"));
  m.zeta = json_to_double(field(j, "zeta"));
  m.penalty = json_to_double(field(j, "penalty"));
  m.residuals = doubles(field(j, "residuals"));
  if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

Json to_json(const HierarchicalModel& m) {
  return {{"schema", kSchemaVersion},
          {"type", "hierarchical"},
          {"shape", json_number(m.shape)},
          {"scale", json_number(m.scale)},
          {"a", number_array({m.a.begin(), m.a.end()})},
          {"b", number_array({m.b.begin(), m.b.end()})}};
}

HierarchicalModel hierarchical_from_json(const Json& j) {
  check_schema(j, "hierarchical");
  HierarchicalModel m;
  m.shape = json_to_double(field(j, "shape"));
  m.scale = json_to_double(field(j, "scale"));
  const auto a = doubles(field(j, "a")), b = doubles(field(j, "b"));
  if (a.size() != 3 || b.size() != 3) throw Error(ErrorKind::Schema, "hierarchical model: a and b need 3 entries");
  std::copy(a.begin(), a.end(), m.a.begin());
  std::copy(b.begin(), b.end(), m.b.begin());
  return m;
}

Json to_json(const JointExtremesModel& m) {
  Json body = Json::array();
  for (std::size_t i = 0; i < m.body.size(); ++i) {
    body.push_back({json_number(m.body[i][0]), json_number(m.body[i][1]), m.body_bin[i]});
  }
  return {{"schema", kSchemaVersion},
          {"type", "ppc-ce"},
          {"hs", to_json(m.hs)},
          {"tp", to_json(m.tp)},
          {"tp_given_hs", to_json(m.tp_given_hs)},
          {"hs_given_tp", to_json(m.hs_given_tp)},
          {"p_extreme", json_number(m.p_extreme)},
          {"body", body}};
}

JointExtremesModel joint_from_json(const Json& j) {
  check_schema(j, "ppc-ce");
  JointExtremesModel m;
  m.hs = marginal_from_json(field(j, "hs"));
  m.tp = marginal_from_json(field(j, "tp"));
  m.tp_given_hs = ce_from_json(field(j, "tp_given_hs"));
  m.hs_given_tp = ce_from_json(field(j, "hs_given_tp"));
  m.p_extreme = json_to_double(field(j, "p_extreme"));
  for (const auto& row : field(j, "body")) {
    m.body.push_back({json_to_double(row.at(0)), json_to_double(row.at(1))});
    m.body_bin.push_back(row.at(2).get<std::size_t>());
  }
  return m;
}

Json to_json(const ResponseModel& m) {
  return {{"name", m.name},
          {"kind", m.kind == ResponseKind::Deterministic ? "deterministic" : "rayleigh"},
          {"form", m.form == ResponseForm::Resonant ? "resonant" : "base-shear"},
          {"params", number_array({m.params.begin(), m.params.end()})}};
}

ResponseModel response_from_json(const Json& j) {
  ResponseModel m;
  m.name = field(j, "name").get<std::string>();
  const auto kind = field(j, "kind").get<std::string>();
  const auto form = field(j, "form").get<std::string>();
  if (kind == "deterministic") {
    m.kind = ResponseKind::Deterministic;
  } else if (kind == "rayleigh") {
    m.kind = ResponseKind::Rayleigh;
  } else {
    throw Error(ErrorKind::Config, "response '" + m.name + "': unknown kind '" + kind + "'");
  }
  if (form == "resonant") {
    m.form = ResponseForm::Resonant;
  } else if (form == "base-shear") {
    m.form = ResponseForm::BaseShear;
  } else {
    throw Error(ErrorKind::Config, "response '" + m.name + "': unknown form '" + form + "'");
  }
  const auto p = doubles(field(j, "params"));
  if (p.size() != 3) throw Error(ErrorKind::Config, "response '" + m.name + "': params needs 3 values");
  std::copy(p.begin(), p.end(), m.params.begin());
  validate(m);
  return m;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Input, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Input, "write failed for '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Schema, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string events_csv(const std::vector<StormEvent>& events) {
  std::string out = "event,hs,tp,n_states\n";
  out.reserve(events.size() * 40);
  for (std::size_t i = 0; i < events.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(events[i].hs);
    out += ',';
    out += format_double(events[i].tp);
    out += ',';
    out += std::to_string(events[i].n_states);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    f.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return f;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Schema, "bad number '" + s + "'");
  return v;
}

template <typename Row>
void for_each_row(const std::string& text, const std::string& header, Row&& row) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(header, 0) != 0) {
    throw Error(ErrorKind::Schema, "expected header '" + header + "'");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) row(split_line(line));
  }
}

}  // namespace

std::vector<StormEvent> parse_events_csv(const std::string& text) {
  std::vector<StormEvent> events;
  for_each_row(text, "event,hs,tp,n_states", [&](const std::vector<std::string>& f) {
    if (f.size() != 4) throw Error(ErrorKind::Schema, "events: expected 4 fields");
    events.push_back({parse_double(f[1]), parse_double(f[2]), 0, static_cast<int>(parse_double(f[3]))});
  });
  return events;
}

std::string contour_csv(const Contour& c) {
  std::string out = "theta_rad,x1,x2,attained,loop\n";
  auto emit = [&](const std::vector<ContourPoint>& loop, std::size_t id) {
    for (const auto& p : loop) {
      out += format_double(p.theta) + ',' + format_double(p.x1) + ',' + format_double(p.x2) + ',' +
             (p.attained ? "1" : "0") + ',' + std::to_string(id) + '\n';
    }
  };
  emit(c.points, 0);
  for (std::size_t i = 0; i < c.extra.size(); ++i) emit(c.extra[i], i + 1);
  return out;
}

Contour parse_contour_csv(const std::string& text) {
  Contour c;
  for_each_row(text, "theta_rad,x1,x2", [&](const std::vector<std::string>& f) {
    if (f.size() < 3) throw Error(ErrorKind::Schema, "contour: expected at least 3 fields");
    ContourPoint p{parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), f.size() < 4 || f[3] != "0"};
    const std::size_t loop = f.size() >= 5 ? static_cast<std::size_t>(parse_double(f[4])) : 0;
    if (loop == 0) {
      c.points.push_back(p);
    } else {
      if (c.extra.size() < loop) c.extra.resize(loop);
      c.extra[loop - 1].push_back(p);
    }
  });
  return c;
}

Json contour_sidecar(const Contour& c) {
  return {{"method", to_string(c.method)},
          {"T", json_number(c.T)},
          {"alpha", json_number(c.alpha)},
          {"enclosed_p", json_number(c.enclosed_p)},
          {"level", json_number(c.level)},
          {"reference", {json_number(c.reference[0]), json_number(c.reference[1])}},
          {"n_points", c.points.size()},
          {"n_loops", 1 + c.extra.size()},
          {"warnings", c.warnings}};
}

}  // namespace metocean
