#include "flowtrace/manifest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace flowtrace {

namespace {

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string strip_comment(const std::string& line) {
  size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ManifestError(where + ": expected a number, got '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& where) {
  double v = to_double(s, where);
  int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-12) throw ManifestError(where + ": expected an integer, got '" + s + "'");
  return i;
}

}  // namespace

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

Manifest Manifest::parse(const std::string& text, const std::string& origin) {
  Manifest m;
  bool have_n = false;
  int n_value = 0;
  std::map<std::string, std::map<std::string, std::string>> kv;
  std::string section;

  std::stringstream stream(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(stream, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    std::string where = origin + ":" + std::to_string(lineno);

    if (line.back() == ':' && line.find('=') == std::string::npos &&
        line.find(',') == std::string::npos) {
      section = trim(line.substr(0, line.size() - 1));
      continue;
    }
    if (section.empty()) throw ManifestError(where + ": content before any section header");

    if (section == "fields" || section == "fields_prime" || section == "fields_defect") {
      size_t colon = line.find(':');
      if (colon == std::string::npos)
        throw ManifestError(where + ": expected 'name: c1, c2, ...'");
      std::string name = trim(line.substr(0, colon));
      auto coeffs = split(line.substr(colon + 1), ',');
      if (name.empty() || coeffs.empty())
        throw ManifestError(where + ": expected 'name: c1, c2, ...'");
      VectorField field = [&] {
        try {
          return VectorField::parse(coeffs);
        } catch (const std::exception& e) {
          throw ManifestError(where + ": " + e.what());
        }
      }();
      NamedField nf{name, field};
      if (section == "fields") {
        m.fields.push_back(nf);
      } else if (section == "fields_prime") {
        m.fields_prime.push_back(nf);
      } else {
        m.fields_defect.push_back(nf);
      }
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ManifestError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ManifestError(where + ": expected 'key = value'");
    kv[section][key] = value;
  }

  auto take = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    auto s = kv.find(sec);
    if (s == kv.end()) return std::nullopt;
    auto it = s->second.find(key);
    if (it == s->second.end()) return std::nullopt;
    std::string v = it->second;
    s->second.erase(it);
    return v;
  };
  auto where_key = [&](const std::string& sec, const std::string& key) {
    return origin + ": " + sec + "." + key;
  };

  // domain
  if (auto v = take("domain", "n")) {
    n_value = to_int(*v, where_key("domain", "n"));
    have_n = true;
  }
  if (!have_n) {
    // Ambient fields carry n+1 slots, slice fields n: the count alone cannot
    // settle the slice dimension, so declared fields require an explicit n.
    if (!m.fields.empty())
      throw ManifestError(origin + ": domain.n is required when fields are declared");
    n_value = 3;
  }
  if (n_value < 1 || n_value > kMaxDim - 1)
    throw ManifestError(origin + ": domain.n out of range");
  m.domain = DomainSpec::defaults(n_value);

  auto read_box = [&](const std::string& key, Box& out) {
    if (auto v = take("domain", key)) {
      auto parts = split(*v, ',');
      if (parts.size() != 2) throw ManifestError(where_key("domain", key) + ": expected 'lo, hi'");
      double lo = to_double(parts[0], where_key("domain", key));
      double hi = to_double(parts[1], where_key("domain", key));
      out = Box::cube(n_value, lo, hi);
    }
  };
  read_box("V", m.domain.V);
  read_box("V1", m.domain.V1);
  read_box("V2", m.domain.V2);
  if (auto v = take("domain", "eps")) m.domain.eps = to_double(*v, where_key("domain", "eps"));
  if (auto v = take("domain", "grid_res"))
    m.domain.grid_res = to_int(*v, where_key("domain", "grid_res"));
  if (auto v = take("domain", "t_res")) m.domain.t_res = to_int(*v, where_key("domain", "t_res"));
  if (auto v = take("domain", "delta_max"))
    m.delta_max = to_double(*v, where_key("domain", "delta_max"));

  // norms
  if (auto v = take("norms", "p")) m.norms.p = to_double(*v, where_key("norms", "p"));
  if (auto v = take("norms", "t_nodes"))
    m.norms.t_nodes = to_int(*v, where_key("norms", "t_nodes"));
  if (auto v = take("norms", "tau_samples"))
    m.norms.tau_samples = to_int(*v, where_key("norms", "tau_samples"));
  if (auto v = take("norms", "delta")) {
    if (*v == "auto") {
      m.norms_delta_auto = true;
    } else {
      m.norms.delta = to_double(*v, where_key("norms", "delta"));
      m.norms_delta_auto = false;
    }
  }

  // extension
  if (auto v = take("extension", "quad_order"))
    m.extension.quad_order = to_int(*v, where_key("extension", "quad_order"));
  if (auto v = take("extension", "delta")) {
    if (*v == "auto") {
      m.extension.delta_auto = true;
    } else {
      m.extension.delta = to_double(*v, where_key("extension", "delta"));
      m.extension.delta_auto = false;
    }
  }
  if (auto v = take("extension", "seeley")) {
    // "a1:b1, a2:b2, ..."
    m.extension.seeley.clear();
    for (const auto& part : split(*v, ',')) {
      auto pair = split(part, ':');
      if (pair.size() != 2)
        throw ManifestError(where_key("extension", "seeley") + ": expected 'a:b' pairs");
      m.extension.seeley.push_back({to_double(pair[0], "seeley a"), to_double(pair[1], "seeley b")});
    }
  }

  // experiment
  auto& e = m.experiment;
  if (auto v = take("experiment", "corpus")) e.corpus = to_int(*v, "experiment.corpus");
  if (auto v = take("experiment", "ratio_bound"))
    e.ratio_bound = to_double(*v, "experiment.ratio_bound");
  if (auto v = take("experiment", "drift_bound"))
    e.drift_bound = to_double(*v, "experiment.drift_bound");
  if (auto v = take("experiment", "seed"))
    e.seed = static_cast<std::uint64_t>(to_double(*v, "experiment.seed"));
  if (auto v = take("experiment", "m")) e.singular_m = to_int(*v, "experiment.m");
  if (auto v = take("experiment", "s_min_exp")) e.s_min_exp = to_int(*v, "experiment.s_min_exp");
  if (auto v = take("experiment", "s_max_exp")) e.s_max_exp = to_int(*v, "experiment.s_max_exp");
  if (auto v = take("experiment", "ext_grid_res"))
    e.ext_grid_res = to_int(*v, "experiment.ext_grid_res");
  if (auto v = take("experiment", "ext_t_res")) e.ext_t_res = to_int(*v, "experiment.ext_t_res");
  if (auto v = take("experiment", "slope_lo")) e.slope_lo = to_double(*v, "experiment.slope_lo");
  if (auto v = take("experiment", "slope_hi")) e.slope_hi = to_double(*v, "experiment.slope_hi");
  if (auto v = take("experiment", "defect_lo")) e.defect_lo = to_double(*v, "experiment.defect_lo");
  if (auto v = take("experiment", "defect_hi")) e.defect_hi = to_double(*v, "experiment.defect_hi");
  if (auto v = take("experiment", "run")) e.run = split(*v, ',');

  for (const auto& [sec, entries] : kv)
    for (const auto& [key, value] : entries)
      throw ManifestError(origin + ": unknown key '" + sec + "." + key + "'");

  m.domain.validate();
  m.norms.validate();
  return m;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> Manifest::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& nf : fields) out.emplace_back("field." + nf.name, nf.field.str());
  for (const auto& nf : fields_prime) out.emplace_back("field_prime." + nf.name, nf.field.str());
  for (const auto& nf : fields_defect) out.emplace_back("field_defect." + nf.name, nf.field.str());
  out.emplace_back("domain.n", std::to_string(domain.n()));
  out.emplace_back("domain.V", fmt(domain.V.lo[0]) + ".." + fmt(domain.V.hi[0]));
  out.emplace_back("domain.V1", fmt(domain.V1.lo[0]) + ".." + fmt(domain.V1.hi[0]));
  out.emplace_back("domain.V2", fmt(domain.V2.lo[0]) + ".." + fmt(domain.V2.hi[0]));
  out.emplace_back("domain.eps", fmt(domain.eps));
  out.emplace_back("domain.grid_res", std::to_string(domain.grid_res));
  out.emplace_back("domain.t_res", std::to_string(domain.t_res));
  out.emplace_back("domain.delta_max", fmt(delta_max));
  out.emplace_back("norms.p", fmt(norms.p));
  out.emplace_back("norms.delta", norms_delta_auto ? "auto" : fmt(norms.delta));
  out.emplace_back("norms.t_nodes", std::to_string(norms.t_nodes));
  out.emplace_back("norms.tau_samples", std::to_string(norms.tau_samples));
  out.emplace_back("extension.quad_order", std::to_string(extension.quad_order));
  out.emplace_back("extension.delta", extension.delta_auto ? "auto" : fmt(extension.delta));
  {
    std::string s;
    for (const auto& term : extension.seeley) {
      if (!s.empty()) s += ", ";
      s += fmt(term.a) + ":" + fmt(term.b);
    }
    out.emplace_back("extension.seeley", s);
  }
  out.emplace_back("experiment.corpus", std::to_string(experiment.corpus));
  out.emplace_back("experiment.ratio_bound", fmt(experiment.ratio_bound));
  out.emplace_back("experiment.drift_bound", fmt(experiment.drift_bound));
  out.emplace_back("experiment.seed", std::to_string(experiment.seed));
  out.emplace_back("experiment.m", std::to_string(experiment.singular_m));
  out.emplace_back("experiment.s_exp", std::to_string(experiment.s_min_exp) + ".." +
                                           std::to_string(experiment.s_max_exp));
  out.emplace_back("experiment.ext_grid_res", std::to_string(experiment.ext_grid_res));
  out.emplace_back("experiment.ext_t_res", std::to_string(experiment.ext_t_res));
  return out;
}

}  // namespace flowtrace
