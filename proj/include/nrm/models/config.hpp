#pragma once

// Family construction from key/value settings, shared by the CLI and by
// config files of the form
//
//   family = stable
//   alpha = 0.5
//   theta = 1
//
// Blank lines and lines starting with '#' are ignored.

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/models/families.hpp"

namespace nrm {

using Settings = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
}

}  // namespace detail

inline Settings parse_settings(std::istream& in) {
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = detail::trim(t.substr(eq + 1));
  }
  return out;
}

inline Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_settings(in);
}

inline double require_number(const Settings& s, const std::string& key) {
  auto it = s.find(key);
  if (it == s.end()) throw ConfigError("missing parameter '" + key + "'");
  return detail::parse_double(key, it->second);
}

inline double number_or(const Settings& s, const std::string& key, double fallback) {
  auto it = s.find(key);
  return it == s.end() ? fallback : detail::parse_double(key, it->second);
}

/// Parses "v:w,v:w,...".
inline std::vector<std::pair<double, double>> parse_atoms(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.emplace_back(detail::parse_double("atoms", item), 1.0);
    } else {
      out.emplace_back(detail::parse_double("atoms", item.substr(0, colon)),
                       detail::parse_double("atoms", item.substr(colon + 1)));
    }
  }
  if (out.empty()) throw ConfigError("'atoms' is empty");
  return out;
}

/// Families: dirichlet, stable, gen-gamma, beta, ggc, first-passage, gig.
inline FamilyPtr make_family(const Settings& s) {
  auto it = s.find("family");
  if (it == s.end()) throw ConfigError("missing 'family'");
  const std::string& name = it->second;
  try {
    if (name == "dirichlet") {
      return std::make_shared<Dirichlet>(require_number(s, "theta"));
    }
    if (name == "stable") {
      return std::make_shared<Stable>(require_number(s, "alpha"), number_or(s, "theta", 1.0));
    }
    if (name == "gen-gamma") {
      return std::make_shared<GenGamma>(require_number(s, "alpha"), require_number(s, "b"),
                                        number_or(s, "theta", 1.0));
    }
    if (name == "beta") {
      return std::make_shared<BetaNrm>(require_number(s, "c"), number_or(s, "mass", 1.0));
    }
    if (name == "gig") {
      return std::make_shared<Gig>(require_number(s, "lambda"), require_number(s, "delta"),
                                   require_number(s, "v"));
    }
    if (name == "first-passage" || name == "ggc") {
      ThorinMeasure thorin = [&] {
        if (name == "first-passage") return first_passage_thorin(require_number(s, "p"));
        auto a = s.find("atoms");
        if (a == s.end()) throw ConfigError("ggc: missing 'atoms' (v:w,...)");
        return ThorinMeasure::atoms(parse_atoms(a->second));
      }();
      const double tilt = number_or(s, "tilt", 0.0);
      if (tilt != 0.0) thorin = thorin.tilt(tilt);
      return std::make_shared<Ggc>(number_or(s, "theta", 1.0), thorin, name);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  throw ConfigError("unknown family '" + name +
                    "' (expected dirichlet, stable, gen-gamma, beta, ggc, first-passage, gig)");
}

}  // namespace nrm
