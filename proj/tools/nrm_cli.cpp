// nrm: command-line front end for the NRM library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nrm/nrm.hpp"
#include "self_test.hpp"

namespace {

using nrm::ConfigError;
using nrm::Settings;
using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kCapability = 4 };

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// ---- settings access ----

bool has(const Settings& s, const std::string& key) { return s.count(key) > 0; }

double get_double(const Settings& s, const std::string& key, std::optional<double> fallback = {}) {
  if (!has(s, key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing --" + key);
  }
  return nrm::require_number(s, key);
}

long long get_int(const Settings& s, const std::string& key, std::optional<long long> fallback,
                  long long lo, long long hi) {
  if (!has(s, key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing --" + key);
  }
  const std::string& text = s.at(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v >= lo && v <= hi) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + key + " expects an integer in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "], got '" + text + "'");
}

std::uint64_t get_seed(const Settings& s) {
  const std::string& text = s.at("seed");
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("--seed expects a non-negative 64-bit integer, got '" + text + "'");
}

std::string get_choice(const Settings& s, const std::string& key, const std::string& fallback,
                       const std::vector<std::string>& allowed) {
  const std::string v = has(s, key) ? s.at(key) : fallback;
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    throw ConfigError("--" + key + " must be one of {" + join(allowed, ", ") + "}, got '" + v + "'");
  }
  return v;
}

std::vector<int> get_sizes(const Settings& s) {
  if (!has(s, "sizes")) throw ConfigError("missing --sizes (e.g. --sizes 2,1)");
  std::vector<int> out;
  std::stringstream ss(s.at("sizes"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = nrm::detail::trim(item);
    try {
      std::size_t used = 0;
      const int v = std::stoi(t, &used);
      if (used == t.size() && v > 0) {
        out.push_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    throw ConfigError("--sizes expects positive integers separated by commas, got '" +
                      s.at("sizes") + "'");
  }
  if (out.empty()) throw ConfigError("--sizes is empty");
  return out;
}

// u is either a positive number or the sentinel "marginal".
std::optional<double> get_u(const Settings& s) {
  const bool marginal = has(s, "marginal") && s.at("marginal") == "true";
  if (has(s, "u") && s.at("u") == "marginal") return std::nullopt;
  if (has(s, "u")) {
    if (marginal) throw ConfigError("--u and --marginal are mutually exclusive");
    const double u = get_double(s, "u");
    if (!(u > 0) || !std::isfinite(u)) throw ConfigError("--u must be positive");
    return u;
  }
  return std::nullopt;
}

std::string params_string(const nrm::NrmFamily& f) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : f.parameters()) parts.push_back(k + "=" + num(v));
  return join(parts, ";");
}

json params_json(const nrm::NrmFamily& f) {
  json j = json::object();
  for (const auto& [k, v] : f.parameters()) j[k] = v;
  return j;
}

std::string sizes_string(const std::vector<int>& sizes) {
  std::vector<std::string> parts;
  for (int e : sizes) parts.push_back(std::to_string(e));
  return join(parts, ",");
}

// ---- output ----

class Table {
 public:
  Table(std::string command, const Settings& cfg, bool jsonl)
      : command_(std::move(command)), cfg_(cfg), jsonl_(jsonl) {}

  bool jsonl() const { return jsonl_; }

  void columns(std::vector<std::string> cols) { cols_ = std::move(cols); }

  void row(const std::vector<std::string>& csv, const json& j) {
    if (jsonl_) {
      body_ << j.dump() << '\n';
    } else {
      std::vector<std::string> f;
      for (const auto& c : csv) f.push_back(csv_field(c));
      body_ << join(f, ",") << '\n';
    }
  }

  void raw(const std::string& text) { body_ << text; }

  void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

  std::string render() const {
    std::ostringstream out;
    if (jsonl_) {
      json h;
      h["nrm_version"] = nrm::kVersion;
      h["command"] = command_;
      json c = json::object();
      for (const auto& [k, v] : cfg_) c[k] = v;
      h["config"] = c;
      for (const auto& [k, v] : notes_) h[k] = v;
      out << json{{"header", h}}.dump() << '\n';
    } else {
      out << "# nrm " << nrm::kVersion << '\n';
      out << "# command=" << command_ << '\n';
      for (const auto& [k, v] : cfg_) out << "# " << k << '=' << v << '\n';
      for (const auto& [k, v] : notes_) out << "# " << k << '=' << v << '\n';
      out << join(cols_, ",") << '\n';
    }
    out << body_.str();
    return out.str();
  }

 private:
  std::string command_;
  Settings cfg_;
  bool jsonl_;
  std::vector<std::string> cols_;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::ostringstream body_;
};

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  const char* dir = std::getenv("NRM_OUTPUT_DIR");
  if (p.is_relative() && dir && *dir) p = std::filesystem::path(dir) / p;
  return p;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + p.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing output file '" + p.string() + "'");
}

// Main output: --output (relative paths resolve under NRM_OUTPUT_DIR), or
// NRM_OUTPUT_DIR/<command>.<ext> when only the directory is set, else stdout.
std::optional<std::filesystem::path> main_output_path(const Settings& cfg,
                                                      const std::string& command, bool jsonl) {
  if (has(cfg, "output")) return resolve_output(cfg.at("output"));
  const char* dir = std::getenv("NRM_OUTPUT_DIR");
  if (dir && *dir) return std::filesystem::path(dir) / (command + (jsonl ? ".jsonl" : ".csv"));
  return std::nullopt;
}

void emit(const Table& t, const Settings& cfg, const std::string& command) {
  const std::string text = t.render();
  if (auto p = main_output_path(cfg, command, t.jsonl())) {
    write_text(*p, text);
    std::cerr << "wrote " << p->string() << '\n';
  } else {
    std::cout << text;
  }
}

// Runs body(chain, rng, rows) for each chain on its own thread with seed
// base + chain; rows are concatenated in chain order.
template <class Body>
std::vector<std::vector<std::pair<std::vector<std::string>, json>>> run_chains(
    const Settings& cfg, Body&& body) {
  const int chains = static_cast<int>(get_int(cfg, "chains", 1, 1, 1024));
  const std::uint64_t seed = get_seed(cfg);
  std::vector<std::vector<std::pair<std::vector<std::string>, json>>> rows(chains);
  std::vector<std::exception_ptr> errors(chains);
  {
    std::vector<std::jthread> threads;
    for (int c = 0; c < chains; ++c) {
      threads.emplace_back([&, c] {
        try {
          nrm::RandomStream rng(seed + static_cast<std::uint64_t>(c));
          body(c, seed + static_cast<std::uint64_t>(c), rng, rows[c]);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

// ---- commands ----

void cmd_eppf(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const auto sizes = get_sizes(cfg);
  const auto u = get_u(cfg);
  const double value = u ? nrm::conditional_eppf(*family, sizes, *u)
                         : nrm::marginal_eppf(*family, sizes);
  t.columns({"family", "params", "sizes", "u", "value"});
  t.row({family->name(), params_string(*family), sizes_string(sizes), u ? num(*u) : "marginal",
         num(value)},
        json{{"family", family->name()},
             {"params", params_json(*family)},
             {"sizes", sizes},
             {"u", u ? json(*u) : json("marginal")},
             {"value", value}});
}

void cmd_block_counts(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const int n = static_cast<int>(get_int(cfg, "n", {}, 1, 64));
  const auto u = get_u(cfg);
  if (!u) throw ConfigError("block-counts needs --u (a positive number)");
  const auto probs = nrm::block_count_distribution(*family, n, *u);
  t.columns({"family", "params", "n", "u", "k", "probability"});
  for (int k = 1; k <= n; ++k) {
    t.row({family->name(), params_string(*family), std::to_string(n), num(*u), std::to_string(k),
           num(probs[k - 1])},
          json{{"family", family->name()}, {"n", n}, {"u", *u}, {"k", k},
               {"probability", probs[k - 1]}});
  }
}

void cmd_predictive(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const auto sizes = get_sizes(cfg);
  const auto w = nrm::predictive_weights(*family, sizes);
  t.columns({"family", "params", "sizes", "target", "cell_size", "weight"});
  const std::string ps = params_string(*family), ss = sizes_string(sizes);
  t.row({family->name(), ps, ss, "new", "0", num(w.zeta0)},
        json{{"target", "new"}, {"cell_size", 0}, {"weight", w.zeta0}});
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    t.row({family->name(), ps, ss, "cell" + std::to_string(j + 1), std::to_string(sizes[j]),
           num(w.zetas[j])},
          json{{"target", "cell" + std::to_string(j + 1)}, {"cell_size", sizes[j]},
               {"weight", w.zetas[j]}});
  }
}

void cmd_sample_partition(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const int n = static_cast<int>(get_int(cfg, "n", {}, 1, 100000));
  const auto fixed_u = get_u(cfg);
  const int draws = static_cast<int>(get_int(cfg, "draws", 10, 0, 100000000));
  const std::string method = get_choice(
      cfg, "method", n <= nrm::kMaxExactSamplerSize ? "exact" : "gibbs", {"exact", "gibbs", "sis"});
  const int burn_in = static_cast<int>(get_int(cfg, "burn-in", 100, 0, 100000000));
  const int thin = static_cast<int>(get_int(cfg, "thin", 1, 1, 1000000));
  if (method == "sis" && !fixed_u) throw ConfigError("--method sis needs a fixed --u");
  const bool sis = method == "sis";

  auto rows = run_chains(cfg, [&](int chain, std::uint64_t seed, nrm::RandomStream& rng,
                                  auto& out) {
    auto record = [&](int d, double u, const nrm::Partition& p, double log_w) {
      std::vector<std::string> csv{std::to_string(chain), std::to_string(seed), std::to_string(d),
                                   num(u), p.to_string(), std::to_string(p.k())};
      json j{{"chain", chain}, {"seed", seed}, {"draw", d}, {"u", u},
             {"partition", p.to_string()}, {"k", p.k()}};
      if (sis) {
        csv.push_back(num(log_w));
        j["log_weight"] = log_w;
      }
      out.emplace_back(std::move(csv), std::move(j));
    };
    if (method == "exact") {
      std::optional<nrm::ExactPartitionSampler> at_u;
      if (fixed_u) at_u.emplace(*family, n, *fixed_u);
      for (int d = 0; d < draws; ++d) {
        const double u = fixed_u ? *fixed_u : nrm::sample_u_marginal(*family, n, rng).u;
        const auto p = at_u ? at_u->draw(rng) : nrm::sample_partition_exact(*family, n, u, rng);
        record(d, u, p, 0.0);
      }
    } else if (sis) {
      const nrm::WcrSis proposal(*family, n, *fixed_u);
      for (int d = 0; d < draws; ++d) {
        const auto w = proposal.draw(rng);
        record(d, *fixed_u, w.partition, w.log_weight);
      }
    } else {
      nrm::LatentState s;
      s.u = fixed_u ? *fixed_u : nrm::sample_u_marginal(*family, n, rng).u;
      s.partition = nrm::Partition::singletons(n);
      for (int it = 0, d = 0; d < draws; ++it) {
        s = nrm::gibbs_sweep(*family, s, rng, {}, !fixed_u);
        if (it >= burn_in && (it - burn_in) % thin == 0) record(d++, s.u, s.partition, 0.0);
      }
    }
  });
  std::vector<std::string> cols{"chain", "seed", "draw", "u", "partition", "k"};
  if (sis) cols.push_back("log_weight");
  t.columns(cols);
  t.note("method", method);
  for (const auto& chain : rows) {
    for (const auto& [csv, j] : chain) t.row(csv, j);
  }
}

void cmd_sample_marginal(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const int n = static_cast<int>(get_int(cfg, "n", {}, 1, 100000));
  const int draws = static_cast<int>(get_int(cfg, "draws", 10, 0, 100000000));
  const std::string base = get_choice(cfg, "base", "normal", {"normal", "uniform"});
  std::function<double(nrm::RandomStream&)> h;
  if (base == "normal") {
    h = [](nrm::RandomStream& r) { return r.normal(); };
  } else {
    h = [](nrm::RandomStream& r) { return r.uniform(); };
  }
  auto rows = run_chains(cfg, [&](int chain, std::uint64_t seed, nrm::RandomStream& rng,
                                  auto& out) {
    for (int d = 0; d < draws; ++d) {
      const auto s = nrm::sample_marginal_M(*family, n, rng, h);
      const auto x = nrm::observations(s);
      std::vector<std::string> xs;
      for (double v : x) xs.push_back(num(v));
      out.emplace_back(
          std::vector<std::string>{std::to_string(chain), std::to_string(seed), std::to_string(d),
                                   num(s.u), s.partition.to_string(),
                                   std::to_string(s.partition.k()), join(xs, " ")},
          json{{"chain", chain}, {"seed", seed}, {"draw", d}, {"u", s.u},
               {"partition", s.partition.to_string()}, {"k", s.partition.k()},
               {"uniques", s.uniques}, {"observations", x}});
    }
  });
  t.columns({"chain", "seed", "draw", "u", "partition", "k", "observations"});
  for (const auto& chain : rows) {
    for (const auto& [csv, j] : chain) t.row(csv, j);
  }
}

void cmd_inversion_check(const Settings& cfg, Table& t) {
  const auto family = nrm::make_family(cfg);
  const int n = static_cast<int>(get_int(cfg, "n", {}, 1, 100000));
  const double lo = get_double(cfg, "y-min", 0.1), hi = get_double(cfg, "y-max", 6.0);
  const int points = static_cast<int>(get_int(cfg, "points", 60, 2, 1000000));
  const int draws = static_cast<int>(get_int(cfg, "draws", 0, 0, 100000000));
  if (!(lo > 0) || !(hi > lo)) throw ConfigError("need 0 < --y-min < --y-max");

  // Y = n T / Gamma_n; its CDF by quadrature of the inversion density.
  auto density = [&](double y) { return nrm::inversion_density(*family, n, y); };
  std::vector<double> ys, f, cdf;
  double acc = nrm::integrate(density, 0.0, lo).value;
  for (int i = 0; i < points; ++i) {
    const double y = lo + (hi - lo) * i / (points - 1);
    if (i > 0) acc += nrm::integrate(density, ys.back(), y).value;
    ys.push_back(y);
    f.push_back(density(y));
    cdf.push_back(acc);
  }
  std::vector<double> sample;
  if (draws > 0) {
    if (!family->capabilities().has_T_sampler) {
      throw nrm::CapabilityError(family->name() + ": no sampler for T; use --draws 0");
    }
    nrm::RandomStream rng(get_seed(cfg));
    for (int d = 0; d < draws; ++d) {
      sample.push_back(n * family->sample_total_mass(rng) / rng.gamma(n));
    }
    std::sort(sample.begin(), sample.end());
  }
  std::vector<std::string> cols{"y", "density", "cdf"};
  if (draws > 0) cols.push_back("empirical_cdf");
  t.columns(cols);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    std::vector<std::string> csv{num(ys[i]), num(f[i]), num(cdf[i])};
    json j{{"y", ys[i]}, {"density", f[i]}, {"cdf", cdf[i]}};
    if (draws > 0) {
      const double ecdf =
          static_cast<double>(std::upper_bound(sample.begin(), sample.end(), ys[i]) -
                              sample.begin()) /
          draws;
      worst = std::max(worst, std::abs(ecdf - cdf[i]));
      csv.push_back(num(ecdf));
      j["empirical_cdf"] = ecdf;
    }
    t.row(csv, j);
  }
  if (draws > 0) t.note("max_abs_cdf_difference", num(worst));
}

std::vector<double> read_data(const std::string& path) {
  std::ifstream in(resolve_output(path));
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = nrm::detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto comma = t.find(',');
    if (comma != std::string::npos) t = nrm::detail::trim(t.substr(0, comma));
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used == t.size() && std::isfinite(v)) {
        out.push_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    if (lineno == 1) continue;  // column name
    throw ConfigError("data line " + std::to_string(lineno) + ": not a number: '" + t + "'");
  }
  if (out.empty()) throw ConfigError("data file '" + path + "' has no observations");
  return out;
}

void cmd_mixture_fit(const Settings& cfg, Table& t) {
  nrm::MixtureSpec spec;
  spec.family = nrm::make_family(cfg);
  if (!has(cfg, "data")) throw ConfigError("missing --data (one-column CSV)");
  spec.data = read_data(cfg.at("data"));
  const std::string kernel = get_choice(cfg, "kernel", "gaussian", {"gaussian", "poisson"});
  if (kernel == "gaussian") {
    spec.kernel = nrm::GaussianKernel{get_double(cfg, "sigma", 1.0), get_double(cfg, "m0", 0.0),
                                      get_double(cfg, "s0", 1.0)};
  } else {
    spec.kernel = nrm::PoissonKernel{get_double(cfg, "a0", 1.0), get_double(cfg, "b0", 1.0)};
  }
  const std::string method = get_choice(cfg, "method", "gibbs", {"gibbs", "sis"});
  const int iterations = static_cast<int>(get_int(cfg, "iterations", 1000, 1, 100000000));
  const int burn_in = static_cast<int>(get_int(cfg, "burn-in", 100, 0, 100000000));
  const int thin = static_cast<int>(get_int(cfg, "thin", 1, 1, 1000000));
  const int particles = static_cast<int>(get_int(cfg, "particles", 1000, 1, 100000000));
  const bool sis = method == "sis";

  std::vector<std::vector<nrm::PosteriorSample>> per_chain;
  std::vector<std::string> warnings;
  {
    std::mutex m;
    auto rows = run_chains(cfg, [&](int chain, std::uint64_t seed, nrm::RandomStream& rng,
                                    auto& out) {
      std::vector<nrm::PosteriorSample> samples;
      if (sis) {
        auto res = nrm::mixture_sis(spec, particles, rng);
        if (res.degenerate) {
          std::lock_guard lock(m);
          warnings.push_back("chain " + std::to_string(chain) + ": " + res.warning);
        }
        samples = std::move(res.samples);
      } else {
        samples = nrm::mixture_gibbs(spec, iterations, rng, {burn_in, thin, 1.0});
      }
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i].state;
        std::vector<std::string> csv{std::to_string(chain), std::to_string(seed),
                                     std::to_string(i), num(s.u), s.partition.to_string(),
                                     std::to_string(s.partition.k())};
        json j{{"chain", chain}, {"seed", seed}, {"sample", i}, {"u", s.u},
               {"partition", s.partition.to_string()}, {"k", s.partition.k()}};
        if (sis) {
          csv.push_back(num(samples[i].log_marginal_increment));
          j["log_weight"] = samples[i].log_marginal_increment;
        }
        out.emplace_back(std::move(csv), std::move(j));
      }
      std::lock_guard lock(m);
      if (per_chain.size() <= static_cast<std::size_t>(chain)) per_chain.resize(chain + 1);
      per_chain[chain] = std::move(samples);
    });
    std::vector<std::string> cols{"chain", "seed", "sample", "u", "partition", "k"};
    if (sis) cols.push_back("log_weight");
    t.columns(cols);
    t.note("method", method);
    for (const auto& w : warnings) {
      t.note("warning", w);
      std::cerr << "warning: " << w << '\n';
    }
    for (const auto& chain : rows) {
      for (const auto& [csv, j] : chain) t.row(csv, j);
    }
  }

  // Predictive density grid, written beside the samples.
  std::optional<std::filesystem::path> grid_path;
  if (has(cfg, "grid-output")) {
    grid_path = resolve_output(cfg.at("grid-output"));
  } else if (auto p = main_output_path(cfg, "mixture-fit", t.jsonl())) {
    grid_path = p->string() + ".predictive.csv";
  }
  if (!grid_path) return;
  std::vector<nrm::PosteriorSample> all;
  std::vector<double> weights;
  for (const auto& chain : per_chain) {
    std::vector<double> lw;
    for (const auto& s : chain) lw.push_back(s.log_marginal_increment);
    const double lse = sis ? nrm::log_sum_exp(lw) : 0.0;
    for (const auto& s : chain) {
      all.push_back(s);
      weights.push_back(sis ? std::exp(s.log_marginal_increment - lse) : 1.0);
    }
  }
  const nrm::PredictiveMixture pred(spec, all, weights);
  const auto [mn, mx] = std::minmax_element(spec.data.begin(), spec.data.end());
  std::vector<double> grid;
  if (kernel == "poisson") {
    const int top = static_cast<int>(get_double(cfg, "grid-max", *mx + 10));
    for (int w = 0; w <= top; ++w) grid.push_back(w);
  } else {
    const double lo = get_double(cfg, "grid-min", *mn - 3.0);
    const double hi = get_double(cfg, "grid-max", *mx + 3.0);
    const int points = static_cast<int>(get_int(cfg, "grid-points", 60, 2, 1000000));
    if (!(hi > lo)) throw ConfigError("need --grid-min < --grid-max");
    for (int i = 0; i < points; ++i) grid.push_back(lo + (hi - lo) * i / (points - 1));
  }
  Table g("mixture-fit-predictive", cfg, false);
  g.columns({"w", "density"});
  for (double w : grid) g.row({num(w), num(pred(w))}, {});
  write_text(*grid_path, g.render());
  std::cerr << "wrote " << grid_path->string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nrm: EPPFs, latent laws, samplers and mixtures for normalized random measures"};
  app.set_version_flag("--version", std::string(nrm::kVersion));
  app.fallthrough();
  app.require_subcommand(0, 1);

  bool self_test = false;
  std::string config_path;
  app.add_flag("--self-test", self_test, "Run the fast invariant suite and print a table");
  app.add_option("--config", config_path, "key = value file; command-line flags take precedence");

  // Every value flag is collected as text and validated by the command.
  const std::vector<std::pair<std::string, std::string>> value_flags{
      {"family", "dirichlet | stable | gen-gamma | beta | ggc | first-passage | gig"},
      {"theta", "Total mass parameter"},
      {"alpha", "Stability index"},
      {"b", "Exponential tilt of the generalized gamma family"},
      {"c", "Beta process concentration"},
      {"mass", "Beta process mass"},
      {"lambda", "GIG index"},
      {"delta", "GIG delta"},
      {"v", "GIG v"},
      {"p", "First-passage probability"},
      {"atoms", "GGC Thorin atoms v:w,..."},
      {"tilt", "Shift of the GGC Thorin measure"},
      {"n", "Sample size"},
      {"u", "Latent u, or 'marginal'"},
      {"sizes", "Cell sizes, e.g. 2,1"},
      {"seed", "Base seed (64-bit)"},
      {"chains", "Independent chains; chain i uses seed + i"},
      {"draws", "Number of draws"},
      {"method", "Sampler: exact | gibbs | sis"},
      {"burn-in", "Discarded sweeps"},
      {"thin", "Keep every thin-th sweep"},
      {"base", "Base distribution for unique values: normal | uniform"},
      {"output", "Output path (relative paths resolve under NRM_OUTPUT_DIR)"},
      {"format", "csv | jsonl"},
      {"y-min", "Lower end of the y grid"},
      {"y-max", "Upper end of the y grid"},
      {"points", "Grid points"},
      {"data", "One-column CSV of observations"},
      {"kernel", "gaussian | poisson"},
      {"sigma", "Gaussian kernel sd"},
      {"m0", "Base mean"},
      {"s0", "Base sd"},
      {"a0", "Gamma base shape"},
      {"b0", "Gamma base rate"},
      {"iterations", "Gibbs iterations after burn-in"},
      {"particles", "SIS particles"},
      {"grid-min", "Predictive grid lower end"},
      {"grid-max", "Predictive grid upper end"},
      {"grid-points", "Predictive grid size"},
      {"grid-output", "Predictive grid CSV path"},
  };
  std::map<std::string, std::string> values;
  for (const auto& [name, help] : value_flags) {
    app.add_option_function<std::string>(
        "--" + name, [&values, key = name](const std::string& v) { values[key] = v; }, help);
  }
  bool marginal = false;
  app.add_flag("--marginal", marginal, "Integrate u out");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"eppf", "EPPF of cell sizes at fixed u or marginally"},
      {"block-counts", "Law of the number of blocks at fixed u"},
      {"predictive", "Prediction-rule weights given cell sizes"},
      {"sample-partition", "Partitions from p(. | u) or with u drawn"},
      {"sample-marginal", "(U_n, p, Y) draws from the marginal law"},
      {"inversion-check", "Density of Y = n T / Gamma_n by Laplace inversion"},
      {"mixture-fit", "Posterior samples and predictive density of a mixture"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (self_test) return nrm::cli::run_self_test(stdout) ? kOk : kNumerical;
    if (app.get_subcommands().empty()) {
      std::cerr << "error: no command given\n" << app.help();
      return kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    Settings cfg;
    if (!config_path.empty()) cfg = nrm::load_settings(config_path);
    for (const auto& [k, v] : values) cfg[k] = v;
    if (marginal) cfg["marginal"] = "true";
    if (!has(cfg, "seed")) cfg["seed"] = "1";
    get_seed(cfg);
    const bool stream = command == "sample-partition" || command == "sample-marginal" ||
                        command == "mixture-fit";
    const std::string format = get_choice(cfg, "format", stream ? "jsonl" : "csv", {"csv", "jsonl"});

    Table table(command, cfg, format == "jsonl");
    if (command == "eppf") cmd_eppf(cfg, table);
    if (command == "block-counts") cmd_block_counts(cfg, table);
    if (command == "predictive") cmd_predictive(cfg, table);
    if (command == "sample-partition") cmd_sample_partition(cfg, table);
    if (command == "sample-marginal") cmd_sample_marginal(cfg, table);
    if (command == "inversion-check") cmd_inversion_check(cfg, table);
    if (command == "mixture-fit") cmd_mixture_fit(cfg, table);
    emit(table, cfg, command);
    return kOk;
  } catch (const nrm::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return kCapability;
  } catch (const nrm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nrm::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nrm::SizeLimitError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nrm::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
