#pragma once

// Experiment configs (JSON or TOML), validation, and the runner that writes
// reports, summaries, chain exports and the manifest.

#include <Eigen/Core>
#include <boost/version.hpp>
#include <gmp.h>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dunkl/catalog.hpp"
#include "dunkl/diagnostics.hpp"
#include "dunkl/error.hpp"
#include "dunkl/root_system.hpp"
#include "dunkl/sampler.hpp"

namespace dunkl {

inline constexpr const char* kLabVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_violation = 1, exit_config = 2, exit_computation = 3 };

/// Parsed config plus the source line of every field (TOML only).
struct ConfigDocument {
  nlohmann::json data;
  std::map<std::string, int> lines;
  std::string path;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline nlohmann::json toml_to_json(const toml::node& node, const std::string& path, std::map<std::string, int>& lines) {
  lines[path] = static_cast<int>(node.source().begin.line);
  if (const auto* t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (auto&& [k, v] : *t) {
      const std::string key(k.str());
      j[key] = toml_to_json(v, path.empty() ? key : path + "." + key, lines);
    }
    return j;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < a->size(); ++i) j.push_back(toml_to_json((*a)[i], path + "[" + std::to_string(i) + "]", lines));
    return j;
  }
  if (auto v = node.value_exact<std::int64_t>()) return *v;
  if (auto v = node.value_exact<double>()) return *v;
  if (auto v = node.value_exact<bool>()) return *v;
  if (auto v = node.value_exact<std::string>()) return *v;
  fail(ErrorKind::config_error, path + ": unsupported TOML value type");
}

}  // namespace detail

/// Reads a config; the format follows the extension (.toml, otherwise JSON).
inline ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config_error, path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  ConfigDocument doc;
  doc.path = path.string();
  if (path.extension() == ".toml") {
    try {
      const toml::table tbl = toml::parse(text, path.string());
      doc.data = detail::toml_to_json(tbl, "", doc.lines);
    } catch (const toml::parse_error& e) {
      fail(ErrorKind::config_error, path.string() + ":" + std::to_string(e.source().begin.line) + ":" +
                                        std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
    }
  } else {
    try {
      doc.data = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::config_error, path.string() + ":" + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
  }
  if (!doc.data.is_object()) fail(ErrorKind::config_error, path.string() + ": top level must be a table/object");
  return doc;
}

struct ExperimentConfig {
  nlohmann::json raw;
  std::string hash;
  std::shared_ptr<const RootSystem> rs;
  double p = 2.0;
  bool chamber = false;
  std::optional<std::string> check;
  EstimatorSettings estimator;
  bool estimator_given = false;
  nlohmann::json options = nlohmann::json::object();
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

namespace detail {

class Diagnostics {
 public:
  Diagnostics(const ConfigDocument& doc) : doc_(doc) {}
  void add(const std::string& field, const std::string& msg) {
    std::string where = doc_.path;
    auto it = doc_.lines.find(field);
    if (it != doc_.lines.end()) where += ":" + std::to_string(it->second);
    items_.push_back(where + ": " + (field.empty() ? "" : field + ": ") + msg);
  }
  bool empty() const { return items_.empty(); }
  std::string text() const {
    std::string s;
    for (const auto& i : items_) s += (s.empty() ? "" : "\n") + i;
    return s;
  }

 private:
  const ConfigDocument& doc_;
  std::vector<std::string> items_;
};

inline void allowed_keys(Diagnostics& d, const nlohmann::json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) d.add(prefix.empty() ? k : prefix + "." + k, "unknown field");
  }
}

inline std::optional<double> get_number(Diagnostics& d, const nlohmann::json& obj, const std::string& key, const std::string& field) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj.at(key).is_number()) {
    d.add(field, "expected a number");
    return std::nullopt;
  }
  return obj.at(key).get<double>();
}

inline std::optional<long long> get_integer(Diagnostics& d, const nlohmann::json& obj, const std::string& key, const std::string& field) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj.at(key).is_number_integer()) {
    d.add(field, "expected an integer");
    return std::nullopt;
  }
  return obj.at(key).get<long long>();
}

inline std::shared_ptr<const RootSystem> parse_root_system(Diagnostics& d, const nlohmann::json& j) {
  if (!j.is_object()) {
    d.add("root_system", "expected a table/object");
    return nullptr;
  }
  allowed_keys(d, j, "root_system", {"type", "N", "k", "k1", "k2", "positive_roots", "multiplicities"});
  if (!j.contains("type") || !j.at("type").is_string()) {
    d.add("root_system.type", "required: one of a, b, rank1, custom");
    return nullptr;
  }
  const std::string type = j.at("type").get<std::string>();
  const auto N = get_integer(d, j, "N", "root_system.N");
  const auto k = get_number(d, j, "k", "root_system.k");
  const auto k1 = get_number(d, j, "k1", "root_system.k1");
  const auto k2 = get_number(d, j, "k2", "root_system.k2");
  try {
    if (type == "a") {
      if (!N) {
        d.add("root_system.N", "required for type a (ambient dimension, A_{N-1} acts on R^N)");
        return nullptr;
      }
      return share(build_type_a(static_cast<int>(*N), k.value_or(1.0)));
    }
    if (type == "b") {
      if (!N) {
        d.add("root_system.N", "required for type b");
        return nullptr;
      }
      return share(build_type_b(static_cast<int>(*N), k1.value_or(k.value_or(1.0)), k2.value_or(k.value_or(1.0))));
    }
    if (type == "rank1") {
      if (N && *N != 1) d.add("root_system.N", "rank1 lives in dimension 1");
      return share(build_rank_one(k.value_or(1.0)));
    }
    if (type == "custom") {
      if (!N) {
        d.add("root_system.N", "required for type custom");
        return nullptr;
      }
      nlohmann::json rj = {{"dim", *N}, {"positive_roots", j.value("positive_roots", nlohmann::json::array())},
                           {"multiplicities", j.value("multiplicities", nlohmann::json::object())}};
      return share(root_system_from_json(rj));
    }
  } catch (const Error& e) {
    d.add("root_system", e.what());
    return nullptr;
  } catch (const nlohmann::json::exception& e) {
    d.add("root_system", e.what());
    return nullptr;
  }
  d.add("root_system.type", "unknown type '" + type + "' (expected a, b, rank1, custom)");
  return nullptr;
}

inline void parse_estimator(Diagnostics& d, const nlohmann::json& j, ExperimentConfig& cfg, std::optional<std::uint64_t>& mcmc_seed) {
  if (!j.is_object() || j.size() != 1 || !(j.contains("quadrature") || j.contains("mcmc"))) {
    d.add("estimator", "expected exactly one of quadrature or mcmc");
    return;
  }
  cfg.estimator_given = true;
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    if (!q.is_object()) {
      d.add("estimator.quadrature", "expected a table/object");
      return;
    }
    allowed_keys(d, q, "estimator.quadrature", {"L", "resolution"});
    cfg.estimator.kind = EstimatorSettings::Kind::quadrature;
    if (auto L = get_number(d, q, "L", "estimator.quadrature.L")) {
      if (!(*L > 0.0)) d.add("estimator.quadrature.L", "must be positive");
      cfg.estimator.L = *L;
    }
    if (auto r = get_integer(d, q, "resolution", "estimator.quadrature.resolution")) {
      if (*r < 2 || *r > 64) d.add("estimator.quadrature.resolution", "must lie in [2, 64]");
      cfg.estimator.resolution = static_cast<int>(*r);
    }
    return;
  }
  const auto& m = j.at("mcmc");
  if (!m.is_object()) {
    d.add("estimator.mcmc", "expected a table/object");
    return;
  }
  allowed_keys(d, m, "estimator.mcmc", {"n", "chains", "algo", "seed"});
  cfg.estimator.kind = EstimatorSettings::Kind::mcmc;
  if (auto n = get_integer(d, m, "n", "estimator.mcmc.n")) {
    if (*n < 100) d.add("estimator.mcmc.n", "needs at least 100 draws per chain");
    cfg.estimator.n = static_cast<int>(*n);
  }
  if (auto c = get_integer(d, m, "chains", "estimator.mcmc.chains")) {
    if (*c < 1 || *c > 256) d.add("estimator.mcmc.chains", "must lie in [1, 256]");
    cfg.estimator.chains = static_cast<int>(*c);
  }
  if (m.contains("algo")) {
    if (!m.at("algo").is_string()) {
      d.add("estimator.mcmc.algo", "expected a string");
    } else {
      try {
        cfg.estimator.algo = algo_from_string(m.at("algo").get<std::string>());
      } catch (const Error& e) {
        d.add("estimator.mcmc.algo", e.what());
      }
    }
  }
  if (m.contains("seed")) {
    if (!m.at("seed").is_number_integer() || m.at("seed").get<long long>() < 0) {
      d.add("estimator.mcmc.seed", "expected a nonnegative integer");
    } else {
      mcmc_seed = m.at("seed").get<std::uint64_t>();
    }
  }
}

inline void check_options(Diagnostics& d, const CheckInfo& info, const nlohmann::json& options) {
  for (const auto& [k, v] : options.items()) {
    auto it = info.options.find(k);
    const std::string field = "options." + k;
    if (it == info.options.end()) {
      d.add(field, "not an option of check '" + info.name + "'");
      continue;
    }
    switch (it->second) {
      case OptionType::number:
        if (!v.is_number()) d.add(field, "expected a number");
        break;
      case OptionType::integer:
        if (!v.is_number_integer() || v.get<long long>() < 0) d.add(field, "expected a nonnegative integer");
        break;
      case OptionType::number_list: {
        bool ok = v.is_array() && !v.empty();
        if (ok) {
          for (const auto& e : v) ok = ok && e.is_number();
        }
        if (!ok) d.add(field, "expected a nonempty list of numbers");
        break;
      }
    }
  }
}

}  // namespace detail

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Validates the whole document before anything is computed. Every problem is
/// reported (one line each, with file:line for TOML) in a single config_error.
inline ExperimentConfig validate_config(const ConfigDocument& doc) {
  detail::Diagnostics d(doc);
  const nlohmann::json& j = doc.data;
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.hash = hex64(fnv1a(j.dump()));
  detail::allowed_keys(d, j, "", {"root_system", "measure", "check", "estimator", "options", "output_dir", "seed"});
  if (!j.contains("root_system")) {
    d.add("root_system", "required");
  } else {
    cfg.rs = detail::parse_root_system(d, j.at("root_system"));
  }
  if (j.contains("measure")) {
    const auto& m = j.at("measure");
    if (!m.is_object()) {
      d.add("measure", "expected a table/object");
    } else {
      detail::allowed_keys(d, m, "measure", {"p", "chamber"});
      if (auto p = detail::get_number(d, m, "p", "measure.p")) {
        if (!(*p > 1.0)) d.add("measure.p", "must exceed 1");
        cfg.p = *p;
      }
      if (m.contains("chamber")) {
        if (!m.at("chamber").is_boolean()) {
          d.add("measure.chamber", "expected true or false");
        } else {
          cfg.chamber = m.at("chamber").get<bool>();
        }
      }
    }
  }
  std::optional<std::uint64_t> mcmc_seed;
  if (j.contains("estimator")) detail::parse_estimator(d, j.at("estimator"), cfg, mcmc_seed);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) {
      d.add("seed", "expected a nonnegative integer");
    } else {
      cfg.seed = j.at("seed").get<std::uint64_t>();
    }
  } else if (mcmc_seed) {
    cfg.seed = *mcmc_seed;
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string() || j.at("output_dir").get<std::string>().empty()) {
      d.add("output_dir", "expected a nonempty path");
    } else {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
  }
  if (j.contains("options")) {
    if (!j.at("options").is_object()) {
      d.add("options", "expected a table/object");
    } else {
      cfg.options = j.at("options");
    }
  }
  if (cfg.estimator.kind == EstimatorSettings::Kind::mcmc && cfg.estimator.algo == Algo::langevin && cfg.p < 2.0) {
    d.add("estimator.mcmc.algo", "langevin needs p >= 2");
  }
  if (j.contains("check")) {
    if (!j.at("check").is_string()) {
      d.add("check", "expected a check name");
    } else {
      cfg.check = j.at("check").get<std::string>();
      const CheckInfo* info = nullptr;
      for (const auto& c : catalog()) {
        if (c.name == *cfg.check) info = &c;
      }
      if (!info) {
        d.add("check", "unknown check '" + *cfg.check + "' (see list-checks)");
      } else {
        detail::check_options(d, *info, cfg.options);
        if (d.empty() && cfg.rs) {
          const std::string why = info->precondition(*cfg.rs, cfg.p, cfg.options);
          if (!why.empty()) d.add("check", info->name + " " + why);
        }
        if (info->chamber == ChamberNeed::chamber && !cfg.chamber) d.add("measure.chamber", info->name + " needs chamber = true");
        if (info->chamber == ChamberNeed::full && cfg.chamber) d.add("measure.chamber", info->name + " works on the full space");
        const bool mcmc = cfg.estimator.kind == EstimatorSettings::Kind::mcmc;
        if (info->estimator == EstimatorNeed::quadrature && mcmc) d.add("estimator", info->name + " needs the quadrature estimator");
        if (info->estimator == EstimatorNeed::mcmc && cfg.estimator_given && !mcmc) {
          d.add("estimator", info->name + " needs the mcmc estimator");
        }
        if (info->estimator == EstimatorNeed::mcmc) cfg.estimator.kind = EstimatorSettings::Kind::mcmc;
      }
    }
  } else if (!cfg.options.empty()) {
    d.add("options", "options need a check");
  }
  if (!d.empty()) fail(ErrorKind::config_error, d.text());
  return cfg;
}

// ---- output ----

namespace detail {

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::io_error, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorKind::io_error, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string table_csv(const PlotTable& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_number(row[i]);
    s += "\n";
  }
  return s;
}

inline nlohmann::json versions_json() {
  return {{"dunkl_lab", kLabVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"gmp", gmp_version},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"toml++", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." + std::to_string(TOML_LIB_PATCH)},
          {"compiler", __VERSION__},
          {"cxx_standard", __cplusplus}};
}

inline nlohmann::json estimator_json(const EstimatorSettings& e) {
  if (e.kind == EstimatorSettings::Kind::mcmc) {
    return {{"mcmc", {{"n", e.n}, {"chains", e.chains}, {"algo", to_string(e.algo)}}}};
  }
  nlohmann::json q = {{"resolution", e.resolution}};
  if (e.L) q["L"] = *e.L;
  return {{"quadrature", q}};
}

}  // namespace detail

enum class Command { verify_identities, sample, estimate_constants, check, scan };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::verify_identities: return "verify-identities";
    case Command::sample: return "sample";
    case Command::estimate_constants: return "estimate-constants";
    case Command::check: return "check";
    case Command::scan: return "scan";
  }
  return "unknown";
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int jobs = 1;
};

/// Collects artifacts of one run and writes them under the output directory.
class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, const ExperimentConfig& cfg, Command cmd) : dir_(std::move(dir)), cfg_(cfg), cmd_(cmd) {}

  const std::filesystem::path& dir() const { return dir_; }

  void add_result(const CheckResult& r, const CheckContext& ctx) {
    nlohmann::json reports = nlohmann::json::array(), headline = nlohmann::json::array();
    for (const auto& x : r.reports) reports.push_back(to_json(x));
    for (const auto& x : r.headline) headline.push_back(to_json(x));
    nlohmann::json j = {{"check", r.check},
                        {"anchor", r.anchor},
                        {"command", to_string(cmd_)},
                        {"config_hash", cfg_.hash},
                        {"seed", ctx.seed},
                        {"root_system", to_json(*ctx.rs)},
                        {"measure", {{"p", ctx.p}, {"chamber", ctx.chamber}}},
                        {"estimator", detail::estimator_json(ctx.estimator)},
                        {"options", ctx.options},
                        {"violated", r.violated},
                        {"findings", r.findings},
                        {"details", r.details},
                        {"headline", headline},
                        {"reports", reports}};
    write("reports/" + r.check + ".json", j.dump(2) + "\n");
    for (const auto& t : r.tables) write("plots/" + t.name + ".csv", detail::table_csv(t));
    if (!r.chains.empty()) add_chains(r.chains);
    for (const auto& h : r.headline) summary_.push_back(h);
    checks_.push_back({{"check", r.check}, {"violated", r.violated}, {"reports", r.reports.size()}});
    violated_ = violated_ || r.violated;
  }

  void add_chains(const std::vector<SampleChain>& chains) {
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const std::filesystem::path csv = dir_ / "chains" / ("chain_" + std::to_string(i) + ".csv");
      write_chain_csv(chains[i], csv);
      outputs_.push_back("chains/chain_" + std::to_string(i) + ".csv");
      write("chains/chain_" + std::to_string(i) + ".json", chain_sidecar(chains[i]).dump(2) + "\n");
    }
  }

  void add_error(const std::string& check, const std::string& what) {
    errors_.push_back({{"check", check}, {"error", what}});
  }

  void write(const std::string& rel, const std::string& content) {
    detail::write_atomic(dir_ / rel, content);
    outputs_.push_back(rel);
  }

  bool violated() const { return violated_; }
  bool failed() const { return !errors_.empty(); }

  int finish(std::uint64_t seed, double wall_seconds) {
    std::string csv = "name,lhs,rhs,margin,violated\n";
    for (const auto& r : summary_) {
      csv += detail::csv_field(r.name) + "," + detail::csv_number(r.lhs.value) + "," + detail::csv_number(r.rhs) + "," +
             detail::csv_number(r.margin) + "," + (r.violated ? "true" : "false") + "\n";
    }
    write("summary.csv", csv);
    const int code = failed() ? exit_computation : (violated_ ? exit_violation : exit_ok);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::vector<std::string> files = outputs_;
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    const nlohmann::json manifest = {{"command", to_string(cmd_)},  {"config_hash", cfg_.hash},   {"config", cfg_.raw},
                                     {"seed", seed},                {"versions", detail::versions_json()},
                                     {"wall_time_s", wall_seconds}, {"timestamp", stamp},        {"checks", checks_},
                                     {"errors", errors_},           {"exit_code", code},         {"outputs", files}};
    detail::write_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
    return code;
  }

 private:
  std::filesystem::path dir_;
  const ExperimentConfig& cfg_;
  Command cmd_;
  std::vector<InequalityReport> summary_;
  nlohmann::json checks_ = nlohmann::json::array();
  nlohmann::json errors_ = nlohmann::json::array();
  std::vector<std::string> outputs_;
  bool violated_ = false;
};

namespace detail {

inline CheckContext context_for(const ExperimentConfig& cfg, std::uint64_t seed, int jobs) {
  CheckContext ctx;
  ctx.rs = cfg.rs;
  ctx.p = cfg.p;
  ctx.chamber = cfg.chamber;
  ctx.estimator = cfg.estimator;
  ctx.options = cfg.options;
  ctx.seed = seed;
  ctx.jobs = jobs;
  return ctx;
}

/// Checks run by estimate-constants when the config names none.
inline std::vector<std::string> default_constant_checks(const ExperimentConfig& cfg) {
  if (cfg.chamber) return {"poincare-chamber", cfg.p >= 2.0 ? "tight-logsob-chamber" : "phi-sobolev-chamber"};
  if (cfg.p >= 2.0) return {"poincare-mu-U", "tight-logsob", "logsob-boltzmann", "ubound-2p"};
  return {"poincare-mu-U", "phi-sobolev", "logsob-abs-pow", "ubound-2p"};
}

/// E |x|^p = (N + 2 gamma)/p under mu_U (and mu_{U,H}), from homogeneity of w_k.
inline InequalityReport moment_report(const ChainDiagnostics& diag, double n, double p) {
  const auto& f = diag.functionals.front();
  InequalityReport r = make_report("moment E|x|^p", {std::abs(f.mean - n / p), 0.0}, {{"4 mc_se", 4.0, {f.mc_se, 0.0}}},
                                   {{"p", p}}, "|x|^p, exact value (N+2gamma)/p = " + fmt(n / p));
  r.note = "mean " + fmt(f.mean) + ", ess " + fmt(f.ess) + ", rhat " + fmt(f.rhat);
  return r;
}

}  // namespace detail

/// Loads, validates and runs. Returns the process exit code; diagnostics go to `log`.
inline int run_command(Command cmd, const std::filesystem::path& config_path, const RunOptions& opt, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  std::vector<const CheckInfo*> plan;
  try {
    ConfigDocument doc = load_config(config_path);
    if (cmd == Command::scan && !doc.data.contains("check")) doc.data["check"] = "exp-integrability";
    if (cmd == Command::verify_identities && !doc.data.contains("check")) doc.data["check"] = "identities";
    cfg = validate_config(doc);
    auto need = [&](const std::string& name) { plan.push_back(&find_check(name)); };
    switch (cmd) {
      case Command::verify_identities: need("identities"); break;
      case Command::check:
        if (!cfg.check) fail(ErrorKind::config_error, config_path.string() + ": check: required by the check command");
        need(*cfg.check);
        break;
      case Command::scan:
        if (cfg.check && *cfg.check != "exp-integrability") {
          fail(ErrorKind::config_error, config_path.string() + ": check: scan runs exp-integrability, not '" + *cfg.check + "'");
        }
        if (cfg.chamber) fail(ErrorKind::config_error, config_path.string() + ": measure.chamber: scan works on the full space");
        if (cfg.estimator.kind == EstimatorSettings::Kind::mcmc) {
          fail(ErrorKind::config_error, config_path.string() + ": estimator: scan needs the quadrature estimator");
        }
        need("exp-integrability");
        break;
      case Command::estimate_constants:
        if (cfg.check) {
          if (!find_check(*cfg.check).fitted) {
            fail(ErrorKind::config_error, config_path.string() + ": check: '" + *cfg.check + "' has explicit constants; use the check command");
          }
          need(*cfg.check);
        } else {
          for (const auto& name : detail::default_constant_checks(cfg)) need(name);
        }
        break;
      case Command::sample:
        if (cfg.estimator_given && cfg.estimator.kind != EstimatorSettings::Kind::mcmc) {
          fail(ErrorKind::config_error, config_path.string() + ": estimator: sample needs the mcmc estimator");
        }
        break;
    }
    for (const auto* info : plan) {
      const std::string why = info->precondition(*cfg.rs, cfg.p, cfg.options);
      if (!why.empty()) fail(ErrorKind::config_error, config_path.string() + ": check: " + info->name + " " + why);
    }
  } catch (const Error& e) {
    log << e.what() << "\n";
    return exit_config;
  }

  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.seed;
  const std::filesystem::path dir = opt.out ? *opt.out : cfg.output_dir;
  RunWriter writer(dir, cfg, cmd);
  try {
    if (cmd == Command::sample) {
      const MeasureSpec ms = cfg.chamber ? mu_u_chamber_measure(cfg.rs, cfg.p) : mu_u_measure(cfg.rs, cfg.p);
      const int jobs = std::max(1, opt.jobs);
      const auto chains = sample_chains(ms, cfg.estimator.n, cfg.estimator.chains, cfg.estimator.algo, chain_seed(seed, 1), jobs);
      writer.add_chains(chains);
      const double p = cfg.p;
      const ChainDiagnostics diag = diagnose(chains, {{"|x|^p", [p](const Vector& x) { return std::pow(x.norm(), p); }},
                                                      {"|x|", [](const Vector& x) { return x.norm(); }}},
                                             chains.size() >= 2);
      nlohmann::json funcs = nlohmann::json::array();
      for (const auto& f : diag.functionals) {
        funcs.push_back({{"name", f.name}, {"mean", f.mean}, {"sd", f.sd}, {"ess", f.ess}, {"rhat", f.rhat}, {"mc_se", f.mc_se}});
      }
      nlohmann::json acc = nlohmann::json::array();
      for (const auto& c : chains) acc.push_back(c.acceptance_rate);
      CheckResult r;
      r.check = "sample";
      r.anchor = "sampler output and diagnostics";
      r.details = {{"ess", diag.ess}, {"rhat", diag.rhat}, {"functionals", funcs}, {"acceptance_rate", acc}};
      r.headline.push_back(detail::moment_report(diag, cfg.rs->homogeneous_dim(), p));
      r.reports = r.headline;
      r.violated = r.headline.front().violated;
      CheckContext ctx = detail::context_for(cfg, seed, jobs);
      ctx.estimator.kind = EstimatorSettings::Kind::mcmc;
      writer.add_result(r, ctx);
    } else {
      for (const auto* info : plan) {
        CheckContext ctx = detail::context_for(cfg, seed, std::max(1, opt.jobs));
        if (info->estimator == EstimatorNeed::mcmc) ctx.estimator.kind = EstimatorSettings::Kind::mcmc;
        try {
          const CheckResult r = run_check(*info, ctx);
          log << info->name << ": " << (r.violated ? "VIOLATED" : "ok") << " (" << r.reports.size() << " reports)\n";
          for (const auto& f : r.findings) log << "  finding: " << f << "\n";
          writer.add_result(r, ctx);
        } catch (const Error& e) {
          log << info->name << ": error: " << e.what() << "\n";
          writer.add_error(info->name, e.what());
        }
      }
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    writer.add_error(to_string(cmd), e.what());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    writer.add_error(to_string(cmd), e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    return writer.finish(seed, wall);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_computation;
  }
}

/// One line per check: name, anchor, required estimator.
inline std::string list_checks() {
  std::ostringstream os;
  for (const auto& c : catalog()) {
    os << c.name << "\t" << c.anchor << "\t" << to_string(c.estimator) << (c.chamber == ChamberNeed::chamber ? " (chamber)" : "")
       << "\n";
  }
  return os.str();
}

}  // namespace dunkl
