#include "srk/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace srk {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t nxt = s.find(sep, pos);
    if (nxt == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, nxt - pos));
    pos = nxt + 1;
  }
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("report: bad number: " + s);
  return v;
}

std::int64_t parse_i64(const std::string& s) {
  return static_cast<std::int64_t>(std::strtoll(s.c_str(), nullptr, 10));
}

// "key=value key=value ..." (values contain no spaces).
std::map<std::string, std::string> parse_kv(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("report: malformed token: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("report: missing key: " + key);
  return it->second;
}

std::string config_line(const StudyConfig& c) {
  std::string out = "problem=" + c.problem_id;
  out += " dim=" + std::to_string(c.dim);
  out += " schemes=" + join(c.schemes, ',');
  out += " hmax_exp=" + std::to_string(c.hmax_exp);
  out += " hmin_exp=" + std::to_string(c.hmin_exp);
  out += " paths=" + std::to_string(c.paths);
  out += " metric=" + to_string(c.metric);
  out += " p=" + fmt17(c.p);
  out += " use_reference=" + std::string(c.use_reference ? "1" : "0");
  out += " ref_scheme=" + c.reference.scheme;
  out += " href_exp=" + std::to_string(c.reference.href_exp);
  out += " shared_paths=" + std::string(c.reference.shared_paths ? "1" : "0");
  out += " fit_window=" + std::to_string(c.fit_window);
  out += " rho_reading=" + to_string(c.rho_reading);
  return out;
}

StudyConfig config_from_kv(const std::map<std::string, std::string>& meta,
                           const std::map<std::string, std::string>& kv) {
  StudyConfig c;
  c.problem_id = need(kv, "problem");
  c.dim = static_cast<int>(parse_i64(need(kv, "dim")));
  c.schemes = split(need(kv, "schemes"), ',');
  c.hmax_exp = static_cast<int>(parse_i64(need(kv, "hmax_exp")));
  c.hmin_exp = static_cast<int>(parse_i64(need(kv, "hmin_exp")));
  c.paths = parse_i64(need(kv, "paths"));
  c.metric = metric_from_string(need(kv, "metric"));
  c.p = parse_double(need(kv, "p"));
  c.use_reference = need(kv, "use_reference") == "1";
  c.reference.scheme = need(kv, "ref_scheme");
  c.reference.href_exp = static_cast<int>(parse_i64(need(kv, "href_exp")));
  c.reference.shared_paths = need(kv, "shared_paths") == "1";
  c.fit_window = static_cast<int>(parse_i64(need(kv, "fit_window")));
  c.rho_reading = rho_reading_from_string(need(kv, "rho_reading"));
  c.seed = static_cast<std::uint64_t>(
      std::strtoull(need(meta, "seed").c_str(), nullptr, 10));
  return c;
}

void check_hash(const StudyConfig& c,
                const std::map<std::string, std::string>& meta) {
  if (hash_hex(c.config_hash()) != need(meta, "config_hash"))
    throw std::runtime_error(
        "report: config_hash does not match the parsed configuration");
}

}  // namespace

std::string report_to_csv(const ConvergenceReport& rep) {
  const StudyConfig& c = rep.config;
  std::string out;
  out += "# meta seed=" + std::to_string(c.seed) +
         " config_hash=" + hash_hex(c.config_hash()) +
         " rho_reading=" + to_string(c.rho_reading) +
         " index_clamp=clamp-to-range\n";
  out += "# config " + config_line(c) + "\n";
  out += "scheme,h,err,mc_stderr,cost_per_step,total_cost,gamma,p_eff\n";
  for (std::size_t si = 0; si < rep.rows.size(); ++si) {
    const SchemeSummary& sm = rep.summaries.at(si);
    for (const LevelResult& r : rep.rows[si]) {
      out += sm.scheme;
      out += ',' + fmt17(r.h) + ',' + fmt17(r.err) + ',' + fmt17(r.mc_stderr);
      out += ',' + fmt17(r.cost_per_step) + ',' + fmt17(r.total_cost);
      out += ',' + fmt17(sm.gamma) + ',' + fmt17(sm.p_eff);
      out += '\n';
    }
  }
  for (std::size_t si = 0; si < rep.rows.size(); ++si) {
    for (const LevelResult& r : rep.rows[si]) {
      out += "# counters scheme=" + rep.summaries.at(si).scheme;
      out += " h_exp=" + std::to_string(r.h_exp);
      out += " n_steps=" + std::to_string(r.n_steps);
      out += " drift=" + std::to_string(r.counters.drift_calls);
      out += " diffusion=" + std::to_string(r.counters.diffusion_calls);
      out += " jacobian=" + std::to_string(r.counters.jacobian_calls);
      out += " gaussians=" + std::to_string(r.counters.gaussians);
      out += "\n";
    }
  }
  for (const SchemeSummary& sm : rep.summaries) {
    out += "# summary scheme=" + sm.scheme;
    out += " gamma=" + fmt17(sm.gamma);
    out += " p_eff=" + fmt17(sm.p_eff);
    out += " pairwise_p_eff=" + fmt17(sm.pairwise_p_eff);
    std::vector<std::string> exps;
    for (int e : sm.fit_exps) exps.push_back(std::to_string(e));
    out += " fit_exps=" + join(exps, '|');
    out += "\n";
  }
  return out;
}

ConvergenceReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> meta, config;
  struct Raw {
    std::string scheme;
    double h, err, stderr_, cps, total;
  };
  std::vector<Raw> raws;
  struct Ctr {
    std::string scheme;
    int h_exp;
    std::int64_t n_steps;
    EvalCounters c;
  };
  std::vector<Ctr> ctrs;
  std::vector<std::map<std::string, std::string>> sums;
  bool header_seen = false;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# meta ", 0) == 0) {
      meta = parse_kv(line.substr(7));
    } else if (line.rfind("# config ", 0) == 0) {
      config = parse_kv(line.substr(9));
    } else if (line.rfind("# counters ", 0) == 0) {
      auto kv = parse_kv(line.substr(11));
      Ctr c;
      c.scheme = need(kv, "scheme");
      c.h_exp = static_cast<int>(parse_i64(need(kv, "h_exp")));
      c.n_steps = parse_i64(need(kv, "n_steps"));
      c.c.drift_calls = parse_i64(need(kv, "drift"));
      c.c.diffusion_calls = parse_i64(need(kv, "diffusion"));
      c.c.jacobian_calls = parse_i64(need(kv, "jacobian"));
      c.c.gaussians = parse_i64(need(kv, "gaussians"));
      ctrs.push_back(std::move(c));
    } else if (line.rfind("# summary ", 0) == 0) {
      sums.push_back(parse_kv(line.substr(10)));
    } else if (line.rfind("scheme,", 0) == 0) {
      header_seen = true;
    } else if (line[0] == '#') {
      continue;
    } else {
      const auto cells = split(line, ',');
      if (cells.size() != 8)
        throw std::runtime_error("report: bad data row: " + line);
      Raw r;
      r.scheme = cells[0];
      r.h = parse_double(cells[1]);
      r.err = parse_double(cells[2]);
      r.stderr_ = parse_double(cells[3]);
      r.cps = parse_double(cells[4]);
      r.total = parse_double(cells[5]);
      raws.push_back(std::move(r));
    }
  }
  if (!header_seen || meta.empty() || config.empty())
    throw std::runtime_error("report: incomplete CSV");
  if (raws.size() != ctrs.size())
    throw std::runtime_error("report: data rows and counter lines disagree");

  ConvergenceReport rep;
  rep.config = config_from_kv(meta, config);
  check_hash(rep.config, meta);

  const std::size_t S = rep.config.schemes.size();
  const std::size_t L =
      static_cast<std::size_t>(rep.config.hmin_exp - rep.config.hmax_exp + 1);
  if (raws.size() != S * L)
    throw std::runtime_error("report: row count does not match the config");
  rep.rows.resize(S);
  std::size_t idx = 0;
  for (std::size_t si = 0; si < S; ++si) {
    rep.rows[si].resize(L);
    for (std::size_t li = 0; li < L; ++li, ++idx) {
      const Raw& raw = raws[idx];
      const Ctr& ctr = ctrs[idx];
      if (raw.scheme != rep.config.schemes[si] || ctr.scheme != raw.scheme)
        throw std::runtime_error("report: row order does not match the config");
      LevelResult& r = rep.rows[si][li];
      r.h_exp = ctr.h_exp;
      r.n_steps = ctr.n_steps;
      r.h = raw.h;
      r.err = raw.err;
      r.mc_stderr = raw.stderr_;
      r.cost_per_step = raw.cps;
      r.total_cost = raw.total;
      r.counters = ctr.c;
    }
  }
  if (sums.size() != S)
    throw std::runtime_error("report: summary count does not match");
  for (std::size_t si = 0; si < S; ++si) {
    const auto& kv = sums[si];
    SchemeSummary sm;
    sm.scheme = need(kv, "scheme");
    if (sm.scheme != rep.config.schemes[si])
      throw std::runtime_error("report: summary order does not match");
    sm.gamma = parse_double(need(kv, "gamma"));
    sm.p_eff = parse_double(need(kv, "p_eff"));
    sm.pairwise_p_eff = parse_double(need(kv, "pairwise_p_eff"));
    for (const std::string& e : split(need(kv, "fit_exps"), '|'))
      sm.fit_exps.push_back(static_cast<int>(parse_i64(e)));
    rep.summaries.push_back(std::move(sm));
  }
  return rep;
}

namespace {

json num_or_null(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

double json_double(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

}  // namespace

std::string report_to_json(const ConvergenceReport& rep) {
  const StudyConfig& c = rep.config;
  json j;
  j["meta"] = {{"seed", std::to_string(c.seed)},
               {"config_hash", hash_hex(c.config_hash())},
               {"rho_reading", to_string(c.rho_reading)},
               {"index_clamp", "clamp-to-range"}};
  j["config"] = {{"problem", c.problem_id},
                 {"dim", c.dim},
                 {"schemes", c.schemes},
                 {"hmax_exp", c.hmax_exp},
                 {"hmin_exp", c.hmin_exp},
                 {"paths", c.paths},
                 {"metric", to_string(c.metric)},
                 {"p", c.p},
                 {"use_reference", c.use_reference},
                 {"ref_scheme", c.reference.scheme},
                 {"href_exp", c.reference.href_exp},
                 {"shared_paths", c.reference.shared_paths},
                 {"fit_window", c.fit_window}};
  json rows = json::array();
  for (std::size_t si = 0; si < rep.rows.size(); ++si) {
    for (const LevelResult& r : rep.rows[si]) {
      rows.push_back({{"scheme", rep.summaries.at(si).scheme},
                      {"h_exp", r.h_exp},
                      {"n_steps", r.n_steps},
                      {"h", r.h},
                      {"err", num_or_null(r.err)},
                      {"mc_stderr", num_or_null(r.mc_stderr)},
                      {"cost_per_step", num_or_null(r.cost_per_step)},
                      {"total_cost", num_or_null(r.total_cost)},
                      {"counters",
                       {{"drift", r.counters.drift_calls},
                        {"diffusion", r.counters.diffusion_calls},
                        {"jacobian", r.counters.jacobian_calls},
                        {"gaussians", r.counters.gaussians}}}});
    }
  }
  j["rows"] = std::move(rows);
  json sums = json::array();
  for (const SchemeSummary& sm : rep.summaries) {
    sums.push_back({{"scheme", sm.scheme},
                    {"gamma", num_or_null(sm.gamma)},
                    {"p_eff", num_or_null(sm.p_eff)},
                    {"pairwise_p_eff", num_or_null(sm.pairwise_p_eff)},
                    {"fit_exps", sm.fit_exps}});
  }
  j["summaries"] = std::move(sums);
  return j.dump(2) + "\n";
}

ConvergenceReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ConvergenceReport rep;
  const json& jc = j.at("config");
  StudyConfig& c = rep.config;
  c.problem_id = jc.at("problem").get<std::string>();
  c.dim = jc.at("dim").get<int>();
  c.schemes = jc.at("schemes").get<std::vector<std::string>>();
  c.hmax_exp = jc.at("hmax_exp").get<int>();
  c.hmin_exp = jc.at("hmin_exp").get<int>();
  c.paths = jc.at("paths").get<std::int64_t>();
  c.metric = metric_from_string(jc.at("metric").get<std::string>());
  c.p = jc.at("p").get<double>();
  c.use_reference = jc.at("use_reference").get<bool>();
  c.reference.scheme = jc.at("ref_scheme").get<std::string>();
  c.reference.href_exp = jc.at("href_exp").get<int>();
  c.reference.shared_paths = jc.at("shared_paths").get<bool>();
  c.fit_window = jc.at("fit_window").get<int>();
  const json& jm = j.at("meta");
  c.rho_reading =
      rho_reading_from_string(jm.at("rho_reading").get<std::string>());
  c.seed = static_cast<std::uint64_t>(std::strtoull(
      jm.at("seed").get<std::string>().c_str(), nullptr, 10));
  if (hash_hex(c.config_hash()) != jm.at("config_hash").get<std::string>())
    throw std::runtime_error(
        "report: config_hash does not match the parsed configuration");

  const std::size_t S = c.schemes.size();
  const std::size_t L = static_cast<std::size_t>(c.hmin_exp - c.hmax_exp + 1);
  const json& jrows = j.at("rows");
  if (jrows.size() != S * L)
    throw std::runtime_error("report: row count does not match the config");
  rep.rows.resize(S);
  std::size_t idx = 0;
  for (std::size_t si = 0; si < S; ++si) {
    rep.rows[si].resize(L);
    for (std::size_t li = 0; li < L; ++li, ++idx) {
      const json& row = jrows.at(idx);
      if (row.at("scheme").get<std::string>() != c.schemes[si])
        throw std::runtime_error("report: row order does not match the config");
      LevelResult& r = rep.rows[si][li];
      r.h_exp = row.at("h_exp").get<int>();
      r.n_steps = row.at("n_steps").get<std::int64_t>();
      r.h = row.at("h").get<double>();
      r.err = json_double(row, "err");
      r.mc_stderr = json_double(row, "mc_stderr");
      r.cost_per_step = json_double(row, "cost_per_step");
      r.total_cost = json_double(row, "total_cost");
      const json& jctr = row.at("counters");
      r.counters.drift_calls = jctr.at("drift").get<std::int64_t>();
      r.counters.diffusion_calls = jctr.at("diffusion").get<std::int64_t>();
      r.counters.jacobian_calls = jctr.at("jacobian").get<std::int64_t>();
      r.counters.gaussians = jctr.at("gaussians").get<std::int64_t>();
    }
  }
  for (const json& js : j.at("summaries")) {
    SchemeSummary sm;
    sm.scheme = js.at("scheme").get<std::string>();
    sm.gamma = json_double(js, "gamma");
    sm.p_eff = json_double(js, "p_eff");
    sm.pairwise_p_eff = json_double(js, "pairwise_p_eff");
    sm.fit_exps = js.at("fit_exps").get<std::vector<int>>();
    rep.summaries.push_back(std::move(sm));
  }
  if (rep.summaries.size() != S)
    throw std::runtime_error("report: summary count does not match");
  return rep;
}

}  // namespace srk
