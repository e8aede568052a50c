#include "seqfluct/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "seqfluct/align.hpp"
#include "seqfluct/core.hpp"
#include "seqfluct/error.hpp"
#include "seqfluct/estimators.hpp"
#include "seqfluct/genmodels.hpp"
#include "seqfluct/oracle.hpp"
#include "seqfluct/transforms.hpp"

namespace seqfluct {

std::string config_fingerprint(std::string_view canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

using Json = nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr std::uint64_t kPilotStream = 0x70696c6f74ULL;

const std::set<std::string> kConfigKeys = {
    "model", "alphabet", "probs", "a", "b", "l", "q1", "q2", "q3", "q", "score_table", "gap_price",
    "n", "n_list", "samples", "seed", "workers", "c", "eps0", "check", "threshold", "x", "y", "all",
    "brute", "out"};
const std::set<std::string> kSchemeKeys = {"alphabet", "score_table", "gap_price"};

[[noreturn]] void bad(const std::string& key, const std::string& what,
                      ErrorKind kind = ErrorKind::validation) {
  throw Error(kind, key + ": " + what);
}

// Rethrows module errors with the config key in front unless it is already there.
template <typename Fn>
auto with_key(const std::string& key, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.rfind(key + ":", 0) == 0 || msg.find(':') < msg.find(' ')) throw;
    throw Error(e.kind(), key + ": " + msg);
  }
}

Json read_json_file(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) bad(key, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad(key, std::string("invalid JSON: ") + e.what());
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where, "expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) bad(k, "unknown key in " + where);
  }
}

std::int64_t get_int(const Json& cfg, const std::string& key, std::int64_t fallback, std::int64_t min) {
  if (!cfg.contains(key)) return fallback;
  const Json& v = cfg.at(key);
  if (!v.is_number_integer()) bad(key, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    bad(key, "too large");
  }
  const auto x = v.get<std::int64_t>();
  if (x < min) bad(key, "must be >= " + std::to_string(min));
  return x;
}

std::uint64_t get_seed(const Json& cfg) {
  if (!cfg.contains("seed")) return 1;
  const Json& v = cfg.at("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad("seed", "expected a non-negative 64-bit integer");
}

std::optional<double> get_double(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return std::nullopt;
  const Json& v = cfg.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "must be finite");
  return x;
}

std::optional<std::string> get_string(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return std::nullopt;
  if (!cfg.at(key).is_string()) bad(key, "expected a string");
  return cfg.at(key).get<std::string>();
}

bool get_bool(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return false;
  if (!cfg.at(key).is_boolean()) bad(key, "expected true or false");
  return cfg.at(key).get<bool>();
}

std::vector<double> get_doubles(const Json& cfg, const std::string& key) {
  const Json& v = cfg.at(key);
  if (!v.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::size_t> get_sizes(const Json& cfg, const std::string& key, std::vector<std::size_t> fallback) {
  if (!cfg.contains(key)) return fallback;
  const Json& v = cfg.at(key);
  if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of positive integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 1) {
      bad(key + "[" + std::to_string(i) + "]", "expected a positive integer");
    }
    out.push_back(v[i].get<std::size_t>());
  }
  return out;
}

Symbol get_letter(const Json& cfg, const std::string& key, const Alphabet& alphabet, Symbol fallback) {
  const auto s = get_string(cfg, key);
  if (!s) return fallback;
  if (s->size() != 1 || !alphabet.contains((*s)[0])) bad(key, "expected one letter of the alphabet");
  return alphabet.index((*s)[0]);
}

struct ModelSpec {
  Model model;
  Json json;
  AlphabetPtr alphabet;
};

ModelSpec build_model(const Json& cfg, const std::string& default_kind) {
  const std::string kind = get_string(cfg, "model").value_or(default_kind);
  if (kind == "iid") {
    for (const char* key : {"l", "q1", "q2", "q3", "q"}) {
      if (cfg.contains(key)) bad(key, "only used by the block model");
    }
    const AlphabetPtr alphabet = with_key("alphabet", [&] { return make_alphabet(get_string(cfg, "alphabet").value_or("abc")); });
    std::vector<double> probs = cfg.contains("probs") ? get_doubles(cfg, "probs")
                                                      : std::vector<double>(alphabet->size(), 1.0 / static_cast<double>(alphabet->size()));
    if (probs.size() != alphabet->size()) bad("probs", "needs one entry per alphabet letter", ErrorKind::dimension);
    const SymbolDist dist = with_key("probs", [&] { return SymbolDist(probs); });
    const Symbol a = get_letter(cfg, "a", *alphabet, 0);
    const Symbol b = get_letter(cfg, "b", *alphabet, 1);
    if (a == b) bad("b", "letters a and b must differ");
    IidModel m(alphabet, dist, a, b);
    Json j = {{"kind", "iid"}, {"alphabet", alphabet->symbols()}, {"probs", probs},
              {"a", std::string(1, alphabet->name(a))}, {"b", std::string(1, alphabet->name(b))}};
    return {Model(std::move(m)), std::move(j), alphabet};
  }
  if (kind == "block") {
    for (const char* key : {"probs", "a", "b"}) {
      if (cfg.contains(key)) bad(key, "only used by the iid model");
    }
    if (auto s = get_string(cfg, "alphabet"); s && *s != "01") bad("alphabet", "the block model uses the binary alphabet 01");
    const auto l = get_int(cfg, "l", 3, 2);
    if (l > 1000000) bad("l", "too large");
    std::array<double, 3> q{1.0 / 3, 1.0 / 3, 1.0 / 3};
    if (cfg.contains("q")) {
      for (const char* key : {"q1", "q2", "q3"}) {
        if (cfg.contains(key)) bad(key, "give either q or q1..q3");
      }
      const auto v = get_doubles(cfg, "q");
      if (v.size() != 3) bad("q", "expected three probabilities", ErrorKind::dimension);
      std::copy(v.begin(), v.end(), q.begin());
    } else if (cfg.contains("q1") || cfg.contains("q2") || cfg.contains("q3")) {
      const char* names[] = {"q1", "q2", "q3"};
      for (int i = 0; i < 3; ++i) {
        const auto x = get_double(cfg, names[i]);
        if (!x) bad(names[i], "missing (give all of q1, q2, q3)");
        q[i] = *x;
      }
    }
    BlockModelParams params(static_cast<int>(l), q[0], q[1], q[2]);
    Json j = {{"kind", "block"}, {"l", l}, {"q1", q[0]}, {"q2", q[1]}, {"q3", q[2]}};
    return {Model(BlockModel{params}), std::move(j), binary_alphabet()};
  }
  bad("model", "expected iid or block");
}

ScoringScheme build_scheme(const Json& cfg, const Alphabet& alphabet, Json& json_out) {
  const std::size_t k = alphabet.size();
  const double gap = get_double(cfg, "gap_price").value_or(0.0);
  std::vector<double> flat(k * k, 0.0);
  if (cfg.contains("score_table")) {
    const Json& t = cfg.at("score_table");
    if (!t.is_array() || t.size() != k) {
      bad("score_table", "expected " + std::to_string(k) + " rows", ErrorKind::dimension);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const std::string row_key = "score_table[" + std::to_string(i) + "]";
      if (!t[i].is_array() || t[i].size() != k) bad(row_key, "expected " + std::to_string(k) + " entries", ErrorKind::dimension);
      for (std::size_t j = 0; j < k; ++j) {
        if (!t[i][j].is_number()) bad(row_key + "[" + std::to_string(j) + "]", "expected a number");
        flat[i * k + j] = t[i][j].get<double>();
      }
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) flat[i * k + i] = 1.0;
  }
  ScoringScheme scheme = with_key("score_table", [&] { return ScoringScheme(k, flat, gap); });
  Json rows = Json::array();
  for (std::size_t i = 0; i < k; ++i) {
    rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i * k),
                                       flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * k)));
  }
  json_out = {{"alphabet", alphabet.symbols()}, {"score_table", rows}, {"gap_price", gap}};
  return scheme;
}

Json to_json(const EstimateReport& r) {
  return {{"name", r.name}, {"point", r.point}, {"half_width", r.half_width}, {"samples", r.samples},
          {"seed", r.seed}, {"params_fingerprint", r.params_fingerprint}};
}

Json to_json(const UVStats& uv, const Model& model) {
  if (std::holds_alternative<IidModel>(model)) return {{"u", uv.u}, {"v", uv.v[0]}};
  return {{"t", uv.t()}, {"u", uv.u}, {"r", uv.r()}};
}

class CsvTable {
 public:
  CsvTable() { text_ << "n,stat,point,ci95,samples,seed\n"; }
  void row(std::size_t n, const std::string& stat, double point, double ci, std::uint64_t samples, std::uint64_t seed) {
    text_ << n << ',' << stat << ',' << format_number(point) << ',' << format_number(ci) << ',' << samples << ','
          << seed << '\n';
  }
  void row(std::size_t n, const std::string& stat, const EstimateReport& r) {
    row(n, stat, r.point, r.half_width, r.samples, r.seed);
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

struct Output {
  Json results = Json::object();
  std::string csv;
  std::string summary;
  int code = 0;
};

struct Context {
  Context(ModelSpec m, ScoringScheme s) : model(std::move(m)), scheme(std::move(s)) {}

  std::string command;
  Json cfg;
  Json resolved;
  ModelSpec model;
  ScoringScheme scheme;
  std::size_t n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string fingerprint;

  void set(const std::string& key, Json value) { resolved[key] = std::move(value); }
  void seal() { fingerprint = config_fingerprint(resolved.dump()); }
  RunOptions opts() const { return {seed, workers, fingerprint}; }
  RunOptions opts_with_seed(std::uint64_t s) const { return {s, workers, fingerprint}; }

  // c from the config, or a pilot run targeting the coverage level.
  double typical_c(std::size_t pilot_n) {
    if (auto c = get_double(cfg, "c")) {
      if (!(*c > 0.0)) bad("c", "must be > 0");
      set("c", *c);
      return *c;
    }
    set("c", "pilot");
    set("pilot", {{"n", pilot_n}, {"target", kPilotTarget}, {"samples", kPilotSamples}});
    return pilot_c(model.model, pilot_n, kPilotTarget, kPilotSamples, RandomStream(seed).substream(kPilotStream).key());
  }
};

Sequence parse_sequence(const Context& ctx, const std::string& key) {
  const auto text = get_string(ctx.cfg, key);
  if (!text) bad(key, "missing sequence");
  return with_key(key, [&] { return Sequence::parse(ctx.model.alphabet, *text); });
}

std::string pair_line(const SequencePair& z) { return z.x.str() + "," + z.y.str(); }

Output cmd_score(Context& ctx) {
  const Sequence x = parse_sequence(ctx, "x");
  const Sequence y = parse_sequence(ctx, "y");
  const bool brute = get_bool(ctx.cfg, "brute");
  ctx.set("x", x.str());
  ctx.set("y", y.str());
  ctx.set("brute", brute);
  ctx.seal();
  const SequencePair z(x, y);
  Output out;
  const double score = optimal_score(z, ctx.scheme).value;
  out.results["score"] = score;
  out.results["n"] = z.n();
  std::ostringstream s;
  s << "score " << format_number(score);
  CsvTable csv;
  csv.row(z.n(), "score", score, 0.0, 1, ctx.seed);
  if (brute) {
    const double b = brute_force_score(x, y, ctx.scheme).value;
    out.results["brute_force"] = b;
    csv.row(z.n(), "brute_force", b, 0.0, 1, ctx.seed);
    s << " brute_force " << format_number(b);
  }
  out.summary = s.str();
  out.csv = csv.str();
  return out;
}

Output cmd_gen(Context& ctx) {
  ctx.seal();
  Output out;
  std::ostringstream csv;
  csv << "index,x,y,u,v0,v1\n";
  Json pairs = Json::array();
  const RandomStream root(ctx.seed);
  for (std::size_t i = 0; i < ctx.samples; ++i) {
    RandomStream rng = root.substream(i);
    const SequencePair z = sample_pair(ctx.model.model, ctx.n, rng);
    const UVStats uv = model_uv(ctx.model.model, z);
    csv << i << ',' << pair_line(z) << ',' << uv.u << ',' << uv.v[0] << ',' << uv.v[1] << '\n';
    Json p = to_json(uv, ctx.model.model);
    p["x"] = z.x.str();
    p["y"] = z.y.str();
    pairs.push_back(std::move(p));
  }
  out.results["pairs"] = std::move(pairs);
  out.csv = csv.str();
  out.summary = "generated " + std::to_string(ctx.samples) + " pairs of length " + std::to_string(ctx.n);
  return out;
}

Output cmd_stats(Context& ctx) {
  const Sequence x = parse_sequence(ctx, "x");
  ctx.set("x", x.str());
  Output out;
  CsvTable csv;
  std::ostringstream s;
  if (const auto* block = std::get_if<BlockModel>(&ctx.model.model)) {
    ctx.seal();
    const BlockStats b = with_key("x", [&] { return block_stats(x, block->params.l()); });
    const UVStats uv = uv_from_blocks(b, static_cast<std::int64_t>(x.size()), block->params.l());
    out.results = {{"b1", b.b1}, {"b2", b.b2}, {"b3", b.b3}, {"r", b.r}, {"t", uv.t()}, {"u", uv.u}};
    for (const auto& [k, v] : out.results.items()) csv.row(x.size(), k, v.get<double>(), 0.0, 1, ctx.seed);
    s << "b1 " << b.b1 << " b2 " << b.b2 << " b3 " << b.b3 << " r " << b.r << " t " << uv.t() << " u " << uv.u;
  } else {
    const Sequence y = parse_sequence(ctx, "y");
    ctx.set("y", y.str());
    ctx.seal();
    const SequencePair z(x, y);
    const UVStats uv = model_uv(ctx.model.model, z);
    out.results = {{"u", uv.u}, {"v", uv.v[0]}};
    csv.row(x.size(), "u", static_cast<double>(uv.u), 0.0, 1, ctx.seed);
    csv.row(x.size(), "v", static_cast<double>(uv.v[0]), 0.0, 1, ctx.seed);
    s << "u " << uv.u << " v " << uv.v[0];
  }
  out.csv = csv.str();
  out.summary = s.str();
  return out;
}

Output cmd_transform(Context& ctx) {
  const Sequence x = parse_sequence(ctx, "x");
  const Sequence y = parse_sequence(ctx, "y");
  const bool all = get_bool(ctx.cfg, "all");
  ctx.set("x", x.str());
  ctx.set("y", y.str());
  ctx.set("all", all);
  ctx.seal();
  const SequencePair z(x, y);
  const Transform t = default_transform(ctx.model.model);
  const Scorer scorer(ctx.scheme);
  const double base = scorer.score(z);
  Output out;
  std::ostringstream csv, s;
  csv << "x,y,prob,score,gain\n";
  Json items = Json::array();
  auto emit = [&](const SequencePair& w, double prob) {
    const double score = scorer.score(w);
    csv << pair_line(w) << ',' << format_number(prob) << ',' << format_number(score) << ','
        << format_number(score - base) << '\n';
    items.push_back({{"x", w.x.str()}, {"y", w.y.str()}, {"prob", prob}, {"score", score}, {"gain", score - base}});
    s << w.x.str() << ' ' << w.y.str() << " score " << format_number(score) << " gain " << format_number(score - base)
      << '\n';
  };
  if (all) {
    for (const auto& item : outcomes(z, t).items) emit(item.z, item.prob);
    const GainProfile g = gain_profile(z, t, scorer);
    out.results["expected_gain"] = g.expected_gain;
    out.results["min_gain"] = g.min_gain;
    s << "expected_gain " << format_number(g.expected_gain) << " min_gain " << format_number(g.min_gain);
  } else {
    RandomStream rng(ctx.seed);
    emit(apply(z, t, rng), 1.0);
  }
  out.results["base_score"] = base;
  out.results["outcomes"] = std::move(items);
  out.csv = csv.str();
  out.summary = s.str();
  while (!out.summary.empty() && out.summary.back() == '\n') out.summary.pop_back();
  return out;
}

Output cmd_oracle(Context& ctx) {
  const auto check = get_string(ctx.cfg, "check");
  if (!check) bad("check", "missing (tilde2, tilde, pmf, deco or fiber)");
  ctx.set("check", *check);
  ctx.seal();
  const OracleCheckResult r = oracle_check(*check, ctx.model.model, ctx.n, ctx.scheme);
  Output out;
  out.results = {{"check", r.check}, {"pass", r.pass}, {"metric", r.metric_name}, {"value", r.metric}, {"cases", r.cases}};
  CsvTable csv;
  csv.row(ctx.n, r.check + "_" + r.metric_name, r.metric, 0.0, r.cases, ctx.seed);
  out.csv = csv.str();
  out.summary = std::string(r.pass ? "PASS" : "FAIL") + " " + r.check + " n=" + std::to_string(ctx.n) + " " +
                r.metric_name + "=" + format_number(r.metric) + " cases=" + std::to_string(r.cases);
  out.code = r.pass ? 0 : exit_code(ErrorKind::invariant);
  return out;
}

Output cmd_gamma(Context& ctx) {
  const auto n_list = get_sizes(ctx.cfg, "n_list", {ctx.n});
  ctx.set("n_list", n_list);
  ctx.seal();
  Output out;
  CsvTable csv;
  Json rows = Json::array();
  std::ostringstream s;
  for (std::size_t n : n_list) {
    const MomentsReport m = mc_moments(ctx.model.model, n, ctx.scheme, ctx.samples, ctx.opts_with_seed(scan_seed(ctx.seed, n)));
    csv.row(n, "mean", m.mean);
    csv.row(n, "variance", m.variance);
    csv.row(n, "gamma", m.gamma);
    rows.push_back({{"n", n}, {"mean", to_json(m.mean)}, {"variance", to_json(m.variance)}, {"gamma", to_json(m.gamma)}});
    s << "n " << n << " gamma " << format_number(m.gamma.point) << " +- " << format_number(m.gamma.half_width) << '\n';
  }
  out.results["rows"] = std::move(rows);
  out.csv = csv.str();
  out.summary = s.str();
  out.summary.pop_back();
  return out;
}

Output cmd_variance_scan(Context& ctx) {
  const auto n_list = get_sizes(ctx.cfg, "n_list", {200, 400, 800, 1600});
  ctx.set("n_list", n_list);
  ctx.seal();
  const VarianceScan scan = variance_scan(ctx.model.model, ctx.scheme, n_list, ctx.samples, ctx.opts());
  Output out;
  CsvTable csv;
  Json rows = Json::array();
  std::ostringstream s;
  for (const auto& r : scan.rows) {
    csv.row(r.n, "mean", r.mean);
    csv.row(r.n, "variance", r.variance);
    csv.row(r.n, "variance_over_n", r.ratio, r.ratio_hw, r.variance.samples, r.variance.seed);
    rows.push_back({{"n", r.n}, {"mean", to_json(r.mean)}, {"variance", to_json(r.variance)},
                    {"variance_over_n", r.ratio}, {"variance_over_n_ci95", r.ratio_hw}});
    s << "n " << r.n << " var " << format_number(r.variance.point) << " +- " << format_number(r.variance.half_width)
      << " var/n " << format_number(r.ratio) << '\n';
  }
  out.results = {{"rows", rows}, {"slope", scan.slope}, {"intercept", scan.intercept},
                 {"min_ratio", scan.min_ratio}, {"max_ratio", scan.max_ratio}, {"spread", scan.spread}};
  s << "slope " << format_number(scan.slope) << " spread " << format_number(scan.spread);
  out.csv = csv.str();
  out.summary = s.str();
  return out;
}

Output cmd_verify_a1(Context& ctx) {
  const auto eps0 = get_double(ctx.cfg, "eps0");
  if (eps0 && !(*eps0 > 0.0)) bad("eps0", "must be > 0");
  ctx.set("eps0", eps0 ? Json(*eps0) : Json("auto"));
  ctx.seal();
  const A1Report r = verify_a1(ctx.model.model, ctx.n, default_transform(ctx.model.model), ctx.scheme, eps0,
                               ctx.samples, ctx.opts());
  Output out;
  CsvTable csv;
  csv.row(ctx.n, "a1_fraction", r.fraction);
  csv.row(ctx.n, "eps0", r.eps0, 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "mean_gain", r.mean_gain, 0.0, r.applicable, ctx.seed);
  csv.row(ctx.n, "inapplicable", static_cast<double>(r.inapplicable), 0.0, ctx.samples, ctx.seed);
  Json quantiles = Json::array();
  for (const auto& q : r.quantiles) {
    char name[32];
    std::snprintf(name, sizeof name, "gain_q%02d", static_cast<int>(std::lround(q.level * 100)));
    csv.row(ctx.n, name, q.value, 0.0, r.applicable, ctx.seed);
    quantiles.push_back({{"level", q.level}, {"value", q.value}});
  }
  Json hist = Json::array();
  for (const auto& b : r.histogram) hist.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  out.results = {{"fraction", to_json(r.fraction)}, {"eps0", r.eps0}, {"eps0_auto", r.eps0_auto},
                 {"applicable", r.applicable}, {"inapplicable", r.inapplicable}, {"mean_gain", r.mean_gain},
                 {"quantiles", quantiles}, {"histogram", hist}};
  out.csv = csv.str();
  out.summary = "P(gain >= " + format_number(r.eps0) + ") = " + format_number(r.fraction.point) + " +- " +
                format_number(r.fraction.half_width) + (r.eps0_auto ? " (eps0 = 1st percentile)" : "") +
                "; inapplicable " + std::to_string(r.inapplicable);
  return out;
}

Output cmd_verify_a2(Context& ctx) {
  ctx.seal();
  const A2Report r = verify_a2(ctx.model.model, ctx.n, default_transform(ctx.model.model), ctx.scheme, ctx.samples,
                               ctx.opts());
  Output out;
  CsvTable csv;
  csv.row(ctx.n, "min_gain", r.min_gain, 0.0, r.samples, r.seed);
  csv.row(ctx.n, "bound", r.bound, 0.0, r.samples, r.seed);
  csv.row(ctx.n, "inapplicable", static_cast<double>(r.inapplicable), 0.0, r.samples, r.seed);
  out.results = {{"min_gain", r.min_gain}, {"bound", r.bound}, {"applicable", r.applicable},
                 {"inapplicable", r.inapplicable}, {"outcomes", r.outcomes}};
  out.csv = csv.str();
  out.summary = "min gain " + format_number(r.min_gain) + " >= bound " + format_number(r.bound) + " over " +
                std::to_string(r.outcomes) + " outcomes";
  return out;
}

Json gap_summary_json(const GapSummary& g) {
  return {{"pairs", g.pairs}, {"positive", g.positive}, {"fraction_positive", g.fraction_positive},
          {"delta_hat", g.delta_hat}};
}

Output cmd_profile(Context& ctx) {
  const auto threshold = get_int(ctx.cfg, "threshold", static_cast<std::int64_t>(kBinHitThreshold), 1);
  ctx.set("threshold", threshold);
  const double c = ctx.typical_c(ctx.n);
  ctx.seal();
  ProfileOptions popts;
  popts.threshold = static_cast<std::size_t>(threshold);
  const ConditionalProfile p = conditional_profile(ctx.model.model, ctx.n, ctx.scheme, ctx.samples, c, ctx.opts(), popts);
  const Model& model = ctx.model.model;
  Json bins = Json::array();
  for (const auto& b : p.bins) {
    Json j = to_json(b.uv, model);
    j["count"] = b.score.count;
    j["mean"] = b.score.mean;
    j["variance"] = b.score.variance();
    j["gain_count"] = b.gain.count;
    j["gain_mean"] = b.gain.mean;
    bins.push_back(std::move(j));
  }
  auto gaps_json = [&](const std::vector<ProfileGap>& gaps) {
    Json arr = Json::array();
    for (const auto& g : gaps) {
      Json j = to_json(g.lower, model);
      j["gap"] = g.estimate;
      j["ci95"] = g.half_width;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  Output out;
  out.results = {{"c", c}, {"span", p.span}, {"threshold", p.threshold}, {"typical_samples", p.typical_samples},
                 {"sparse_bins", p.sparse_bins}, {"bins", bins}, {"binned_gaps", gaps_json(p.binned_gaps)},
                 {"coupled_gaps", gaps_json(p.coupled_gaps)}, {"binned", gap_summary_json(p.binned)},
                 {"coupled", gap_summary_json(p.coupled)}};
  CsvTable csv;
  csv.row(ctx.n, "c", c, 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "typical_samples", static_cast<double>(p.typical_samples), 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "sparse_bins", static_cast<double>(p.sparse_bins), 0.0, ctx.samples, ctx.seed);
  for (const auto& [name, g] : {std::pair{"binned", p.binned}, std::pair{"coupled", p.coupled}}) {
    const std::string prefix = name;
    csv.row(ctx.n, prefix + "_pairs", static_cast<double>(g.pairs), 0.0, ctx.samples, ctx.seed);
    csv.row(ctx.n, prefix + "_fraction_positive", g.fraction_positive, 0.0, ctx.samples, ctx.seed);
    csv.row(ctx.n, prefix + "_delta_hat", g.delta_hat, 0.0, ctx.samples, ctx.seed);
  }
  out.csv = csv.str();
  std::ostringstream s;
  s << "c " << format_number(c) << " threshold " << p.threshold << "\n"
    << "binned gaps " << p.binned.pairs << " positive " << format_number(p.binned.fraction_positive) << " delta_hat "
    << format_number(p.binned.delta_hat) << "\n"
    << "coupled gaps " << p.coupled.pairs << " positive " << format_number(p.coupled.fraction_positive)
    << " delta_hat " << format_number(p.coupled.delta_hat);
  out.summary = s.str();
  return out;
}

Output cmd_cond_var(Context& ctx) {
  const double c = ctx.typical_c(ctx.n);
  ctx.seal();
  const CondVarReport r = conditional_variance(ctx.model.model, ctx.n, c, ctx.samples, ctx.opts());
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"v", row.v}, {"count", row.count}, {"variance", row.variance}, {"exact", row.exact}});
  }
  Output out;
  out.results = {{"c", c}, {"rows", rows}, {"min_ratio", r.min_ratio}, {"exact_min_ratio", r.exact_min_ratio}};
  CsvTable csv;
  csv.row(ctx.n, "c", c, 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "min_var_over_n", r.min_ratio, 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "exact_min_var_over_n", r.exact_min_ratio, 0.0, ctx.samples, ctx.seed);
  out.csv = csv.str();
  out.summary = "min Var/n " + format_number(r.min_ratio) + " exact " + format_number(r.exact_min_ratio);
  return out;
}

Output cmd_coverage(Context& ctx) {
  const double c = ctx.typical_c(ctx.n);
  ctx.seal();
  const CoverageReport r = coverage_check(ctx.model.model, ctx.n, c, ctx.samples, ctx.opts());
  Output out;
  out.results = {{"c", c}, {"coverage", to_json(r.coverage)}, {"exact", r.exact}};
  CsvTable csv;
  csv.row(ctx.n, "c", c, 0.0, ctx.samples, ctx.seed);
  csv.row(ctx.n, "coverage", r.coverage);
  csv.row(ctx.n, "exact_coverage", r.exact, 0.0, ctx.samples, ctx.seed);
  if (std::holds_alternative<IidModel>(ctx.model.model)) {
    out.results["v_floor"] = r.v_floor;
    out.results["v_exact"] = r.v_exact;
    out.results["u_floor"] = r.u_floor;
    out.results["u_exact_min"] = r.u_exact_min;
    csv.row(ctx.n, "v_floor", r.v_floor, 0.0, ctx.samples, ctx.seed);
    csv.row(ctx.n, "v_exact", r.v_exact, 0.0, ctx.samples, ctx.seed);
    csv.row(ctx.n, "u_floor", r.u_floor, 0.0, ctx.samples, ctx.seed);
    csv.row(ctx.n, "u_exact_min", r.u_exact_min, 0.0, ctx.samples, ctx.seed);
  }
  out.csv = csv.str();
  out.summary = "coverage " + format_number(r.coverage.point) + " +- " + format_number(r.coverage.half_width) +
                " exact " + format_number(r.exact) + " at c " + format_number(c);
  return out;
}

Output cmd_floor(Context& ctx) {
  const auto n_list = get_sizes(ctx.cfg, "n_list", {100, 1000, 10000, 100000});
  ctx.set("n_list", n_list);
  const double c = ctx.typical_c(ctx.n);
  ctx.seal();
  Output out;
  CsvTable csv;
  Json rows = Json::array();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::ostringstream s;
  for (std::size_t n : n_list) {
    const FloorReport f = pointmass_floor(ctx.model.model, n, c);
    csv.row(n, "n_min_pmf", f.scaled, 0.0, f.points, ctx.seed);
    Json j = {{"n", n}, {"min_pmf", f.min_pmf}, {"n_min_pmf", f.scaled}, {"points", f.points},
              {"argmin", to_json(f.argmin, ctx.model.model)}};
    rows.push_back(std::move(j));
    lo = std::min(lo, f.scaled);
    hi = std::max(hi, f.scaled);
    s << "n " << n << " n*min pmf " << format_number(f.scaled) << '\n';
  }
  const double spread = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  out.results = {{"c", c}, {"rows", rows}, {"spread", spread}};
  s << "spread " << format_number(spread) << " at c " << format_number(c);
  out.csv = csv.str();
  out.summary = s.str();
  return out;
}

using Command = std::function<Output(Context&)>;

const std::map<std::string, std::pair<Command, std::string>>& commands() {
  static const std::map<std::string, std::pair<Command, std::string>> table = {
      {"score", {cmd_score, "optimal alignment score of --x and --y"}},
      {"gen", {cmd_gen, "sample sequence pairs from the model"}},
      {"stats", {cmd_stats, "block counts or (U, V) of given sequences"}},
      {"transform", {cmd_transform, "apply the model's random transformation (--all lists every outcome)"}},
      {"oracle", {cmd_oracle, "exhaustive small-n check: tilde2, tilde, pmf, deco, fiber"}},
      {"gamma", {cmd_gamma, "Monte Carlo mean, variance and E L / n"}},
      {"variance-scan", {cmd_variance_scan, "Var L across n with jackknife CIs"}},
      {"verify-a1", {cmd_verify_a1, "fraction of pairs with exact expected gain >= eps0"}},
      {"verify-a2", {cmd_verify_a2, "minimum single-move gain against its hard bound"}},
      {"profile", {cmd_profile, "conditional means l(u, v) and their gaps on the typical set"}},
      {"cond-var", {cmd_cond_var, "Var[U | V = v] restricted to the typical window"}},
      {"coverage", {cmd_coverage, "probability of the typical set"}},
      {"floor", {cmd_floor, "n times the minimum point mass on the typical set"}},
  };
  return table;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::validation, "out: cannot write '" + path + "'");
  f << text;
}

std::string strip_extension(std::string path) {
  for (const char* ext : {".json", ".csv"}) {
    const std::string e = ext;
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return path.substr(0, path.size() - e.size());
    }
  }
  return path;
}

Json error_record(ErrorKind kind, const std::string& message) {
  Json err = {{"kind", to_string(kind)}, {"message", message}, {"exit_code", exit_code(kind)}};
  const auto colon = message.find(": ");
  if (colon != std::string::npos) {
    std::string key = message.substr(0, colon);
    const auto bracket = key.find('[');
    if (kConfigKeys.count(key.substr(0, bracket))) err["key"] = key;
  }
  return {{"schema_version", kSchemaVersion}, {"error", err}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random sequence comparison: scores, models, transformations and fluctuation estimators", "seqfluct"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path, scheme_path, out_path;
  std::vector<std::function<void(Json&)>> overrides;
  auto bind = [&](const std::string& flag, const std::string& key, auto& storage, const std::string& help) {
    CLI::Option* opt = app.add_option(flag, storage, help);
    overrides.push_back([opt, &storage, key](Json& cfg) {
      if (opt->count() > 0) cfg[key] = storage;
    });
    return opt;
  };
  std::string model, alphabet, letter_a, letter_b, check, x, y;
  std::int64_t n = 0, samples = 0, l = 0, threshold = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double q1 = 0, q2 = 0, q3 = 0, c = 0, eps0 = 0, gap_price = 0;
  std::vector<double> probs;
  std::vector<std::int64_t> n_list;
  app.add_option("--config", config_path, "JSON run config; flags override its keys");
  app.add_option("--scheme", scheme_path, "JSON scoring scheme: alphabet, score_table, gap_price");
  app.add_option("--out", out_path, "Write <out>.csv and <out>.json");
  bind("--model", "model", model, "iid or block");
  bind("--n", "n", n, "Sequence length");
  bind("--samples", "samples", samples, "Monte Carlo samples");
  bind("--seed", "seed", seed, "64-bit seed");
  CLI::Option* workers_opt = app.add_option("--workers", workers, "Worker threads (results do not depend on it)");
  bind("--alphabet", "alphabet", alphabet, "Alphabet letters, e.g. abc");
  bind("--probs", "probs", probs, "Letter probabilities (iid), comma separated")->delimiter(',');
  bind("--a", "a", letter_a, "Letter a (iid)");
  bind("--b", "b", letter_b, "Letter b (iid)");
  bind("--l", "l", l, "Central block length (block)");
  bind("--q1", "q1", q1, "P(block length l-1)");
  bind("--q2", "q2", q2, "P(block length l)");
  bind("--q3", "q3", q3, "P(block length l+1)");
  bind("--gap-price", "gap_price", gap_price, "Gap price delta");
  bind("--n-list", "n_list", n_list, "Lengths for scans, comma separated")->delimiter(',');
  bind("--c", "c", c, "Typical-set constant (default: pilot run)");
  bind("--eps0", "eps0", eps0, "A1 threshold (default: 1st percentile of gains)");
  bind("--threshold", "threshold", threshold, "Bin hit threshold for gap summaries");
  bind("--check", "check", check, "Oracle check: tilde2, tilde, pmf, deco, fiber");
  bind("--x", "x", x, "First sequence");
  bind("--y", "y", y, "Second sequence");
  bool all = false, brute = false;
  CLI::Option* all_opt = app.add_flag("--all", all, "transform: list every outcome");
  CLI::Option* brute_opt = app.add_flag("--brute", brute, "score: also run the exhaustive oracle (n <= 12)");

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands()) subs[name] = app.add_subcommand(name, entry.second);

  std::string out_prefix;
  auto fail = [&](ErrorKind kind, const std::string& message) {
    const Json record = error_record(kind, message);
    err << record.dump() << '\n';
    if (!out_prefix.empty()) {
      try {
        write_file(out_prefix + ".json", record.dump(2) + "\n");
      } catch (const Error&) {
      }
    }
    return exit_code(kind);
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::validation, std::string("arguments: ") + e.what());
  }

  try {
    std::string command;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) command = name;
    }
    Json cfg = Json::object();
    if (!config_path.empty()) {
      cfg = read_json_file(config_path, "config");
      check_keys(cfg, kConfigKeys, "config");
    }
    if (!scheme_path.empty()) {
      const Json scheme = read_json_file(scheme_path, "scheme");
      check_keys(scheme, kSchemeKeys, "scheme file");
      for (const auto& [k, v] : scheme.items()) {
        if (k == "alphabet" && cfg.contains("alphabet") && cfg["alphabet"] != v) {
          bad("alphabet", "scheme alphabet differs from the model alphabet");
        }
        cfg[k] = v;
      }
    }
    for (auto& apply_flag : overrides) apply_flag(cfg);
    if (all_opt->count() > 0) cfg["all"] = all;
    if (brute_opt->count() > 0) cfg["brute"] = brute;
    if (!out_path.empty()) cfg["out"] = out_path;
    if (auto o = get_string(cfg, "out")) out_prefix = strip_extension(*o);

    const std::string default_kind = (command == "oracle" && get_string(cfg, "check") == "tilde2") ? "iid" : "block";
    ModelSpec spec = build_model(cfg, default_kind);
    Json scheme_json;
    ScoringScheme scheme = build_scheme(cfg, *spec.alphabet, scheme_json);
    Context ctx(std::move(spec), std::move(scheme));
    ctx.command = command;
    ctx.cfg = cfg;
    ctx.n = static_cast<std::size_t>(get_int(cfg, "n", 100, 1));
    ctx.samples = static_cast<std::size_t>(get_int(cfg, "samples", 1000, 1));
    ctx.seed = get_seed(cfg);
    const std::int64_t w = workers_opt->count() > 0 ? static_cast<std::int64_t>(workers) : get_int(cfg, "workers", 1, 1);
    if (w < 1 || w > 1024) bad("workers", "must lie in 1..1024");
    ctx.workers = static_cast<unsigned>(w);
    ctx.resolved = {{"command", command}, {"model", ctx.model.json}, {"scheme", scheme_json},
                    {"n", ctx.n}, {"samples", ctx.samples}, {"seed", ctx.seed}};

    Output result = commands().at(command).first(ctx);
    const Json report = {{"schema_version", kSchemaVersion}, {"command", command},    {"config", ctx.resolved},
                         {"fingerprint", ctx.fingerprint},    {"seed", ctx.seed},     {"results", result.results},
                         {"status", result.code == 0 ? "ok" : "fail"}};
    if (!out_prefix.empty()) {
      write_file(out_prefix + ".csv", result.csv);
      write_file(out_prefix + ".json", report.dump(2) + "\n");
      out << result.summary << '\n';
    } else {
      out << result.summary << '\n' << result.csv;
    }
    return result.code;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const Json::exception& e) {
    return fail(ErrorKind::validation, std::string("config: ") + e.what());
  }
}

}  // namespace seqfluct
