#include "stp/cli.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "stp/dimension.hpp"
#include "stp/targets.hpp"

namespace stp::cli {

ConfigError::ConfigError(const std::string& what, int line, int column)
    : std::runtime_error(what), line_(line), column_(column) {}

const ConfigEntry* ConfigSection::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

const ConfigSection* ConfigDocument::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

// ---------------------------------------------------------------- parsing

namespace {

const std::set<std::string> kSections{"system", "potential", "target", "run"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

// Number at text[pos...]; nullopt unless the whole token parses.
std::optional<double> to_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  ConfigDocument doc;
  doc.text = text;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t b = 0;
    while (b < raw.size() && is_space(raw[b])) ++b;
    std::size_t e = raw.size();
    while (e > b && is_space(raw[e - 1])) --e;
    if (b == e || raw[b] == '#' || raw[b] == ';') continue;
    const int col = static_cast<int>(b) + 1;
    if (raw[b] == '[') {
      if (raw[e - 1] != ']') throw ConfigError("unterminated section header", line, col);
      std::string name = raw.substr(b + 1, e - b - 2);
      if (!kSections.count(name))
        throw ConfigError("unknown section [" + name + "] (expected system, potential, target, run)", line, col);
      if (doc.find(name)) throw ConfigError("duplicate section [" + name + "]", line, col);
      doc.sections.push_back({name, line, {}});
      continue;
    }
    if (doc.sections.empty()) throw ConfigError("key outside of any section", line, col);
    const std::size_t eq = raw.find('=', b);
    if (eq == std::string::npos || eq >= e) throw ConfigError("expected 'key = value'", line, col);
    std::size_t ke = eq;
    while (ke > b && is_space(raw[ke - 1])) --ke;
    if (ke == b) throw ConfigError("empty key", line, col);
    std::size_t vb = eq + 1;
    while (vb < e && is_space(raw[vb])) ++vb;
    ConfigEntry entry{raw.substr(b, ke - b), raw.substr(vb, e - vb), line, col, static_cast<int>(vb) + 1};
    for (std::size_t k = 0; k < entry.key.size(); ++k) {
      const char c = entry.key[k];
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
        throw ConfigError("invalid character in key '" + entry.key + "'", line, col + static_cast<int>(k));
    }
    if (entry.value.empty()) throw ConfigError("missing value for '" + entry.key + "'", line, static_cast<int>(eq) + 2);
    auto& section = doc.sections.back();
    if (section.find(entry.key))
      throw ConfigError("duplicate key '" + entry.key + "' in [" + section.name + "]", line, col);
    section.entries.push_back(std::move(entry));
  }
  return doc;
}

namespace {

struct Token {
  std::string text;
  int column;  // 1-based inside the expression
};

class ExprParser {
 public:
  ExprParser(const std::string& text, int line, int offset) : line_(line), offset_(offset) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && is_space(text[i])) ++i;
      if (i >= text.size()) break;
      const std::size_t b = i;
      while (i < text.size() && !is_space(text[i])) ++i;
      tokens_.push_back({text.substr(b, i - b), static_cast<int>(b) + 1});
    }
    end_column_ = static_cast<int>(text.size()) + 1;
  }

  Potential parse_all() {
    Potential p = parse();
    if (pos_ < tokens_.size()) fail("unexpected trailing '" + tokens_[pos_].text + "'", tokens_[pos_].column);
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int column) const {
    throw ConfigError("potential: " + msg, line_, offset_ + column - 1);
  }

  const Token& next(const char* expecting) {
    if (pos_ >= tokens_.size()) fail(std::string("expected ") + expecting + " but the expression ended", end_column_);
    return tokens_[pos_++];
  }

  double number() {
    const Token& t = next("a number");
    const auto v = to_number(t.text);
    if (!v) fail("'" + t.text + "' is not a number", t.column);
    if (*v < 0.0) fail("coefficients must be >= 0", t.column);
    return *v;
  }

  Potential parse() {
    const Token& t = next("psi, const, scale, sum or branch");
    if (t.text == "psi") return Potential::log_derivative();
    if (t.text == "const") return Potential::constant(number());
    if (t.text == "scale") {
      const double c = number();
      return Potential::scale(c, parse());
    }
    if (t.text == "sum") {
      Potential a = parse();
      return Potential::sum(a, parse());
    }
    if (t.text == "branch") {
      const Token& list = next("a bracket list lo:hi,...");
      std::vector<Interval> table;
      std::size_t b = 0;
      while (b <= list.text.size()) {
        std::size_t e = list.text.find(',', b);
        if (e == std::string::npos) e = list.text.size();
        const std::string item = list.text.substr(b, e - b);
        const int col = list.column + static_cast<int>(b);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) fail("bracket '" + item + "' must read lo:hi", col);
        const auto lo = to_number(item.substr(0, colon));
        const auto hi = to_number(item.substr(colon + 1));
        if (!lo || !hi) fail("bracket '" + item + "' must read lo:hi", col);
        if (!(*lo >= 0.0 && *lo <= *hi)) fail("bracket '" + item + "' needs 0 <= lo <= hi", col);
        table.push_back({*lo, *hi});
        b = e + 1;
      }
      return Potential::per_symbol(std::move(table));
    }
    fail("unknown node '" + t.text + "'", t.column);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_;
  int offset_;
  int end_column_ = 1;
};

}  // namespace

Potential parse_potential(const std::string& text, int line, int column_offset) {
  return ExprParser(text, line, column_offset).parse_all();
}

std::string serialize_counterexample(const CounterexampleSystem& ce) {
  std::ostringstream o;
  o << "# counterexample system, beta = " << fmt(ce.beta) << ", phi = " << ce.phi.to_string() << "\n"
    << "[system]\n"
    << "kind = counterexample\n"
    << "beta = " << hexfloat(ce.beta) << "\n"
    << "phi = " << ce.phi.to_string() << "\n"
    << "n0 = " << ce.n0 << "\n"
    << "r1 = " << hexfloat(ce.r1) << "\n"
    << "r2 = " << hexfloat(ce.r2) << "\n";
  return o.str();
}

// ---------------------------------------------------------------- commands

namespace {

// Typed access to a document that remembers which keys were read, so that
// leftovers can be rejected with their position.
class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  bool has_section(const std::string& s) const { return doc_.find(s) != nullptr; }

  const ConfigEntry* get(const std::string& section, const std::string& key) {
    const ConfigSection* s = doc_.find(section);
    if (!s) return nullptr;
    used_sections_.insert(section);
    const ConfigEntry* e = s->find(key);
    if (e) used_.insert(e);
    return e;
  }

  const ConfigEntry& require(const std::string& section, const std::string& key) {
    const ConfigEntry* e = get(section, key);
    if (!e) {
      const ConfigSection* s = doc_.find(section);
      throw ConfigError("missing key '" + key + "' in [" + section + "]", s ? s->line : 0, 1);
    }
    return *e;
  }

  void require_section(const std::string& section) {
    if (!doc_.find(section)) throw ConfigError("missing section [" + section + "]", 0, 0);
    used_sections_.insert(section);
  }

  void check_unused(const std::string& command) const {
    for (const auto& s : doc_.sections) {
      if (!used_sections_.count(s.name) && !s.entries.empty())
        throw ConfigError("section [" + s.name + "] is not used by command '" + command + "'", s.line, 1);
      for (const auto& e : s.entries)
        if (!used_.count(&e))
          throw ConfigError("key '" + e.key + "' in [" + s.name + "] is not used by command '" + command + "'",
                            e.line, e.key_column);
    }
  }

 private:
  const ConfigDocument& doc_;
  std::set<std::string> used_sections_;
  std::set<const ConfigEntry*> used_;
};

double number(const ConfigEntry& e) {
  const auto v = to_number(e.value);
  if (!v) throw ConfigError("'" + e.key + "' must be a number, got '" + e.value + "'", e.line, e.value_column);
  return *v;
}

std::vector<double> numbers(const ConfigEntry& e) {
  std::vector<double> out;
  std::size_t b = 0;
  while (b <= e.value.size()) {
    std::size_t c = e.value.find(',', b);
    if (c == std::string::npos) c = e.value.size();
    std::string item = e.value.substr(b, c - b);
    std::size_t lead = 0;
    while (lead < item.size() && is_space(item[lead])) ++lead;
    std::size_t trail = item.size();
    while (trail > lead && is_space(item[trail - 1])) --trail;
    const auto v = to_number(item.substr(lead, trail - lead));
    if (!v)
      throw ConfigError("'" + e.key + "' must be a comma-separated list of numbers", e.line,
                        e.value_column + static_cast<int>(b + lead));
    out.push_back(*v);
    b = c + 1;
  }
  return out;
}

long long integer(const ConfigEntry& e, long long min_value) {
  const double v = number(e);
  if (v != std::floor(v) || v < static_cast<double>(min_value) || v > 9.0e15)
    throw ConfigError("'" + e.key + "' must be an integer >= " + std::to_string(min_value), e.line, e.value_column);
  return static_cast<long long>(v);
}

std::vector<Symbol> symbol_list(const ConfigEntry& e) {
  std::vector<Symbol> out;
  for (double v : numbers(e)) {
    if (v != std::floor(v) || v < 1.0 || v > 4.0e9)
      throw ConfigError("'" + e.key + "' must list positive integer symbols", e.line, e.value_column);
    out.push_back(static_cast<Symbol>(v));
  }
  return out;
}

std::string join(const std::vector<Symbol>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k]);
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Loaded {
  MarkovSystem system;
  std::optional<CounterexampleSystem> counterexample;
  std::string description;
};

CounterexampleSystem counterexample_from(Reader& r, const std::string& section, bool allow_stored) {
  const ConfigEntry& beta = r.require(section, "beta");
  const ConfigEntry& phi_e = r.require(section, "phi");
  ShrinkFn phi = ShrinkFn::reciprocal();
  try {
    phi = ShrinkFn::parse(phi_e.value);
  } catch (const DomainError& ex) {
    throw ConfigError(ex.what(), phi_e.line, phi_e.value_column);
  }
  const ConfigEntry* n0 = allow_stored ? r.get(section, "n0") : nullptr;
  const ConfigEntry* r1 = allow_stored ? r.get(section, "r1") : nullptr;
  const ConfigEntry* r2 = allow_stored ? r.get(section, "r2") : nullptr;
  if (n0 || r1 || r2) {
    if (!(n0 && r1 && r2)) {
      const ConfigEntry* any = n0 ? n0 : r1 ? r1 : r2;
      throw ConfigError("stored counterexample needs all of n0, r1, r2", any->line, any->key_column);
    }
    return restore_counterexample(number(beta), phi, static_cast<unsigned>(integer(*n0, 3)), number(*r1),
                                  number(*r2));
  }
  return build_counterexample(number(beta), phi);
}

Loaded load_system(Reader& r, const std::string& config_dir) {
  r.require_section("system");
  const ConfigEntry& kind = r.require("system", "kind");
  const std::string& k = kind.value;
  if (k == "doubling") return {doubling_map(), std::nullopt, "doubling"};
  if (k == "affine") {
    const ConfigEntry& ratios = r.require("system", "ratios");
    std::vector<double> lefts;
    if (const ConfigEntry* l = r.get("system", "lefts")) lefts = numbers(*l);
    try {
      return {affine_system(numbers(ratios), lefts), std::nullopt, "affine " + ratios.value};
    } catch (const DomainError& ex) {
      throw ConfigError(ex.what(), ratios.line, ratios.value_column);
    }
  }
  if (k == "gauss") {
    if (const ConfigEntry* t = r.get("system", "truncation")) {
      const auto K = static_cast<Symbol>(integer(*t, 2));
      return {gauss_map(K), std::nullopt, "gauss truncated to 1.." + std::to_string(K)};
    }
    return {gauss_map(), std::nullopt, "gauss"};
  }
  if (k == "affine_geometric") {
    const double first = number(r.require("system", "first"));
    const double decay = number(r.require("system", "decay"));
    return {affine_geometric(first, decay), std::nullopt, "affine_geometric " + fmt(first) + " " + fmt(decay)};
  }
  if (k == "counterexample") {
    if (const ConfigEntry* f = r.get("system", "file")) {
      std::filesystem::path path(f->value);
      if (path.is_relative()) path = std::filesystem::path(config_dir) / path;
      ConfigDocument stored;
      try {
        stored = parse_config(read_file(path.string()));
      } catch (const ConfigError& ex) {
        throw ConfigError(path.string() + ":" + std::to_string(ex.line()) + ":" + std::to_string(ex.column()) +
                              ": " + ex.what(),
                          f->line, f->value_column);
      } catch (const std::runtime_error& ex) {
        throw ConfigError(ex.what(), f->line, f->value_column);
      }
      Reader inner(stored);
      const ConfigEntry* inner_kind = inner.get("system", "kind");
      if (!inner_kind || inner_kind->value != "counterexample")
        throw ConfigError("'" + path.string() + "' does not hold a counterexample system", f->line, f->value_column);
      CounterexampleSystem ce = counterexample_from(inner, "system", true);
      return {ce.as_system(), ce, "counterexample from " + f->value};
    }
    CounterexampleSystem ce = counterexample_from(r, "system", true);
    return {ce.as_system(), ce, "counterexample beta " + fmt(ce.beta) + " phi " + ce.phi.to_string()};
  }
  throw ConfigError("unknown system kind '" + k + "' (expected doubling, affine, gauss, affine_geometric, counterexample)",
                    kind.line, kind.value_column);
}

Potential potential_from(const ConfigEntry& e) { return parse_potential(e.value, e.line, e.value_column); }

std::vector<Symbol> subset_from(Reader& r, const MarkovSystem& sys) {
  if (const ConfigEntry* e = r.get("run", "subset")) return symbol_list(*e);
  if (!sys.alphabet().is_finite()) throw ConfigError("run.subset is required for a countable alphabet", 0, 0);
  return sys.alphabet().symbols();
}

SolveOptions solve_options(Reader& r, const MarkovSystem& sys, const PressureOptions& p) {
  SolveOptions o;
  o.pressure = p;
  o.pressure.base = BaseSet::limit_hull;
  if (const ConfigEntry* t = r.get("run", "tol")) {
    o.tol = number(*t);
    if (!(o.tol > 0.0)) throw ConfigError("'tol' must be > 0", t->line, t->value_column);
  }
  if (const ConfigEntry* d = r.get("run", "depth")) o.n_max = static_cast<int>(integer(*d, 1));
  const ConfigEntry* ladder = r.get("run", "ladder");
  const ConfigEntry* subset = r.get("run", "subset");
  if (ladder && subset) throw ConfigError("give either 'ladder' or 'subset', not both", subset->line, subset->key_column);
  if (ladder) {
    std::vector<std::size_t> sizes;
    for (double v : numbers(*ladder)) {
      if (v != std::floor(v) || v < 1.0) throw ConfigError("'ladder' lists alphabet sizes >= 1", ladder->line, ladder->value_column);
      sizes.push_back(static_cast<std::size_t>(v));
    }
    o.ladder = prefix_ladder(sys.alphabet(), sizes);
  } else if (subset) {
    o.ladder = {symbol_list(*subset)};
  } else if (!sys.alphabet().is_finite()) {
    throw ConfigError("run.ladder or run.subset is required for a countable alphabet", 0, 0);
  }
  return o;
}

TargetSpec target_from(Reader& r, bool needs_rate) {
  r.require_section("target");
  const ConfigEntry& y = r.require("target", "y");
  const double yv = number(y);
  if (!(yv >= 0.0 && yv <= 1.0)) throw ConfigError("'y' must lie in [0,1]", y.line, y.value_column);
  if (!needs_rate) return TargetSpec(yv, ConstantRate{1.0});
  const ConfigEntry* alpha = r.get("target", "alpha");
  const ConfigEntry* rate = r.get("target", "rate");
  if (alpha && rate) throw ConfigError("give either 'alpha' or 'rate', not both", rate->line, rate->key_column);
  if (alpha) {
    const double a = number(*alpha);
    if (!(a > 0.0)) throw ConfigError("'alpha' must be > 0", alpha->line, alpha->value_column);
    return TargetSpec(yv, ConstantRate{a});
  }
  if (rate) return TargetSpec(yv, PotentialRate{potential_from(*rate)});
  throw ConfigError("[target] needs 'alpha' or 'rate'", y.line, 1);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> manifest;  // extra "# key: value" lines
};

std::string yes(bool b) { return b ? "true" : "false"; }

std::string truncation_text(const Truncation& t) {
  return "subset={" + join(t.subset) + "} depth=" + std::to_string(t.depth);
}

struct Context {
  Reader reader;
  RunOptions options;
  PressureOptions pressure;
  std::string config_dir;
};

Table cmd_pressure(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  c.reader.require_section("potential");
  const Potential pot = potential_from(c.reader.require("potential", "expr"));
  const std::vector<Symbol> f = subset_from(c.reader, sys.system);
  const ConfigEntry& depth_e = c.reader.require("run", "depth");
  const int depth = static_cast<int>(integer(depth_e, 1));
  c.reader.check_unused(c.options.command);

  const double zs = partition_sum(sys.system, pot, f, depth, Mode::sup, c.pressure);
  const double zi = partition_sum(sys.system, pot, f, depth, Mode::inf, c.pressure);
  const PressureEstimate est = pressure_bracket(sys.system, pot, f, depth, c.pressure);
  Table t;
  t.columns = {"n", "log_z_sup", "log_z_inf", "lower", "upper", "diverged"};
  t.rows.push_back({std::to_string(depth), fmt(zs), fmt(zi), fmt(est.lower), fmt(est.upper), yes(est.diverged)});
  t.manifest = {"system: " + sys.description, "potential: " + pot.to_string(),
                "truncation: subset={" + join(est.subset) + "} depth=" + std::to_string(est.depth),
                "certified: " + yes(!est.diverged && est.lower <= est.upper)};
  return t;
}

Table cmd_dimension(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  std::optional<Potential> phi;
  if (c.reader.has_section("potential")) phi = potential_from(c.reader.require("potential", "expr"));
  const SolveOptions o = solve_options(c.reader, sys.system, c.pressure);
  c.reader.check_unused(c.options.command);

  const DimensionResult d = phi ? shrink_exponent_potential(sys.system, *phi, o) : bowen_dimension(sys.system, o);
  Table t;
  t.columns = {"value", "lo", "hi", "tolerance", "subset_size", "depth", "certified"};
  t.rows.push_back({fmt(d.value), fmt(d.lo), fmt(d.hi), fmt(d.tolerance), std::to_string(d.truncation.subset.size()),
                    std::to_string(d.truncation.depth), yes(d.certified)});
  t.manifest = {"system: " + sys.description,
                std::string("equation: ") + (phi ? "P(-s(psi + " + phi->to_string() + ")) <= 0" : "P(-s psi) <= 0"),
                "truncation: " + truncation_text(d.truncation), "certified: " + yes(d.certified)};
  return t;
}

Table cmd_spectrum(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  const std::vector<double> alphas = numbers(c.reader.require("run", "alphas"));
  const SolveOptions o = solve_options(c.reader, sys.system, c.pressure);
  c.reader.check_unused(c.options.command);

  const auto rows = spectrum(sys.system, alphas, o);
  Table t;
  t.columns = {"alpha", "value", "lo", "hi", "certified"};
  bool all = true;
  for (const auto& [a, d] : rows) {
    t.rows.push_back({fmt(a), fmt(d.value), fmt(d.lo), fmt(d.hi), yes(d.certified)});
    all = all && d.certified;
  }
  t.manifest = {"system: " + sys.description, "truncation: " + truncation_text(rows.back().second.truncation),
                "certified: " + yes(all)};
  return t;
}

Table cmd_cover(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  const TargetSpec target = target_from(c.reader, true);
  const double s = number(c.reader.require("run", "s"));
  const int m = static_cast<int>(integer(c.reader.require("run", "m"), 1));
  const int n_max = static_cast<int>(integer(c.reader.require("run", "n_max"), 1));
  const std::vector<Symbol> f = subset_from(c.reader, sys.system);
  const ConfigEntry* window = c.reader.get("run", "decay_window");
  const ConfigEntry* margin = c.reader.get("run", "margin");
  c.reader.check_unused(c.options.command);

  Table t;
  t.columns = {"n", "words", "sum", "log_sum"};
  CoverReport report;
  t.manifest = {"system: " + sys.description, "target: y=" + fmt(target.y) + " rate=" + target.potential().to_string(),
                "truncation: subset={" + join(checked_subset(sys.system, f)) + "} levels=" + std::to_string(m) + ".." +
                    std::to_string(n_max)};
  if (window) {
    CertificateParams p;
    p.m = m;
    p.n_max = n_max;
    p.subset = f;
    p.decay_window = static_cast<int>(integer(*window, 1));
    if (margin) p.margin = number(*margin);
    p.options = c.pressure;
    const CertificateReport cert = upper_dimension_certificate(sys.system, target, s, p);
    report = cert.cover;
    t.manifest.push_back("certificate: " + std::string(cert.accepted ? "accepted" : "rejected") +
                         " max_ratio=" + fmt(cert.max_ratio));
    if (cert.accepted) t.manifest.push_back("implied_total: " + fmt(cert.implied_total));
    t.manifest.push_back("note: " + cert.note);
    t.manifest.push_back("certified: " + yes(cert.accepted));
  } else {
    report = cover_sum(sys.system, target, s, m, n_max, f, c.pressure);
    t.manifest.push_back("certified: false");
  }
  t.manifest.push_back("total: " + fmt(report.total));
  for (const auto& l : report.per_level)
    t.rows.push_back({std::to_string(l.n), std::to_string(l.words), fmt(l.sum), fmt(l.log_sum)});
  return t;
}

Table cmd_density(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  const TargetSpec target = target_from(c.reader, false);
  const int n = static_cast<int>(integer(c.reader.require("run", "n"), 1));
  const ConfigEntry& r_e = c.reader.require("run", "r");
  const double r = number(r_e);
  if (!(r > 0.0)) throw ConfigError("'r' must be > 0", r_e.line, r_e.value_column);
  const std::vector<Symbol> f = subset_from(c.reader, sys.system);
  c.reader.check_unused(c.options.command);

  const double d = cylinder_density(sys.system, target.y, n, r, f, c.pressure.budget);
  Table t;
  t.columns = {"y", "n", "r", "density"};
  t.rows.push_back({fmt(target.y), std::to_string(n), fmt(r), fmt(d)});
  t.manifest = {"system: " + sys.description, "truncation: subset={" + join(checked_subset(sys.system, f)) + "}",
                "certified: true"};
  return t;
}

Table cmd_hits(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  const TargetSpec target = target_from(c.reader, true);
  const std::vector<Symbol> code = symbol_list(c.reader.require("run", "code"));
  const int horizon = static_cast<int>(integer(c.reader.require("run", "horizon"), 1));
  HitOptions h;
  if (const ConfigEntry* e = c.reader.get("run", "refinements")) h.max_refinements = static_cast<int>(integer(*e, 0));
  c.reader.check_unused(c.options.command);

  const SymbolSource source = [&code](std::size_t i) -> std::optional<Symbol> { return code[i % code.size()]; };
  const HitSchedule s = hit_times(sys.system, source, target, horizon, h);
  std::vector<std::string> status(static_cast<std::size_t>(horizon) + 1);
  for (int n : s.hits) status[static_cast<std::size_t>(n)] = "hit";
  for (int n : s.misses) status[static_cast<std::size_t>(n)] = "miss";
  for (int n : s.undecided) status[static_cast<std::size_t>(n)] = "undecided";
  Table t;
  t.columns = {"n", "status"};
  for (int n = 1; n <= horizon; ++n) t.rows.push_back({std::to_string(n), status[static_cast<std::size_t>(n)]});
  t.manifest = {"system: " + sys.description, "code: periodic (" + join(code) + ")",
                "target: y=" + fmt(target.y) + " rate=" + target.potential().to_string(),
                "summary: hits=" + std::to_string(s.hits.size()) + " misses=" + std::to_string(s.misses.size()) +
                    " undecided=" + std::to_string(s.undecided.size()),
                "certified: " + yes(s.undecided.empty())};
  return t;
}

Table cmd_verify(Context& c) {
  Loaded sys = load_system(c.reader, c.config_dir);
  if (!sys.counterexample) throw ConfigError("counterexample-verify needs system kind = counterexample", 0, 0);
  c.reader.check_unused(c.options.command);
  const CounterexampleSystem& ce = *sys.counterexample;
  const double residual = verify_moran(ce);
  Table t;
  t.columns = {"beta", "phi", "n0", "r1", "r2", "residual"};
  t.rows.push_back({fmt(ce.beta), ce.phi.to_string(), std::to_string(ce.n0), fmt(ce.r1), fmt(ce.r2), fmt(residual)});
  t.manifest = {"system: " + sys.description, "certified: " + yes(residual <= 1e-10)};
  return t;
}

std::string cmd_build(Context& c) {
  c.reader.require_section("system");
  const ConfigEntry& kind = c.reader.require("system", "kind");
  if (kind.value != "counterexample")
    throw ConfigError("counterexample-build needs kind = counterexample", kind.line, kind.value_column);
  const CounterexampleSystem ce = counterexample_from(c.reader, "system", false);
  c.reader.check_unused(c.options.command);
  return serialize_counterexample(ce);
}

void write_table(std::ostream& out, const Context& c, const ConfigDocument& doc, const Table& t) {
  out << "# stp " << c.options.command << "\n";
  out << "# reduction: " << (c.options.sequential ? "sequential" : "parallel") << "\n";
  out << "# budget: " << c.pressure.budget << "\n";
  std::istringstream in(doc.text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out << "# config: " << line << "\n";
  }
  for (const auto& m : t.manifest) out << "# " << m << "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << "\n";
  }
}

}  // namespace

int run(const RunOptions& options, const ConfigDocument& doc, std::ostream& out, std::ostream& err) {
  const std::string where = options.config_path.empty() ? "config" : options.config_path;
  std::uint64_t budget = 10'000'000;
  try {
    Context c{Reader(doc), options, PressureOptions{}, {}};
    c.config_dir = options.config_path.empty()
                       ? std::string(".")
                       : std::filesystem::path(options.config_path).parent_path().string();
    if (c.config_dir.empty()) c.config_dir = ".";
    if (const ConfigEntry* cmd = c.reader.get("run", "command"); cmd && cmd->value != options.command)
      throw ConfigError("config requests command '" + cmd->value + "' but '" + options.command + "' was invoked",
                        cmd->line, cmd->value_column);
    c.reader.get("run", "out");
    if (const ConfigEntry* b = c.reader.get("run", "budget")) budget = static_cast<std::uint64_t>(integer(*b, 1));
    if (options.budget) budget = *options.budget;
    c.pressure.budget = budget;
    c.pressure.reduction = options.sequential ? Reduction::sequential : Reduction::parallel;

    const std::string& cmd = options.command;
    if (cmd == "counterexample-build") {
      out << cmd_build(c);
      return ok;
    }
    static const std::map<std::string, std::function<Table(Context&)>> table_commands{
        {"pressure", cmd_pressure}, {"dimension", cmd_dimension}, {"spectrum", cmd_spectrum},
        {"cover", cmd_cover},       {"density", cmd_density},     {"hits", cmd_hits},
        {"counterexample-verify", cmd_verify}};
    const auto it = table_commands.find(cmd);
    if (it == table_commands.end()) {
      err << "error: unknown command '" << cmd << "'\n";
      return failure;
    }
    const Table t = it->second(c);
    write_table(out, c, doc, t);
    return ok;
  } catch (const ConfigError& e) {
    err << where << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return config_error;
  } catch (const BudgetError& e) {
    err << "error: budget exceeded (budget = " << e.budget() << ", set with run.budget or --budget): " << e.what()
        << "; deepest level within budget: " << e.deepest_level() << "\n";
    return budget_exceeded;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return domain_error;
  } catch (const SearchCapError& e) {
    err << "error: " << e.what() << "\n";
    return domain_error;
  } catch (const EscapeError& e) {
    err << "error: " << e.what() << "\n";
    return domain_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

int run_file(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ConfigDocument doc;
  try {
    doc = parse_config(read_file(options.config_path));
  } catch (const ConfigError& e) {
    err << options.config_path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
  std::optional<std::string> path = options.out_path;
  if (!path)
    if (const ConfigSection* s = doc.find("run"))
      if (const ConfigEntry* e = s->find("out")) path = e->value;
  if (!path) return run(options, doc, out, err);
  std::ostringstream buffer;
  const int code = run(options, doc, buffer, err);
  if (code != ok) return code;
  std::ofstream file(*path, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << *path << "'\n";
    return failure;
  }
  file << buffer.str();
  return file ? ok : failure;
}

}  // namespace stp::cli
