#include "gamblet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace gamblet {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem",
       {"q", "coefficient", "coefficient_value", "contrast", "seed", "coefficient_file", "load",
        "load_value", "load_file"}},
      {"solver",
       {"pipeline", "w_variant", "tol_mass", "tol_subband", "nodal_init", "epsilon", "c_rho",
        "radii", "tol_multiplier", "load_shortcut", "drop_tol", "jacobi", "threads",
        "compare_exact"}},
      {"output", {"dir", "matrix_market"}},
      {"bases", {"level", "indices", "chi_indices"}},
      {"report", {"decay_levels", "keep_fractions"}},
  };
  return keys;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) fail(key, "cannot parse '" + raw + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) fail(key, "value must be finite");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(raw));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(key, "expected a boolean, got '" + raw + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  const std::string s = boost::trim_copy(raw);
  if (s.empty()) return out;
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (const auto& p : parts) out.push_back(parse_number<T>(key, p));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

CoefficientKind parse_coefficient(const std::string& key, const std::string& s) {
  if (s == "example1") return CoefficientKind::example1;
  if (s == "constant") return CoefficientKind::constant;
  if (s == "checkerboard") return CoefficientKind::checkerboard;
  if (s == "csv") return CoefficientKind::csv;
  fail(key, "expected example1|constant|checkerboard|csv, got '" + s + "'");
}

LoadKind parse_load(const std::string& key, const std::string& s) {
  if (s == "example1") return LoadKind::example1;
  if (s == "constant") return LoadKind::constant;
  if (s == "csv") return LoadKind::csv;
  fail(key, "expected example1|constant|csv, got '" + s + "'");
}

PipelineKind parse_pipeline(const std::string& key, const std::string& s) {
  if (s == "exact") return PipelineKind::exact;
  if (s == "fast") return PipelineKind::fast;
  fail(key, "expected exact|fast, got '" + s + "'");
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

std::string to_string(CoefficientKind k) {
  switch (k) {
    case CoefficientKind::example1: return "example1";
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::checkerboard: return "checkerboard";
    case CoefficientKind::csv: return "csv";
  }
  return "?";
}

std::string to_string(LoadKind k) {
  switch (k) {
    case LoadKind::example1: return "example1";
    case LoadKind::constant: return "constant";
    case LoadKind::csv: return "csv";
  }
  return "?";
}

std::string to_string(PipelineKind k) {
  return k == PipelineKind::exact ? "exact" : "fast";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  RunConfig c;
  const auto& allowed = allowed_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) fail(section, "keys must live inside a [section]");
    const auto it = allowed.find(section);
    if (it == allowed.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!it->second.count(key)) fail(full, "unknown key");
      const std::string v = boost::trim_copy(node.data());
      if (section == "problem") {
        if (key == "q") c.q = parse_number<int>(full, v);
        else if (key == "coefficient") c.coefficient = parse_coefficient(full, v);
        else if (key == "coefficient_value") c.coefficient_value = parse_number<double>(full, v);
        else if (key == "contrast") c.contrast = parse_number<double>(full, v);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(full, v);
        else if (key == "coefficient_file") c.coefficient_file = resolve(base_dir, v);
        else if (key == "load") c.load = parse_load(full, v);
        else if (key == "load_value") c.load_value = parse_number<double>(full, v);
        else if (key == "load_file") c.load_file = resolve(base_dir, v);
      } else if (section == "solver") {
        if (key == "pipeline") c.pipeline = parse_pipeline(full, v);
        else if (key == "w_variant") {
          try {
            c.variant = parse_w_variant(v);
          } catch (const std::invalid_argument& e) {
            fail(full, e.what());
          }
        }
        else if (key == "tol_mass") c.tol_mass = parse_number<double>(full, v);
        else if (key == "tol_subband") c.tol_subband = parse_number<double>(full, v);
        else if (key == "nodal_init") c.nodal_init = parse_bool(full, v);
        else if (key == "epsilon") c.epsilon = parse_number<double>(full, v);
        else if (key == "c_rho") c.c_rho = parse_number<double>(full, v);
        else if (key == "radii") c.radii = parse_list<int>(full, v);
        else if (key == "tol_multiplier") c.tol_multiplier = parse_number<double>(full, v);
        else if (key == "load_shortcut") c.load_shortcut = parse_bool(full, v);
        else if (key == "drop_tol") c.drop_tol = parse_number<double>(full, v);
        else if (key == "jacobi") c.jacobi = parse_bool(full, v);
        else if (key == "threads") c.threads = parse_number<int>(full, v);
        else if (key == "compare_exact") c.compare_exact = parse_bool(full, v);
      } else if (section == "output") {
        if (key == "dir") c.out_dir = resolve(base_dir, v);
        else if (key == "matrix_market") c.matrix_market = parse_bool(full, v);
      } else if (section == "bases") {
        if (key == "level") c.bases_level = parse_number<int>(full, v);
        else if (key == "indices") c.bases_indices = parse_list<std::int64_t>(full, v);
        else if (key == "chi_indices") c.chi_indices = parse_list<std::int64_t>(full, v);
      } else if (section == "report") {
        if (key == "decay_levels") c.decay_levels = parse_list<int>(full, v);
        else if (key == "keep_fractions") c.keep_fractions = parse_list<double>(full, v);
      }
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate(const RunConfig& c) {
  if (c.q < 2 || c.q > kMaxGridDepth) {
    fail("problem.q", "must lie in [2, " + std::to_string(kMaxGridDepth) + "]");
  }
  if (c.pipeline == PipelineKind::exact && c.q > kMaxExactDepth) {
    fail("problem.q", "the exact pipeline is dense; use q <= " +
                          std::to_string(kMaxExactDepth) + " or pipeline = fast");
  }
  if (c.coefficient == CoefficientKind::constant && !(c.coefficient_value > 0.0)) {
    fail("problem.coefficient_value", "must be > 0");
  }
  if (c.coefficient == CoefficientKind::checkerboard && !(c.contrast >= 1.0)) {
    fail("problem.contrast", "must be >= 1");
  }
  if (c.coefficient == CoefficientKind::csv && c.coefficient_file.empty()) {
    fail("problem.coefficient_file", "required when coefficient = csv");
  }
  if (c.load == LoadKind::csv && c.load_file.empty()) {
    fail("problem.load_file", "required when load = csv");
  }
  if (!(c.tol_mass > 0.0 && c.tol_mass < 1.0)) fail("solver.tol_mass", "must lie in (0, 1)");
  if (!(c.tol_subband > 0.0 && c.tol_subband < 1.0)) {
    fail("solver.tol_subband", "must lie in (0, 1)");
  }
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) fail("solver.epsilon", "must lie in (0, 1)");
  if (!(c.c_rho > 0.0)) fail("solver.c_rho", "must be > 0");
  if (!c.radii.empty()) {
    if (static_cast<int>(c.radii.size()) != c.q) {
      fail("solver.radii", "needs one radius per level 1..q");
    }
    if (*std::min_element(c.radii.begin(), c.radii.end()) < 1) {
      fail("solver.radii", "radii must be >= 1");
    }
  }
  if (!(c.tol_multiplier > 0.0)) fail("solver.tol_multiplier", "must be > 0");
  if (!(c.drop_tol >= 0.0 && c.drop_tol < 1.0)) fail("solver.drop_tol", "must lie in [0, 1)");
  if (c.threads < 0) fail("solver.threads", "must be >= 0 (0 = auto)");
  if (c.out_dir.empty()) fail("output.dir", "must not be empty");
  if (c.bases_level < 0 || c.bases_level > c.q) fail("bases.level", "must lie in [0, q]");
  for (int k : c.decay_levels) {
    if (k < 1 || k > c.q) fail("report.decay_levels", "levels must lie in [1, q]");
  }
  for (double f : c.keep_fractions) {
    if (!(f > 0.0 && f <= 1.0)) fail("report.keep_fractions", "fractions must lie in (0, 1]");
  }
}

std::string canonical_text(const RunConfig& c) {
  std::ostringstream os;
  os << "[problem]\n"
     << "q = " << c.q << "\n"
     << "coefficient = " << to_string(c.coefficient) << "\n"
     << "coefficient_value = " << fmt(c.coefficient_value) << "\n"
     << "contrast = " << fmt(c.contrast) << "\n"
     << "seed = " << c.seed << "\n"
     << "coefficient_file = " << c.coefficient_file << "\n"
     << "load = " << to_string(c.load) << "\n"
     << "load_value = " << fmt(c.load_value) << "\n"
     << "load_file = " << c.load_file << "\n"
     << "[solver]\n"
     << "pipeline = " << to_string(c.pipeline) << "\n"
     << "w_variant = " << to_string(c.variant) << "\n"
     << "tol_mass = " << fmt(c.tol_mass) << "\n"
     << "tol_subband = " << fmt(c.tol_subband) << "\n"
     << "nodal_init = " << (c.nodal_init ? "true" : "false") << "\n"
     << "epsilon = " << fmt(c.epsilon) << "\n"
     << "c_rho = " << fmt(c.c_rho) << "\n"
     << "radii = " << join(c.radii) << "\n"
     << "tol_multiplier = " << fmt(c.tol_multiplier) << "\n"
     << "load_shortcut = " << (c.load_shortcut ? "true" : "false") << "\n"
     << "drop_tol = " << fmt(c.drop_tol) << "\n"
     << "jacobi = " << (c.jacobi ? "true" : "false") << "\n"
     << "threads = " << c.threads << "\n"
     << "compare_exact = " << (c.compare_exact ? "true" : "false") << "\n"
     << "[output]\n"
     << "dir = " << c.out_dir << "\n"
     << "matrix_market = " << (c.matrix_market ? "true" : "false") << "\n"
     << "[bases]\n"
     << "level = " << c.bases_level << "\n"
     << "indices = " << join(c.bases_indices) << "\n"
     << "chi_indices = " << join(c.chi_indices) << "\n"
     << "[report]\n"
     << "decay_levels = " << join(c.decay_levels) << "\n"
     << "keep_fractions = " << join(c.keep_fractions) << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.out_dir = "-";
  c.threads = 0;
  const std::string text = canonical_text(c);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace gamblet
