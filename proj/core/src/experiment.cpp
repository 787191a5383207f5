#include "fgssl/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fgssl/errors.hpp"
#include "fgssl/metrics.hpp"
#include "fgssl/rng.hpp"

namespace fgssl {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int64_t parse_i64(const std::string& v, const std::string& key) {
  int64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("experiment: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

uint64_t parse_u64(const std::string& v, const std::string& key) {
  uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("experiment: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
  return out;
}

double parse_f64(const std::string& v, const std::string& key) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("experiment: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("experiment: '" + key + "' expects true or false, got '" + v + "'");
}

DclAblation parse_ablation(const std::string& v) {
  DclAblation abl{false, false, false};
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item == "cls") {
      abl.cls = true;
    } else if (item == "adv") {
      abl.adv = true;
    } else if (item == "loc") {
      abl.loc = true;
    } else if (!item.empty()) {
      throw ConfigError("experiment: unknown dcl_ablation term '" + item + "'");
    }
  }
  return abl;
}

std::string ablation_str(const DclAblation& a) {
  std::string out;
  auto append = [&out](const char* s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  if (a.cls) append("cls");
  if (a.adv) append("adv");
  if (a.loc) append("loc");
  return out;
}

}  // namespace

std::string serialize_experiment(const TrainConfig& c) {
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << '\n';
  os << "epochs = " << c.epochs << '\n';
  os << "batch_size = " << c.batch_size << '\n';
  os << "lr = " << format_double(c.lr) << '\n';
  os << "momentum = " << format_double(c.momentum) << '\n';
  os << "lr_decay_factor = " << format_double(c.lr_decay_factor) << '\n';
  os << "lr_decay_epoch = " << c.lr_decay_epoch << '\n';
  os << "lambda = " << format_double(c.lambda) << '\n';
  os << "loc_mode = " << to_string(c.loc_mode) << '\n';
  os << "dcl_ablation = " << ablation_str(c.dcl_ablation) << '\n';
  os << "label_fraction = " << format_double(c.label_fraction) << '\n';
  os << "seed = " << c.seed << '\n';
  os << '\n';
  os << "[rcm]\n";
  os << "k = " << c.rcm.k << '\n';
  os << "D = " << c.rcm.D << '\n';
  os << '\n';
  os << "[pirl]\n";
  os << "tau = " << format_double(c.pirl.tau) << '\n';
  os << "beta = " << format_double(c.pirl.beta) << '\n';
  os << "negatives = " << c.pirl.negatives << '\n';
  os << "grid = " << c.pirl.grid << '\n';
  os << "patch_size = " << c.pirl.patch_size << '\n';
  os << "resize = " << c.pirl.resize << '\n';
  os << "crop = " << c.pirl.crop << '\n';
  os << '\n';
  os << "[db]\n";
  os << "p_peak = " << format_double(c.db.p_peak) << '\n';
  os << "p_patch = " << format_double(c.db.p_patch) << '\n';
  os << "patch_k = " << c.db.patch_k << '\n';
  os << "alpha = " << format_double(c.db.alpha) << '\n';
  os << "train_only = " << (c.db.train_only ? "true" : "false") << '\n';
  os << '\n';
  os << "[gce]\n";
  os << "k = " << c.gce.k << '\n';
  os << "warmup_epochs = " << c.gce.warmup_epochs << '\n';
  os << '\n';
  os << "[preprocess]\n";
  os << "resize = " << c.preprocess.resize << '\n';
  os << "crop = " << c.preprocess.crop << '\n';
  return os.str();
}

TrainConfig parse_experiment(const std::string& text) {
  TrainConfig c;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("experiment: malformed section at line " + std::to_string(line_no));
      }
      section = line.substr(1, line.size() - 2);
      if (section != "rcm" && section != "pirl" && section != "db" && section != "gce" &&
          section != "preprocess") {
        throw ConfigError("experiment: unknown section '" + section + "'");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("experiment: expected key = value at line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("experiment: empty key at line " + std::to_string(line_no));
    }

    if (section.empty()) {
      if (key == "mode") {
        c.mode = parse_train_mode(value);
      } else if (key == "epochs") {
        c.epochs = parse_i64(value, key);
      } else if (key == "batch_size") {
        c.batch_size = parse_i64(value, key);
      } else if (key == "lr") {
        c.lr = parse_f64(value, key);
      } else if (key == "momentum") {
        c.momentum = parse_f64(value, key);
      } else if (key == "lr_decay_factor") {
        c.lr_decay_factor = parse_f64(value, key);
      } else if (key == "lr_decay_epoch") {
        c.lr_decay_epoch = parse_i64(value, key);
      } else if (key == "lambda") {
        c.lambda = parse_f64(value, key);
      } else if (key == "loc_mode") {
        c.loc_mode = parse_loc_mode(value);
      } else if (key == "dcl_ablation") {
        c.dcl_ablation = parse_ablation(value);
      } else if (key == "label_fraction") {
        c.label_fraction = parse_f64(value, key);
      } else if (key == "seed") {
        c.seed = parse_u64(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' at line " + std::to_string(line_no));
      }
    } else if (section == "rcm") {
      if (key == "k") {
        c.rcm.k = parse_i64(value, key);
      } else if (key == "D") {
        c.rcm.D = parse_i64(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' in section [rcm] at line " + std::to_string(line_no));
      }
    } else if (section == "pirl") {
      if (key == "tau") {
        c.pirl.tau = parse_f64(value, key);
      } else if (key == "beta") {
        c.pirl.beta = parse_f64(value, key);
      } else if (key == "negatives") {
        c.pirl.negatives = parse_i64(value, key);
      } else if (key == "grid") {
        c.pirl.grid = parse_i64(value, key);
      } else if (key == "patch_size") {
        c.pirl.patch_size = parse_i64(value, key);
      } else if (key == "resize") {
        c.pirl.resize = parse_i64(value, key);
      } else if (key == "crop") {
        c.pirl.crop = parse_i64(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' in section [pirl] at line " + std::to_string(line_no));
      }
    } else if (section == "db") {
      if (key == "p_peak") {
        c.db.p_peak = parse_f64(value, key);
      } else if (key == "p_patch") {
        c.db.p_patch = parse_f64(value, key);
      } else if (key == "patch_k") {
        c.db.patch_k = parse_i64(value, key);
      } else if (key == "alpha") {
        c.db.alpha = parse_f64(value, key);
      } else if (key == "train_only") {
        c.db.train_only = parse_bool(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' in section [db] at line " + std::to_string(line_no));
      }
    } else if (section == "gce") {
      if (key == "k") {
        c.gce.k = parse_i64(value, key);
      } else if (key == "warmup_epochs") {
        c.gce.warmup_epochs = parse_i64(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' in section [gce] at line " + std::to_string(line_no));
      }
    } else {  // preprocess
      if (key == "resize") {
        c.preprocess.resize = parse_i64(value, key);
      } else if (key == "crop") {
        c.preprocess.crop = parse_i64(value, key);
      } else {
        throw ConfigError("experiment: unknown key '" + key + "' in section [preprocess] at line " + std::to_string(line_no));
      }
    }
  }
  return c;
}

TrainConfig parse_experiment_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return parse_experiment(os.str());
}

uint64_t config_hash(const TrainConfig& cfg) { return fnv1a64(serialize_experiment(cfg)); }

}  // namespace fgssl
