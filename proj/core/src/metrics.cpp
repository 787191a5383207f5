#include "fgssl/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fgssl/errors.hpp"
#include "json.hpp"

namespace fgssl {

namespace {

constexpr const char* kHeader =
    "epoch,train_total_loss,train_cls_loss,train_ssl_loss,test_top1,test_top2,lr";

double parse_field(const std::string& s, const char* what) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw IoError(std::string("metrics csv: malformed ") + what + " value '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_metrics(const std::vector<MetricsRow>& history, const std::string& csv_path,
                   const std::string& json_path, const std::string& config_echo) {
  FGSSL_CHECK(!history.empty(), "write_metrics: empty history");
  {
    std::ofstream os(csv_path, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + csv_path + "' for writing");
    os << kHeader << '\n';
    for (const auto& r : history) {
      os << r.epoch << ',' << format_double(r.train_total_loss) << ','
         << format_double(r.train_cls_loss) << ',' << format_double(r.train_ssl_loss) << ','
         << format_double(r.test_top1) << ',' << format_double(r.test_top2) << ','
         << format_double(r.lr) << '\n';
    }
    if (!os) throw IoError("write failed for '" + csv_path + "'");
  }

  double best_top1 = history.front().test_top1, best_top2 = history.front().test_top2;
  for (const auto& r : history) {
    if (r.test_top1 > best_top1) best_top1 = r.test_top1;
    if (r.test_top2 > best_top2) best_top2 = r.test_top2;
  }
  nlohmann::ordered_json j;
  j["best_top1"] = best_top1;
  j["best_top2"] = best_top2;
  j["final_epoch"] = history.back().epoch;
  j["final_top1"] = history.back().test_top1;
  j["final_top2"] = history.back().test_top2;
  j["config"] = config_echo;
  std::ofstream os(json_path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + json_path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed for '" + json_path + "'");
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != kHeader) {
    throw IoError("metrics csv: bad header in '" + path + "'");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7) throw IoError("metrics csv: expected 7 fields, got line '" + line + "'");
    MetricsRow r;
    r.epoch = static_cast<int64_t>(parse_field(fields[0], "epoch"));
    r.train_total_loss = parse_field(fields[1], "train_total_loss");
    r.train_cls_loss = parse_field(fields[2], "train_cls_loss");
    r.train_ssl_loss = parse_field(fields[3], "train_ssl_loss");
    r.test_top1 = parse_field(fields[4], "test_top1");
    r.test_top2 = parse_field(fields[5], "test_top2");
    r.lr = parse_field(fields[6], "lr");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fgssl
