#pragma once

// Per-epoch training metrics and their on-disk forms: a CSV history and a
// JSON summary. Numbers are written in shortest-roundtrip form so identical
// runs produce identical bytes.

#include <cstdint>
#include <string>
#include <vector>

namespace fgssl {

struct MetricsRow {
  int64_t epoch = 0;
  double train_total_loss = 0.0;
  double train_cls_loss = 0.0;
  double train_ssl_loss = 0.0;
  double test_top1 = 0.0;
  double test_top2 = 0.0;
  double lr = 0.0;
};

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// CSV with the fixed header
// epoch,train_total_loss,train_cls_loss,train_ssl_loss,test_top1,test_top2,lr
// plus a JSON summary (best/final accuracies, final epoch, config echo).
void write_metrics(const std::vector<MetricsRow>& history, const std::string& csv_path,
                   const std::string& json_path, const std::string& config_echo);

// Strict inverse of the CSV writer; exact for every value it wrote.
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace fgssl
