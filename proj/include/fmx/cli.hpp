#pragma once

// Scan driver behind the fmx command-line tool: one RunConfig in, one
// ScanResult out, written as CSV or JSON.

#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmx/errors.hpp"

namespace fmx::cli {

inline constexpr const char* kVersion = "fmx 0.1.0";

/// Invalid command line or configuration; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Format { Csv, Json };

struct RunConfig {
  std::string subcommand;

  std::string model = "anharmonic";
  double omega0 = 1.0;
  double g = 1.0;
  std::vector<double> betas{1.0};
  double K = 1.0;

  std::vector<int> dims{64};
  std::optional<double> t_min, t_max, t_step;
  std::vector<double> t_list;
  bool t_in_4pi = false;  // kicked rotor: grid values are T/(4 pi)

  int order = 40;
  std::string precision = "extended";
  bool certify = true;
  double certify_tol = 1e-6;
  std::string certify_scope = "series";  // tc-estimate: "element" certifies the chosen entry only
  int elem_i = 0;
  int elem_j = 1;
  std::string norm = "element";  // or "frobenius"
  int ratio_stride = 1;          // 2 for series whose odd and even orders differ in size
  double limit_tol = 1e-8;
  double plateau_eps = 0.02;
  int plateau_min_len = 4;
  std::optional<int> n_min;
  int asym_window = 5;
  double asym_smooth = 0.10;

  std::vector<int> n_av{5, 10, 40, 200};
  int bins = 50;
  double energy_max = 0.0;  // entropy: keep states with E <= energy_max (0 keeps all)
  bool series = false;      // kicked-scan: emit E(nT) instead of averages
  int n_max = 100;

  std::string output;  // empty: stdout
  Format format = Format::Csv;
  int workers = 0;     // 0: FMX_WORKERS or hardware concurrency

  /// Throws UsageError naming the offending field.
  void validate() const;
  /// Expanded T grid in ascending order.
  std::vector<double> t_grid() const;
  nlohmann::ordered_json to_json() const;
};

using ColumnData = std::variant<std::vector<double>, std::vector<long long>, std::vector<std::string>>;

struct Column {
  std::string name;
  ColumnData data;

  std::size_t size() const;
};

struct ScanResult {
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::deque<Column> columns;  // deque: references from column() stay valid
  std::vector<std::string> warnings;

  /// Appends (or returns the existing) column of the given type.
  template <class T>
  std::vector<T>& column(const std::string& name) {
    for (auto& c : columns)
      if (c.name == name) return std::get<std::vector<T>>(c.data);
    columns.push_back(Column{name, std::vector<T>{}});
    return std::get<std::vector<T>>(columns.back().data);
  }
  void check_rectangular() const;
};

ScanResult run(const RunConfig& config);

void emit(const ScanResult& result, Format format, std::ostream& out);
void emit(const ScanResult& result, Format format, const std::string& path);

/// Inverse of the JSON emitter (null reads back as NaN).
ScanResult parse_json(const std::string& text);

/// Number of worker threads: config value, else FMX_WORKERS, else hardware.
int worker_count(const RunConfig& config);

/// Count of strict interior local maxima of a sampled curve.
int count_local_maxima(const std::vector<double>& y);

}  // namespace fmx::cli
