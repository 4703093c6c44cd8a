#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leibniz {

// One emitted cell. runtime_s is zero-filled in machine outputs so that a
// (config, seed) pair maps to byte-identical files; measured timings go to
// the human summary instead.
struct ResultRow {
    std::string model;
    std::string distribution;
    std::string estimator;
    double theta = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    long n_reps = 0;
    double runtime_s = 0.0;
    bool unstable = false;
    long rejected = 0;
    std::optional<double> oracle;
    std::uint64_t seed = 0;
};

extern const char* const kCsvHeader;  // fixed schema

std::string format_double(double v);  // stable %.10g rendering, inf-safe

std::string to_csv_row(const ResultRow& r);
std::string to_csv(const std::vector<ResultRow>& rows);
ResultRow parse_csv_row(const std::string& line);
std::vector<ResultRow> parse_csv(const std::string& text);

std::string to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_json(const std::string& text);

// Fixed-width human summary printed to stdout after a run.
std::string summary_table(const std::vector<ResultRow>& rows,
                          const std::vector<double>& measured_runtimes);

}  // namespace leibniz
