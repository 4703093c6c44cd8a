#include "leibniz/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "leibniz/errors.hpp"

namespace leibniz {

const char* const kCsvHeader =
    "model,distribution,estimator,theta,mean,std_error,n_reps,runtime_s,unstable,rejected,"
    "oracle,seed";

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace {

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string to_csv_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.model << ',' << r.distribution << ',' << r.estimator << ','
       << format_double(r.theta) << ',' << format_double(r.mean) << ','
       << format_double(r.std_error) << ',' << r.n_reps << ','
       << format_double(r.runtime_s) << ',' << (r.unstable ? 1 : 0) << ',' << r.rejected << ','
       << (r.oracle ? format_double(*r.oracle) : std::string()) << ',' << r.seed;
    return os.str();
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += to_csv_row(r);
        out += '\n';
    }
    return out;
}

ResultRow parse_csv_row(const std::string& line) {
    const auto f = split_csv(line);
    if (f.size() != 12) throw ConfigError("csv row: expected 12 fields");
    ResultRow r;
    r.model = f[0];
    r.distribution = f[1];
    r.estimator = f[2];
    r.theta = parse_double(f[3]);
    r.mean = parse_double(f[4]);
    r.std_error = parse_double(f[5]);
    r.n_reps = std::stol(f[6]);
    r.runtime_s = parse_double(f[7]);
    r.unstable = f[8] == "1";
    r.rejected = std::stol(f[9]);
    if (!f[10].empty()) r.oracle = parse_double(f[10]);
    r.seed = std::stoull(f[11]);
    return r;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::vector<ResultRow> rows;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            if (line != kCsvHeader) throw ConfigError("csv: unexpected header");
            first = false;
            continue;
        }
        rows.push_back(parse_csv_row(line));
    }
    return rows;
}

namespace {

nlohmann::json row_to_json(const ResultRow& r) {
    nlohmann::json j;
    j["model"] = r.model;
    j["distribution"] = r.distribution;
    j["estimator"] = r.estimator;
    // doubles carried as the same stable strings the CSV uses, so both
    // formats stay byte-reproducible and inf survives the trip
    j["theta"] = format_double(r.theta);
    j["mean"] = format_double(r.mean);
    j["std_error"] = format_double(r.std_error);
    j["n_reps"] = r.n_reps;
    j["runtime_s"] = format_double(r.runtime_s);
    j["unstable"] = r.unstable;
    j["rejected"] = r.rejected;
    j["oracle"] = r.oracle ? nlohmann::json(format_double(*r.oracle)) : nlohmann::json(nullptr);
    j["seed"] = r.seed;
    return j;
}

}  // namespace

std::string to_json(const std::vector<ResultRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back(row_to_json(r));
    return arr.dump(2) + "\n";
}

std::vector<ResultRow> parse_json(const std::string& text) {
    const auto arr = nlohmann::json::parse(text);
    std::vector<ResultRow> rows;
    for (const auto& j : arr) {
        ResultRow r;
        r.model = j.at("model").get<std::string>();
        r.distribution = j.at("distribution").get<std::string>();
        r.estimator = j.at("estimator").get<std::string>();
        r.theta = parse_double(j.at("theta").get<std::string>());
        r.mean = parse_double(j.at("mean").get<std::string>());
        r.std_error = parse_double(j.at("std_error").get<std::string>());
        r.n_reps = j.at("n_reps").get<long>();
        r.runtime_s = parse_double(j.at("runtime_s").get<std::string>());
        r.unstable = j.at("unstable").get<bool>();
        r.rejected = j.at("rejected").get<long>();
        if (!j.at("oracle").is_null()) r.oracle = parse_double(j.at("oracle").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summary_table(const std::vector<ResultRow>& rows,
                          const std::vector<double>& measured_runtimes) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-14s %-28s %-20s %10s %12s %10s %8s %s\n", "model",
                  "distribution", "estimator", "mean", "std_error", "oracle", "time[s]", "");
    os << buf;
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double rt = i < measured_runtimes.size() ? measured_runtimes[i] : 0.0;
        std::snprintf(buf, sizeof(buf), "%-14s %-28s %-20s %10.4g %12.4g %10s %8.2f %s\n",
                      r.model.c_str(), r.distribution.c_str(), r.estimator.c_str(), r.mean,
                      r.std_error, r.oracle ? format_double(*r.oracle).c_str() : "-", rt,
                      r.unstable ? "[unstable]" : "");
        os << buf;
    }
    return os.str();
}

}  // namespace leibniz
