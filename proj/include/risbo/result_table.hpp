#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace risbo {

struct ResultRow {
    std::string scenario;
    double x_axis = 0.0;
    std::string metric;
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    bool operator==(const ResultTable&) const = default;
};

namespace detail {

// Shortest round-trip decimal form; locale-independent by construction.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(std::string("ResultTable: bad ") + what + " field: '" + s + "'");
    return v;
}

}  // namespace detail

inline constexpr const char* kResultCsvHeader = "scenario,x_axis,metric,mean,stderr,n,seed";

inline std::string to_csv(const ResultTable& table) {
    std::string out(kResultCsvHeader);
    out += '\n';
    for (const auto& r : table.rows) {
        out += r.scenario;
        out += ',';
        out += detail::format_double(r.x_axis);
        out += ',';
        out += r.metric;
        out += ',';
        out += detail::format_double(r.mean);
        out += ',';
        out += detail::format_double(r.std_error);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

inline void emit_results(const ResultTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_results: cannot open '" + path + "' for writing");
    const std::string csv = to_csv(table);
    f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!f) throw std::runtime_error("emit_results: write failed for '" + path + "'");
}

inline ResultTable parse_results_csv(const std::string& text) {
    ResultTable table;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ResultTable: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultCsvHeader) throw std::runtime_error("ResultTable: unexpected header: " + line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 7) throw std::runtime_error("ResultTable: bad row: " + line);
        ResultRow r;
        r.scenario = fields[0];
        r.x_axis = detail::parse_double(fields[1], "x_axis");
        r.metric = fields[2];
        r.mean = detail::parse_double(fields[3], "mean");
        r.std_error = detail::parse_double(fields[4], "stderr");
        r.n = static_cast<int>(detail::parse_double(fields[5], "n"));
        r.seed = static_cast<std::uint64_t>(std::stoull(fields[6]));
        table.rows.push_back(std::move(r));
    }
    return table;
}

inline ResultTable read_results_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_results_csv: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_results_csv(ss.str());
}

}  // namespace risbo
