#include "core/series.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>

#include "core/errors.hpp"

namespace opinn {

std::vector<double> OpinionSeries::column(std::size_t t) const {
    if (t >= steps_) throw InvalidParameterError("series: column out of range");
    std::vector<double> col(users_);
    for (std::size_t i = 0; i < users_; ++i) col[i] = at(i, t);
    return col;
}

void OpinionSeries::set_column(std::size_t t, const std::vector<double>& values) {
    if (t >= steps_) throw InvalidParameterError("series: column out of range");
    if (values.size() != users_) throw InvalidParameterError("series: column size mismatch");
    for (std::size_t i = 0; i < users_; ++i) at(i, t) = values[i];
}

OpinionSeries interpolate_linear(const OpinionSeries& series, std::size_t target) {
    std::size_t src = series.num_steps();
    if (src < 2) throw InvalidParameterError("interpolate_linear: need at least 2 columns");
    if (target < 2) throw InvalidParameterError("interpolate_linear: target must be >= 2");
    if (target < src) throw InvalidParameterError("interpolate_linear: target below source length");
    if (target == src) return series;

    OpinionSeries out(series.num_users(), target);
    double span = static_cast<double>(src - 1);
    for (std::size_t t = 0; t < target; ++t) {
        double pos = span * static_cast<double>(t) / static_cast<double>(target - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        if (lo >= src - 1) lo = src - 2;
        double frac = pos - static_cast<double>(lo);
        for (std::size_t i = 0; i < series.num_users(); ++i) {
            double a = series.at(i, lo);
            double b = series.at(i, lo + 1);
            out.at(i, t) = (frac == 0.0) ? a : a + frac * (b - a);
        }
    }
    // keep the last column bitwise equal to the source endpoint
    for (std::size_t i = 0; i < series.num_users(); ++i)
        out.at(i, target - 1) = series.at(i, src - 1);
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void save_series_csv(const OpinionSeries& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    for (std::size_t t = 0; t < s.num_steps(); ++t) {
        if (t) out << ',';
        out << 't' << t;
    }
    out << '\n';
    for (std::size_t i = 0; i < s.num_users(); ++i) {
        for (std::size_t t = 0; t < s.num_steps(); ++t) {
            if (t) out << ',';
            out << format_double(s.at(i, t));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

OpinionSeries load_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t steps = 0;
    {
        std::size_t pos = 0;
        while (pos <= line.size()) {
            auto comma = line.find(',', pos);
            std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos);
            std::string expected = "t" + std::to_string(steps);
            if (field != expected)
                throw DataError(path.string() + ":1: expected header field '" + expected +
                                "', got '" + field + "'");
            ++steps;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(steps);
        std::size_t pos = 0;
        while (pos <= line.size()) {
            auto comma = line.find(',', pos);
            std::size_t end = comma == std::string::npos ? line.size() : comma;
            double v = 0.0;
            auto res = std::from_chars(line.data() + pos, line.data() + end, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + end)
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": bad number '" + line.substr(pos, end - pos) + "'");
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != steps)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(steps) + " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }

    OpinionSeries s(rows.size(), steps);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t t = 0; t < steps; ++t) s.at(i, t) = rows[i][t];
    return s;
}

}  // namespace opinn
