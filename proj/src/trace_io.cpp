#include "hdbo/trace_io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "hdbo/error.hpp"

namespace hdbo {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trace_to_csv(const RunTrace& trace) {
    std::string out(kTraceHeader);
    out.push_back('\n');
    char ms[32];
    for (const auto& r : trace.records) {
        out += std::to_string(r.n_evals);
        out.push_back(',');
        out += format_double(r.f_min);
        out.push_back(',');
        out += std::to_string(r.d);
        out.push_back(',');
        for (std::size_t k = 0; k < r.selected.size(); ++k) {
            if (k > 0) out.push_back(';');
            out += std::to_string(r.selected[k]);
        }
        out.push_back(',');
        out += format_double(r.f_next);
        out.push_back(',');
        std::snprintf(ms, sizeof(ms), "%.3f", r.elapsed_ms);
        out += ms;
        out.push_back('\n');
    }
    return out;
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ContractError("trace CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

RunTrace trace_from_csv(std::string_view csv) {
    RunTrace trace;
    std::size_t line_no = 0;
    bool design = true;
    for (std::string_view line : split(csv, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != kTraceHeader) throw ContractError("trace CSV has an unexpected header");
            continue;
        }
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 6) throw ContractError("trace CSV line " + std::to_string(line_no) + ": expected 6 fields");
        TraceRecord r;
        r.n_evals = parse_number<std::size_t>(fields[0], line_no);
        r.f_min = parse_number<double>(fields[1], line_no);
        r.d = parse_number<std::size_t>(fields[2], line_no);
        if (!fields[3].empty()) {
            for (auto idx : split(fields[3], ';')) r.selected.push_back(parse_number<std::size_t>(idx, line_no));
        }
        r.f_next = parse_number<double>(fields[4], line_no);
        r.elapsed_ms = parse_number<double>(fields[5], line_no);
        // Design rows come first and are the only ones without a selection.
        design = design && r.selected.empty() && r.d == 0;
        r.design = design;
        if (r.design) ++trace.n_init;
        trace.records.push_back(std::move(r));
    }
    if (!trace.records.empty()) trace.f_min = trace.records.back().f_min;
    return trace;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hdbo
