#ifndef HDBO_TRACE_IO_HPP
#define HDBO_TRACE_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "hdbo/optimizers.hpp"

namespace hdbo {

/// Column header of trace CSV files.
inline constexpr std::string_view kTraceHeader = "n_evals,f_min,d,selected_indices,f_next,elapsed_ms";

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// One header line, then one row per evaluation; selected indices are
/// joined with ';'.
std::string trace_to_csv(const RunTrace& trace);
/// Parses trace_to_csv output. Algorithm, seed and incumbent vectors are not
/// stored in the CSV and are left at their defaults.
RunTrace trace_from_csv(std::string_view csv);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace hdbo

#endif  // HDBO_TRACE_IO_HPP
