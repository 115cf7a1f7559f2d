#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "markovcov/estimation.hpp"
#include "markovcov/observations.hpp"
#include "markovcov/testing.hpp"

namespace markovcov::csv {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

/// Leading comment block carried by every emitted CSV: tool version, the
/// canonical config string, its FNV-1a hash and the seed.
std::string provenance_block(const std::map<std::string, std::string>& config,
                             std::uint64_t seed);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Dense curve CSV: first row = grid points, then one curve per row.
std::string dense_curves_to_csv(const ObservationSet& obs);
ObservationSet dense_curves_from_csv(const std::string& text);

/// Irregular curve CSV: long format header curve_id,t,y.
std::string irregular_curves_to_csv(const ObservationSet& obs);
ObservationSet irregular_curves_from_csv(const std::string& text);

/// Estimated kernel: comment line with tag and noise estimate, header row of
/// node locations, then the nodal matrix.
std::string estimated_kernel_to_csv(const EstimatedKernel& est);
EstimatedKernel estimated_kernel_from_csv(const std::string& text);

/// Test report: one row per interior index plus a summary table.
std::string test_report_to_csv(const TestReport& report);

ObservationSet curves_from_csv_file(const std::filesystem::path& path,
                                    bool irregular);

}  // namespace markovcov::csv
