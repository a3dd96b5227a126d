#ifndef PROJDYN_TRACE_IO_HPP
#define PROJDYN_TRACE_IO_HPP

#include <ostream>
#include <string>
#include <vector>

#include "projdyn/simulation.hpp"

namespace projdyn {

/// Bumped whenever a column or field is added, removed, renamed or moved.
/// The frozen layout lives in schema/trace_v1.json.
inline constexpr int kTraceSchemaVersion = 1;

/// CSV header for a system with n coordinates and k actuators. Vector
/// quantities expand to <name><index>, e.g. q0 q1 qd0 qd1.
std::vector<std::string> csv_columns(Eigen::Index n, Eigen::Index k);

/// Field names of one JSON-lines record, in emission order.
std::vector<std::string> jsonl_fields();

void write_csv(const SimulationTrace& trace, std::ostream& out);
void write_jsonl(const SimulationTrace& trace, std::ostream& out);

/// Shortest round-trip decimal representation; "nan" / "inf" / "-inf" for
/// non-finite values.
std::string format_double(double value);

}  // namespace projdyn

#endif  // PROJDYN_TRACE_IO_HPP
