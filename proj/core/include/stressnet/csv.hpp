#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stressnet/metrics.hpp"
#include "stressnet/signal.hpp"
#include "stressnet/stress.hpp"

namespace stressnet {

// Signal CSV: header "t_seconds,value", one sample per line, '.' decimal
// point, '\n' line endings. Event CSV: single column "t_seconds".

void write_signal_csv(const std::filesystem::path& path, const Signal& sig);

/// Rate is inferred from the first two timestamps and validated against
/// every gap within 1e-6 relative.
Signal read_signal_csv(const std::filesystem::path& path);

void write_events_csv(const std::filesystem::path& path, const EventSeries& events);
EventSeries read_events_csv(const std::filesystem::path& path);

/// "score,label" with label in {0,1}.
std::vector<ScoredLabel> read_scores_csv(const std::filesystem::path& path);

void write_phases_csv(const std::filesystem::path& path, const std::vector<Phase>& phases);
std::vector<Phase> read_phases_csv(const std::filesystem::path& path);

/// Comma-separated table with a header row; fields looked up by column
/// name. No quoting (none of the pipeline's values need it).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool has_column(const std::string& name) const;
  /// Throws IoError when the column is missing.
  const std::string& field(std::size_t row, const std::string& column) const;
};

CsvTable read_table_csv(const std::filesystem::path& path);
void write_table_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace stressnet
