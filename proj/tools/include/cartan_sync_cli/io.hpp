#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cartan_sync/harness.hpp"
#include "cartan_sync/sync.hpp"

namespace cartan_sync::cli {

/// Provenance carried from a generated graph into solutions and CSV rows.
struct GraphMeta {
  double p = 1.0;
  double snr_db = 0.0;
  double outlier_rate = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
};

struct GraphFile {
  MeasurementGraph graph;
  std::optional<GraphMeta> meta;
};

struct TruthFile {
  GroupSpec group;
  std::vector<GroupElement> elements;
};

struct SolutionFile {
  std::string method;
  SyncSolution solution;
  std::optional<GraphMeta> meta;
};

// Serialization to JSON text. Vertex indices are 1-based on disk.
std::string WriteGraph(const GraphFile& file);
std::string WriteTruth(const TruthFile& file);
std::string WriteSolution(const SolutionFile& file);

GraphFile ParseGraph(const std::string& text);
TruthFile ParseTruth(const std::string& text);
SolutionFile ParseSolution(const std::string& text);

std::string ReadFile(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);

inline constexpr const char* kCsvHeader =
    "method,group,n,d,l,p,snr_db,outlier_rate,lambda,trial,seed,mse,runtime_ms,error";

std::string CsvRow(const TrialRecord& record);

/// Appends rows (and the header when the file is new or empty) in one write.
void AppendCsv(const std::filesystem::path& path, const std::vector<std::string>& rows);

}  // namespace cartan_sync::cli
