#pragma once

#include "qmimo/altopt.hpp"
#include "qmimo/mimo.hpp"
#include "qmimo/qubo.hpp"
#include "qmimo/solvers.hpp"
#include "qmimo/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qmimo {

using json = nlohmann::json;

// Shortest decimal that parses back to the same double ("nan"/"inf" kept).
std::string format_double(double x);
double parse_double(const std::string& text);

// Named numeric columns; the unit of exchange for CSV outputs.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  bool operator==(const Table& other) const;
};

// Lines starting with '#' are comments; the first other line is the header.
void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& comments = {});
Table read_csv(std::istream& in);

json to_json(const Table& table);
Table table_from_json(const json& j);

// {"n_tx", "n_rx", "re": row-major, "im": row-major}
json to_json(const ComplexChannel& channel);
ComplexChannel channel_from_json(const json& j);

// {"dim", "matrix": row-major, "scale", "offset", "companded", "mu"}
json to_json(const QuboProblem& q);
QuboProblem qubo_from_json(const json& j);

// One "i j value" line per non-zero upper-triangular coefficient of the
// energy b^T Q b: value = Q_ii on the diagonal, Q_ij + Q_ji above it.
void write_qubo_coo(std::ostream& out, const QuboProblem& q);
// Rebuilds the symmetric matrix; scale/offset/mu are not part of the format.
QuboProblem read_qubo_coo(std::istream& in, Index dim);

json to_json(const SolutionHistogram& hist);
SolutionHistogram histogram_from_json(const json& j);
// bitstring,energy,count,probability
void write_histogram_csv(std::ostream& out, const SolutionHistogram& hist);
SolutionHistogram read_histogram_csv(std::istream& in);

json to_json(const CodingPair& pair);
CodingPair pair_from_json(const json& j);

// One JSON object per iteration record.
void write_trace_jsonl(std::ostream& out, const AltOptTrace& trace);
std::vector<IterationRecord> read_trace_jsonl(std::istream& in);

// s,lambda0,lambda1,gap
Table gap_profile_table(const GapProfile& profile);
// Columns s, A, B (header optional).
AnnealSchedule read_schedule_csv(std::istream& in);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qmimo
