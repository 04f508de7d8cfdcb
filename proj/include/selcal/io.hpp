#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "selcal/core.hpp"
#include "selcal/metrics.hpp"

namespace selcal {

// ---- prediction dumps (JSONL) ----------------------------------------------
//
// One object per line, keys in this order:
//   {"question_id":..., "greedy":{"text":...,"logprobs":[...]},
//    "samples":[{"text":...,"logprobs":[...]}, ...], "meta":{...}}
// "meta" is optional and omitted when empty. Blank lines are skipped.

PredictionRecord parse_prediction_line(std::string_view line, std::size_t line_no);
std::string serialize_prediction(const PredictionRecord& record);

// Throws ParseError / ValidationError carrying the 1-based line number, or
// IoError when the file cannot be read.
std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& source);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
std::string serialize_predictions(const std::vector<PredictionRecord>& records);

// ---- gold annotations (JSON array) ----------------------------------------
//
// [{"question_id":..., "answers":[{"answer":..., "answer_confidence":...,
//   "answerable":...}], "answerable":...}, ...]
// Per-annotation "answerable" falls back to the record-level flag, then to
// whether the answer is an abstention. Booleans may be written as 0/1.

std::vector<GoldRecord> parse_gold(std::string_view text, const std::string& source);
std::vector<GoldRecord> load_gold(const std::filesystem::path& path);
std::string serialize_gold(const std::vector<GoldRecord>& records);

// ---- join ------------------------------------------------------------------

struct JoinedRecord {
  const PredictionRecord* prediction;
  const GoldRecord* gold;
};

struct JoinSummary {
  std::size_t unmatched_predictions = 0;
  std::size_t unmatched_gold = 0;
  std::vector<std::string> first_unmatched_predictions;  // at most 10
  std::vector<std::string> first_unmatched_gold;         // at most 10

  bool empty() const { return unmatched_predictions == 0 && unmatched_gold == 0; }
  std::string describe() const;
};

struct JoinResult {
  std::vector<JoinedRecord> records;  // prediction order
  JoinSummary summary;
};

// Inner join on question_id. Pointers refer into the arguments. Throws
// DuplicateKeyError when an id repeats on either side.
JoinResult join(const std::vector<PredictionRecord>& predictions,
                const std::vector<GoldRecord>& gold);

// Throws DuplicateKeyError on the first repeated id.
void require_unique_ids(const std::vector<PredictionRecord>& predictions);

// ---- reports ---------------------------------------------------------------

enum class ReportFormat { Json, Csv, Markdown };
ReportFormat parse_report_format(std::string_view name);

// Fixed 4-decimal rendering used by the human-readable formats.
std::string format_fixed4(double value);

// Column label for an accuracy target, e.g. 60 -> "60", 72.5 -> "72.5".
std::string format_target(double target);

// JSON is canonical: sorted keys, full-precision numbers, null for undefined
// values. CSV has one row per method with empty cells for undefined values.
// Markdown opens with "acc A% @ trig T%" and renders undefined cells as "—".
std::string emit_report(const CalibrationReport& report, ReportFormat format);
CalibrationReport parse_report_json(std::string_view text);

enum class CurveFormat { Csv, Json };
CurveFormat parse_curve_format(std::string_view name);

std::string emit_curve(const std::vector<RiskCoveragePoint>& points, CurveFormat format);

std::string emit_sweep(const std::vector<std::pair<std::string, std::vector<SweepRow>>>& sweeps,
                       CurveFormat format);

// One JSONL line (no trailing newline) for a scored record.
std::string serialize_scored(const ScoredPrediction& scored);

// ---- file output -------------------------------------------------------------

// Writes every file to a sibling temporary first and renames only after all
// writes succeeded, so a failure leaves none of the targets behind.
class StagedOutput {
 public:
  void add(std::filesystem::path path, std::string content);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace selcal
