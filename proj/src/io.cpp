#include "selcal/io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "selcal/errors.hpp"
#include "selcal/similarity.hpp"

namespace selcal {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kSummaryIds = 10;
constexpr const char* kUndefinedCell = "\xE2\x80\x94";  // em dash

[[noreturn]] void shape_error(const std::string& source, std::size_t line,
                              const std::string& what) {
  const std::string where = line > 0 ? source + ":" + std::to_string(line) : source;
  throw ParseError(where + ": " + what, line, 0);
}

SampledAnswer parse_answer(const json& j, const std::string& field, const std::string& source,
                           std::size_t line) {
  if (!j.is_object()) shape_error(source, line, field + " must be an object");
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) {
    shape_error(source, line, field + ".text must be a string");
  }
  const auto logprobs = j.find("logprobs");
  if (logprobs == j.end() || !logprobs->is_array()) {
    shape_error(source, line, field + ".logprobs must be an array");
  }
  SampledAnswer a;
  a.text = text->get<std::string>();
  a.logprobs.reserve(logprobs->size());
  for (const auto& v : *logprobs) {
    if (!v.is_number()) shape_error(source, line, field + ".logprobs must hold numbers");
    a.logprobs.push_back(v.get<double>());
  }
  return a;
}

ordered_json answer_json(const SampledAnswer& a) {
  ordered_json j;
  j["text"] = a.text;
  j["logprobs"] = a.logprobs;
  return j;
}

std::string read_stream(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  }
  return in;
}

bool parse_flag(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer() || j.is_number_unsigned()) {
    const auto v = j.get<long long>();
    if (v == 0 || v == 1) return v == 1;
  }
  throw ParseError(where + ": answerable must be a boolean or 0/1", 0, 0);
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> number_or_null(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string fixed_or_undefined(const std::optional<double>& v, const char* undefined) {
  return v ? format_fixed4(*v) : std::string(undefined);
}

}  // namespace

// ---- predictions -------------------------------------------------------------

PredictionRecord parse_prediction_line(std::string_view line, std::size_t line_no) {
  static const std::string kSource = "predictions";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no, e.byte);
  }
  if (!j.is_object()) shape_error(kSource, line_no, "expected a JSON object");

  PredictionRecord r;
  const auto id = j.find("question_id");
  if (id == j.end() || !id->is_string()) {
    shape_error(kSource, line_no, "question_id must be a string");
  }
  r.question_id = id->get<std::string>();

  const auto greedy = j.find("greedy");
  if (greedy == j.end()) shape_error(kSource, line_no, "missing greedy");
  r.greedy = parse_answer(*greedy, "greedy", kSource, line_no);

  const auto samples = j.find("samples");
  if (samples == j.end() || !samples->is_array()) {
    shape_error(kSource, line_no, "samples must be an array");
  }
  std::size_t i = 0;
  for (const auto& s : *samples) {
    r.samples.push_back(
        parse_answer(s, "samples[" + std::to_string(i++) + "]", kSource, line_no));
  }

  const auto meta = j.find("meta");
  if (meta != j.end() && !meta->is_null()) {
    if (!meta->is_object()) shape_error(kSource, line_no, "meta must be an object");
    for (const auto& [k, v] : meta->items()) {
      if (!v.is_string()) shape_error(kSource, line_no, "meta values must be strings");
      r.meta[k] = v.get<std::string>();
    }
  }
  return r;
}

std::string serialize_prediction(const PredictionRecord& record) {
  ordered_json j;
  j["question_id"] = record.question_id;
  j["greedy"] = answer_json(record.greedy);
  j["samples"] = ordered_json::array();
  for (const auto& s : record.samples) j["samples"].push_back(answer_json(s));
  if (!record.meta.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : record.meta) meta[k] = v;
    j["meta"] = std::move(meta);
  }
  return j.dump();
}

std::string serialize_predictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_prediction(r);
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    PredictionRecord r;
    try {
      r = parse_prediction_line(line, line_no);
    } catch (const ParseError& e) {
      throw ParseError(source + ": " + e.what(), e.line(), e.byte_offset());
    }
    const ValidationResult v = validate_record(r);
    if (!v.ok()) {
      std::string msg = source + ":" + std::to_string(line_no) + ": invalid record";
      for (const auto& violation : v.violations) msg += "; " + violation;
      throw ValidationError(msg, line_no);
    }
    records.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("read error on '" + source + "'");
  return records;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_predictions(in, path.string());
}

// ---- gold --------------------------------------------------------------------

std::vector<GoldRecord> parse_gold(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what() + " (byte " + std::to_string(e.byte) + ")", 0,
                     e.byte);
  }
  if (!j.is_array()) shape_error(source, 0, "gold file must be a JSON array");

  std::vector<GoldRecord> out;
  out.reserve(j.size());
  for (std::size_t idx = 0; idx < j.size(); ++idx) {
    const json& rec = j[idx];
    const std::string where = source + ": record " + std::to_string(idx);
    if (!rec.is_object()) throw ParseError(where + ": expected an object", 0, 0);
    const auto id = rec.find("question_id");
    if (id == rec.end() || !id->is_string()) {
      throw ParseError(where + ": question_id must be a string", 0, 0);
    }
    GoldRecord g;
    g.question_id = id->get<std::string>();

    std::optional<bool> record_answerable;
    if (const auto a = rec.find("answerable"); a != rec.end() && !a->is_null()) {
      record_answerable = parse_flag(*a, where);
    }
    const auto answers = rec.find("answers");
    if (answers == rec.end() || !answers->is_array()) {
      throw ParseError(where + ": answers must be an array", 0, 0);
    }
    if (answers->empty()) {
      throw ValidationError(where + " ('" + g.question_id + "'): empty answers", 0);
    }
    for (const auto& ans : *answers) {
      if (!ans.is_object()) throw ParseError(where + ": answers must hold objects", 0, 0);
      const auto text_it = ans.find("answer");
      if (text_it == ans.end() || !text_it->is_string()) {
        throw ParseError(where + ": answer must be a string", 0, 0);
      }
      Annotation a;
      a.answer = text_it->get<std::string>();
      if (const auto c = ans.find("answer_confidence"); c != ans.end() && !c->is_null()) {
        if (!c->is_string()) throw ParseError(where + ": answer_confidence must be a string", 0, 0);
        a.answer_confidence = c->get<std::string>();
      }
      if (const auto f = ans.find("answerable"); f != ans.end() && !f->is_null()) {
        a.answerable = parse_flag(*f, where);
      } else if (record_answerable) {
        a.answerable = *record_answerable;
      } else {
        a.answerable = !is_abstention(normalize_answer(a.answer));
      }
      g.annotations.push_back(std::move(a));
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GoldRecord> load_gold(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string text = read_stream(in);
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return parse_gold(text, path.string());
}

std::string serialize_gold(const std::vector<GoldRecord>& records) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const GoldRecord& g = records[i];
    ordered_json j;
    j["question_id"] = g.question_id;
    j["answers"] = ordered_json::array();
    for (const auto& a : g.annotations) {
      ordered_json aj;
      aj["answer"] = a.answer;
      if (a.answer_confidence) aj["answer_confidence"] = *a.answer_confidence;
      aj["answerable"] = a.answerable;
      j["answers"].push_back(std::move(aj));
    }
    j["answerable"] = g.answerable();
    out += j.dump();
    out += i + 1 < records.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

// ---- join --------------------------------------------------------------------

std::string JoinSummary::describe() const {
  std::string out;
  const auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
    return s;
  };
  if (unmatched_predictions > 0) {
    out += std::to_string(unmatched_predictions) + " prediction(s) without gold: " +
           list(first_unmatched_predictions);
    if (unmatched_predictions > first_unmatched_predictions.size()) out += ", ...";
  }
  if (unmatched_gold > 0) {
    if (!out.empty()) out += "\n";
    out += std::to_string(unmatched_gold) + " gold record(s) without prediction: " +
           list(first_unmatched_gold);
    if (unmatched_gold > first_unmatched_gold.size()) out += ", ...";
  }
  return out;
}

void require_unique_ids(const std::vector<PredictionRecord>& predictions) {
  std::unordered_set<std::string> seen;
  for (const auto& p : predictions) {
    if (!seen.insert(p.question_id).second) throw DuplicateKeyError(p.question_id);
  }
}

JoinResult join(const std::vector<PredictionRecord>& predictions,
                const std::vector<GoldRecord>& gold) {
  require_unique_ids(predictions);
  std::unordered_map<std::string, const GoldRecord*> by_id;
  for (const auto& g : gold) {
    if (!by_id.emplace(g.question_id, &g).second) throw DuplicateKeyError(g.question_id);
  }

  JoinResult result;
  std::unordered_set<std::string> matched;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.question_id);
    if (it == by_id.end()) {
      ++result.summary.unmatched_predictions;
      if (result.summary.first_unmatched_predictions.size() < kSummaryIds) {
        result.summary.first_unmatched_predictions.push_back(p.question_id);
      }
      continue;
    }
    matched.insert(p.question_id);
    result.records.push_back({&p, it->second});
  }
  for (const auto& g : gold) {
    if (matched.contains(g.question_id)) continue;
    ++result.summary.unmatched_gold;
    if (result.summary.first_unmatched_gold.size() < kSummaryIds) {
      result.summary.first_unmatched_gold.push_back(g.question_id);
    }
  }
  return result;
}

// ---- reports -------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  throw InvalidArgument("unknown report format '" + std::string(name) +
                        "' (expected json|csv|markdown)");
}

CurveFormat parse_curve_format(std::string_view name) {
  if (name == "csv") return CurveFormat::Csv;
  if (name == "json") return CurveFormat::Json;
  throw InvalidArgument("unknown format '" + std::string(name) + "' (expected csv|json)");
}

std::string format_fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string format_target(double target) {
  if (target == static_cast<double>(static_cast<long long>(target))) {
    return std::to_string(static_cast<long long>(target));
  }
  return json(target).dump();
}

std::string emit_report(const CalibrationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      json j;
      j["accuracy_at_trigger"] = {
          {"accuracy", optional_number(report.accuracy_at_trigger.accuracy)},
          {"trigger_rate", report.accuracy_at_trigger.trigger_rate}};
      j["classifier"] = report.classifier;
      j["threshold"] = optional_number(report.threshold);
      j["n_bins"] = report.n_bins;
      j["n_total"] = report.n_total;
      j["n_triggered"] = report.n_triggered;
      j["methods"] = json::array();
      for (const auto& [name, m] : report.methods) {
        json row;
        row["name"] = name;
        row["auc"] = optional_number(m.auc);
        row["ece"] = optional_number(m.ece);
        row["coverage_at"] = json::object();
        for (const auto& [target, cov] : m.coverage_at) {
          row["coverage_at"][format_target(target)] = optional_number(cov);
        }
        j["methods"].push_back(std::move(row));
      }
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::vector<double> targets;
      if (!report.methods.empty()) {
        for (const auto& [t, _] : report.methods.front().second.coverage_at) targets.push_back(t);
      }
      std::string out = "method,auc,ece";
      for (double t : targets) out += ",c@" + format_target(t);
      out += "\n";
      for (const auto& [name, m] : report.methods) {
        out += name + "," + fixed_or_undefined(m.auc, "") + "," + fixed_or_undefined(m.ece, "");
        for (double t : targets) {
          const auto it = m.coverage_at.find(t);
          out += "," + (it == m.coverage_at.end() ? std::string() : fixed_or_undefined(it->second, ""));
        }
        out += "\n";
      }
      return out;
    }
    case ReportFormat::Markdown: {
      const auto& head = report.accuracy_at_trigger;
      std::string out = "acc " + (head.accuracy ? format_fixed4(*head.accuracy) + "%" : kUndefinedCell) +
                        " @ trig " + format_fixed4(head.trigger_rate) + "%\n\n";
      out += "classifier: " + report.classifier;
      if (report.threshold) out += " (threshold " + format_fixed4(*report.threshold) + ")";
      out += " | bins: " + std::to_string(report.n_bins) +
             " | records: " + std::to_string(report.n_total) +
             " | triggered: " + std::to_string(report.n_triggered) + "\n\n";

      std::vector<double> targets;
      if (!report.methods.empty()) {
        for (const auto& [t, _] : report.methods.front().second.coverage_at) targets.push_back(t);
      }
      out += "| Method | AUC | ECE |";
      for (double t : targets) out += " C@" + format_target(t) + " |";
      out += "\n|---|---|---|";
      for (std::size_t i = 0; i < targets.size(); ++i) out += "---|";
      out += "\n";
      for (const auto& [name, m] : report.methods) {
        out += "| " + name + " | " + fixed_or_undefined(m.auc, kUndefinedCell) + " | " +
               fixed_or_undefined(m.ece, kUndefinedCell) + " |";
        for (double t : targets) {
          const auto it = m.coverage_at.find(t);
          out += " " + (it == m.coverage_at.end() ? std::string(kUndefinedCell)
                                                  : fixed_or_undefined(it->second, kUndefinedCell)) +
                 " |";
        }
        out += "\n";
      }
      return out;
    }
  }
  return {};
}

CalibrationReport parse_report_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what(), 0, e.byte);
  }
  try {
    CalibrationReport r;
    const json& head = j.at("accuracy_at_trigger");
    r.accuracy_at_trigger.accuracy = number_or_null(head, "accuracy");
    r.accuracy_at_trigger.trigger_rate = head.at("trigger_rate").get<double>();
    r.classifier = j.at("classifier").get<std::string>();
    r.threshold = number_or_null(j, "threshold");
    r.n_bins = j.at("n_bins").get<int>();
    r.n_total = j.at("n_total").get<std::size_t>();
    r.n_triggered = j.at("n_triggered").get<std::size_t>();
    for (const auto& row : j.at("methods")) {
      MethodMetrics m;
      m.auc = number_or_null(row, "auc");
      m.ece = number_or_null(row, "ece");
      for (const auto& [key, value] : row.at("coverage_at").items()) {
        m.coverage_at[std::stod(key)] =
            value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      }
      r.methods.emplace_back(row.at("name").get<std::string>(), std::move(m));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what(), 0, 0);
  }
}

std::string emit_curve(const std::vector<RiskCoveragePoint>& points, CurveFormat format) {
  if (format == CurveFormat::Json) {
    json j = json::array();
    for (const auto& p : points) j.push_back({{"accuracy", p.accuracy}, {"coverage", p.coverage}});
    return j.dump(2) + "\n";
  }
  std::string out = "coverage,accuracy\n";
  for (const auto& p : points) out += format_fixed4(p.coverage) + "," + format_fixed4(p.accuracy) + "\n";
  return out;
}

std::string emit_sweep(const std::vector<std::pair<std::string, std::vector<SweepRow>>>& sweeps,
                       CurveFormat format) {
  if (format == CurveFormat::Json) {
    json j = json::array();
    for (const auto& [method, rows] : sweeps) {
      json rj = json::array();
      for (const auto& r : rows) {
        rj.push_back({{"accuracy", r.accuracy}, {"coverage", r.coverage}, {"tau", r.tau}});
      }
      j.push_back({{"method", method}, {"rows", std::move(rj)}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "method,tau,coverage,accuracy\n";
  for (const auto& [method, rows] : sweeps) {
    for (const auto& r : rows) {
      out += method + "," + format_fixed4(r.tau) + "," + format_fixed4(r.coverage) + "," +
             format_fixed4(r.accuracy) + "\n";
    }
  }
  return out;
}

std::string serialize_scored(const ScoredPrediction& scored) {
  ordered_json j;
  j["question_id"] = scored.question_id;
  j["triggered"] = scored.triggered;
  j["scores"] = ordered_json::object();
  for (const auto& [name, value] : scored.scores) j["scores"][name] = value;
  if (!scored.correct.empty()) {
    j["correct"] = ordered_json::object();
    for (const auto& [name, value] : scored.correct) j["correct"][name] = value;
  }
  if (scored.answerable) j["answerable"] = *scored.answerable;
  return j.dump();
}

// ---- file output ---------------------------------------------------------------

void StagedOutput::add(std::filesystem::path path, std::string content) {
  files_.emplace_back(std::move(path), std::move(content));
}

void StagedOutput::commit() {
  namespace fs = std::filesystem;
  std::vector<fs::path> temps;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [path, content] : files_) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw IoError("cannot write '" + path.string() + "'");
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], files_[i].first, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot write '" + files_[i].first.string() + "': " + ec.message());
    }
  }
  files_.clear();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_stream(in);
}

}  // namespace selcal
