#include "epimatch/report.hpp"

#include <charconv>
#include <fstream>

#include "epimatch/types.hpp"

namespace epimatch {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

void append_number(std::string& out, std::int64_t v) {
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

}  // namespace

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "experiment,method,parameter,candidate_ms,descriptor_ms,build_ms,"
      "candidate_recall,matching_recall,match_count,mean_candidates_per_query\n";
  for (const ReportRow& r : rows) {
    out += r.experiment;
    out += ',';
    out += r.method;
    out += ',';
    append_number(out, r.parameter);
    out += ',';
    append_number(out, r.candidate_ms);
    out += ',';
    append_number(out, r.descriptor_ms);
    out += ',';
    append_number(out, r.build_ms);
    out += ',';
    append_number(out, r.candidate_recall);
    out += ',';
    append_number(out, r.matching_recall);
    out += ',';
    append_number(out, r.match_count);
    out += ',';
    append_number(out, r.mean_candidates_per_query);
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open report file: " + path);
  f << to_csv(rows);
  if (!f) throw Error("failed while writing report file: " + path);
}

}  // namespace epimatch
