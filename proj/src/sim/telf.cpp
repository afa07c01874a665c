#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "dhisq/error.hpp"
#include "dhisq/sim.hpp"

namespace dhisq::sim {

namespace {

constexpr std::string_view kColumns = "cycle,time_ns,node,port,codeword,label";

std::string format_ns(double ns) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", ns);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string quote(const std::string& label) {
  if (label.find_first_of(",\"") == std::string::npos) return label;
  std::string out = "\"";
  for (char c : label) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string unquote(std::string_view field) {
  if (field.size() < 2 || field.front() != '"' || field.back() != '"') return std::string(field);
  std::string out;
  for (std::size_t i = 1; i + 1 < field.size(); ++i) {
    out += field[i];
    if (field[i] == '"' && i + 2 < field.size() && field[i + 1] == '"') ++i;
  }
  return out;
}

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw SyntaxError(line, 1, "telf: " + msg);
}

}  // namespace

void emit_telf(const std::vector<TraceRecord>& traces, double cycle_ns, std::uint64_t hash,
               std::ostream& out) {
  char header[96];
  std::snprintf(header, sizeof header, "# telf 1 config_hash=%016" PRIx64 " cycle_ns=%s\n", hash,
                format_ns(cycle_ns).c_str());
  out << header << kColumns << "\n";
  for (const auto& r : traces) {
    out << r.cycle << "," << format_ns(static_cast<double>(r.cycle) * cycle_ns) << "," << r.node
        << "," << r.port << "," << r.codeword << "," << quote(r.label) << "\n";
  }
}

std::string emit_telf(const std::vector<TraceRecord>& traces, double cycle_ns, std::uint64_t hash) {
  std::ostringstream out;
  emit_telf(traces, cycle_ns, hash, out);
  return out.str();
}

TelfFile parse_telf(std::string_view text) {
  TelfFile file;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header = false;
  bool columns = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      unsigned long long hash = 0;
      char ns[32] = {0};
      if (std::sscanf(line.c_str(), "# telf 1 config_hash=%llx cycle_ns=%31s", &hash, ns) != 2) {
        bad(line_no, "missing header");
      }
      file.hash = hash;
      file.cycle_ns = std::strtod(ns, nullptr);
      header = true;
      continue;
    }
    if (!columns) {
      if (line != kColumns) bad(line_no, "unexpected column line");
      columns = true;
      continue;
    }
    std::size_t fields[5];
    std::size_t at = 0;
    for (int i = 0; i < 5; ++i) {
      at = line.find(',', at);
      if (at == std::string::npos) bad(line_no, "too few fields");
      fields[i] = at++;
    }
    TraceRecord r;
    try {
      r.cycle = std::stoll(line.substr(0, fields[0]));
      r.node = std::stoi(line.substr(fields[1] + 1, fields[2] - fields[1] - 1));
      r.port = std::stoi(line.substr(fields[2] + 1, fields[3] - fields[2] - 1));
      r.codeword = static_cast<std::uint32_t>(std::stoul(line.substr(fields[3] + 1, fields[4] - fields[3] - 1)));
    } catch (const std::exception&) {
      bad(line_no, "malformed number");
    }
    r.label = unquote(std::string_view(line).substr(fields[4] + 1));
    file.traces.push_back(std::move(r));
  }
  if (!header) bad(line_no + 1, "empty file");
  return file;
}

}  // namespace dhisq::sim
