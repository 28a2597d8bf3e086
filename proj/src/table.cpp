#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "oament/counts.hpp"
#include "oament/errors.hpp"

namespace oament::counts {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& field, const char* column, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(line, std::string("column ") + column + ": '" + field + "' is not a number");
  return v;
}

std::pair<AnalyzerKind, AnalyzerKind> parse_kind_pair(const std::string& s, std::size_t line) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw SchemaError(line, "kind must look like mask:mask, got '" + s + "'");
  try {
    return {analyzer_kind_from_string(parts[0]), analyzer_kind_from_string(parts[1])};
  } catch (const ValidationError& e) {
    throw SchemaError(line, e.what());
  }
}

TableHeader parse_bases_line(const std::string& body, std::size_t line) {
  TableHeader h;
  bool have_bases = false, have_la = false, have_lb = false;
  std::string la, lb;
  for (const auto& item : split(body, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw SchemaError(line, "bases line entry '" + item + "' is not key=value");
    const auto key = trim(item.substr(0, eq));
    const auto value = trim(item.substr(eq + 1));
    if (key == "bases") {
      std::tie(h.kind_a, h.kind_b) = parse_kind_pair(value, line);
      have_bases = true;
    } else if (key == "l_a") {
      la = value;
      have_la = true;
    } else if (key == "l_b") {
      lb = value;
      have_lb = true;
    } else {
      throw SchemaError(line, "unknown bases line key '" + key + "'");
    }
  }
  if (!have_bases || !have_la || !have_lb) throw SchemaError(line, "bases line needs bases=, l_a= and l_b=");
  auto parse_l = [line](const std::string& v, AnalyzerKind kind, const char* name) {
    if (kind == AnalyzerKind::Polarizer) {
      if (v != "pol") throw SchemaError(line, std::string(name) + " must be 'pol' for a polarizer arm");
      return 1;
    }
    int l = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), l);
    if (ec != std::errc() || ptr != v.data() + v.size() || l < 1)
      throw SchemaError(line, std::string(name) + " must be an integer >= 1 for a mask arm, got '" + v + "'");
    return l;
  };
  h.l_a = parse_l(la, h.kind_a, "l_a");
  h.l_b = parse_l(lb, h.kind_b, "l_b");
  return h;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

CountTable parse_csv(std::istream& in) {
  CountTable table;
  std::string raw;
  std::size_t line = 0;
  bool have_columns = false, has_corrected = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto body = trim(std::string_view(text).substr(1));
      if (body.rfind("bases", 0) == 0) {
        if (table.header) throw SchemaError(line, "duplicate bases line");
        table.header = parse_bases_line(body, line);
      }
      continue;
    }
    if (!have_columns) {
      if (text == kCsvColumns) {
        has_corrected = false;
      } else if (text == std::string(kCsvColumns) + ",corrected") {
        has_corrected = true;
      } else {
        throw SchemaError(line, std::string("expected header '") + kCsvColumns + "'");
      }
      have_columns = true;
      continue;
    }

    const auto f = split(text, ',');
    const std::size_t expected = has_corrected ? 8 : 7;
    if (f.size() != expected)
      throw SchemaError(line, "expected " + std::to_string(expected) + " fields, found " + std::to_string(f.size()));
    ScanRecord r;
    std::tie(r.kind_a, r.kind_b) = parse_kind_pair(f[0], line);
    if (table.header && (r.kind_a != table.header->kind_a || r.kind_b != table.header->kind_b))
      throw SchemaError(line, "row kind '" + f[0] + "' disagrees with the bases line");
    r.angle_a_deg = parse_number(f[1], "angle_a_deg", line);
    r.angle_b_deg = parse_number(f[2], "angle_b_deg", line);
    r.integration_s = parse_number(f[3], "integration_s", line);
    if (!(r.integration_s > 0.0)) throw SchemaError(line, "integration_s must be positive");
    r.coincidences = parse_number(f[4], "coincidences", line);
    if (r.coincidences < 0.0) throw SchemaError(line, "negative coincidence count");
    if (!f[5].empty()) r.singles_a = parse_number(f[5], "singles_a", line);
    if (!f[6].empty()) r.singles_b = parse_number(f[6], "singles_b", line);
    if ((r.singles_a && *r.singles_a < 0.0) || (r.singles_b && *r.singles_b < 0.0))
      throw SchemaError(line, "negative singles count");
    if (has_corrected) {
      if (f[7] == "true" || f[7] == "1")
        r.corrected = true;
      else if (f[7] == "false" || f[7] == "0")
        r.corrected = false;
      else
        throw SchemaError(line, "corrected must be true or false, got '" + f[7] + "'");
    }
    table.records.push_back(r);
  }
  if (!have_columns) throw SchemaError(line, "missing CSV header line");
  return table;
}

CountTable ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, const CountTable& table) {
  if (table.header) {
    const auto& h = *table.header;
    auto l_text = [](AnalyzerKind k, int l) { return k == AnalyzerKind::Polarizer ? std::string("pol") : std::to_string(l); };
    out << "# bases=" << to_string(h.kind_a) << ':' << to_string(h.kind_b) << ", l_a=" << l_text(h.kind_a, h.l_a)
        << ", l_b=" << l_text(h.kind_b, h.l_b) << '\n';
  }
  out << kCsvColumns << ",corrected\n";
  for (const auto& r : table.records) {
    out << to_string(r.kind_a) << ':' << to_string(r.kind_b) << ',' << format_number(r.angle_a_deg) << ','
        << format_number(r.angle_b_deg) << ',' << format_number(r.integration_s) << ','
        << format_number(r.coincidences) << ',' << (r.singles_a ? format_number(*r.singles_a) : "") << ','
        << (r.singles_b ? format_number(*r.singles_b) : "") << ',' << (r.corrected ? "true" : "false") << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CountTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw IoError("failed writing " + path.string());
}

AnalysisReport analyze(const CountTable& input, const AnalyzeOptions& options) {
  if (input.records.empty()) throw ValidationError("count table has no rows");
  AnalysisReport report;
  report.table = input;
  if (options.correct_accidentals) {
    auto corrected = correct_accidentals(input.records, options.window);
    report.table.records = std::move(corrected.records);
    report.floored = corrected.floored;
  }

  std::vector<std::vector<ScanRecord>> groups;
  std::vector<double> group_angle;
  for (const auto& r : report.table.records) {
    auto it = std::find_if(group_angle.begin(), group_angle.end(),
                           [&](double a) { return std::abs(a - r.angle_a_deg) < 1e-9; });
    if (it == group_angle.end()) {
      group_angle.push_back(r.angle_a_deg);
      groups.emplace_back();
      it = group_angle.end() - 1;
    }
    groups[static_cast<std::size_t>(it - group_angle.begin())].push_back(r);
  }

  const bool projections = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() == 2; });
  const bool fringes = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() >= 4; });
  if (!projections && !fringes)
    throw ValidationError(
        "rows sharing angle_a must form either (parallel, orthogonal) pairs or fringe scans of >= 4 points");

  report.mode = projections ? AnalysisReport::Mode::Projections : AnalysisReport::Mode::Fringes;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    GroupResult res;
    res.angle_a_deg = group_angle[i];
    res.rows = g.size();
    if (projections) {
      if (std::abs(g[0].integration_s - g[1].integration_s) > 1e-9 * g[0].integration_s)
        throw ValidationError("projection pair at angle_a=" + format_number(res.angle_a_deg) +
                              " uses different integration times");
      res.visibility = visibility_from_projections(g[0].coincidences, g[1].coincidences);
    } else {
      if (!input.header) throw ValidationError("fringe analysis needs the '# bases=...' line to know l_b");
      const int l = input.header->kind_b == AnalyzerKind::Polarizer ? 1 : input.header->l_b;
      res.fit = fit_fringe(g, l, Arm::B);
      res.visibility = {res.fit->visibility, res.fit->sigma_visibility};
    }
    report.groups.push_back(res);
  }
  if (report.groups.size() >= 2)
    report.witness = witness(report.groups[0].visibility, report.groups[1].visibility, options.k);
  return report;
}

}  // namespace oament::counts
