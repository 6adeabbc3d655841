#include "qmimo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qmimo {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) throw Error("number", "cannot parse number '" + text + "'");
  return value;
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error("table", "row width does not match the column count");
  rows.push_back(std::move(row));
}

bool Table::operator==(const Table& other) const {
  if (columns != other.columns || rows.size() != other.rows.size()) return false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double a = rows[r][c];
      const double b = other.rows[r][c];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

bool content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

double json_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw Error(name, std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  if (!content_line(in, line)) throw Error("csv", "missing CSV header");
  table.columns = split(line, ',');
  while (content_line(in, line)) {
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(parse_double(cell));
    table.add_row(std::move(row));
  }
  return table;
}

json to_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) rows.push_back(row);
  return {{"columns", table.columns}, {"rows", rows}};
}

Table table_from_json(const json& j) {
  Table table;
  table.columns = field(j, "columns").get<std::vector<std::string>>();
  for (const auto& row : field(j, "rows")) {
    std::vector<double> values;
    for (const auto& v : row) values.push_back(json_number(v));
    table.add_row(std::move(values));
  }
  return table;
}

json to_json(const ComplexChannel& channel) {
  std::vector<double> re, im;
  for (Index i = 0; i < channel.n_rx(); ++i) {
    for (Index k = 0; k < channel.n_tx(); ++k) {
      re.push_back(channel.entries()(i, k).real());
      im.push_back(channel.entries()(i, k).imag());
    }
  }
  return {{"n_tx", channel.n_tx()}, {"n_rx", channel.n_rx()}, {"re", re}, {"im", im}};
}

ComplexChannel channel_from_json(const json& j) {
  const auto n_tx = field(j, "n_tx").get<Index>();
  const auto n_rx = field(j, "n_rx").get<Index>();
  if (n_tx < 1) throw Error("n_tx", "n_tx must be >= 1");
  if (n_rx < 1) throw Error("n_rx", "n_rx must be >= 1");
  const auto re = field(j, "re").get<std::vector<double>>();
  const auto im = field(j, "im").get<std::vector<double>>();
  const auto expected = static_cast<std::size_t>(n_tx * n_rx);
  if (re.size() != expected) throw Error("re", "expected " + std::to_string(expected) + " real parts");
  if (im.size() != expected) throw Error("im", "expected " + std::to_string(expected) + " imaginary parts");
  ComplexMatrix h(n_rx, n_tx);
  for (Index i = 0; i < n_rx; ++i)
    for (Index k = 0; k < n_tx; ++k) {
      const auto idx = static_cast<std::size_t>(i * n_tx + k);
      h(i, k) = Complex(re[idx], im[idx]);
    }
  return ComplexChannel(std::move(h));
}

json to_json(const QuboProblem& q) {
  std::vector<double> flat;
  for (Index i = 0; i < q.dim(); ++i)
    for (Index k = 0; k < q.dim(); ++k) flat.push_back(q.matrix(i, k));
  json mu = q.mu ? json(*q.mu) : json(nullptr);
  return {{"dim", q.dim()},         {"matrix", flat},           {"scale", q.scale},
          {"offset", q.offset},     {"companded", q.companded()}, {"mu", mu}};
}

QuboProblem qubo_from_json(const json& j) {
  const auto dim = field(j, "dim").get<Index>();
  const auto flat = field(j, "matrix").get<std::vector<double>>();
  if (dim < 1 || flat.size() != static_cast<std::size_t>(dim * dim))
    throw Error("matrix", "matrix must hold dim*dim row-major entries");
  QuboProblem q;
  q.matrix.resize(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index k = 0; k < dim; ++k) q.matrix(i, k) = flat[static_cast<std::size_t>(i * dim + k)];
  q.scale = field(j, "scale").get<double>();
  q.offset = field(j, "offset").get<double>();
  if (field(j, "companded").get<bool>()) q.mu = field(j, "mu").get<double>();
  return q;
}

void write_qubo_coo(std::ostream& out, const QuboProblem& q) {
  for (Index i = 0; i < q.dim(); ++i) {
    for (Index k = i; k < q.dim(); ++k) {
      const double value = i == k ? q.matrix(i, i) : q.matrix(i, k) + q.matrix(k, i);
      if (value != 0.0) out << i << ' ' << k << ' ' << format_double(value) << '\n';
    }
  }
}

QuboProblem read_qubo_coo(std::istream& in, Index dim) {
  if (dim < 1) throw Error("dim", "dim must be >= 1");
  QuboProblem q;
  q.matrix = RealMatrix::Zero(dim, dim);
  std::string line;
  while (content_line(in, line)) {
    std::istringstream fields(line);
    Index i = -1, k = -1;
    std::string value;
    if (!(fields >> i >> k >> value)) throw Error("coo", "malformed COO line '" + line + "'");
    if (i < 0 || k < 0 || i >= dim || k >= dim) throw Error("coo", "COO index out of range in '" + line + "'");
    const double v = parse_double(value);
    if (i == k) {
      q.matrix(i, i) += v;
    } else {
      q.matrix(i, k) += v / 2.0;
      q.matrix(k, i) += v / 2.0;
    }
  }
  return q;
}

json to_json(const SolutionHistogram& hist) {
  json entries = json::array();
  for (std::size_t r = 0; r < hist.entries.size(); ++r) {
    const auto& e = hist.entries[r];
    entries.push_back({{"bits", bits_to_string(e.bits, hist.dim)},
                       {"energy", e.energy},
                       {"count", e.count},
                       {"probability", hist.probability(r)}});
  }
  return {{"dim", hist.dim}, {"total_anneals", hist.total_anneals}, {"entries", entries}};
}

SolutionHistogram histogram_from_json(const json& j) {
  SolutionHistogram hist;
  hist.dim = field(j, "dim").get<Index>();
  hist.total_anneals = field(j, "total_anneals").get<std::uint64_t>();
  for (const auto& e : field(j, "entries"))
    hist.entries.push_back({bits_from_string(field(e, "bits").get<std::string>()), field(e, "energy").get<double>(),
                            field(e, "count").get<std::uint64_t>()});
  return hist;
}

void write_histogram_csv(std::ostream& out, const SolutionHistogram& hist) {
  out << "bitstring,energy,count,probability\n";
  for (std::size_t r = 0; r < hist.entries.size(); ++r) {
    const auto& e = hist.entries[r];
    out << bits_to_string(e.bits, hist.dim) << ',' << format_double(e.energy) << ',' << e.count << ','
        << format_double(hist.probability(r)) << '\n';
  }
}

SolutionHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!content_line(in, line)) throw Error("csv", "missing histogram header");
  SolutionHistogram hist;
  while (content_line(in, line)) {
    const auto cells = split(line, ',');
    if (cells.size() != 4) throw Error("csv", "histogram rows need 4 columns");
    hist.dim = static_cast<Index>(cells[0].size());
    const auto count = static_cast<std::uint64_t>(std::stoull(cells[2]));
    hist.entries.push_back({bits_from_string(cells[0]), parse_double(cells[1]), count});
    hist.total_anneals += count;
  }
  return hist;
}

json to_json(const CodingPair& pair) {
  auto parts = [](const ComplexVector& v) {
    std::vector<double> re, im;
    for (Index i = 0; i < v.size(); ++i) {
      re.push_back(v(i).real());
      im.push_back(v(i).imag());
    }
    return std::pair{re, im};
  };
  const auto [f_re, f_im] = parts(pair.f);
  const auto [g_re, g_im] = parts(pair.g);
  return {{"f_re", f_re}, {"f_im", f_im}, {"g_re", g_re}, {"g_im", g_im}};
}

namespace {

ComplexVector coding_vector(const json& j, const char* re_name, const char* im_name) {
  const auto re = field(j, re_name).get<std::vector<double>>();
  const auto im = field(j, im_name).get<std::vector<double>>();
  if (re.size() != im.size()) throw Error(re_name, "real and imaginary parts differ in length");
  ComplexVector v(static_cast<Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = Complex(re[i], im[i]);
  return v;
}

}  // namespace

CodingPair pair_from_json(const json& j) {
  return CodingPair(coding_vector(j, "f_re", "f_im"), coding_vector(j, "g_re", "g_im"));
}

void write_trace_jsonl(std::ostream& out, const AltOptTrace& trace) {
  for (const auto& records : trace.records) {
    for (const auto& r : records) {
      json j = to_json(CodingPair(r.f, r.g));
      j["restart"] = r.restart;
      j["iteration"] = r.iteration;
      j["snr"] = r.snr;
      out << j.dump() << '\n';
    }
  }
}

std::vector<IterationRecord> read_trace_jsonl(std::istream& in) {
  std::vector<IterationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    CodingPair pair = pair_from_json(j);
    out.push_back({field(j, "restart").get<int>(), field(j, "iteration").get<int>(), std::move(pair.f),
                   std::move(pair.g), field(j, "snr").get<double>()});
  }
  return out;
}

Table gap_profile_table(const GapProfile& profile) {
  Table t{{"s", "lambda0", "lambda1", "gap"}, {}};
  for (std::size_t k = 0; k < profile.s_grid.size(); ++k)
    t.add_row({profile.s_grid[k], profile.lambda0[k], profile.lambda1[k], profile.gap[k]});
  return t;
}

AnnealSchedule read_schedule_csv(std::istream& in) {
  std::vector<AnnealSchedule::Sample> samples;
  std::string line;
  bool first = true;
  while (content_line(in, line)) {
    const auto cells = split(line, ',');
    if (cells.size() < 3) throw Error("schedule", "schedule rows need s, A, B");
    try {
      samples.push_back({parse_double(cells[0]), parse_double(cells[1]), parse_double(cells[2])});
    } catch (const Error&) {
      if (!first) throw;  // only the first line may be a header
    }
    first = false;
  }
  return AnnealSchedule::tabulated(std::move(samples));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("path", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("path", path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("path", "cannot write " + path.string());
  out << text;
}

}  // namespace qmimo
