#include "ensconv/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace ensconv {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line, char separator = '\0') {
  std::vector<Token> out;
  std::size_t pos = 0;
  if (separator != '\0') {
    while (true) {
      const std::size_t next = line.find(separator, pos);
      const std::size_t end = next == std::string_view::npos ? line.size() : next;
      out.push_back({line.substr(pos, end - pos), pos + 1});
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return out;
  }
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    out.push_back({line.substr(start, pos - start), start + 1});
  }
  return out;
}

bool next_line(std::istream& in, std::string& line, std::size_t& number) {
  if (!std::getline(in, line)) return false;
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

long long parse_integer(const Token& tok, const std::string& source, std::size_t line) {
  long long value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(source, line, tok.column,
                     "expected an integer, found '" + std::string(tok.text) + "'");
  return value;
}

double parse_real(const Token& tok, const std::string& source, std::size_t line) {
  std::string text(tok.text);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
  std::size_t start = 0;
  while (start < text.size() && (text[start] == ' ' || text[start] == '\t')) ++start;
  text = text.substr(start);
  if (text.empty()) throw ParseError(source, line, tok.column, "empty numeric field");
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw ParseError(source, line, tok.column, "expected a number, found '" + text + "'");
  return value;
}

void expect_no_trailing_content(std::istream& in, std::string& line, std::size_t& number,
                                const std::string& source) {
  while (next_line(in, line, number))
    if (!blank(line)) throw ParseError(source, number, 1, "unexpected content after the data");
}

}  // namespace

PredictionArray read_prediction_array(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw ParseError(source, 1, 0, "missing header 't m k'");
  const auto header = tokenize(line);
  if (header.size() != 3) throw ParseError(source, 1, 1, "header must be 't m k'");
  const long long t = parse_integer(header[0], source, 1);
  const long long m = parse_integer(header[1], source, 1);
  const long long k = parse_integer(header[2], source, 1);
  if (t < 1) throw ParseError(source, 1, header[0].column, "t must be at least 1");
  if (m < 1) throw ParseError(source, 1, header[1].column, "m must be at least 1");
  if (k < 2) throw ParseError(source, 1, header[2].column, "k must be at least 2");

  LabelMatrix cells(t, m);
  for (long long i = 0; i < t; ++i) {
    if (!next_line(in, line, number))
      throw ParseError(source, number + 1, 0,
                       "expected " + std::to_string(t) + " rows, found " + std::to_string(i));
    const auto tokens = tokenize(line);
    if (static_cast<long long>(tokens.size()) != m)
      throw ParseError(source, number, tokens.empty() ? 1 : tokens.back().column,
                       "expected " + std::to_string(m) + " labels, found " +
                           std::to_string(tokens.size()));
    for (long long j = 0; j < m; ++j) {
      const long long v = parse_integer(tokens[static_cast<std::size_t>(j)], source, number);
      if (v < 0 || v >= k)
        throw ParseError(source, number, tokens[static_cast<std::size_t>(j)].column,
                         "label " + std::to_string(v) + " is outside [0, " + std::to_string(k) +
                             ")");
      cells(i, j) = static_cast<Label>(v);
    }
  }
  expect_no_trailing_content(in, line, number, source);
  return PredictionArray(std::move(cells), static_cast<int>(k));
}

void write_prediction_array(std::ostream& out, const PredictionArray& array) {
  out << array.trees() << ' ' << array.points() << ' ' << array.classes() << '\n';
  std::string row;
  for (Eigen::Index i = 0; i < array.trees(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < array.points(); ++j) {
      if (j > 0) row += ' ';
      row += std::to_string(array(i, j));
    }
    row += '\n';
    out << row;
  }
}

TruthLabels read_truth(std::istream& in, const std::string& source) {
  std::vector<Label> labels;
  std::string line;
  std::size_t number = 0;
  while (next_line(in, line, number)) {
    for (const Token& tok : tokenize(line)) {
      const long long v = parse_integer(tok, source, number);
      if (v < 0) throw ParseError(source, number, tok.column, "labels must be nonnegative");
      labels.push_back(static_cast<Label>(v));
    }
  }
  if (labels.empty()) throw ParseError(source, 0, 0, "no labels found");
  return Eigen::Map<const TruthLabels>(labels.data(), static_cast<Eigen::Index>(labels.size()));
}

void write_truth(std::ostream& out, const TruthLabels& truth) {
  for (Eigen::Index j = 0; j < truth.size(); ++j) out << truth[j] << '\n';
}

OobMask read_oob_mask(std::istream& in, const std::string& source) {
  std::vector<std::string> rows;
  std::string line;
  std::size_t number = 0;
  while (next_line(in, line, number)) {
    if (line.empty()) {
      expect_no_trailing_content(in, line, number, source);
      break;
    }
    for (std::size_t c = 0; c < line.size(); ++c)
      if (line[c] != '0' && line[c] != '1')
        throw ParseError(source, number, c + 1, "mask characters must be '0' or '1'");
    if (!rows.empty() && line.size() != rows.front().size())
      throw ParseError(source, number, std::min(line.size(), rows.front().size()) + 1,
                       "expected " + std::to_string(rows.front().size()) + " characters, found " +
                           std::to_string(line.size()));
    rows.push_back(line);
  }
  if (rows.empty()) throw ParseError(source, 0, 0, "mask is empty");
  OobMask mask(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j] == '1';
  return mask;
}

void write_oob_mask(std::ostream& out, const OobMask& mask) {
  std::string row;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    row.assign(static_cast<std::size_t>(mask.cols()), '0');
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) row[static_cast<std::size_t>(j)] = '1';
    row += '\n';
    out << row;
  }
}

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  if (!next_line(in, line, number)) throw ParseError(source, 1, 0, "missing header row");
  const std::size_t width = tokenize(line, ',').size();
  if (width < 2)
    throw ParseError(source, 1, 1, "need at least one feature column and a label column");

  std::vector<double> values;
  std::vector<Label> labels;
  while (next_line(in, line, number)) {
    if (blank(line)) continue;
    const auto fields = tokenize(line, ',');
    if (fields.size() != width)
      throw ParseError(source, number, 0,
                       "expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    for (std::size_t c = 0; c + 1 < width; ++c) values.push_back(parse_real(fields[c], source, number));
    Token label = fields.back();
    while (!label.text.empty() && (label.text.back() == ' ' || label.text.back() == '\t'))
      label.text.remove_suffix(1);
    while (!label.text.empty() && (label.text.front() == ' ' || label.text.front() == '\t')) {
      label.text.remove_prefix(1);
      ++label.column;
    }
    const long long y = parse_integer(label, source, number);
    if (y < 0) throw ParseError(source, number, label.column, "labels must be nonnegative");
    labels.push_back(static_cast<Label>(y));
  }
  if (labels.empty()) throw ParseError(source, 0, 0, "dataset has no rows");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto p = static_cast<Eigen::Index>(width - 1);
  data.features =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, p);
  data.labels = Eigen::Map<const LabelVector>(labels.data(), n);
  data.classes = std::max(2, data.labels.maxCoeff() + 1);
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Eigen::Index f = 0; f < data.dims(); ++f) out << 'x' << f + 1 << ',';
  out << "label\n";
  char buf[32];
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index f = 0; f < data.dims(); ++f) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features(i, f));
      out << buf << ',';
    }
    out << data.labels[i] << '\n';
  }
}

FirstOrderModel model_from_json(const nlohmann::json& spec) {
  try {
    if (!spec.is_object()) throw DomainError("model spec must be a JSON object");
    const int k = spec.at("k").get<int>();
    const auto pi_list = spec.at("pi").get<std::vector<double>>();
    if (static_cast<int>(pi_list.size()) != k)
      throw DomainError("pi has " + std::to_string(pi_list.size()) + " entries but k = " +
                        std::to_string(k));
    const auto& mu = spec.at("mu");
    if (!mu.is_array() || static_cast<int>(mu.size()) != k)
      throw DomainError("mu must list one distribution per class");
    std::vector<ClassLaw> laws;
    for (const auto& entry : mu) {
      const auto family = entry.at("family").get<std::string>();
      const auto params = entry.at("params").get<std::vector<double>>();
      ClassLaw law;
      if (family == "beta")
        law.family = LawFamily::beta;
      else if (family == "dirichlet")
        law.family = LawFamily::dirichlet;
      else
        throw DomainError("unknown family '" + family + "' (expected beta or dirichlet)");
      law.params = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                     static_cast<Eigen::Index>(params.size()));
      laws.push_back(std::move(law));
    }
    return FirstOrderModel(
        Eigen::Map<const Eigen::VectorXd>(pi_list.data(), static_cast<Eigen::Index>(k)),
        std::move(laws));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("invalid model spec: ") + e.what());
  }
}

nlohmann::ordered_json model_to_json(const FirstOrderModel& model) {
  nlohmann::ordered_json out;
  out["k"] = model.classes();
  out["pi"] = std::vector<double>(model.pi().data(), model.pi().data() + model.pi().size());
  nlohmann::ordered_json mu = nlohmann::ordered_json::array();
  for (int l = 0; l < model.classes(); ++l) {
    const ClassLaw& law = model.law(l);
    mu.push_back({{"family", law.family == LawFamily::beta ? "beta" : "dirichlet"},
                  {"params", std::vector<double>(law.params.data(),
                                                 law.params.data() + law.params.size())}});
  }
  out["mu"] = std::move(mu);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  if (!out) throw Error("failed writing " + path.string());
}

PredictionArray load_prediction_array(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_prediction_array(in, path.string());
}

TruthLabels load_truth(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_truth(in, path.string());
}

OobMask load_oob_mask(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_oob_mask(in, path.string());
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_dataset_csv(in, path.string());
}

FirstOrderModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.byte, "invalid JSON");
  }
  return model_from_json(spec);
}

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ensconv
