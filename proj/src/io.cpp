#include "cdt/io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <system_error>
#include <vector>

#include "cdt/errors.hpp"

namespace cdt {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DataError("cannot format number");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(',', pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("malformed number '" + std::string(s) + "'");
  }
  return v;
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

void write_rows(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_block(std::ostream& out, std::string_view name, const DenseMatrix& m) {
  out << name << ',' << m.rows() << ',' << m.cols() << '\n';
  write_rows(out, m);
}

std::map<std::string, DenseMatrix, std::less<>> read_blocks(std::istream& in) {
  std::map<std::string, DenseMatrix, std::less<>> blocks;
  std::string line;
  while (next_content_line(in, line)) {
    const auto head = split_commas(line);
    if (head.size() != 3) throw DataError("model: expected '<name>,<rows>,<cols>', got '" + line + "'");
    const std::string name(head[0]);
    const auto rows = static_cast<std::size_t>(parse_double(head[1]));
    const auto cols = static_cast<std::size_t>(parse_double(head[2]));
    std::vector<double> values;
    values.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      if (!next_content_line(in, line)) throw DataError("model: truncated block " + name);
      const auto fields = split_commas(line);
      if (fields.size() != cols) {
        throw DataError("model: block " + name + " row " + std::to_string(i) +
                        " has " + std::to_string(fields.size()) + " values, expected " +
                        std::to_string(cols));
      }
      for (auto f : fields) values.push_back(parse_double(f));
    }
    blocks.emplace(name, DenseMatrix(rows, cols, std::move(values)));
  }
  return blocks;
}

DenseMatrix take(std::map<std::string, DenseMatrix, std::less<>>& blocks, const char* name) {
  auto it = blocks.find(name);
  if (it == blocks.end()) throw DataError(std::string("model: missing block ") + name);
  return std::move(it->second);
}

}  // namespace

void write_mmmf_model(std::ostream& out, const MmmfModel& model) {
  out << "# cdt mmmf-model\n";
  write_block(out, "U", model.U);
  write_block(out, "V", model.V);
  write_block(out, "Theta", model.Theta);
}

MmmfModel read_mmmf_model(std::istream& in) {
  auto blocks = read_blocks(in);
  MmmfModel m{take(blocks, "U"), take(blocks, "V"), take(blocks, "Theta")};
  if (m.U.cols() != m.V.cols() || m.Theta.rows() != m.U.rows() || m.Theta.cols() == 0) {
    throw DataError("model: inconsistent MMMF block shapes");
  }
  return m;
}

void write_transfer_model(std::ostream& out, const TransferModel& model) {
  out << "# cdt transfer-model\n";
  write_block(out, "alpha", model.alpha);
  write_block(out, "beta", model.beta);
}

TransferModel read_transfer_model(std::istream& in) {
  auto blocks = read_blocks(in);
  return TransferModel{take(blocks, "alpha"), take(blocks, "beta")};
}

void write_codebook_csv(std::ostream& out, const Codebook& cb) { write_rows(out, cb.values); }

void write_partial_codebook_csv(std::ostream& out, const PartialCodebook& pcb) {
  for (std::size_t k = 0; k < pcb.k1(); ++k) {
    for (std::size_t l = 0; l < pcb.k2(); ++l) {
      if (l > 0) out << ',';
      if (pcb.is_retained(k, l)) out << format_double(pcb.values(k, l));
    }
    out << '\n';
  }
}

PartialCodebook read_partial_codebook_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (next_content_line(in, line)) {
    std::vector<std::string> fields;
    for (auto f : split_commas(line)) fields.emplace_back(f);
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw DataError("codebook csv: ragged rows");
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw DataError("codebook csv: no rows");
  const std::size_t k1 = rows.size();
  const std::size_t k2 = rows.front().size();
  PartialCodebook pcb{DenseMatrix(k1, k2), std::vector<bool>(k1 * k2, false)};
  for (std::size_t k = 0; k < k1; ++k) {
    for (std::size_t l = 0; l < k2; ++l) {
      const std::string& f = rows[k][l];
      if (f.find_first_not_of(" \t") == std::string::npos) continue;
      pcb.values(k, l) = parse_double(f);
      pcb.retained[k * k2 + l] = true;
    }
  }
  return pcb;
}

void write_triplets(std::ostream& out, const DenseMatrix& m) {
  out << "user,item,rating\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out << i + 1 << ',' << j + 1 << ',' << format_double(m(i, j)) << '\n';
    }
  }
}

void write_triplets(std::ostream& out, std::span<const Rating> cells,
                    std::span<const double> values) {
  if (cells.size() != values.size()) throw DataError("triplets: cell and value counts differ");
  out << "user,item,rating\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    out << cells[k].user + 1 << ',' << cells[k].item + 1 << ',' << format_double(values[k]) << '\n';
  }
}

}  // namespace cdt
