#include "cdt/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "cdt/errors.hpp"

namespace cdt {

RatingMatrix::RatingMatrix(std::size_t n_users, std::size_t n_items, std::vector<Rating> entries,
                           int scale)
    : n_users_(n_users), n_items_(n_items), scale_(scale), entries_(std::move(entries)) {
  if (scale_ < 2) throw DataError("rating scale must be at least 2");
  for (const Rating& e : entries_) {
    if (e.user >= n_users_ || e.item >= n_items_) {
      throw DataError("rating at (" + std::to_string(e.user) + ", " + std::to_string(e.item) +
                      ") outside " + std::to_string(n_users_) + "x" + std::to_string(n_items_));
    }
    if (e.value < 1 || e.value > scale_) {
      throw DataError("rating value " + std::to_string(e.value) + " outside [1, " +
                      std::to_string(scale_) + "]");
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(), [](const Rating& a, const Rating& b) {
    return a.user == b.user && a.item == b.item;
  });
  if (dup != entries_.end()) {
    throw DataError("duplicate rating for user " + std::to_string(dup->user) + ", item " +
                    std::to_string(dup->item));
  }
}

double RatingMatrix::density() const {
  const double cells = static_cast<double>(n_users_) * static_cast<double>(n_items_);
  return cells == 0.0 ? 0.0 : static_cast<double>(entries_.size()) / cells;
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path.string());
  }

  // Next line with any trailing CR removed; false at end of file.
  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(path_.string() + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

std::vector<std::string_view> split(std::string_view s, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(delim, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + delim.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Parses (user, item, rating) from three fields; ids are 1-based on disk.
Rating parse_triplet(const LineReader& reader, std::string_view user, std::string_view item,
                     std::string_view rating) {
  long long u = 0, i = 0, r = 0;
  if (!parse_int(user, u) || !parse_int(item, i) || !parse_int(rating, r)) {
    reader.fail("non-integer field");
  }
  if (u < 1 || i < 1) reader.fail("ids must be 1-based positive integers");
  if (r < 1 || r > RatingMatrix::kDefaultScale) {
    reader.fail("rating " + std::to_string(r) + " outside [1, " +
                std::to_string(RatingMatrix::kDefaultScale) + "]");
  }
  return Rating{static_cast<std::uint32_t>(u - 1), static_cast<std::uint32_t>(i - 1),
                static_cast<int>(r)};
}

}  // namespace

RatingMatrix load_movielens(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<Rating> entries;
  std::size_t n_users = 0, n_items = 0;
  std::string line;
  while (reader.next(line)) {
    if (is_blank(line)) continue;
    const auto fields = split(line, "::");
    if (fields.size() != 4) reader.fail("expected 4 '::'-separated fields");
    const Rating e = parse_triplet(reader, fields[0], fields[1], fields[2]);
    n_users = std::max<std::size_t>(n_users, e.user + 1);
    n_items = std::max<std::size_t>(n_items, e.item + 1);
    entries.push_back(e);
  }
  if (entries.empty()) throw DataError(path.string() + ": no ratings");
  return RatingMatrix(n_users, n_items, std::move(entries));
}

namespace {

// With bounds, dimensions are the bounds; without, the largest ids seen.
RatingMatrix read_goodbooks(const std::filesystem::path& path, std::optional<std::size_t> max_users,
                            std::optional<std::size_t> max_items) {
  LineReader reader(path);
  std::size_t seen_users = 0, seen_items = 0;
  std::vector<Rating> entries;
  std::string line;
  bool header_seen = false;
  while (reader.next(line)) {
    if (is_blank(line)) continue;
    const auto fields = split(line, ",");
    if (!header_seen) {
      if (fields.size() != 3 || trim(fields[0]) != "user_id" || trim(fields[1]) != "book_id" ||
          trim(fields[2]) != "rating") {
        reader.fail("expected header 'user_id,book_id,rating'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) reader.fail("expected 3 comma-separated fields");
    const Rating e = parse_triplet(reader, fields[0], fields[1], fields[2]);
    if ((max_users && e.user >= *max_users) || (max_items && e.item >= *max_items)) continue;
    seen_users = std::max<std::size_t>(seen_users, e.user + 1);
    seen_items = std::max<std::size_t>(seen_items, e.item + 1);
    entries.push_back(e);
  }
  if (entries.empty()) throw DataError(path.string() + ": no ratings");
  return RatingMatrix(max_users.value_or(seen_users), max_items.value_or(seen_items),
                      std::move(entries));
}

}  // namespace

RatingMatrix load_goodbooks(const std::filesystem::path& path, std::size_t max_users,
                            std::size_t max_items) {
  if (max_users == 0 || max_items == 0) throw DataError("max_users and max_items must be positive");
  return read_goodbooks(path, max_users, max_items);
}

namespace {

bool is_movielens(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (!is_blank(line)) return line.find("::") != std::string::npos;
  }
  throw DataError(path.string() + ": no ratings");
}

}  // namespace

RatingMatrix load_ratings(const std::filesystem::path& path, std::size_t max_users,
                          std::size_t max_items) {
  return is_movielens(path) ? load_movielens(path) : load_goodbooks(path, max_users, max_items);
}

RatingMatrix load_ratings(const std::filesystem::path& path) {
  return is_movielens(path) ? load_movielens(path) : read_goodbooks(path, std::nullopt, std::nullopt);
}

SplitPair split_train_test(const RatingMatrix& m, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train fraction must lie in (0, 1)");
  }
  if (m.nnz() < 2) throw DataError("cannot split fewer than 2 ratings");

  std::vector<std::size_t> order(m.nnz());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m.nnz())));
  const auto entries = m.entries();
  std::vector<Rating> train, test;
  train.reserve(n_train);
  test.reserve(m.nnz() - n_train);
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : test).push_back(entries[order[k]]);
  }
  return SplitPair{RatingMatrix(m.n_users(), m.n_items(), std::move(train), m.scale()),
                   RatingMatrix(m.n_users(), m.n_items(), std::move(test), m.scale()), seed};
}

DenseMatrix mean_fill_rows(const RatingMatrix& m) {
  if (m.empty()) throw DataError("mean fill: matrix has no observed ratings");
  const auto entries = m.entries();
  const double global_mean =
      std::accumulate(entries.begin(), entries.end(), 0.0,
                      [](double acc, const Rating& e) { return acc + e.value; }) /
      static_cast<double>(entries.size());

  DenseMatrix out(m.n_users(), m.n_items());
  std::size_t k = 0;
  for (std::size_t u = 0; u < m.n_users(); ++u) {
    const std::size_t begin = k;
    double sum = 0.0;
    for (; k < entries.size() && entries[k].user == u; ++k) sum += entries[k].value;
    const std::size_t count = k - begin;
    const double fill = count == 0 ? global_mean : sum / static_cast<double>(count);
    auto row = out.row(u);
    std::fill(row.begin(), row.end(), fill);
    for (std::size_t e = begin; e < k; ++e) row[entries[e].item] = entries[e].value;
  }
  return out;
}

RatingIndex::RatingIndex(const RatingMatrix& m)
    : row_begin(m.n_users() + 1, 0), col_begin(m.n_items() + 1, 0), col_entries(m.nnz()) {
  const auto entries = m.entries();
  for (const Rating& e : entries) {
    ++row_begin[e.user + 1];
    ++col_begin[e.item + 1];
  }
  std::partial_sum(row_begin.begin(), row_begin.end(), row_begin.begin());
  std::partial_sum(col_begin.begin(), col_begin.end(), col_begin.begin());
  // Entries are user-major, so a stable fill keeps users ascending within each item.
  std::vector<std::size_t> cursor(col_begin.begin(), col_begin.end() - 1);
  for (std::size_t k = 0; k < entries.size(); ++k) col_entries[cursor[entries[k].item]++] = k;
}

}  // namespace cdt
