#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/rating_matrix.hpp"

namespace greyshill {

enum class RatingFormat { BookCrossing, HetRec, GenericCsv };

inline RatingFormat parse_rating_format(std::string_view s) {
  if (s == "bookcrossing") return RatingFormat::BookCrossing;
  if (s == "hetrec") return RatingFormat::HetRec;
  if (s == "generic" || s == "generic_csv" || s == "csv") return RatingFormat::GenericCsv;
  throw std::invalid_argument("unknown rating format: " + std::string(s));
}

namespace detail {

// Splits one delimited line. Double-quoted fields may contain the delimiter;
// a doubled quote inside a quoted field is a literal quote.
inline std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

[[noreturn]] inline void fail_line(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

// Reads a rating dump. Book-Crossing implicit ratings (0) are dropped; HetRec
// half-star ratings are doubled and rounded onto 1..10.
inline RatingMatrix load_ratings(std::istream& in, RatingFormat format) {
  RatingMatrix::Builder builder(Scale{1, 10});
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  const char delim = format == RatingFormat::BookCrossing ? ';'
                     : format == RatingFormat::HetRec    ? '\t'
                                                         : ',';
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line, delim);
    if (fields.size() < 3) detail::fail_line(line_no, "expected at least 3 fields");
    const std::string user(detail::trim(fields[0]));
    const std::string item(detail::trim(fields[1]));
    if (user.empty() || item.empty()) detail::fail_line(line_no, "empty user or item id");
    int rating = 0;
    if (format == RatingFormat::HetRec) {
      double stars = 0;
      if (!detail::parse_double(fields[2], stars)) detail::fail_line(line_no, "bad rating");
      rating = static_cast<int>(std::lround(stars * 2.0));
    } else {
      if (!detail::parse_int(fields[2], rating)) detail::fail_line(line_no, "bad rating");
      if (format == RatingFormat::BookCrossing && rating == 0) continue;
    }
    ++data_rows;
    try {
      builder.add_rating(user, item, rating);
    } catch (const DataError& e) {
      detail::fail_line(line_no, e.what());
    }
  }
  if (line_no == 0) throw DataError("empty ratings file");
  if (data_rows == 0) throw DataError("ratings file contains no explicit ratings");
  return builder.build();
}

inline RatingMatrix load_ratings(const std::string& path, RatingFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return load_ratings(in, format);
}

inline void write_ratings_csv(const RatingMatrix& m, std::ostream& out) {
  out << "user_id,item_id,rating\n";
  for (Index u = 0; u < m.num_users(); ++u)
    for (const auto& e : m.profile(u))
      out << detail::csv_field(m.user_id(u)) << ',' << detail::csv_field(m.item_id(e.item)) << ','
          << e.rating << '\n';
}

inline void write_ratings_csv(const RatingMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_ratings_csv(m, out);
}

inline void write_labels_csv(const UserLabelSet& labels, std::ostream& out) {
  out << "user_id,label\n";
  // Merge in id order for a stable file.
  auto g = labels.genuine.begin();
  auto a = labels.attackers.begin();
  while (g != labels.genuine.end() || a != labels.attackers.end()) {
    if (a == labels.attackers.end() || (g != labels.genuine.end() && *g < *a)) {
      out << detail::csv_field(*g++) << ",genuine\n";
    } else {
      out << detail::csv_field(*a++) << ",attacker\n";
    }
  }
}

inline void write_labels_csv(const UserLabelSet& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_labels_csv(labels, out);
}

inline UserLabelSet load_labels(std::istream& in) {
  UserLabelSet labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line, ',');
    if (f.size() != 2) detail::fail_line(line_no, "expected user_id,label");
    const std::string id(detail::trim(f[0]));
    const auto label = detail::trim(f[1]);
    if (label == "genuine") {
      labels.genuine.insert(id);
    } else if (label == "attacker") {
      labels.attackers.insert(id);
    } else {
      detail::fail_line(line_no, "label must be genuine or attacker");
    }
  }
  if (line_no == 0) throw DataError("empty label file");
  for (const auto& id : labels.attackers)
    if (labels.genuine.contains(id)) throw DataError("user labelled both ways: " + id);
  return labels;
}

inline UserLabelSet load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return load_labels(in);
}

}  // namespace greyshill
