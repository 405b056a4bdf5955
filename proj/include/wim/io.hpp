#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wim/distributions.hpp"
#include "wim/error.hpp"
#include "wim/posterior.hpp"

namespace wim::io {

inline constexpr const char* kCsvSchema = "# wim-csv v1";

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Whole-token floating point parse; nullopt on trailing garbage.
inline std::optional<double> to_double(std::string_view s) {
  std::string buf(trim(s));
  if (buf.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) return std::nullopt;
  return v;
}

}  // namespace detail

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Prior mini-grammar: family:param:param[:param] or a keyword.
//   gamma:a:b beta:a:b ig:a:b normal:m:s t:m:s:df sn:m:s:alpha cauchy:m:s uniform:lo:hi
//   flat  jeffreys  jeffreys-var  haldane  flat-plane
// Zero rates/shapes give the improper limits. `jeffreys` depends on the model.
inline PriorSpec parse_prior(std::string_view text, LikelihoodKind model = LikelihoodKind::PoissonIID) {
  std::string_view s = detail::trim(text);
  if (s.empty()) throw ParseError("empty prior specification", 1, 1);
  std::vector<std::string_view> tok;
  std::vector<int> col;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(':', start);
    tok.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    col.push_back(static_cast<int>(start) + 1);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  std::string head(tok[0]);
  auto fail = [&](const std::string& msg, std::size_t i) -> ParseError {
    return ParseError("prior '" + std::string(s) + "': " + msg, 1, col[std::min(i, col.size() - 1)]);
  };

  if (tok.size() == 1) {
    if (head == "flat" || head == "uniform") return PriorSpec::flat();
    if (head == "jeffreys-var") return PriorSpec::jeffreys_variance();
    if (head == "flat-plane") return PriorSpec::flat_plane();
    if (head == "haldane") return PriorSpec::improper_beta(0, 0);
    if (head == "jeffreys") {
      switch (model) {
        case LikelihoodKind::PoissonIID: return PriorSpec::improper_gamma(0.5, 0);
        case LikelihoodKind::BinomialCount: return PriorSpec::proper(Distribution::beta(0.5, 0.5));
        case LikelihoodKind::NormalKnownMean: return PriorSpec::jeffreys_variance();
        default: throw fail("no jeffreys prior is defined for this model", 0);
      }
    }
    throw fail("unknown prior keyword", 0);
  }

  std::vector<double> p;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    auto v = detail::to_double(tok[i]);
    if (!v || !std::isfinite(*v)) throw fail("'" + std::string(tok[i]) + "' is not a finite number", i);
    p.push_back(*v);
  }
  auto arity = [&](std::size_t k) {
    if (p.size() != k) throw fail(head + " takes " + std::to_string(k) + " parameters", 0);
  };
  auto nonneg = [&](std::size_t i) {
    if (p[i] < 0) throw fail(head + " parameters must be nonnegative", i + 1);
  };
  try {
    if (head == "gamma") {
      arity(2);
      nonneg(0);
      nonneg(1);
      if (p[0] > 0 && p[1] > 0) return PriorSpec::proper(Distribution::gamma(p[0], p[1]));
      return PriorSpec::improper_gamma(p[0], p[1]);
    }
    if (head == "beta") {
      arity(2);
      nonneg(0);
      nonneg(1);
      if (p[0] > 0 && p[1] > 0) return PriorSpec::proper(Distribution::beta(p[0], p[1]));
      return PriorSpec::improper_beta(p[0], p[1]);
    }
    if (head == "ig") {
      arity(2);
      nonneg(1);
      if (p[0] > 0 && p[1] > 0) return PriorSpec::proper(Distribution::inverse_gamma(p[0], p[1]));
      return PriorSpec::improper_ig(p[0], p[1]);
    }
    if (head == "normal") {
      arity(2);
      return PriorSpec::proper(Distribution::normal(p[0], p[1]));
    }
    if (head == "t") {
      arity(3);
      return PriorSpec::proper(Distribution::student_t(p[0], p[1], p[2]));
    }
    if (head == "sn") {
      arity(3);
      return PriorSpec::proper(Distribution::skew_normal(p[0], p[1], p[2]));
    }
    if (head == "cauchy") {
      arity(2);
      return PriorSpec::proper(Distribution::cauchy(p[0], p[1]));
    }
    if (head == "uniform") {
      arity(2);
      return PriorSpec::proper(Distribution::uniform(p[0], p[1]));
    }
  } catch (const DomainError& e) {
    throw fail(e.what(), 1);
  }
  throw fail("unknown prior family '" + head + "'", 0);
}

// One observation per line. Blank lines and '#' comments are skipped; a single
// non-numeric header line is allowed before the first value.
inline std::vector<double> read_dataset(std::istream& in) {
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v(line);
    if (auto h = v.find('#'); h != std::string_view::npos) v = v.substr(0, h);
    auto t = detail::trim(v);
    if (t.empty()) continue;
    int column = static_cast<int>(t.data() - line.data()) + 1;
    if (auto ws = t.find_first_of(" \t,;"); ws != std::string_view::npos)
      throw ParseError("expected one value per line", lineno, column + static_cast<int>(ws));
    auto x = detail::to_double(t);
    if (!x) {
      if (out.empty() && !header_seen) {
        header_seen = true;
        continue;
      }
      throw ParseError("'" + std::string(t) + "' is not a number", lineno, column);
    }
    if (!std::isfinite(*x)) throw ParseError("value is not finite", lineno, column);
    out.push_back(*x);
  }
  if (out.empty()) throw ParseError("dataset contains no observations");
  return out;
}

inline std::vector<double> parse_dataset(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

// One CSV row of the simulation harness. Empty optionals print as empty cells.
struct SimRow {
  std::string experiment;
  double theta = 0.0;
  long n = 0;
  std::string prior1;
  std::string prior2;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::optional<double> wim;
  std::optional<double> wim_se;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> exact;
  std::optional<double> neutrality1;
  std::optional<double> neutrality2;
  std::optional<double> mopess;
  std::string error;

  bool operator==(const SimRow&) const = default;
};

inline const std::vector<std::string>& sim_columns() {
  static const std::vector<std::string> cols{"experiment", "theta",  "n",           "prior1",      "prior2",
                                             "replicate",  "seed",   "wim",         "wim_se",      "lower",
                                             "upper",      "exact",  "neutrality1", "neutrality2", "mopess",
                                             "error"};
  return cols;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", lineno, static_cast<int>(line.size()));
  out.push_back(std::move(cur));
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

inline std::vector<std::string> to_fields(const SimRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  return {r.experiment,       fmt17(r.theta),   std::to_string(r.n), r.prior1,       r.prior2,
          std::to_string(r.replicate), std::to_string(r.seed), opt(r.wim), opt(r.wim_se), opt(r.lower),
          opt(r.upper),       opt(r.exact),     opt(r.neutrality1),  opt(r.neutrality2), opt(r.mopess),
          r.error};
}

inline void write_csv(std::ostream& os, const std::vector<SimRow>& rows) {
  os << kCsvSchema << '\n';
  write_row(os, sim_columns());
  for (const auto& r : rows) write_row(os, to_fields(r));
}

inline std::vector<SimRow> read_csv(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&]() {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next() || line != kCsvSchema) throw ParseError("missing schema comment '" + std::string(kCsvSchema) + "'", 1, 1);
  if (!next() || split_csv_line(line, lineno) != sim_columns()) throw ParseError("unexpected header row", lineno, 1);
  std::vector<SimRow> rows;
  while (next()) {
    auto f = split_csv_line(line, lineno);
    if (f.size() != sim_columns().size())
      throw ParseError("expected " + std::to_string(sim_columns().size()) + " fields", lineno, 1);
    auto num = [&](std::size_t i) {
      auto v = detail::to_double(f[i]);
      if (!v) throw ParseError("field '" + sim_columns()[i] + "' is not a number", lineno, static_cast<int>(i) + 1);
      return *v;
    };
    auto opt = [&](std::size_t i) -> std::optional<double> {
      if (f[i].empty()) return std::nullopt;
      return num(i);
    };
    auto whole = [&](std::size_t i) {
      char* end = nullptr;
      auto v = std::strtoull(f[i].c_str(), &end, 10);
      if (f[i].empty() || *end) throw ParseError("field '" + sim_columns()[i] + "' is not an integer", lineno,
                                                 static_cast<int>(i) + 1);
      return v;
    };
    SimRow r;
    r.experiment = f[0];
    r.theta = num(1);
    r.n = static_cast<long>(whole(2));
    r.prior1 = f[3];
    r.prior2 = f[4];
    r.replicate = whole(5);
    r.seed = whole(6);
    r.wim = opt(7);
    r.wim_se = opt(8);
    r.lower = opt(9);
    r.upper = opt(10);
    r.exact = opt(11);
    r.neutrality1 = opt(12);
    r.neutrality2 = opt(13);
    r.mopess = opt(14);
    r.error = f[15];
    rows.push_back(std::move(r));
  }
  return rows;
}

// Free-form table (demo matrices, bootstrap draws) under the same CSV conventions.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const {
    os << kCsvSchema << '\n';
    write_row(os, header);
    for (const auto& r : rows) write_row(os, r);
  }
};

}  // namespace wim::io
