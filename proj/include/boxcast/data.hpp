#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "boxcast/errors.hpp"

namespace boxcast {

/// Grid of strictly positive rates, rows indexed by consecutive calendar
/// years and columns by consecutive integer ages.
class AgeRateSurface {
 public:
  AgeRateSurface(int first_year, int first_age, Eigen::MatrixXd rates)
      : first_year_(first_year), first_age_(first_age), rates_(std::move(rates)) {
    if (rates_.rows() == 0 || rates_.cols() == 0) {
      throw DataError("rate surface must have at least one year and one age");
    }
    for (Eigen::Index t = 0; t < rates_.rows(); ++t) {
      for (Eigen::Index a = 0; a < rates_.cols(); ++a) {
        const double f = rates_(t, a);
        if (!(f > 0.0) || !std::isfinite(f)) {
          throw DataError("non-positive or non-finite rate at year " +
                          std::to_string(year_at(t)) + ", age " + std::to_string(age_at(a)));
        }
      }
    }
  }

  [[nodiscard]] int first_year() const noexcept { return first_year_; }
  [[nodiscard]] int last_year() const noexcept { return first_year_ + n_years() - 1; }
  [[nodiscard]] int first_age() const noexcept { return first_age_; }
  [[nodiscard]] int last_age() const noexcept { return first_age_ + n_ages() - 1; }
  [[nodiscard]] int n_years() const noexcept { return static_cast<int>(rates_.rows()); }
  [[nodiscard]] int n_ages() const noexcept { return static_cast<int>(rates_.cols()); }
  [[nodiscard]] int year_at(Eigen::Index row) const noexcept {
    return first_year_ + static_cast<int>(row);
  }
  [[nodiscard]] int age_at(Eigen::Index col) const noexcept {
    return first_age_ + static_cast<int>(col);
  }
  [[nodiscard]] const Eigen::MatrixXd& rates() const noexcept { return rates_; }
  [[nodiscard]] double rate(int year, int age) const {
    return rates_(row_of(year), age - first_age_);
  }

  [[nodiscard]] Eigen::Index row_of(int year) const {
    if (year < first_year_ || year > last_year()) {
      throw ValidationError("year " + std::to_string(year) + " outside surface span " +
                            std::to_string(first_year_) + "-" + std::to_string(last_year()));
    }
    return year - first_year_;
  }

  /// Sub-surface restricted to the inclusive year range [from, to].
  [[nodiscard]] AgeRateSurface years(int from, int to) const {
    if (from > to) throw ValidationError("empty year range");
    const Eigen::Index r0 = row_of(from);
    const Eigen::Index r1 = row_of(to);
    return AgeRateSurface(from, first_age_, rates_.middleRows(r0, r1 - r0 + 1));
  }

 private:
  int first_year_;
  int first_age_;
  Eigen::MatrixXd rates_;
};

/// Training / validation / test partition of the year axis, by last year of
/// each block. The first block starts at the surface's first year.
struct SampleSplit {
  int training_end_year;
  int validation_end_year;
  int test_end_year;
};

struct FloorOptions {
  bool enabled = false;
  double floor = 1e-6;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads a long-format `year,age,rate` CSV into a validated surface.
/// Errors carry the 1-based line number of the offending row.
inline AgeRateSurface load_rates(std::istream& in, const FloorOptions& options = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  {
    const auto header = detail::split_fields(line);
    if (header.size() != 3 || header[0] != "year" || header[1] != "age" || header[2] != "rate") {
      throw DataError("line 1: expected header 'year,age,rate'");
    }
  }
  if (options.enabled && !(options.floor > 0.0)) {
    throw ValidationError("rate floor must be positive");
  }

  std::map<std::pair<int, int>, double> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3) throw DataError(where + "expected 3 fields");
    const auto year = detail::parse_number<int>(fields[0]);
    const auto age = detail::parse_number<int>(fields[1]);
    const auto rate = detail::parse_number<double>(fields[2]);
    if (!year) throw DataError(where + "non-integer year '" + std::string(fields[0]) + "'");
    if (!age) throw DataError(where + "non-integer age '" + std::string(fields[1]) + "'");
    if (!rate || !std::isfinite(*rate)) {
      throw DataError(where + "non-numeric rate '" + std::string(fields[2]) + "'");
    }
    double value = *rate;
    if (!(value > 0.0) || (options.enabled && value < options.floor)) {
      if (!options.enabled) {
        throw DataError(where + "non-positive rate " + std::string(fields[2]) + " at year " +
                        std::to_string(*year) + ", age " + std::to_string(*age));
      }
      value = options.floor;
    }
    if (!cells.emplace(std::pair{*year, *age}, value).second) {
      throw DataError(where + "duplicate row for year " + std::to_string(*year) + ", age " +
                      std::to_string(*age));
    }
  }
  if (cells.empty()) throw DataError("CSV has no data rows");

  int y0 = cells.begin()->first.first, y1 = y0;
  int a0 = cells.begin()->first.second, a1 = a0;
  for (const auto& [key, value] : cells) {
    y0 = std::min(y0, key.first);
    y1 = std::max(y1, key.first);
    a0 = std::min(a0, key.second);
    a1 = std::max(a1, key.second);
  }
  Eigen::MatrixXd rates(y1 - y0 + 1, a1 - a0 + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int a = a0; a <= a1; ++a) {
      const auto it = cells.find({y, a});
      if (it == cells.end()) {
        throw DataError("missing cell for year " + std::to_string(y) + ", age " +
                        std::to_string(a));
      }
      rates(y - y0, a - a0) = it->second;
    }
  }
  return AgeRateSurface(y0, a0, std::move(rates));
}

inline AgeRateSurface load_rates(const std::string& text, const FloorOptions& options = {}) {
  std::istringstream in(text);
  return load_rates(in, options);
}

/// Writes the surface in the same format `load_rates` reads, with enough
/// digits to round-trip every rate exactly.
inline void write_rates(std::ostream& out, const AgeRateSurface& surface) {
  out << "year,age,rate\n";
  for (int t = 0; t < surface.n_years(); ++t) {
    for (int a = 0; a < surface.n_ages(); ++a) {
      out << surface.year_at(t) << ',' << surface.age_at(a) << ','
          << detail::format_double(surface.rates()(t, a)) << '\n';
    }
  }
}

/// Test span = last round(fraction * n) years; validation span has the same
/// length and immediately precedes it; training is the remainder.
inline SampleSplit split_by_fraction(const AgeRateSurface& surface, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 0.5)) {
    throw ValidationError("test fraction must lie in (0, 0.5)");
  }
  const int n = surface.n_years();
  if (n < 10) throw ValidationError("sample split needs at least 10 years, got " + std::to_string(n));
  const int span = static_cast<int>(std::floor(test_fraction * n + 0.5));
  if (span < 1) throw ValidationError("test fraction leaves an empty test span");
  const int training = n - 2 * span;
  if (training < 5) {
    throw ValidationError("training sample of " + std::to_string(training) +
                          " years is shorter than 5");
  }
  const int first = surface.first_year();
  return {first + training - 1, first + training + span - 1, surface.last_year()};
}

}  // namespace boxcast
