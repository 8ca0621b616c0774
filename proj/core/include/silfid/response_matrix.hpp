#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace silfid {

/// Respondents x questions grid of unit-interval stance values with an
/// explicit missing mask. Immutable after construction; row-major storage.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;

  /// `values` and `missing` are row-major with rows == respondent_ids.size()
  /// and cols == question_ids.size(). Values at missing cells are ignored.
  /// Throws InputError on dimension mismatch, duplicate ids, or an observed
  /// value outside [0, 1].
  ResponseMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> question_ids,
                 std::vector<double> values, std::vector<std::uint8_t> missing,
                 std::string source_tag);

  /// Convenience constructor: std::nullopt marks a missing cell.
  static ResponseMatrix from_cells(std::vector<std::string> respondent_ids,
                                   std::vector<std::string> question_ids,
                                   const std::vector<std::optional<double>>& cells,
                                   std::string source_tag);

  [[nodiscard]] std::size_t rows() const noexcept { return respondent_ids_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return question_ids_.size(); }
  [[nodiscard]] bool empty() const noexcept { return rows() == 0 || cols() == 0; }

  [[nodiscard]] const std::vector<std::string>& respondent_ids() const noexcept {
    return respondent_ids_;
  }
  [[nodiscard]] const std::vector<std::string>& question_ids() const noexcept {
    return question_ids_;
  }
  [[nodiscard]] const std::string& source_tag() const noexcept { return source_tag_; }

  [[nodiscard]] bool is_missing(std::size_t r, std::size_t q) const noexcept {
    return missing_[r * cols() + q] != 0;
  }
  /// NaN for missing cells.
  [[nodiscard]] double value(std::size_t r, std::size_t q) const noexcept {
    return values_[r * cols() + q];
  }
  [[nodiscard]] std::optional<double> at(std::size_t r, std::size_t q) const noexcept {
    if (is_missing(r, q)) return std::nullopt;
    return value(r, q);
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const std::uint8_t> missing_mask() const noexcept { return missing_; }

  [[nodiscard]] std::optional<std::size_t> respondent_index(const std::string& id) const;
  [[nodiscard]] std::optional<std::size_t> question_index(const std::string& id) const;

  /// Observed values of one question, in row order.
  [[nodiscard]] std::vector<double> observed_column(std::size_t q) const;
  [[nodiscard]] std::size_t observed_count() const noexcept;

  /// Submatrix with the given row and column indices (in that order).
  [[nodiscard]] ResponseMatrix select(std::span<const std::size_t> rows,
                                      std::span<const std::size_t> cols) const;

  [[nodiscard]] ResponseMatrix with_source_tag(std::string tag) const;

  friend bool operator==(const ResponseMatrix& a, const ResponseMatrix& b);

 private:
  std::vector<std::string> respondent_ids_;
  std::vector<std::string> question_ids_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::string source_tag_;
  std::unordered_map<std::string, std::size_t> row_index_;
  std::unordered_map<std::string, std::size_t> col_index_;
};

}  // namespace silfid
