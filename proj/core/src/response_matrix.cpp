#include "silfid/response_matrix.hpp"

#include <cmath>
#include <limits>

#include "silfid/error.hpp"

namespace silfid {
namespace {

std::unordered_map<std::string, std::size_t> index_ids(const std::vector<std::string>& ids,
                                                       const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) {
      throw InputError(std::string("duplicate ") + what + " id: " + ids[i]);
    }
  }
  return index;
}

}  // namespace

ResponseMatrix::ResponseMatrix(std::vector<std::string> respondent_ids,
                               std::vector<std::string> question_ids, std::vector<double> values,
                               std::vector<std::uint8_t> missing, std::string source_tag)
    : respondent_ids_(std::move(respondent_ids)),
      question_ids_(std::move(question_ids)),
      values_(std::move(values)),
      missing_(std::move(missing)),
      source_tag_(std::move(source_tag)) {
  const std::size_t n = respondent_ids_.size() * question_ids_.size();
  if (values_.size() != n || missing_.size() != n) {
    throw InputError("response matrix dimensions disagree with id lists");
  }
  row_index_ = index_ids(respondent_ids_, "respondent");
  col_index_ = index_ids(question_ids_, "question");
  for (std::size_t i = 0; i < n; ++i) {
    if (missing_[i]) {
      missing_[i] = 1;
      values_[i] = std::numeric_limits<double>::quiet_NaN();
    } else if (!(values_[i] >= 0.0 && values_[i] <= 1.0)) {
      throw InputError("response value outside [0,1] at respondent " +
                       respondent_ids_[i / question_ids_.size()] + ", question " +
                       question_ids_[i % question_ids_.size()] + ": " +
                       std::to_string(values_[i]));
    }
  }
}

ResponseMatrix ResponseMatrix::from_cells(std::vector<std::string> respondent_ids,
                                          std::vector<std::string> question_ids,
                                          const std::vector<std::optional<double>>& cells,
                                          std::string source_tag) {
  std::vector<double> values(cells.size(), 0.0);
  std::vector<std::uint8_t> missing(cells.size(), 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i]) {
      values[i] = *cells[i];
      missing[i] = 0;
    }
  }
  return ResponseMatrix(std::move(respondent_ids), std::move(question_ids), std::move(values),
                        std::move(missing), std::move(source_tag));
}

std::optional<std::size_t> ResponseMatrix::respondent_index(const std::string& id) const {
  auto it = row_index_.find(id);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ResponseMatrix::question_index(const std::string& id) const {
  auto it = col_index_.find(id);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> ResponseMatrix::observed_column(std::size_t q) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (!is_missing(r, q)) out.push_back(value(r, q));
  }
  return out;
}

std::size_t ResponseMatrix::observed_count() const noexcept {
  std::size_t n = 0;
  for (auto m : missing_) n += (m == 0);
  return n;
}

ResponseMatrix ResponseMatrix::select(std::span<const std::size_t> row_sel,
                                      std::span<const std::size_t> col_sel) const {
  std::vector<std::string> rid;
  std::vector<std::string> qid;
  rid.reserve(row_sel.size());
  qid.reserve(col_sel.size());
  for (auto r : row_sel) rid.push_back(respondent_ids_.at(r));
  for (auto q : col_sel) qid.push_back(question_ids_.at(q));
  std::vector<double> vals;
  std::vector<std::uint8_t> miss;
  vals.reserve(row_sel.size() * col_sel.size());
  miss.reserve(row_sel.size() * col_sel.size());
  for (auto r : row_sel) {
    for (auto q : col_sel) {
      vals.push_back(value(r, q));
      miss.push_back(missing_[r * cols() + q]);
    }
  }
  return ResponseMatrix(std::move(rid), std::move(qid), std::move(vals), std::move(miss),
                        source_tag_);
}

ResponseMatrix ResponseMatrix::with_source_tag(std::string tag) const {
  ResponseMatrix copy = *this;
  copy.source_tag_ = std::move(tag);
  return copy;
}

bool operator==(const ResponseMatrix& a, const ResponseMatrix& b) {
  if (a.respondent_ids_ != b.respondent_ids_ || a.question_ids_ != b.question_ids_ ||
      a.missing_ != b.missing_ || a.source_tag_ != b.source_tag_) {
    return false;
  }
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (!a.missing_[i] && a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

}  // namespace silfid
