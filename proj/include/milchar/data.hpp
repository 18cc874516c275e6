#pragma once

// MIL data model: bags of instances with binary bag labels, the dataset CSV
// format and the six-count metadata summary of a dataset.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "milchar/error.hpp"
#include "milchar/text.hpp"

namespace milchar {

enum class BagLabel : int { negative = 0, positive = 1 };

inline constexpr int to_int(BagLabel l) noexcept { return static_cast<int>(l); }

// A labeled set of instances. Rows of `instances()` are the instances.
class Bag {
 public:
  Bag(std::string id, Eigen::MatrixXd instances, BagLabel label)
      : id_(std::move(id)), instances_(std::move(instances)), label_(label) {
    if (instances_.rows() < 1) throw DataError("bag '" + id_ + "' has no instances");
    if (instances_.cols() < 1) throw DataError("bag '" + id_ + "' has zero feature dimension");
    if (!instances_.allFinite()) throw DataError("bag '" + id_ + "' contains a non-finite feature value");
  }

  const std::string& id() const noexcept { return id_; }
  const Eigen::MatrixXd& instances() const noexcept { return instances_; }
  BagLabel label() const noexcept { return label_; }
  bool positive() const noexcept { return label_ == BagLabel::positive; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(instances_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(instances_.cols()); }

  friend bool operator==(const Bag& a, const Bag& b) {
    return a.id_ == b.id_ && a.label_ == b.label_ && a.instances_.rows() == b.instances_.rows() &&
           a.instances_.cols() == b.instances_.cols() && a.instances_ == b.instances_;
  }

 private:
  std::string id_;
  Eigen::MatrixXd instances_;
  BagLabel label_;
};

class MilDataset {
 public:
  MilDataset(std::string name, std::vector<Bag> bags) : name_(std::move(name)), bags_(std::move(bags)) {
    if (bags_.empty()) throw DataError("dataset '" + name_ + "' has no bags");
    feature_dim_ = bags_.front().dim();
    std::unordered_set<std::string_view> ids;
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& b : bags_) {
      if (b.dim() != feature_dim_) {
        throw DataError("dataset '" + name_ + "': bag '" + b.id() + "' has dimension " + std::to_string(b.dim()) +
                        ", expected " + std::to_string(feature_dim_));
      }
      if (!ids.insert(b.id()).second) throw DataError("dataset '" + name_ + "': duplicate bag id '" + b.id() + "'");
      (b.positive() ? has_pos : has_neg) = true;
    }
    if (!has_pos) throw DataError("dataset '" + name_ + "' has no positive bag");
    if (!has_neg) throw DataError("dataset '" + name_ + "' has no negative bag");
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Bag>& bags() const noexcept { return bags_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t size() const noexcept { return bags_.size(); }

  std::size_t total_instances() const noexcept {
    std::size_t n = 0;
    for (const auto& b : bags_) n += b.size();
    return n;
  }

  friend bool operator==(const MilDataset& a, const MilDataset& b) {
    return a.name_ == b.name_ && a.feature_dim_ == b.feature_dim_ && a.bags_ == b.bags_;
  }

 private:
  std::string name_;
  std::vector<Bag> bags_;
  std::size_t feature_dim_ = 0;
};

// ---------------------------------------------------------------------------
// Dataset CSV
//
//   bag_id,label,f1,...,fd
//   <bag id>,<0|1>,<x1>,...,<xd>      one line per instance
//
// Rows of a bag need not be contiguous. Bags appear in order of first
// occurrence; instance order inside a bag follows the file.

inline MilDataset parse_dataset(std::string_view content, std::string name, std::string_view source = "<memory>") {
  auto fail = [&](std::size_t line, const std::string& msg) -> DataError {
    return DataError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };

  auto lines = text::split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw fail(1, "empty file, expected header");

  const auto header = text::split(text::strip_cr(lines[0]), ',');
  if (header.size() < 3 || header[0] != "bag_id" || header[1] != "label") {
    throw fail(1, "header must be 'bag_id,label,f1,...,fd'");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 2] != "f" + std::to_string(k + 1)) {
      throw fail(1, "header column " + std::to_string(k + 3) + " must be 'f" + std::to_string(k + 1) + "'");
    }
  }

  struct Pending {
    std::string id;
    BagLabel label;
    std::vector<double> values;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const auto line = text::strip_cr(lines[li]);
    const auto cells = text::split(line, ',');
    if (cells.size() != dim + 2) {
      throw fail(line_no, "inconsistent column count: expected " + std::to_string(dim + 2) + ", got " +
                              std::to_string(cells.size()));
    }
    if (!text::is_valid_name(cells[0])) throw fail(line_no, "malformed row: invalid bag id");
    BagLabel label;
    if (cells[1] == "0") {
      label = BagLabel::negative;
    } else if (cells[1] == "1") {
      label = BagLabel::positive;
    } else {
      throw fail(line_no, "malformed row: label must be 0 or 1");
    }
    std::string id(cells[0]);
    auto [it, inserted] = index.try_emplace(id, pending.size());
    if (inserted) {
      pending.push_back({id, label, {}});
    } else if (pending[it->second].label != label) {
      throw fail(line_no, "inconsistent bag label for bag '" + id + "'");
    }
    auto& values = pending[it->second].values;
    for (std::size_t k = 0; k < dim; ++k) {
      auto v = text::parse_double(cells[k + 2]);
      if (!v || !std::isfinite(*v)) {
        throw fail(line_no, "malformed row: bad feature value '" + std::string(cells[k + 2]) + "'");
      }
      values.push_back(*v);
    }
  }

  std::vector<Bag> bags;
  bags.reserve(pending.size());
  bool has_pos = false;
  bool has_neg = false;
  for (auto& p : pending) {
    const auto rows = static_cast<Eigen::Index>(p.values.size() / dim);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = p.values[static_cast<std::size_t>(r) * dim + c];
    }
    (p.label == BagLabel::positive ? has_pos : has_neg) = true;
    bags.emplace_back(std::move(p.id), std::move(x), p.label);
  }
  const std::size_t last_line = lines.size();
  if (!has_pos) throw fail(last_line, "no positive bag in dataset");
  if (!has_neg) throw fail(last_line, "no negative bag in dataset");
  return MilDataset(std::move(name), std::move(bags));
}

// The dataset name is the file stem.
inline MilDataset load_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("dataset file not found: '" + path.string() + "'");
  const auto name = path.stem().string();
  if (!text::is_valid_name(name)) throw DataError("dataset name '" + name + "' (from file name) is not a valid name");
  return parse_dataset(text::read_file(path), name, path.string());
}

inline std::string format_dataset(const MilDataset& ds) {
  std::string out = "bag_id,label";
  for (std::size_t k = 0; k < ds.feature_dim(); ++k) out += ",f" + std::to_string(k + 1);
  out += '\n';
  for (const auto& bag : ds.bags()) {
    const auto& x = bag.instances();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out += bag.id();
      out += bag.positive() ? ",1" : ",0";
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        out += ',';
        out += text::format_double(x(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

inline void save_dataset(const MilDataset& ds, const std::filesystem::path& path) {
  text::write_file_atomic(path, format_dataset(ds));
}

// ---------------------------------------------------------------------------
// Metadata

struct MetaVector {
  std::size_t n_pos_bags = 0;
  std::size_t n_neg_bags = 0;
  std::size_t n_features = 0;
  std::size_t n_total_instances = 0;
  std::size_t min_bag_size = 0;
  std::size_t max_bag_size = 0;

  static constexpr std::size_t kSize = 6;

  std::array<double, kSize> values() const noexcept {
    return {static_cast<double>(n_pos_bags),        static_cast<double>(n_neg_bags),
            static_cast<double>(n_features),        static_cast<double>(n_total_instances),
            static_cast<double>(min_bag_size),      static_cast<double>(max_bag_size)};
  }

  friend bool operator==(const MetaVector&, const MetaVector&) = default;
};

inline MetaVector meta_vector(const MilDataset& ds) {
  MetaVector m;
  m.n_features = ds.feature_dim();
  m.min_bag_size = ds.bags().front().size();
  m.max_bag_size = m.min_bag_size;
  for (const auto& b : ds.bags()) {
    (b.positive() ? m.n_pos_bags : m.n_neg_bags) += 1;
    m.n_total_instances += b.size();
    m.min_bag_size = std::min(m.min_bag_size, b.size());
    m.max_bag_size = std::max(m.max_bag_size, b.size());
  }
  return m;
}

// Column-wise z-scores with the n-1 standard deviation. Constant columns map
// to zero.
inline Eigen::MatrixXd normalize_meta(std::span<const MetaVector> metas) {
  if (metas.size() < 2) throw UsageError("normalize_meta needs at least 2 metadata vectors");
  const auto n = static_cast<Eigen::Index>(metas.size());
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(MetaVector::kSize));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = metas[static_cast<std::size_t>(i)].values();
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = v[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    if ((col.array() == col(0)).all()) {
      col.setZero();
      continue;
    }
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
    col /= sd;
  }
  return m;
}

}  // namespace milchar
