#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bornagain {

// Labelled rows of `num_features` reals, stored row-major.
class SampleSet {
 public:
  explicit SampleSet(int num_features = 0) : num_features_(num_features) {}

  void add(std::span<const double> x, int label);

  int num_features() const { return num_features_; }
  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::span<const double> row(size_t i) const {
    return {values_.data() + i * static_cast<size_t>(num_features_),
            static_cast<size_t>(num_features_)};
  }
  int label(size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }

  // Throws InputError if some label falls outside [0, num_classes).
  void check_labels(int num_classes) const;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  int num_features_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
};

}  // namespace bornagain
