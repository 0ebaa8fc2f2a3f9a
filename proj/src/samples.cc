#include "bornagain/samples.h"

#include <string>

#include "bornagain/error.h"

namespace bornagain {

void SampleSet::add(std::span<const double> x, int label) {
  if (static_cast<int>(x.size()) != num_features_)
    throw InputError("sample has " + std::to_string(x.size()) + " features, expected " +
                     std::to_string(num_features_));
  if (label < 0) throw InputError("sample label must be nonnegative");
  values_.insert(values_.end(), x.begin(), x.end());
  labels_.push_back(label);
}

void SampleSet::check_labels(int num_classes) const {
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes)
      throw InputError("sample " + std::to_string(i) + " has class " +
                       std::to_string(labels_[i]) + ", outside [0, " +
                       std::to_string(num_classes) + ")");
  }
}

}  // namespace bornagain
