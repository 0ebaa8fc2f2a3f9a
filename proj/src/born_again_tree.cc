#include "bornagain/born_again_tree.h"

#include "bornagain/error.h"

namespace bornagain {

int BornAgainTree::class_of_cell(std::span<const int> z, const SplitUniverse& universe) const {
  const Node* nd = &tree_.node(tree_.root());
  while (!nd->is_leaf()) {
    const auto level = universe.level_of(nd->feature, nd->threshold);
    if (!level)
      throw InconsistencyError("tree threshold " + std::to_string(nd->threshold) +
                               " on feature " + std::to_string(nd->feature) +
                               " is not a level of the universe");
    nd = &tree_.node(z[static_cast<size_t>(nd->feature)] <= *level ? nd->le : nd->gt);
  }
  return nd->leaf_class;
}

}  // namespace bornagain
