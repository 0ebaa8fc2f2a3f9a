#include "bornagain/solver.h"

#include <pthread.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <string>

#include "absl/container/flat_hash_map.h"
#include "absl/hash/hash.h"
#include "bornagain/error.h"
#include "bornagain/verify.h"

namespace bornagain {
namespace {

constexpr std::uint64_t kInfinity = std::numeric_limits<std::uint64_t>::max();

// Runs `fn` on a thread whose stack can hold `bytes`. The DP recursion is
// as deep as the sum of level counts, which can outgrow the default stack.
void run_with_stack(size_t bytes, const std::function<void()>& fn) {
  struct Payload {
    const std::function<void()>* fn;
    std::exception_ptr error;
  } payload{&fn, nullptr};
  auto trampoline = [](void* arg) -> void* {
    auto* p = static_cast<Payload*>(arg);
    try {
      (*p->fn)();
    } catch (...) {
      p->error = std::current_exception();
    }
    return nullptr;
  };
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, bytes);
  pthread_t thread;
  const int rc = pthread_create(&thread, &attr, trampoline, &payload);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    fn();  // could not spawn; fall back to the current stack
    return;
  }
  pthread_join(thread, nullptr);
  if (payload.error) std::rethrow_exception(payload.error);
}

template <typename F>
void run_deep(int max_depth, F&& fn) {
  constexpr int kShallow = 4096;
  if (max_depth <= kShallow) {
    fn();
    return;
  }
  run_with_stack((size_t{1} << 20) + static_cast<size_t>(max_depth) * 1024,
                 std::function<void()>(std::forward<F>(fn)));
}

// ------------------------------------------------------------ key codecs

// Region (lo, hi) -> sum_j pair(lo_j, hi_j) * stride_j with
// pair(lo, hi) = hi (hi - 1) / 2 + lo - 1 enumerating lo <= hi.
template <typename Int>
class PackedCodec {
 public:
  using Key = Int;
  using MapKey = Int;

  struct Hash {
    size_t operator()(Int v) const {
      if constexpr (sizeof(Int) <= 8) {
        return absl::Hash<Int>{}(v);
      } else {
        return absl::Hash<std::pair<std::uint64_t, std::uint64_t>>{}(
            {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)});
      }
    }
  };

  explicit PackedCodec(const SplitUniverse& universe) {
    Int stride = 1;
    for (int j = 0; j < universe.num_features(); ++j) {
      strides_.push_back(stride);
      const auto c = static_cast<Int>(universe.num_cells(j));
      stride *= c * (c + 1) / 2;
    }
  }

  static Int pair(int lo, int hi) {
    return static_cast<Int>(hi) * static_cast<Int>(hi - 1) / 2 + static_cast<Int>(lo - 1);
  }

  Key make(std::span<const int> lo, std::span<const int> hi) const {
    Int key = 0;
    for (size_t j = 0; j < lo.size(); ++j) key += pair(lo[j], hi[j]) * strides_[j];
    return key;
  }
  Key with_hi(Key key, int j, int lo, int old_hi, int new_hi) const {
    return key - (pair(lo, old_hi) - pair(lo, new_hi)) * strides_[static_cast<size_t>(j)];
  }
  Key with_lo(Key key, int j, int old_lo, int new_lo, int /*hi*/) const {
    return key + static_cast<Int>(new_lo - old_lo) * strides_[static_cast<size_t>(j)];
  }
  MapKey map_key(Key key, std::span<const int>, std::span<const int>) const { return key; }

  void decode(MapKey key, std::vector<int>& lo, std::vector<int>& hi) const {
    lo.resize(strides_.size());
    hi.resize(strides_.size());
    for (size_t j = strides_.size(); j-- > 0;) {
      Int r = key / strides_[j];
      key -= r * strides_[j];
      int h = 1;
      while (pair(1, h + 1) <= r) ++h;
      hi[j] = h;
      lo[j] = static_cast<int>(r - pair(1, h)) + 1;
    }
  }

 private:
  std::vector<Int> strides_;
};

// Fallback for universes with more than 2^128 regions.
class WideCodec {
 public:
  struct Key {};
  using MapKey = std::vector<std::int32_t>;
  using Hash = absl::Hash<MapKey>;

  explicit WideCodec(const SplitUniverse&) {}

  Key make(std::span<const int>, std::span<const int>) const { return {}; }
  Key with_hi(Key, int, int, int, int) const { return {}; }
  Key with_lo(Key, int, int, int, int) const { return {}; }
  MapKey map_key(Key, std::span<const int> lo, std::span<const int> hi) const {
    MapKey key(lo.begin(), lo.end());
    key.insert(key.end(), hi.begin(), hi.end());
    return key;
  }
  void decode(const MapKey& key, std::vector<int>& lo, std::vector<int>& hi) const {
    const size_t p = key.size() / 2;
    lo.assign(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(p));
    hi.assign(key.begin() + static_cast<std::ptrdiff_t>(p), key.end());
  }
};


// ------------------------------------------------------------ memo stores

template <typename MapKey, typename Hash>
class HashStore {
 public:
  static constexpr bool kBounded = true;

  std::optional<std::uint64_t> find(const MapKey& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void insert(const MapKey& key, std::uint64_t value) { map_.emplace(key, value); }
  std::uint64_t size() const { return map_.size(); }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [key, value] : map_) f(key, value);
  }

 private:
  absl::flat_hash_map<MapKey, std::uint64_t, Hash> map_;
};

// One slot per region of the universe, holding value + 1 (0 = unknown).
// The zeroed allocation is lazily backed, so only touched pages cost memory.
template <typename V>
class DenseStore {
 public:
  static constexpr bool kBounded = false;

  explicit DenseStore(std::uint64_t slots)
      : slots_(slots), data_(static_cast<V*>(std::calloc(slots, sizeof(V)))) {
    if (!data_) throw CapacityError("cannot allocate a dense memo of " + std::to_string(slots) +
                                    " regions");
  }
  std::optional<std::uint64_t> find(std::uint64_t key) const {
    const V v = data_.get()[key];
    if (v == 0) return std::nullopt;
    return static_cast<std::uint64_t>(v) - 1;
  }
  void insert(std::uint64_t key, std::uint64_t value) {
    V& slot = data_.get()[key];
    size_ += slot == 0;
    slot = static_cast<V>(value + 1);
  }
  std::uint64_t size() const { return size_; }
  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t k = 0; k < slots_; ++k)
      if (data_.get()[k] != 0) f(k, static_cast<std::uint64_t>(data_.get()[k]) - 1);
  }

 private:
  struct Free {
    void operator()(V* p) const { std::free(p); }
  };
  std::uint64_t slots_;
  std::unique_ptr<V, Free> data_;
  std::uint64_t size_ = 0;
};

}  // namespace

// ------------------------------------------------------------ engine

class BornAgainSolver::Engine {
 public:
  Engine(const CellClassifier& classifier, SolverOptions options)
      : classifier_(classifier), options_(options) {
    const SplitUniverse& u = classifier.universe();
    for (int j = 0; j < u.num_features(); ++j) level_sum_ += u.num_levels(j);
    if (options.objective == Objective::kDepthThenLeaves) {
      // M = #cells + 1 exceeds any split count; the largest encoded value
      // is M * (max depth + 1) + M.
      const auto cells = u.cell_count();
      const auto depth_bound = static_cast<std::uint64_t>(level_sum_) + 2;
      if (!cells || *cells + 1 > kInfinity / 2 / depth_bound)
        throw CapacityError("depth-then-leaves encoding does not fit 64 bits for this universe");
      dl_scale_ = *cells + 1;
    }
  }
  virtual ~Engine() = default;

  virtual std::uint64_t optimal_value(const Region& region) = 0;
  virtual BornAgainTree extract(const Region& region, std::uint64_t value) const = 0;
  virtual std::optional<std::uint64_t> memo_value(const Region& region) const = 0;
  virtual std::vector<std::pair<Region, std::uint64_t>> memo_entries() const = 0;

  std::uint64_t combine(std::uint64_t phi1, std::uint64_t phi2) const {
    switch (options_.objective) {
      case Objective::kDepth:
        return 1 + std::max(phi1, phi2);
      case Objective::kLeaves:
        return 1 + phi1 + phi2;
      case Objective::kDepthThenLeaves: {
        const std::uint64_t m = dl_scale_;
        const std::uint64_t depth = 1 + std::max(phi1 / m, phi2 / m);
        const std::uint64_t splits = 1 + phi1 % m + phi2 % m;
        return m * depth + splits;
      }
    }
    return kInfinity;
  }

  const CellClassifier& classifier_;
  SolverOptions options_;
  SolverStats stats_;
  std::uint64_t dl_scale_ = 0;
  int level_sum_ = 0;
};

namespace {

template <typename Codec, typename Store>
class EngineImpl final : public BornAgainSolver::Engine {
  using Key = typename Codec::Key;
  using MapKey = typename Codec::MapKey;

 public:
  template <typename... StoreArgs>
  EngineImpl(const CellClassifier& classifier, SolverOptions options, StoreArgs&&... store_args)
      : Engine(classifier, options),
        codec_(classifier.universe()),
        memo_(std::forward<StoreArgs>(store_args)...) {}

  std::uint64_t optimal_value(const Region& region) override {
    const SplitUniverse& u = classifier_.universe();
    if (!region_valid(region)) throw InputError("region is not valid for this universe");
    lo_ = region.lo.z;
    hi_ = region.hi.z;
    open_ = 0;
    for (int j = 0; j < u.num_features(); ++j) open_ += lo_[static_cast<size_t>(j)] < hi_[static_cast<size_t>(j)];
    std::uint64_t value = 0;
    run_deep(level_sum_, [&] {
      const Key key = codec_.make(lo_, hi_);
      switch (options_.objective) {
        case Objective::kDepth:
          value = options_.depth_search == DepthSearch::kBinary ? recurse<Mode::kDepthBinary>(key)
                                                                 : recurse<Mode::kDepthLinear>(key);
          break;
        case Objective::kLeaves:
          value = recurse<Mode::kLeaves>(key);
          break;
        case Objective::kDepthThenLeaves:
          value = recurse<Mode::kDepthThenLeaves>(key);
          break;
      }
    });
    stats_.memo_entries = memo_.size();
    return value;
  }

  BornAgainTree extract(const Region& region, std::uint64_t value) const override {
    if (!region_valid(region)) throw InputError("region is not valid for this universe");
    TreeBuilder builder;
    std::vector<int> lo = region.lo.z;
    std::vector<int> hi = region.hi.z;
    run_deep(level_sum_, [&] { build(builder, lo, hi, value); });
    return std::move(builder).finish();
  }

  std::optional<std::uint64_t> memo_value(const Region& region) const override {
    if (!region_valid(region)) return std::nullopt;
    return lookup(region.lo.z, region.hi.z);
  }

  std::vector<std::pair<Region, std::uint64_t>> memo_entries() const override {
    std::vector<std::pair<Region, std::uint64_t>> out;
    out.reserve(memo_.size());
    memo_.for_each([&](const MapKey& key, std::uint64_t value) {
      Region r;
      codec_.decode(key, r.lo.z, r.hi.z);
      out.emplace_back(std::move(r), value);
    });
    return out;
  }

 private:
  enum class Mode { kDepthBinary, kDepthLinear, kLeaves, kDepthThenLeaves };

  bool region_valid(const Region& region) const {
    const SplitUniverse& u = classifier_.universe();
    const auto p = static_cast<size_t>(u.num_features());
    if (region.lo.z.size() != p || region.hi.z.size() != p) return false;
    for (size_t j = 0; j < p; ++j) {
      if (region.lo.z[j] < 1 || region.lo.z[j] > region.hi.z[j] ||
          region.hi.z[j] > u.num_cells(static_cast<int>(j)))
        return false;
    }
    return true;
  }

  std::optional<std::uint64_t> lookup(std::span<const int> lo, std::span<const int> hi) const {
    if (std::equal(lo.begin(), lo.end(), hi.begin())) return 0;
    return memo_.find(codec_.map_key(codec_.make(lo, hi), lo, hi));
  }

  std::uint64_t store(const MapKey& key, std::uint64_t value) {
    if (Store::kBounded && memo_.size() >= options_.max_memo_entries) {
      stats_.memo_entries = memo_.size();
      throw CapacityError("memo limit of " + std::to_string(options_.max_memo_entries) +
                          " entries reached after " + std::to_string(stats_.recursions) +
                          " recursions (" + std::to_string(stats_.memo_hits) + " memo hits)");
    }
    memo_.insert(key, value);
    return value;
  }

  // Value of a region made of two single-split halves with zero cost each:
  // 0 when both corners agree (the region is homogeneous), one split
  // otherwise.
  std::uint64_t two_leaf_value() const {
    if (classifier_.classify(lo_) == classifier_.classify(hi_)) return 0;
    return options_.objective == Objective::kDepthThenLeaves ? dl_scale_ + 1 : 1;
  }

  template <Mode M>
  std::pair<std::uint64_t, std::uint64_t> children(Key key, int j, int l) {
    const auto f = static_cast<size_t>(j);
    const int lo = lo_[f];
    const int hi = hi_[f];

    hi_[f] = l;
    const bool left_closes = l == lo;
    open_ -= left_closes;
    const std::uint64_t phi1 = recurse<M>(codec_.with_hi(key, j, lo, hi, l));
    hi_[f] = hi;
    open_ += left_closes;

    lo_[f] = l + 1;
    const bool right_closes = l + 1 == hi;
    open_ -= right_closes;
    const std::uint64_t phi2 = recurse<M>(codec_.with_lo(key, j, lo, l + 1, hi));
    lo_[f] = lo;
    open_ += right_closes;
    return {phi1, phi2};
  }

  template <Mode M>
  std::uint64_t recurse(Key key) {
    if (open_ == 0) return 0;
    const MapKey map_key = codec_.map_key(key, lo_, hi_);
    if (const auto known = memo_.find(map_key)) {
      ++stats_.memo_hits;
      return *known;
    }
    ++stats_.recursions;

    std::uint64_t ub = kInfinity;
    std::uint64_t lb = 0;
    const int p = static_cast<int>(lo_.size());
    for (int j = 0; j < p && lb < ub; ++j) {
      const auto f = static_cast<size_t>(j);
      if constexpr (M == Mode::kDepthBinary) {
        int low = lo_[f];
        int up = hi_[f];
        while (low < up && lb < ub) {
          const int l = (low + up) / 2;
          const auto [phi1, phi2] = children<M>(key, j, l);
          if (phi1 == 0 && phi2 == 0) return store(map_key, two_leaf_value());
          ub = std::min(ub, 1 + std::max(phi1, phi2));
          lb = std::max(lb, std::max(phi1, phi2));
          if (phi1 >= phi2) up = l;
          if (phi1 <= phi2) low = l + 1;
        }
      } else {
        for (int l = lo_[f]; l < hi_[f] && lb < ub; ++l) {
          const auto [phi1, phi2] = children<M>(key, j, l);
          if (phi1 == 0 && phi2 == 0) return store(map_key, two_leaf_value());
          ub = std::min(ub, combine(phi1, phi2));
          lb = std::max(lb, std::max(phi1, phi2));
        }
      }
    }
    return store(map_key, ub);
  }

  int build(TreeBuilder& builder, std::vector<int>& lo, std::vector<int>& hi,
            std::uint64_t value) const {
    if (value == 0) return builder.add_leaf(classifier_.classify(lo));
    const SplitUniverse& u = classifier_.universe();
    for (size_t f = 0; f < lo.size(); ++f) {
      const int old_lo = lo[f];
      const int old_hi = hi[f];
      for (int l = old_lo; l < old_hi; ++l) {
        hi[f] = l;
        const auto phi1 = lookup(lo, hi);
        hi[f] = old_hi;
        if (!phi1) continue;
        lo[f] = l + 1;
        const auto phi2 = lookup(lo, hi);
        lo[f] = old_lo;
        if (!phi2 || combine(*phi1, *phi2) != value) continue;

        const int slot = builder.reserve();
        hi[f] = l;
        const int le = build(builder, lo, hi, *phi1);
        hi[f] = old_hi;
        lo[f] = l + 1;
        const int gt = build(builder, lo, hi, *phi2);
        lo[f] = old_lo;
        builder.set_split(slot, static_cast<int>(f), u.threshold(static_cast<int>(f), l), le, gt);
        return slot;
      }
    }
    throw InconsistencyError("no memoized split reproduces objective value " +
                             std::to_string(value));
  }

  Codec codec_;
  Store memo_;
  std::vector<int> lo_;
  std::vector<int> hi_;
  int open_ = 0;
};

template <typename V>
std::unique_ptr<BornAgainSolver::Engine> make_dense(const CellClassifier& classifier,
                                                    SolverOptions options, std::uint64_t slots) {
  return std::make_unique<EngineImpl<PackedCodec<std::uint64_t>, DenseStore<V>>>(
      classifier, options, slots);
}

std::unique_ptr<BornAgainSolver::Engine> make_engine(const CellClassifier& classifier,
                                                     SolverOptions options) {
  const BigCount regions = count_regions(classifier.universe());
  if (regions <= BigCount(std::numeric_limits<std::uint64_t>::max())) {
    const auto slots = static_cast<std::uint64_t>(regions);
    // Largest value the memo can hold, plus the "unknown" marker.
    const SplitUniverse& u = classifier.universe();
    int level_sum = 0;
    for (int j = 0; j < u.num_features(); ++j) level_sum += u.num_levels(j);
    const auto cells = u.cell_count().value_or(kInfinity);
    std::uint64_t top = kInfinity;
    if (options.objective == Objective::kDepth) top = static_cast<std::uint64_t>(level_sum) + 2;
    if (options.objective == Objective::kLeaves) top = cells;
    auto fits = [&](std::uint64_t width, std::uint64_t max) {
      return top < max && slots <= options.dense_memo_bytes / width;
    };
    if (fits(1, 0xFF)) return make_dense<std::uint8_t>(classifier, options, slots);
    if (fits(2, 0xFFFF)) return make_dense<std::uint16_t>(classifier, options, slots);
    if (fits(4, 0xFFFFFFFF)) return make_dense<std::uint32_t>(classifier, options, slots);
    using Codec = PackedCodec<std::uint64_t>;
    return std::make_unique<EngineImpl<Codec, HashStore<Codec::MapKey, Codec::Hash>>>(classifier,
                                                                                     options);
  }
  BigCount max128 = 1;
  max128 <<= 128;
  if (regions < max128) {
    using Codec = PackedCodec<unsigned __int128>;
    return std::make_unique<EngineImpl<Codec, HashStore<Codec::MapKey, Codec::Hash>>>(classifier,
                                                                                     options);
  }
  return std::make_unique<EngineImpl<WideCodec, HashStore<WideCodec::MapKey, WideCodec::Hash>>>(
      classifier, options);
}

}  // namespace

// ------------------------------------------------------------ public API

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::kDepth:
      return "D";
    case Objective::kLeaves:
      return "L";
    case Objective::kDepthThenLeaves:
      return "DL";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view name) {
  if (name == "D") return Objective::kDepth;
  if (name == "L") return Objective::kLeaves;
  if (name == "DL") return Objective::kDepthThenLeaves;
  return std::nullopt;
}

TreeSize decode_depth_then_splits(std::uint64_t value, std::uint64_t scale) {
  return {static_cast<int>(value / scale), value % scale};
}

BornAgainSolver::BornAgainSolver(const CellClassifier& classifier, SolverOptions options)
    : engine_(make_engine(classifier, options)) {}
BornAgainSolver::~BornAgainSolver() = default;
BornAgainSolver::BornAgainSolver(BornAgainSolver&&) noexcept = default;
BornAgainSolver& BornAgainSolver::operator=(BornAgainSolver&&) noexcept = default;

std::uint64_t BornAgainSolver::optimal_value(const Region& region) {
  return engine_->optimal_value(region);
}
BornAgainTree BornAgainSolver::extract_optimal_tree(const Region& region,
                                                    std::uint64_t value) const {
  return engine_->extract(region, value);
}
std::optional<std::uint64_t> BornAgainSolver::memo_value(const Region& region) const {
  return engine_->memo_value(region);
}
std::vector<std::pair<Region, std::uint64_t>> BornAgainSolver::memo_entries() const {
  return engine_->memo_entries();
}
std::uint64_t BornAgainSolver::dl_scale() const { return engine_->dl_scale_; }
Objective BornAgainSolver::objective() const { return engine_->options_.objective; }
const SolverStats& BornAgainSolver::stats() const { return engine_->stats_; }
const CellClassifier& BornAgainSolver::classifier() const { return engine_->classifier_; }

std::uint64_t born_again_depth(const CellClassifier& classifier, const Region& region) {
  return BornAgainSolver(classifier, {Objective::kDepth}).optimal_value(region);
}
std::uint64_t born_again_splits(const CellClassifier& classifier, const Region& region) {
  return BornAgainSolver(classifier, {Objective::kLeaves}).optimal_value(region);
}
std::uint64_t born_again_depth_then_splits(const CellClassifier& classifier,
                                           const Region& region) {
  return BornAgainSolver(classifier, {Objective::kDepthThenLeaves}).optimal_value(region);
}

SolveResult solve(const Ensemble& ensemble, const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  SplitUniverse universe = extract_split_levels(ensemble);
  SplitUniverse solve_universe = universe;
  bool skipped = false;
  int removed = 0;
  if (config.filter_hyperplanes) {
    FilterResult filtered = filter_redundant_hyperplanes(ensemble, universe, config.filter_cell_cap);
    solve_universe = std::move(filtered.universe);
    skipped = filtered.skipped;
    removed = filtered.removed_levels;
  }

  const CellClassifier classifier(ensemble, solve_universe, config.table_cell_cap);
  BornAgainSolver solver(classifier,
                         {config.objective, config.depth_search, config.max_memo_entries,
                          config.dense_memo_bytes});
  const Region region = full_region(solve_universe);
  const std::uint64_t value = solver.optimal_value(region);
  BornAgainTree tree = solver.extract_optimal_tree(region, value);

  SolveResult result{std::move(tree), value, std::move(universe), std::move(solve_universe),
                     skipped, removed, std::nullopt, solver.stats()};
  result.stats.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const auto cells = result.universe.cell_count();
  const bool check =
      config.self_check.value_or(cells.has_value() && *cells <= config.self_check_cell_cap);
  if (check) {
    const auto report = verify_faithfulness(result.tree, ensemble, result.universe,
                                            cells.value_or(kInfinity));
    result.faithful = report.faithful;
  }
  return result;
}

}  // namespace bornagain
