#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hcsim {

/// Label of a node in a hypercube: a d-bit identifier.
struct NodeId {
  std::uint32_t label = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t l) : label(l) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class LinkClass { OnChip, OffChip };

std::string to_string(LinkClass c);

/// d-dimensional hypercube with a configurable on-chip / off-chip split of
/// its dimensions.
///
/// Two nodes are adjacent iff their labels differ in exactly one bit. A link
/// flipping bit k is on-chip iff k is one of the chip dimensions; on-chip
/// links carry a latency multiplier relative to an off-chip hop (1.0).
class Hypercube {
 public:
  static constexpr double kDefaultOnChipMultiplier = 0.8;
  static constexpr unsigned kMaxDimension = 20;

  /// Uses the default chip mapping: the two most significant dimensions.
  explicit Hypercube(unsigned dimension);
  Hypercube(unsigned dimension, std::vector<unsigned> chip_dims,
            double on_chip_multiplier = kDefaultOnChipMultiplier);

  /// The two most significant dimensions (fewer when d < 2).
  static std::vector<unsigned> default_chip_dims(unsigned dimension);

  unsigned dimension() const { return dimension_; }
  std::uint32_t node_count() const { return std::uint32_t{1} << dimension_; }
  std::uint64_t edge_count() const;
  const std::vector<unsigned>& chip_dims() const { return chip_dims_; }

  bool contains(NodeId n) const { return n.label < node_count(); }

  bool adjacent(NodeId a, NodeId b) const;
  unsigned hop_distance(NodeId a, NodeId b) const;
  unsigned degree(NodeId n) const;
  std::vector<NodeId> neighbours(NodeId n) const;

  /// Requires adjacent(a, b).
  LinkClass link_class(NodeId a, NodeId b) const;
  double multiplier(LinkClass c) const;

  /// Sum of link multipliers along the dimension-ordered (lowest bit first)
  /// route from a to b. Zero for a == b.
  double path_multiplier(NodeId a, NodeId b) const;

 private:
  void check(NodeId n) const;
  bool is_chip_dim(unsigned bit) const;

  unsigned dimension_;
  std::vector<unsigned> chip_dims_;
  double on_chip_multiplier_;
};

}  // namespace hcsim
