#include "hcsim/topology.hpp"

#include <algorithm>
#include <bit>

#include "hcsim/error.hpp"

namespace hcsim {

std::string to_string(LinkClass c) {
  return c == LinkClass::OnChip ? "on-chip" : "off-chip";
}

Hypercube::Hypercube(unsigned dimension)
    : Hypercube(dimension, default_chip_dims(dimension)) {}

Hypercube::Hypercube(unsigned dimension, std::vector<unsigned> chip_dims,
                     double on_chip_multiplier)
    : dimension_(dimension),
      chip_dims_(std::move(chip_dims)),
      on_chip_multiplier_(on_chip_multiplier) {
  if (dimension_ > kMaxDimension) {
    throw ConfigError("hypercube dimension " + std::to_string(dimension_) +
                      " exceeds maximum " + std::to_string(kMaxDimension));
  }
  for (unsigned bit : chip_dims_) {
    if (bit >= dimension_) {
      throw ConfigError("chip dimension " + std::to_string(bit) +
                        " out of range for d=" + std::to_string(dimension_));
    }
  }
  if (!(on_chip_multiplier_ > 0.0)) {
    throw ConfigError("on-chip multiplier must be positive");
  }
  std::sort(chip_dims_.begin(), chip_dims_.end());
  chip_dims_.erase(std::unique(chip_dims_.begin(), chip_dims_.end()),
                   chip_dims_.end());
}

std::vector<unsigned> Hypercube::default_chip_dims(unsigned dimension) {
  std::vector<unsigned> dims;
  for (unsigned k = dimension >= 2 ? dimension - 2 : 0; k < dimension; ++k) {
    dims.push_back(k);
  }
  return dims;
}

std::uint64_t Hypercube::edge_count() const {
  if (dimension_ == 0) return 0;
  return std::uint64_t{dimension_} << (dimension_ - 1);
}

void Hypercube::check(NodeId n) const {
  if (!contains(n)) {
    throw DomainError("node label " + std::to_string(n.label) +
                      " out of range for d=" + std::to_string(dimension_));
  }
}

bool Hypercube::is_chip_dim(unsigned bit) const {
  return std::binary_search(chip_dims_.begin(), chip_dims_.end(), bit);
}

bool Hypercube::adjacent(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return std::has_single_bit(a.label ^ b.label);
}

unsigned Hypercube::hop_distance(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return static_cast<unsigned>(std::popcount(a.label ^ b.label));
}

unsigned Hypercube::degree(NodeId n) const {
  check(n);
  return dimension_;
}

std::vector<NodeId> Hypercube::neighbours(NodeId n) const {
  check(n);
  std::vector<NodeId> out;
  out.reserve(dimension_);
  for (unsigned k = 0; k < dimension_; ++k) {
    out.emplace_back(n.label ^ (std::uint32_t{1} << k));
  }
  return out;
}

LinkClass Hypercube::link_class(NodeId a, NodeId b) const {
  if (!adjacent(a, b)) {
    throw DomainError("nodes " + std::to_string(a.label) + " and " +
                      std::to_string(b.label) + " are not adjacent");
  }
  auto bit = static_cast<unsigned>(std::countr_zero(a.label ^ b.label));
  return is_chip_dim(bit) ? LinkClass::OnChip : LinkClass::OffChip;
}

double Hypercube::multiplier(LinkClass c) const {
  return c == LinkClass::OnChip ? on_chip_multiplier_ : 1.0;
}

double Hypercube::path_multiplier(NodeId a, NodeId b) const {
  check(a);
  check(b);
  double total = 0.0;
  std::uint32_t diff = a.label ^ b.label;
  while (diff != 0) {
    auto bit = static_cast<unsigned>(std::countr_zero(diff));
    total += is_chip_dim(bit) ? on_chip_multiplier_ : 1.0;
    diff &= diff - 1;
  }
  return total;
}

}  // namespace hcsim
