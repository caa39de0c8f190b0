#include "hcsim/engine/machine.hpp"

#include "hcsim/error.hpp"

namespace hcsim::engine {

Machine::Machine(Hypercube topology, CoreConfig core_config)
    : topology_(std::move(topology)) {
  cores_.reserve(topology_.node_count());
  for (std::uint32_t i = 0; i < topology_.node_count(); ++i) {
    cores_.push_back(std::make_unique<Core>(NodeId{i}, core_config));
  }
}

Core& Machine::core(NodeId id) {
  if (!topology_.contains(id)) {
    throw DomainError("no core " + std::to_string(id.label));
  }
  return *cores_[id.label];
}

const Core& Machine::core(NodeId id) const {
  if (!topology_.contains(id)) {
    throw DomainError("no core " + std::to_string(id.label));
  }
  return *cores_[id.label];
}

}  // namespace hcsim::engine
