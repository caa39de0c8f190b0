#pragma once

#include <memory>
#include <vector>

#include "hcsim/engine/core.hpp"
#include "hcsim/engine/simulator.hpp"
#include "hcsim/topology.hpp"

namespace hcsim::engine {

/// A hypercube of cores sharing one simulator.
class Machine {
 public:
  Machine(Hypercube topology, CoreConfig core_config = {});
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  Simulator& sim() { return sim_; }
  const Simulator& sim() const { return sim_; }
  const Hypercube& topology() const { return topology_; }

  Core& core(NodeId id);
  const Core& core(NodeId id) const;
  std::size_t core_count() const { return cores_.size(); }

 private:
  Hypercube topology_;
  std::vector<std::unique_ptr<Core>> cores_;
  // Declared last: suspended processes are torn down before the cores they
  // reference.
  Simulator sim_;
};

}  // namespace hcsim::engine
